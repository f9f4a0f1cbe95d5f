"""Link-level simulator and beam-training toolkit for multiuser sub-connected XL-MIMO.

Subpackages cover the spherical-wave channel model, the per-subarray
far-field codebook, closed-form MMSE hybrid precoding, classical
beam-search baselines, uplink pilot sensing, and the Monte Carlo sweep
harness with pilot-overhead accounting.
"""

from xlsim.channel import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    ChannelPath,
    ChannelRealization,
    ScenarioConfig,
    array_response,
    element_distances,
    generate_channel,
    max_phase_error,
    sample_scenario,
    subarray_approximation,
)
from xlsim.codebook import Codebook, build_codebook, steering_vector
from xlsim.precoding import (
    BeamSelection,
    DegenerateChannelError,
    HybridPrecoder,
    LinkBudget,
    assemble_analog,
    mmse_digital,
    reconstruction_mse,
    sum_rate,
    variant_mse_loss,
)
from xlsim.sensing import (
    CombinerFormatError,
    SensingConfig,
    load_learned_combiner,
    measure_uplink,
    random_combiner,
    write_combiner,
)
from xlsim.search import (
    EnumerationCapError,
    SearchResult,
    alternating_optimization,
    exhaustive_oracle,
    greedy_per_subarray,
    noisy_csi,
    radix4_hierarchical,
    random_selection,
)
from xlsim.harness import (
    DatasetFormatError,
    OverheadModel,
    SweepSpec,
    TrialResult,
    effective_rate,
    evaluate_dataset,
    export_dataset,
    export_results,
    import_dataset,
    run_trial,
    sweep,
    validate_beams,
)

__version__ = "0.1.0"
