"""Monte Carlo orchestration: trials, sweeps, overhead accounting, file formats.

``sweep`` drives any registered beam-selection method over an SNR or
codebook-size grid, pairing every method with the same channel draws per
trial.  Rates are reported both raw and discounted by the fraction of the
coherence interval spent on pilots.  Channel datasets and per-sample beam
tables use simple text-header + binary / CSV formats so other tools (e.g. a
neural trainer) can exchange data with the simulator.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from xlsim.channel import ScenarioConfig, sample_scenario
from xlsim.codebook import Codebook, build_codebook
from xlsim.precoding import (
    BeamSelection,
    LinkBudget,
    assemble_analog,
    mmse_digital,
    sum_rate,
    variant_mse_loss,
)
from xlsim.search import (
    SearchResult,
    alternating_optimization,
    exhaustive_oracle,
    greedy_per_subarray,
    noisy_csi,
    radix4_hierarchical,
    random_selection,
)

DATASET_FORMAT_VERSION = 1

RESULT_COLUMNS = (
    "axis_value",
    "method",
    "mean_sum_rate",
    "se_sum_rate",
    "mean_eff_rate",
    "se_eff_rate",
    "pilot_count",
    "trials",
)

SAMPLE_COLUMNS = ("sample_id", "loss", "sum_rate", "pilot_count", "effective_rate")


class DatasetFormatError(ValueError):
    """Channel dataset or beam file failed validation."""


@dataclass(frozen=True)
class OverheadModel:
    """Coherence time and per-pilot slot duration for effective-rate accounting."""

    coherence_time_s: float
    pilot_slot_s: float

    def __post_init__(self):
        if self.coherence_time_s <= 0 or self.pilot_slot_s <= 0:
            raise ValueError("coherence_time_s and pilot_slot_s must be positive")
        if self.pilot_slot_s >= self.coherence_time_s:
            raise ValueError("pilot_slot_s must be smaller than coherence_time_s")


@dataclass(frozen=True)
class TrialResult:
    """Per-draw outcome for one method."""

    method: str
    loss: float
    sum_rate: float
    pilot_count: int
    effective_rate: float
    seed: int


@dataclass(frozen=True)
class SweepSpec:
    """Grid definition for a Monte Carlo sweep.

    ``axis`` selects what the grid varies: operating SNR in dB or the
    codebook size.  The non-swept quantity is pinned by ``snr_db`` / ``n_q``.
    """

    axis: str
    grid: tuple
    methods: tuple[str, ...]
    trials: int
    scenario: ScenarioConfig
    n_q: int = 32
    snr_db: float = 10.0
    p_t: float = 1.0

    def __post_init__(self):
        if self.axis not in ("snr_db", "codebook_size"):
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if len(self.grid) == 0 or len(self.methods) == 0:
            raise ValueError("grid and methods must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; known: {sorted(METHODS)}")


def effective_rate(r_sum: float, pilot_count: int, overhead: OverheadModel) -> float:
    """Sum rate discounted by pilot overhead: max(0, 1 - M t / T_c) * R_sum."""
    if r_sum < 0 or pilot_count < 0:
        raise ValueError("r_sum and pilot_count must be nonnegative")
    fraction = 1.0 - pilot_count * overhead.pilot_slot_s / overhead.coherence_time_s
    return max(0.0, fraction) * r_sum


# --- method registry -------------------------------------------------------
#
# Each entry maps a public method name to a callable
#   (h, codebook, link, seed) -> SearchResult
# The integer is a per-method salt so method-internal randomness is decoupled
# from the channel draw and from other methods.


def _run_exhaustive(h, codebook, link, seed):
    return exhaustive_oracle(h, codebook, h.shape[0] // codebook.n_a, link, objective="min_loss")


def _run_exhaustive_rate(h, codebook, link, seed):
    return exhaustive_oracle(h, codebook, h.shape[0] // codebook.n_a, link, objective="max_rate")


def _run_greedy(h, codebook, link, seed):
    return greedy_per_subarray(h, codebook, link)


def _run_radix4(h, codebook, link, seed):
    return radix4_hierarchical(h, codebook, link)


def _run_ao_pcsi(h, codebook, link, seed):
    return alternating_optimization(h, codebook, link)


def _run_ao_ncsi(h, codebook, link, seed):
    # Estimation SNR defaults to the operating SNR.
    h_est = noisy_csi(h, link.p_t / link.noise_var, seed)
    result = alternating_optimization(h_est, codebook, link)
    # Precoder must be recomputed on the true channel by the caller.
    return result


def _run_random(h, codebook, link, seed):
    return random_selection(h.shape[0] // codebook.n_a, codebook.n_q, seed)


METHODS = {
    "exhaustive": (_run_exhaustive, 1),
    "exhaustive-rate": (_run_exhaustive_rate, 2),
    "greedy": (_run_greedy, 3),
    "radix4": (_run_radix4, 4),
    "ao-pcsi": (_run_ao_pcsi, 5),
    "ao-ncsi": (_run_ao_ncsi, 6),
    "random": (_run_random, 7),
}


def _score_selection(
    h: np.ndarray,
    selection: BeamSelection,
    codebook: Codebook,
    link: LinkBudget,
    pilot_count: int,
    overhead: OverheadModel,
    method: str,
    seed: int,
) -> TrialResult:
    """Loss, rate and effective rate of a selection on the true channel."""
    f_rf = assemble_analog(selection, codebook)
    loss = variant_mse_loss(f_rf, h, link)
    f_bb, _ = mmse_digital(f_rf, h, link)
    r_sum = sum_rate(h, f_rf, f_bb, link.noise_var)
    return TrialResult(
        method=method,
        loss=loss,
        sum_rate=r_sum,
        pilot_count=pilot_count,
        effective_rate=effective_rate(r_sum, pilot_count, overhead),
        seed=seed,
    )


def run_method_on_channel(
    h: np.ndarray,
    method: str,
    codebook: Codebook,
    link: LinkBudget,
    overhead: OverheadModel,
    seed: int,
) -> tuple[TrialResult, SearchResult]:
    """Run one registered method on a given channel matrix.

    The reported precoder, loss and rates are always evaluated on the true
    channel ``h`` even when the method itself searched on a degraded estimate.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; known: {sorted(METHODS)}")
    fn, salt = METHODS[method]
    method_seed = int(np.random.SeedSequence([seed, salt]).generate_state(1)[0])
    search = fn(h, codebook, link, method_seed)
    trial = _score_selection(h, search.selection, codebook, link, search.pilot_count, overhead, method, seed)
    return trial, search


def run_trial(
    scenario: ScenarioConfig,
    method: str,
    link: LinkBudget,
    overhead: OverheadModel,
    seed: int,
    trial: int = 0,
    n_q: int = 32,
) -> TrialResult:
    """Draw a channel and run one method on it; deterministic per (seed, trial)."""
    realization = sample_scenario(scenario, seed, trial)
    codebook = build_codebook(n_q, scenario.n_a)
    trial_seed = int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])
    result, _ = run_method_on_channel(realization.h, method, codebook, link, overhead, trial_seed)
    return result


def _sweep_point(args) -> list[dict]:
    spec, overhead, seed, value = args
    if spec.axis == "snr_db":
        link = LinkBudget.from_snr_db(value, p_t=spec.p_t)
        n_q = spec.n_q
    else:
        link = LinkBudget.from_snr_db(spec.snr_db, p_t=spec.p_t)
        n_q = int(value)
    codebook = build_codebook(n_q, spec.scenario.n_a)
    per_method: dict[str, list[TrialResult]] = {m: [] for m in spec.methods}
    for t in range(spec.trials):
        realization = sample_scenario(spec.scenario, seed, t)
        trial_seed = int(np.random.SeedSequence([seed, t]).generate_state(1)[0])
        for m in spec.methods:
            result, _ = run_method_on_channel(realization.h, m, codebook, link, overhead, trial_seed)
            per_method[m].append(result)
    rows = []
    for m in spec.methods:
        results = per_method[m]
        rates = np.array([r.sum_rate for r in results])
        eff = np.array([r.effective_rate for r in results])
        rows.append(
            {
                "axis_value": value,
                "method": m,
                "mean_sum_rate": float(rates.mean()),
                "se_sum_rate": _standard_error(rates),
                "mean_eff_rate": float(eff.mean()),
                "se_eff_rate": _standard_error(eff),
                "pilot_count": results[0].pilot_count,
                "trials": len(results),
            }
        )
    return rows


def _standard_error(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(len(values)))


def sweep(spec: SweepSpec, overhead: OverheadModel, seed: int, workers: int = 1) -> list[dict]:
    """Mean and standard error of raw and effective rates per (grid point, method).

    Channel draws are shared across methods at each trial so comparisons are
    paired.  Identical (spec, seed) produce identical tables for any worker
    count: per-trial seeds are keyed, and rows aggregate in grid order.
    """
    tasks = [(spec, overhead, seed, value) for value in spec.grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_point, tasks))
    else:
        chunks = [_sweep_point(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


# --- result tables ---------------------------------------------------------


def export_results(rows: list[dict], path, fmt: str = "csv", fieldnames: tuple[str, ...] | None = None) -> None:
    """Write a result table as RFC-4180-style CSV or JSON lines.

    An empty table still produces a CSV header row (using ``fieldnames``,
    defaulting to the sweep schema).
    """
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown format {fmt!r}")
    if fieldnames is None:
        fieldnames = tuple(rows[0].keys()) if rows else RESULT_COLUMNS
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fieldnames)
            writer.writeheader()
            writer.writerows(rows)
    else:
        with open(path, "w") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")


def import_results(path, fmt: str | None = None) -> list[dict]:
    """Read a result table written by :func:`export_results`.

    ``fmt`` defaults to the file extension.  CSV cells are parsed back to
    int/float where possible so a CSV -> JSONL round trip preserves values.
    """
    fmt = fmt or ("jsonl" if str(path).endswith(".jsonl") else "csv")
    if fmt == "jsonl":
        with open(path) as fh:
            return [json.loads(line) for line in fh if line.strip()]
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [{k: _parse_cell(v) for k, v in row.items()} for row in reader]


def _parse_cell(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


# --- channel dataset interchange -------------------------------------------


def export_dataset(config: ScenarioConfig, count: int, seed: int, path) -> None:
    """Write ``count`` channel draws as float32 interleaved binary with a JSON header.

    Sample i is the deterministic realization ``sample_scenario(config, seed, i)``;
    payload layout is row-major over [sample][antenna][user] with (re, im)
    float32 pairs.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    n = config.n_sub * config.n_a
    header = {
        "n_sub": config.n_sub,
        "n_a": config.n_a,
        "k": config.n_users,
        "l": config.n_paths,
        "count": count,
        "seed": seed,
        "carrier_hz": config.carrier_hz,
        "version": DATASET_FORMAT_VERSION,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("ascii"))
        fh.write(b"\n")
        buf = np.empty((n, config.n_users, 2), dtype="<f4")
        for i in range(count):
            h = sample_scenario(config, seed, i).h
            buf[..., 0] = h.real
            buf[..., 1] = h.imag
            fh.write(buf.tobytes())


def import_dataset(path) -> tuple[dict, np.ndarray]:
    """Read a channel dataset; returns (header, channels of shape (count, N, K)).

    Channels come back as complex128 built from the stored float32 values, so
    an export/import round trip is bit-stable.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    newline = blob.find(b"\n")
    if newline < 0:
        raise DatasetFormatError("missing header/payload separator")
    try:
        header = json.loads(blob[:newline].decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DatasetFormatError(f"unparseable header: {exc}") from exc
    for key in ("n_sub", "n_a", "k", "l", "count", "seed", "carrier_hz", "version"):
        if key not in header:
            raise DatasetFormatError(f"header missing field {key!r}")
    if header["version"] != DATASET_FORMAT_VERSION:
        raise DatasetFormatError(f"unsupported version {header['version']}")
    n = int(header["n_sub"]) * int(header["n_a"])
    k = int(header["k"])
    count = int(header["count"])
    payload = blob[newline + 1 :]
    expected = 2 * 4 * count * n * k
    if len(payload) != expected:
        raise DatasetFormatError(f"payload is {len(payload)} bytes, expected {expected}")
    flat = np.frombuffer(payload, dtype="<f4").reshape(count, n, k, 2)
    channels = flat[..., 0].astype(np.float64) + 1j * flat[..., 1].astype(np.float64)
    channels.setflags(write=False)
    return header, channels


# --- beam files and dataset evaluation --------------------------------------


def write_beams(rows: list[tuple[int, tuple[int, ...]]], n_sub: int, path) -> None:
    """Write a beam-index table: header ``sample_id,i_1,...,i_n`` then one row per sample."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id"] + [f"i_{n + 1}" for n in range(n_sub)])
        for sample_id, indices in rows:
            writer.writerow([sample_id] + list(indices))


def read_beams(path, n_sub: int) -> list[tuple[int, tuple[int, ...]]]:
    """Parse a beam-index CSV, reporting the first malformed row by line number."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError("beam file is empty") from None
        expected_header = ["sample_id"] + [f"i_{n + 1}" for n in range(n_sub)]
        if header != expected_header:
            raise DatasetFormatError(f"beam file header {header} != {expected_header}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n_sub + 1:
                raise DatasetFormatError(f"line {line_no}: expected {n_sub + 1} fields, got {len(row)}")
            try:
                sample_id = int(row[0])
                indices = tuple(int(x) for x in row[1:])
            except ValueError as exc:
                raise DatasetFormatError(f"line {line_no}: non-integer field ({exc})") from exc
            rows.append((sample_id, indices))
    return rows


def validate_beams(
    dataset_path,
    beam_path,
    link: LinkBudget,
    overhead: OverheadModel,
    n_q: int,
    pilot_count: int = 0,
) -> tuple[list[dict], dict]:
    """Score an externally produced beam table against a channel dataset.

    For every beam row, assembles the analog beamformer from the listed
    indices, computes the MMSE digital precoder on that sample's channel and
    reports loss, sum rate and effective rate (using ``pilot_count`` slots of
    overhead, e.g. the number of sensing slots the producer consumed).

    Returns (per-sample rows, aggregate summary).
    """
    header, channels = import_dataset(dataset_path)
    n_sub = int(header["n_sub"])
    codebook = build_codebook(n_q, int(header["n_a"]))
    beam_rows = read_beams(beam_path, n_sub)
    rows = []
    for sample_id, indices in beam_rows:
        if not 0 <= sample_id < len(channels):
            raise DatasetFormatError(f"unknown sample id {sample_id}")
        for idx in indices:
            if not 1 <= idx <= n_q:
                raise DatasetFormatError(f"sample {sample_id}: beam index {idx} outside [1, {n_q}]")
        h = channels[sample_id]
        result = _score_selection(
            h, BeamSelection(indices), codebook, link, pilot_count, overhead, "beam-file", sample_id
        )
        rows.append(
            {
                "sample_id": sample_id,
                "loss": result.loss,
                "sum_rate": result.sum_rate,
                "pilot_count": pilot_count,
                "effective_rate": result.effective_rate,
            }
        )
    return rows, _summarize_samples(rows)


def evaluate_dataset(
    dataset_path,
    method: str,
    link: LinkBudget,
    overhead: OverheadModel,
    n_q: int,
    seed: int = 0,
) -> tuple[list[dict], dict]:
    """Run a registered method on every sample of a stored dataset.

    Same per-sample schema as :func:`validate_beams`, which makes oracle
    baselines directly comparable to externally produced beam tables.
    """
    header, channels = import_dataset(dataset_path)
    codebook = build_codebook(n_q, int(header["n_a"]))
    rows = []
    for sample_id, h in enumerate(channels):
        trial_seed = int(np.random.SeedSequence([seed, sample_id]).generate_state(1)[0])
        result, _ = run_method_on_channel(h, method, codebook, link, overhead, trial_seed)
        rows.append(
            {
                "sample_id": sample_id,
                "loss": result.loss,
                "sum_rate": result.sum_rate,
                "pilot_count": result.pilot_count,
                "effective_rate": result.effective_rate,
            }
        )
    return rows, _summarize_samples(rows)


def _summarize_samples(rows: list[dict]) -> dict:
    if not rows:
        return {"count": 0}
    rates = np.array([r["sum_rate"] for r in rows])
    eff = np.array([r["effective_rate"] for r in rows])
    losses = np.array([r["loss"] for r in rows])
    return {
        "count": len(rows),
        "mean_loss": float(losses.mean()),
        "mean_sum_rate": float(rates.mean()),
        "se_sum_rate": _standard_error(rates),
        "mean_eff_rate": float(eff.mean()),
        "se_eff_rate": _standard_error(eff),
    }
