"""Learned multiuser beam training for sub-connected arrays.

The network maps a handful of uplink pilot measurements straight to
per-subarray analog beam indices: a learned (bias-free) sensing front-end,
a shared complex-valued encoder, a Transformer across users, and a
Gumbel-Softmax head that keeps discrete beam selection differentiable
during training.
"""

from dliabt.config import NetworkConfig
from dliabt.layers import ComplexBatchNorm, ComplexLinear, SensingFrontEnd, complex_relu
from dliabt.loss import variant_mse_loss
from dliabt.network import BeamPredictor
from dliabt.selection import assemble_block_diag, codebook_beams, gumbel_select
from dliabt.train import TrainingArtifacts, train
from dliabt.infer import infer_indices

__version__ = "0.1.0"
