"""Training objective: reconstruction error of the optimal digital precoder.

For a fixed analog beamformer the best linear digital precoder is known in
closed form, so the digital stage can be eliminated from the objective
entirely.  What remains is a trace expression in the analog beamformer and
the channel alone; minimizing it steers the network toward beam choices that
keep the effective multiuser channel well conditioned.
"""

from __future__ import annotations

import torch


def variant_mse_loss(
    h: torch.Tensor, f_rf: torch.Tensor, p_t: float, noise_var: float
) -> torch.Tensor:
    """Per-sample loss tr((I_K + p_t/(K s2) H^H F (F^H F)^-1 F^H H)^-1).

    Shapes: ``h`` (B, N, K), ``f_rf`` (B, N, n_sub); returns real (B,).
    The Gram inverse stays in place because relaxed (convex-combination)
    beams are not unit norm, unlike hard codebook picks.
    """
    k = h.shape[-1]
    gram = f_rf.mH @ f_rf
    b = h.mH @ f_rf  # (B, K, n_sub)
    x = torch.linalg.solve(gram, b.mH)
    eye = torch.eye(k, dtype=h.dtype, device=h.device).expand(h.shape[0], k, k)
    m = eye + (p_t / (k * noise_var)) * (b @ x)
    inv = torch.linalg.solve(m, eye)
    return inv.diagonal(dim1=-2, dim2=-1).sum(-1).real
