"""Inference from stacked uplink measurements."""

from __future__ import annotations

import torch

from dliabt.network import BeamPredictor
from dliabt.selection import gumbel_select


def measurements_to_user_major(y_ul: torch.Tensor, m_slots: int) -> torch.Tensor:
    """Reshape stacked measurements (MK, K) or (B, MK, K) to (B, K, M, K).

    Row m*K + j of the stacked matrix is slot m, pilot stream j; column k is
    user k.  The user axis becomes the leading token axis.
    """
    if y_ul.dim() == 2:
        y_ul = y_ul.unsqueeze(0)
    b, rows, k_users = y_ul.shape
    if rows % m_slots != 0:
        raise ValueError(f"{rows} measurement rows not divisible by {m_slots} slots")
    k_streams = rows // m_slots
    return y_ul.reshape(b, m_slots, k_streams, k_users).permute(0, 3, 1, 2)


@torch.no_grad()
def infer_indices(model: BeamPredictor, y_ul: torch.Tensor) -> torch.Tensor:
    """Deterministic 0-based beam indices (B, n_sub) from measurements."""
    model.eval()
    y = measurements_to_user_major(y_ul.to(torch.complex64), model.config.m_slots)
    expected_streams = model.config.k_users
    if y.shape[1] != expected_streams or y.shape[3] != expected_streams:
        raise ValueError(
            f"measurement shape {tuple(y_ul.shape)} inconsistent with K={expected_streams}, "
            f"M={model.config.m_slots}"
        )
    logits = model.logits_from_measurements(y)
    indices, _ = gumbel_select(logits, 1.0, model.beams, mode="eval")
    return indices
