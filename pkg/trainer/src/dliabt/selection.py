"""Differentiable beam selection: codebook, Gumbel-Softmax, block assembly."""

from __future__ import annotations

import torch


def codebook_beams(n_q: int, n_a: int, dtype=torch.complex64) -> torch.Tensor:
    """Far-field codebook on the uniform sine grid, shape (n_q, n_a).

    Beam i (0-based row) is the unit-norm steering vector at
    sin(theta) = -1 + 2 (i + 1) / n_q, matching the simulator's grid.
    """
    grid = -1.0 + 2.0 * torch.arange(1, n_q + 1, dtype=torch.float64) / n_q
    k = torch.arange(n_a, dtype=torch.float64)
    phase = torch.pi * k[None, :] * grid[:, None]
    beams = torch.exp(1j * phase) / n_a**0.5
    return beams.to(dtype)


def sample_gumbel(shape, generator: torch.Generator | None = None, dtype=torch.float32) -> torch.Tensor:
    u = torch.rand(shape, generator=generator, dtype=dtype)
    tiny = torch.finfo(dtype).tiny
    neg_log_u = -torch.log(u.clamp_min(tiny))
    return -torch.log(neg_log_u.clamp_min(tiny))


def gumbel_select(
    logits: torch.Tensor,
    temperature: float,
    beams: torch.Tensor,
    mode: str = "train",
    generator: torch.Generator | None = None,
    gumbel_noise: torch.Tensor | None = None,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Relaxed (train) or hard (eval) beam selection from per-subarray logits.

    Parameters
    ----------
    logits : (..., n_q) real tensor.
    temperature : softmax temperature; must be positive in train mode.
    beams : (n_q, n_a) complex codebook.
    mode : "train" returns (probabilities, convex-combination beams);
        "eval" returns (argmax indices, hard codebook beams).
    gumbel_noise : optional explicit noise (for gradient checks); drawn from
        ``generator`` when omitted.  Pass a zero tensor for noise-free
        relaxation.
    """
    if mode == "eval":
        indices = logits.argmax(dim=-1)
        return indices, beams[indices]
    if mode != "train":
        raise ValueError(f"unknown mode {mode!r}")
    if temperature <= 0:
        raise ValueError("temperature must be positive in train mode")
    if gumbel_noise is None:
        gumbel_noise = sample_gumbel(logits.shape, generator=generator, dtype=logits.dtype)
    probs = torch.softmax((logits + gumbel_noise) / temperature, dim=-1)
    soft_beams = (probs.to(beams.dtype)) @ beams
    return probs, soft_beams


def assemble_block_diag(beams: torch.Tensor) -> torch.Tensor:
    """Stack per-subarray beams (B, n_sub, n_a) into block-diagonal (B, N, n_sub)."""
    b, n_sub, n_a = beams.shape
    f_rf = beams.new_zeros((b, n_sub * n_a, n_sub))
    for n in range(n_sub):
        f_rf[:, n * n_a : (n + 1) * n_a, n] = beams[:, n]
    return f_rf
