"""Far-field beam codebook on the uniform spatial-frequency grid.

One flat codebook serves every subarray: ``n_q`` steering vectors of length
``n_a`` whose sine-angles tile (-1, 1] uniformly.  With ``n_q == n_a`` the
beams form an orthonormal DFT basis; oversampled codebooks (``n_q > n_a``)
trade orthogonality for finer angular resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def steering_vector(n_elements: int, sin_theta: float) -> np.ndarray:
    """Half-wavelength ULA steering vector at spatial frequency ``sin_theta``.

    Entry k (0-based) is ``exp(j pi k sin_theta) / sqrt(n_elements)``, so the
    vector has unit Euclidean norm and constant per-element modulus.
    """
    if n_elements < 1:
        raise ValueError("n_elements must be >= 1")
    k = np.arange(n_elements)
    return np.exp(1j * np.pi * k * sin_theta) / np.sqrt(n_elements)


@dataclass(frozen=True)
class Codebook:
    """Immutable set of ``n_q`` far-field beams, externally 1-indexed."""

    n_q: int
    n_a: int
    grid: np.ndarray = field(repr=False)
    beams: np.ndarray = field(repr=False)  # shape (n_q, n_a)

    def beam(self, index: int) -> np.ndarray:
        """Beam ``index`` with 1-based indexing, matching grid position i."""
        if not 1 <= index <= self.n_q:
            raise IndexError(f"beam index {index} out of range [1, {self.n_q}]")
        return self.beams[index - 1]


def build_codebook(n_q: int, n_a: int) -> Codebook:
    """Build the uniform spatial-frequency codebook.

    Grid point i (1-based) sits at ``sin(theta_i) = -1 + 2 i / n_q``; the
    corresponding beam is the length-``n_a`` steering vector at that spatial
    frequency.
    """
    if n_q < 1 or n_a < 1:
        raise ValueError("n_q and n_a must be >= 1")
    grid = -1.0 + 2.0 * np.arange(1, n_q + 1) / n_q
    beams = np.array([steering_vector(n_a, s) for s in grid])
    grid.setflags(write=False)
    beams.setflags(write=False)
    return Codebook(n_q=n_q, n_a=n_a, grid=grid, beams=beams)
