"""Block-diagonal analog beamforming and closed-form MMSE digital precoding.

The digital precoder minimizes the expected signal-reconstruction error for a
fixed analog beamformer and is available in closed form, together with the
power-normalizing scale factor.  Substituting it back into the error yields a
trace expression in the analog beamformer alone (the variant-MSE loss), the
surrogate that every beam search in this package minimizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from xlsim.codebook import Codebook


class DegenerateChannelError(ValueError):
    """Effective channel through the analog beamformer is (numerically) zero."""


# Relative threshold below which F_RF^H H counts as zero.
_DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class LinkBudget:
    """Total transmit power and per-user noise variance."""

    p_t: float
    noise_var: float

    def __post_init__(self):
        if self.p_t <= 0 or self.noise_var <= 0:
            raise ValueError("p_t and noise_var must be strictly positive")

    @classmethod
    def from_snr_db(cls, snr_db: float, p_t: float = 1.0) -> "LinkBudget":
        """SNR is defined as p_t / noise_var; power stays fixed, noise is swept."""
        return cls(p_t=p_t, noise_var=p_t / 10.0 ** (snr_db / 10.0))


@dataclass(frozen=True)
class BeamSelection:
    """One codebook index per subarray, 1-based."""

    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    @property
    def n_sub(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class HybridPrecoder:
    """Analog/digital precoder pair with the power-normalizing scale."""

    f_rf: np.ndarray
    f_bb: np.ndarray
    beta: float


def assemble_analog(selection: BeamSelection, codebook: Codebook) -> np.ndarray:
    """Block-diagonal analog beamformer from per-subarray codebook picks.

    Column n holds codebook beam ``indices[n]`` on rows ``n*n_a .. (n+1)*n_a - 1``
    and exact zeros elsewhere, so the columns are orthonormal by construction.
    """
    n_sub = selection.n_sub
    n_a = codebook.n_a
    f_rf = np.zeros((n_sub * n_a, n_sub), dtype=complex)
    for n, idx in enumerate(selection.indices):
        f_rf[n * n_a : (n + 1) * n_a, n] = codebook.beam(idx)
    return f_rf


def mmse_digital(f_rf: np.ndarray, h: np.ndarray, link: LinkBudget) -> tuple[np.ndarray, float]:
    """Closed-form MMSE digital precoder and scale for a fixed analog beamformer.

    Solves  min_{F, beta} E||s - beta^-1 (H^H F_RF F s + n)||^2  subject to
    ||F_RF F||_F^2 = p_t.  The unscaled precoder is

        F_tilde = (F_RF^H H H^H F_RF + (K sigma^2 / p_t) F_RF^H F_RF)^-1 F_RF^H H

    and beta scales it to meet the power constraint with equality.

    Returns
    -------
    (f_bb, beta) with f_bb = beta * F_tilde.

    Raises
    ------
    DegenerateChannelError
        If the effective channel F_RF^H H vanishes (beta undefined).
    """
    k = h.shape[1]
    g = f_rf.conj().T @ h
    if np.linalg.norm(g) <= _DEGENERATE_RTOL * np.linalg.norm(h):
        raise DegenerateChannelError("effective channel F_RF^H H is zero")
    a = f_rf.conj().T @ f_rf
    m = g @ g.conj().T + (k * link.noise_var / link.p_t) * a
    f_tilde = cho_solve(cho_factor(m, lower=True), g)
    radiated = np.linalg.norm(f_rf @ f_tilde, "fro") ** 2
    beta = float(np.sqrt(link.p_t / radiated))
    return beta * f_tilde, beta


def variant_mse_loss(f_rf: np.ndarray, h: np.ndarray, link: LinkBudget) -> float:
    """Reconstruction error of the optimal MMSE precoder, as a function of F_RF alone.

        L = tr( (I_K + p_t/(K sigma^2) * H^H F_RF (F_RF^H F_RF)^-1 F_RF^H H)^-1 )

    Always in (0, K]; equals K when the effective channel is zero and shrinks
    as the analog beams capture and separate the users better.
    """
    k = h.shape[1]
    b = h.conj().T @ f_rf
    a = f_rf.conj().T @ f_rf
    x = cho_solve(cho_factor(a, lower=True), b.conj().T)
    m = np.eye(k) + (link.p_t / (k * link.noise_var)) * (b @ x)
    inv = cho_solve(cho_factor(m, lower=True), np.eye(k))
    return float(np.real(np.trace(inv)))


def reconstruction_mse(
    h: np.ndarray, f_rf: np.ndarray, f_bb: np.ndarray, beta: float, link: LinkBudget
) -> float:
    """Expected reconstruction error of a given hybrid precoder.

    Closed-form expectation over unit-power symbols and Gaussian noise:

        E||s - beta^-1 y||^2 = ||I_K - beta^-1 H^H F_RF F_BB||_F^2 + K sigma^2 / beta^2
    """
    if beta <= 0:
        raise ValueError("beta must be strictly positive")
    k = h.shape[1]
    err = np.eye(k) - (h.conj().T @ (f_rf @ f_bb)) / beta
    return float(np.linalg.norm(err, "fro") ** 2 + k * link.noise_var / beta**2)


def sum_rate(h: np.ndarray, f_rf: np.ndarray, f_bb: np.ndarray, noise_var: float) -> float:
    """Downlink sum rate in bits/s/Hz, treating cross-user terms as interference.

    User k's SINR is |h_k^H F_RF f_k|^2 over the sum of the other users'
    precoded powers at k plus noise.
    """
    eff = h.conj().T @ (f_rf @ f_bb)  # K x K, entry (k, i) = h_k^H F_RF f_i
    powers = np.abs(eff) ** 2
    signal = np.diag(powers)
    interference = powers.sum(axis=1) - signal
    return float(np.sum(np.log2(1.0 + signal / (interference + noise_var))))
