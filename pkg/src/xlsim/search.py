"""Classical beam-selection baselines with explicit pilot accounting.

All searches return a :class:`SearchResult` carrying the chosen per-subarray
codebook indices and the number of pilot slots the scheme would consume.  Tie
breaking is everywhere "lowest index wins" so results are reproducible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from xlsim.codebook import Codebook
from xlsim.precoding import (
    BeamSelection,
    DegenerateChannelError,
    LinkBudget,
    assemble_analog,
    mmse_digital,
    sum_rate,
    variant_mse_loss,
)


class EnumerationCapError(ValueError):
    """Exhaustive search refused: candidate count exceeds the cap."""


@dataclass(frozen=True)
class SearchResult:
    """Outcome of one beam search on one channel."""

    selection: BeamSelection
    pilot_count: int
    f_bb: np.ndarray | None = field(default=None, repr=False)
    beta: float | None = None
    iterations: int = 0
    loss_history: tuple[float, ...] = ()

    def __post_init__(self):
        if self.pilot_count < 0:
            raise ValueError("pilot_count must be nonnegative")


def _selection_loss(indices: tuple[int, ...], codebook: Codebook, h: np.ndarray, link: LinkBudget) -> float:
    return variant_mse_loss(assemble_analog(BeamSelection(indices), codebook), h, link)


def exhaustive_oracle(
    h: np.ndarray,
    codebook: Codebook,
    n_sub: int,
    link: LinkBudget,
    objective: str = "min_loss",
    cap: int = 10**6,
) -> SearchResult:
    """Joint search over every per-subarray beam combination.

    The gold standard: globally optimal for the requested objective, either
    ``"min_loss"`` (variant-MSE) or ``"max_rate"`` (sum rate with the MMSE
    digital precoder recomputed per candidate).  Ties go to the
    lexicographically smallest index tuple.  Only usable at desk scale; the
    candidate count n_q ** n_sub must stay below ``cap``.
    """
    if objective not in ("min_loss", "max_rate"):
        raise ValueError(f"unknown objective {objective!r}")
    n_candidates = codebook.n_q**n_sub
    if n_candidates > cap:
        raise EnumerationCapError(
            f"{codebook.n_q}^{n_sub} = {n_candidates} candidates exceeds cap {cap}"
        )
    best_indices = None
    best_score = math.inf
    for indices in itertools.product(range(1, codebook.n_q + 1), repeat=n_sub):
        if objective == "min_loss":
            score = _selection_loss(indices, codebook, h, link)
        else:
            f_rf = assemble_analog(BeamSelection(indices), codebook)
            try:
                f_bb, _ = mmse_digital(f_rf, h, link)
            except DegenerateChannelError:
                continue  # candidate captures no signal at all
            score = -sum_rate(h, f_rf, f_bb, link.noise_var)
        if score < best_score:  # strict: first (lexicographic) winner kept on ties
            best_score = score
            best_indices = indices
    if best_indices is None:
        raise DegenerateChannelError("every candidate beamformer zeroes the channel")
    selection = BeamSelection(best_indices)
    f_bb, beta = mmse_digital(assemble_analog(selection, codebook), h, link)
    return SearchResult(selection=selection, pilot_count=n_candidates, f_bb=f_bb, beta=beta)


def greedy_per_subarray(h: np.ndarray, codebook: Codebook, link: LinkBudget) -> SearchResult:
    """One ascending pass over subarrays, each picking its own best beam.

    Subarray n minimizes the variant-MSE given the beams already fixed for
    subarrays 1..n-1; subarrays not yet visited contribute nothing (their
    blocks are zero).  A single pass keeps this a genuinely weaker baseline
    than alternating optimization.  Pilot cost: n_q per subarray.
    """
    n_sub = h.shape[0] // codebook.n_a
    chosen: list[int] = []
    for n in range(n_sub):
        best_idx, best_loss = 1, math.inf
        for idx in range(1, codebook.n_q + 1):
            partial = _partial_analog(chosen + [idx], codebook, h.shape[0])
            loss = variant_mse_loss(partial, h, link)
            if loss < best_loss:
                best_loss = loss
                best_idx = idx
        chosen.append(best_idx)
    selection = BeamSelection(tuple(chosen))
    f_bb, beta = mmse_digital(assemble_analog(selection, codebook), h, link)
    return SearchResult(selection=selection, pilot_count=codebook.n_q * n_sub, f_bb=f_bb, beta=beta)


def _partial_analog(indices: list[int], codebook: Codebook, n_elements: int) -> np.ndarray:
    """Analog beamformer with only the first len(indices) subarrays active.

    Unset subarrays are dropped rather than kept as zero columns, which is
    equivalent for the loss and keeps F_RF full column rank.
    """
    n_a = codebook.n_a
    f = np.zeros((n_elements, len(indices)), dtype=complex)
    for n, idx in enumerate(indices):
        f[n * n_a : (n + 1) * n_a, n] = codebook.beam(idx)
    return f


def radix4_hierarchical(h: np.ndarray, codebook: Codebook, link: LinkBudget) -> SearchResult:
    """Per-subarray 4-ary descent over nested angular index ranges.

    Each level splits the current index range into four equal sub-ranges and
    tests each sub-range's center beam by its aggregate single-user gain
    sum_k |f^H h_sub_k| on that subarray's slice of the channel, recursing
    into the winner; ranges of four or fewer are scanned beam by beam.  The
    pilot budget is accounted as 4 * ceil(log4 n_q) tests per subarray
    regardless of how many the descent actually spends.
    """
    n_q = codebook.n_q
    if n_q < 1 or (n_q & (n_q - 1)) != 0:
        raise ValueError(f"radix-4 search requires a power-of-two codebook size, got {n_q}")
    n_a = codebook.n_a
    n_sub = h.shape[0] // n_a
    # ceil(log4 n_q) in exact integer arithmetic (n_q is a power of two).
    depth = max(1, n_q.bit_length() // 2)
    chosen = []
    for n in range(n_sub):
        h_sub = h[n * n_a : (n + 1) * n_a, :]
        lo, hi = 1, n_q
        while True:
            size = hi - lo + 1
            if size <= 4:
                candidates = list(range(lo, hi + 1))
            else:
                quarter = size // 4
                candidates = [lo + j * quarter + (quarter - 1) // 2 for j in range(4)]
            gains = [np.sum(np.abs(codebook.beam(i).conj() @ h_sub)) for i in candidates]
            # Mirror-symmetric geometries produce mathematical ties that float
            # rounding would break arbitrarily; treat near-equal as equal and
            # keep the lowest candidate.
            best, best_gain = candidates[0], gains[0]
            for cand, gain in zip(candidates[1:], gains[1:]):
                if gain > best_gain * (1.0 + 1e-9):
                    best, best_gain = cand, gain
            if size <= 4:
                chosen.append(best)
                break
            quarter = size // 4
            j = (best - lo) // quarter
            lo, hi = lo + j * quarter, lo + (j + 1) * quarter - 1
    selection = BeamSelection(tuple(chosen))
    f_bb, beta = mmse_digital(assemble_analog(selection, codebook), h, link)
    return SearchResult(selection=selection, pilot_count=4 * depth * n_sub, f_bb=f_bb, beta=beta)


def alternating_optimization(
    h_est: np.ndarray,
    codebook: Codebook,
    link: LinkBudget,
    max_iter: int = 20,
    tol: float = 1e-8,
    init: BeamSelection | None = None,
) -> SearchResult:
    """Coordinate descent on beam indices alternated with MMSE digital precoding.

    One iteration sweeps every subarray once, replacing its index with the
    variant-MSE minimizer given the others, then recomputes the closed-form
    digital precoder.  The loss is non-increasing across iterations; the
    sweep stops once the improvement drops below ``tol`` or after
    ``max_iter`` iterations.  Pilot cost models full-sweep CSI acquisition:
    n_q * n_sub slots, independent of the iteration count.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    n_a = codebook.n_a
    n_sub = h_est.shape[0] // n_a
    if init is None:
        # Build-up sweep: later subarrays see the blocks fixed so far.
        indices = []
        for n in range(n_sub):
            best_idx, best_loss = 1, math.inf
            for idx in range(1, codebook.n_q + 1):
                loss = variant_mse_loss(
                    _partial_analog(indices + [idx], codebook, h_est.shape[0]), h_est, link
                )
                if loss < best_loss:
                    best_loss, best_idx = loss, idx
            indices.append(best_idx)
    else:
        indices = list(init.indices)
    loss = _selection_loss(tuple(indices), codebook, h_est, link)
    history = [loss]
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        for n in range(n_sub):
            best_idx, best_loss = indices[n], loss
            for idx in range(1, codebook.n_q + 1):
                if idx == indices[n]:
                    continue
                trial = indices.copy()
                trial[n] = idx
                trial_loss = _selection_loss(tuple(trial), codebook, h_est, link)
                better = trial_loss < best_loss
                tie_to_lower = trial_loss == best_loss and idx < best_idx
                if better or tie_to_lower:
                    best_loss, best_idx = trial_loss, idx
            indices[n] = best_idx
            loss = best_loss
        history.append(loss)
        if history[-2] - history[-1] < tol:
            break
    selection = BeamSelection(tuple(indices))
    f_bb, beta = mmse_digital(assemble_analog(selection, codebook), h_est, link)
    return SearchResult(
        selection=selection,
        pilot_count=codebook.n_q * n_sub,
        f_bb=f_bb,
        beta=beta,
        iterations=iterations,
        loss_history=tuple(history),
    )


def noisy_csi(h: np.ndarray, est_snr: float, seed: int) -> np.ndarray:
    """Channel estimate with i.i.d. complex Gaussian error at the given estimation SNR.

    Error entries have variance ||H||_F^2 / (N K est_snr), so est_snr is the
    per-entry signal-to-estimation-error power ratio.  Infinite ``est_snr``
    returns the channel unchanged.
    """
    if not math.isfinite(est_snr):
        if est_snr > 0:
            return h.copy()
        raise ValueError("est_snr must be positive")
    if est_snr <= 0:
        raise ValueError("est_snr must be positive")
    n, k = h.shape
    var = np.linalg.norm(h, "fro") ** 2 / (n * k * est_snr)
    rng = np.random.default_rng([seed])
    raw = rng.standard_normal((n, k, 2))
    return h + (raw[..., 0] + 1j * raw[..., 1]) * np.sqrt(var / 2.0)


def random_selection(n_sub: int, n_q: int, seed: int) -> SearchResult:
    """Uniform i.i.d. codebook picks; costs no pilots at all."""
    rng = np.random.default_rng([seed])
    indices = tuple(int(i) for i in rng.integers(1, n_q + 1, size=n_sub))
    return SearchResult(selection=BeamSelection(indices), pilot_count=0)
