"""Uplink pilot sensing: per-slot combining of pilots and noise.

Each of the M pilot slots applies its own N x K combining matrix to the
incoming pilots.  Stacking the slots gives the MK x K measurement matrix that
beam predictors consume.  Combiners may be random (baseline) or loaded from a
file written by a trainer; the file format is a one-line JSON header followed
by raw interleaved float32 little-endian payload.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

COMBINER_FORMAT_VERSION = 1

# Column norms are renormalized on load when they drift past this.
_COLUMN_NORM_DRIFT = 1e-6


class CombinerFormatError(ValueError):
    """Combiner file failed structural validation."""


@dataclass(frozen=True)
class SensingConfig:
    """Pilot measurement configuration: per-slot combiners plus noise level.

    ``combiner`` has shape (m_slots, n_elements, k_streams); slot m's columns
    are the K receive beamformers applied in that slot, each unit-norm.
    """

    combiner: np.ndarray = field(repr=False)
    noise_var: float = 0.0

    def __post_init__(self):
        if self.combiner.ndim != 3:
            raise ValueError("combiner must have shape (m_slots, n_elements, k_streams)")
        if self.noise_var < 0:
            raise ValueError("noise_var must be nonnegative")

    @property
    def m_slots(self) -> int:
        return self.combiner.shape[0]

    @property
    def n_elements(self) -> int:
        return self.combiner.shape[1]

    @property
    def k_streams(self) -> int:
        return self.combiner.shape[2]

    @property
    def stacked(self) -> np.ndarray:
        """Slot combiners side by side: shape (n_elements, m_slots * k_streams)."""
        return np.concatenate(list(self.combiner), axis=1)


def random_combiner(m: int, k: int, n: int, seed: int) -> np.ndarray:
    """Random constant-modulus combiner, unit-norm columns, deterministic per seed.

    Every entry has modulus 1/sqrt(n); phases are i.i.d. uniform.
    """
    if m < 1 or k < 1 or n < 1:
        raise ValueError("m, k, n must all be >= 1")
    rng = np.random.default_rng([seed, m, k, n])
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(m, n, k))
    return np.exp(1j * phases) / np.sqrt(n)


def measure_uplink(config: SensingConfig, h: np.ndarray, seed: int) -> np.ndarray:
    """Stacked pilot measurements Y = Phi^H H + combined noise, shape (MK, K).

    Noise is drawn per slot as raw CN(0, noise_var) at the antennas and passed
    through that slot's combiner, so learned combiners see physically colored
    noise rather than white measurement noise.
    """
    if h.shape[0] != config.n_elements:
        raise ValueError(f"channel has {h.shape[0]} rows, combiner expects {config.n_elements}")
    k_users = h.shape[1]
    rng = np.random.default_rng([seed])
    blocks = []
    for m in range(config.m_slots):
        phi = config.combiner[m]
        block = phi.conj().T @ h
        if config.noise_var > 0:
            raw = rng.standard_normal((config.n_elements, k_users, 2))
            noise = (raw[..., 0] + 1j * raw[..., 1]) * np.sqrt(config.noise_var / 2.0)
            block = block + phi.conj().T @ noise
        blocks.append(block)
    return np.concatenate(blocks, axis=0)


def write_combiner(combiner: np.ndarray, path) -> None:
    """Write a combiner in the interchange format (JSON header + float32 payload)."""
    m, n, k = combiner.shape
    header = {"m": m, "k": k, "n": n, "dtype": "c64-interleaved", "version": COMBINER_FORMAT_VERSION}
    payload = np.empty((m, n, k, 2), dtype="<f4")
    payload[..., 0] = combiner.real
    payload[..., 1] = combiner.imag
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("ascii"))
        fh.write(b"\n")
        fh.write(payload.tobytes())


def load_learned_combiner(path) -> np.ndarray:
    """Load a combiner file, validating shape and renormalizing drifted columns.

    Returns an array of shape (m, n, k) in complex128.  Columns whose norm
    drifted from 1 by more than 1e-6 (e.g. float32 rounding of a trainer
    export) are rescaled back to unit norm.

    Raises
    ------
    CombinerFormatError
        On a malformed header, unknown version, payload length mismatch, or a
        zero combining column that cannot be normalized.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    newline = blob.find(b"\n")
    if newline < 0:
        raise CombinerFormatError("missing header/payload separator")
    try:
        header = json.loads(blob[:newline].decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CombinerFormatError(f"unparseable header: {exc}") from exc
    for key in ("m", "k", "n", "dtype", "version"):
        if key not in header:
            raise CombinerFormatError(f"header missing field {key!r}")
    if header["version"] != COMBINER_FORMAT_VERSION:
        raise CombinerFormatError(f"unsupported version {header['version']}")
    if header["dtype"] != "c64-interleaved":
        raise CombinerFormatError(f"unsupported dtype {header['dtype']!r}")
    m, k, n = int(header["m"]), int(header["k"]), int(header["n"])
    payload = blob[newline + 1 :]
    expected = 2 * 4 * m * n * k
    if len(payload) != expected:
        raise CombinerFormatError(f"payload is {len(payload)} bytes, expected {expected}")
    flat = np.frombuffer(payload, dtype="<f4").reshape(m, n, k, 2)
    combiner = flat[..., 0].astype(np.float64) + 1j * flat[..., 1].astype(np.float64)
    norms = np.linalg.norm(combiner, axis=1)  # (m, k) column norms
    if np.any(norms == 0):
        raise CombinerFormatError("combiner contains a zero column")
    drifted = np.abs(norms - 1.0) > _COLUMN_NORM_DRIFT
    if np.any(drifted):
        scale = np.where(drifted, norms, 1.0)
        combiner = combiner / scale[:, None, :]
    combiner.setflags(write=False)
    return combiner
