"""File interchange with the link-level simulator.

The trainer consumes the simulator's channel-dataset format and produces a
combiner file, a beam-index CSV and a JSON-lines training log, all in the
formats the simulator validates.  Nothing here imports the simulator.
"""

from __future__ import annotations

import csv
import json

import numpy as np
import torch


class FormatError(ValueError):
    """Input file failed structural validation."""


def read_dataset(path) -> tuple[dict, torch.Tensor]:
    """Read a channel dataset: JSON header line + interleaved float32 payload.

    Returns (header, channels) with channels complex64 of shape (count, N, K).
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    newline = blob.find(b"\n")
    if newline < 0:
        raise FormatError("missing header/payload separator")
    try:
        header = json.loads(blob[:newline].decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unparseable header: {exc}") from exc
    for key in ("n_sub", "n_a", "k", "l", "count", "version"):
        if key not in header:
            raise FormatError(f"header missing field {key!r}")
    if header["version"] != 1:
        raise FormatError(f"unsupported dataset version {header['version']}")
    n = int(header["n_sub"]) * int(header["n_a"])
    k = int(header["k"])
    count = int(header["count"])
    payload = blob[newline + 1 :]
    if len(payload) != 2 * 4 * count * n * k:
        raise FormatError(f"payload is {len(payload)} bytes, expected {2 * 4 * count * n * k}")
    flat = np.frombuffer(payload, dtype="<f4").reshape(count, n, k, 2)
    channels = torch.from_numpy(flat[..., 0].copy()) + 1j * torch.from_numpy(flat[..., 1].copy())
    return header, channels.to(torch.complex64)


def write_combiner(combiner: torch.Tensor, path) -> None:
    """Write per-slot combiners (m, n, k) in the simulator's binary format."""
    m, n, k = combiner.shape
    header = {"m": m, "k": k, "n": n, "dtype": "c64-interleaved", "version": 1}
    arr = combiner.detach().resolve_conj().cpu().numpy()
    payload = np.empty((m, n, k, 2), dtype="<f4")
    payload[..., 0] = arr.real
    payload[..., 1] = arr.imag
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("ascii"))
        fh.write(b"\n")
        fh.write(payload.tobytes())


def write_beams(sample_ids, indices: torch.Tensor, path) -> None:
    """Write 1-based beam picks as the simulator's beam CSV.

    ``indices`` holds 0-based rows of shape (count, n_sub).
    """
    indices = indices.detach().cpu().numpy()
    n_sub = indices.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id"] + [f"i_{n + 1}" for n in range(n_sub)])
        for sid, row in zip(sample_ids, indices):
            writer.writerow([int(sid)] + [int(i) + 1 for i in row])


class TrainingLog:
    """Append-only JSON-lines log of per-epoch training state."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w")

    def write(self, record: dict) -> None:
        self._fh.write(json.dumps(record) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def read_log(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
