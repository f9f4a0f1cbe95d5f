import subprocess
import sys

import pytest
import torch

from dliabt import NetworkConfig


def tiny_config(**overrides) -> NetworkConfig:
    base = dict(
        k_users=2,
        n_a=4,
        n_q=8,
        m_slots=4,
        encoder_dims=(32, 16),
        tfm_layers=2,
        heads=2,
        dropout=0.0,
        batch_size=32,
        epochs=4,
        snr_db=10.0,
    )
    base.update(overrides)
    return NetworkConfig(**base)


def crandn(*shape, seed=0, dtype=torch.complex64):
    gen = torch.Generator().manual_seed(seed)
    real_dtype = torch.float32 if dtype == torch.complex64 else torch.float64
    re = torch.randn(shape, generator=gen, dtype=real_dtype)
    im = torch.randn(shape, generator=gen, dtype=real_dtype)
    return torch.complex(re, im) / 2**0.5


def simulator_cli(*args):
    """Run the link-level simulator's CLI (the cross-component interface)."""
    proc = subprocess.run(
        [sys.executable, "-m", "xlsim", *map(str, args)], capture_output=True, text=True
    )
    if proc.returncode != 0:
        raise RuntimeError(f"xlsim {' '.join(map(str, args))} failed:\n{proc.stderr}")
    return proc.stdout


@pytest.fixture(autouse=True)
def _single_thread():
    # Keep small-matrix tests deterministic and avoid thread oversubscription.
    n = torch.get_num_threads()
    torch.set_num_threads(min(n, 4))
    yield
    torch.set_num_threads(n)
