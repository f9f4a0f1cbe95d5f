import numpy as np
import pytest

from xlsim.codebook import build_codebook
from xlsim.precoding import BeamSelection, assemble_analog


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and "test_acceptance" in report.nodeid:
        verdict = "PASS" if report.passed else "FAIL"
        name = report.nodeid.split("::")[-1]
        print(f"\nACCEPTANCE [{verdict}] {name}")


def crandn(rng, *shape):
    """Standard complex Gaussian CN(0, 1) array."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_block_analog(rng, n_sub, n_a):
    """Block-diagonal analog beamformer with random constant-modulus blocks."""
    f = np.zeros((n_sub * n_a, n_sub), dtype=complex)
    for n in range(n_sub):
        phases = rng.uniform(0, 2 * np.pi, n_a)
        f[n * n_a : (n + 1) * n_a, n] = np.exp(1j * phases) / np.sqrt(n_a)
    return f


def random_codebook_analog(rng, codebook, n_sub):
    """Analog beamformer assembled from uniformly drawn codebook indices."""
    indices = tuple(int(i) for i in rng.integers(1, codebook.n_q + 1, size=n_sub))
    return assemble_analog(BeamSelection(indices), codebook), BeamSelection(indices)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def small_codebook():
    return build_codebook(n_q=8, n_a=4)
