"""Channel model tests: geometry, array responses, multipath draws."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xlsim.channel import (
    ArrayGeometry,
    ChannelPath,
    ScenarioConfig,
    array_response,
    element_distances,
    generate_channel,
    max_phase_error,
    sample_scenario,
    subarray_approximation,
)
from xlsim.codebook import steering_vector


def geo(n_sub=2, n_a=4, wavelength=3e-3, spacing=0.0):
    return ArrayGeometry(n_sub=n_sub, n_a=n_a, wavelength_m=wavelength, spacing_m=spacing)


class TestGeometry:
    def test_offsets_symmetric_and_zero_sum(self):
        g = geo(n_sub=3, n_a=5)
        offs = g.element_offsets
        np.testing.assert_allclose(offs + offs[::-1], 0.0, atol=0)
        assert offs.sum() == 0.0

    def test_default_spacing_is_half_wavelength(self):
        assert geo().spacing_m == pytest.approx(1.5e-3)

    def test_subarray_centers_spacing(self):
        g = geo(n_sub=4, n_a=8)
        centers = g.subarray_centers_m
        np.testing.assert_allclose(np.diff(centers), g.n_a * g.spacing_m)

    @pytest.mark.parametrize("kwargs", [dict(n_sub=0), dict(n_a=0), dict(wavelength=-1.0)])
    def test_invalid_geometry_rejected(self, kwargs):
        base = dict(n_sub=2, n_a=4, wavelength=3e-3)
        base.update(kwargs)
        with pytest.raises(ValueError):
            geo(**base)


class TestElementDistances:
    def test_endfire_collapses_radical(self):
        # At theta = pi/2 the radical is (r - delta*d)^2 exactly.
        g = geo(n_sub=2, n_a=2)
        r = 7.0
        expected = np.abs(r - g.element_positions_m)
        np.testing.assert_allclose(element_distances(g, np.pi / 2, r), expected, rtol=1e-12)

    def test_broadside_two_elements_equal(self):
        g = geo(n_sub=1, n_a=2)
        d = g.spacing_m
        dist = element_distances(g, 0.0, 10.0)
        assert dist[0] == dist[1]
        np.testing.assert_allclose(dist, np.sqrt(100.0 + 0.25 * d**2), rtol=1e-15)

    def test_against_high_precision_oracle(self):
        # Independent evaluation of the same formula at 50 decimal digits.
        g = geo(n_sub=1, n_a=4, wavelength=3e-3)
        r, theta = 10.0, math.radians(30.0)
        got = element_distances(g, theta, r)
        with mpmath.workdps(50):
            d = mpmath.mpf(g.spacing_m)
            rr = mpmath.mpf(r)
            s = mpmath.sin(mpmath.mpf(theta))
            for n in range(1, 5):
                delta = mpmath.mpf(2 * n - 4 - 1) / 2
                exact = mpmath.sqrt(rr**2 + (delta * d) ** 2 - 2 * rr * delta * d * s)
                assert abs(got[n - 1] - float(exact)) < 1e-12

    def test_symmetric_at_broadside(self):
        g = geo(n_sub=2, n_a=3)
        dist = element_distances(g, 0.0, 42.0)
        np.testing.assert_allclose(dist, dist[::-1], rtol=1e-15)

    def test_nonpositive_range_rejected(self):
        with pytest.raises(ValueError):
            element_distances(geo(), 0.0, 0.0)


class TestArrayResponse:
    @given(
        angle=st.floats(-np.pi / 2 + 1e-6, np.pi / 2),
        range_m=st.floats(0.1, 1e6),
        n_sub=st.integers(1, 4),
        n_a=st.integers(1, 8),
    )
    @settings(max_examples=60, deadline=None)
    def test_unit_norm(self, angle, range_m, n_sub, n_a):
        b = array_response(geo(n_sub=n_sub, n_a=n_a), angle, range_m)
        assert abs(np.linalg.norm(b) - 1.0) < 1e-12

    def test_broadside_two_elements_identical(self):
        b = array_response(geo(n_sub=1, n_a=2), 0.0, 5.0)
        np.testing.assert_allclose(b[0], b[1], rtol=1e-12)

    def test_far_field_limit_matches_steering_vector(self):
        g = geo(n_sub=2, n_a=8)
        theta = 0.35
        b = array_response(g, theta, 1e9)
        a = steering_vector(g.n_elements, math.sin(theta))
        assert abs(np.vdot(b, a)) >= 1.0 - 1e-6

    def test_far_field_consistency_random_angles(self):
        g = geo(n_sub=2, n_a=8)
        aperture = g.n_elements * g.spacing_m
        r = 1e6 * aperture
        rng = np.random.default_rng(7)
        for theta in rng.uniform(-np.pi / 2 + 0.01, np.pi / 2 - 0.01, size=100):
            b = array_response(g, theta, r)
            a = steering_vector(g.n_elements, math.sin(theta))
            assert abs(np.vdot(b, a)) >= 1.0 - 1e-6

    def test_nonpositive_range_rejected(self):
        with pytest.raises(ValueError):
            array_response(geo(), 0.1, -3.0)


class TestGenerateChannel:
    def test_single_unit_gain_path_norm(self):
        g = geo(n_sub=2, n_a=4)
        h = generate_channel(g, [ChannelPath(gain=1.0, angle_rad=0.2, range_m=30.0)])
        assert abs(np.linalg.norm(h) - np.sqrt(g.n_elements)) < 1e-10

    def test_zero_gain_path_gives_zero(self):
        g = geo()
        h = generate_channel(g, [ChannelPath(gain=0.0, angle_rad=0.2, range_m=30.0)])
        np.testing.assert_array_equal(h, 0.0)

    def test_matches_bruteforce_resummation(self):
        # Oracle: re-sum the multipath formula term by term with scalar math.
        g = geo(n_sub=2, n_a=3)
        rng = np.random.default_rng(11)
        paths = [
            ChannelPath(
                gain=complex(rng.standard_normal(), rng.standard_normal()) / np.sqrt(2),
                angle_rad=float(rng.uniform(-1.4, 1.4)),
                range_m=float(rng.uniform(5, 200)),
            )
            for _ in range(3)
        ]
        got = generate_channel(g, paths)
        n = g.n_elements
        lam = g.wavelength_m
        expected = np.zeros(n, dtype=complex)
        for p in paths:
            dists = [
                math.sqrt(
                    p.range_m**2
                    + (delta * g.spacing_m) ** 2
                    - 2 * p.range_m * delta * g.spacing_m * math.sin(p.angle_rad)
                )
                for delta in ((2 * (i + 1) - n - 1) / 2 for i in range(n))
            ]
            b = np.array([np.exp(-1j * 2 * np.pi / lam * (dist - p.range_m)) for dist in dists])
            expected += p.gain * np.exp(-1j * 2 * np.pi * p.range_m / lam) * b / math.sqrt(n)
        expected *= math.sqrt(n / 3)
        np.testing.assert_allclose(got, expected, atol=1e-10)

    def test_linear_in_path_gains(self):
        g = geo()
        base = ChannelPath(gain=0.7 - 0.2j, angle_rad=0.3, range_m=20.0)
        other = ChannelPath(gain=1.1 + 0.5j, angle_rad=0.3, range_m=20.0)
        combined = ChannelPath(gain=base.gain + other.gain, angle_rad=0.3, range_m=20.0)
        h_sum = generate_channel(g, [combined])
        np.testing.assert_allclose(
            h_sum, generate_channel(g, [base]) + generate_channel(g, [other]), atol=1e-10
        )

    def test_empty_paths_rejected(self):
        with pytest.raises(ValueError):
            generate_channel(geo(), [])

    def test_nonpositive_path_range_rejected(self):
        with pytest.raises(ValueError):
            ChannelPath(gain=1.0, angle_rad=0.0, range_m=0.0)


class TestSampleScenario:
    CONFIG = ScenarioConfig(n_sub=2, n_a=4, n_users=3, n_paths=2)

    def test_deterministic_per_seed_and_trial(self):
        a = sample_scenario(self.CONFIG, seed=5, trial=9)
        b = sample_scenario(self.CONFIG, seed=5, trial=9)
        np.testing.assert_array_equal(a.h, b.h)
        assert a.paths == b.paths

    def test_distinct_trials_differ(self):
        a = sample_scenario(self.CONFIG, seed=5, trial=0)
        b = sample_scenario(self.CONFIG, seed=5, trial=1)
        assert not np.array_equal(a.h, b.h)

    def test_sin_angle_mean_over_many_draws(self):
        cfg = ScenarioConfig(n_sub=1, n_a=2, n_users=1, n_paths=1)
        sines = np.array(
            [
                math.sin(sample_scenario(cfg, seed=3, trial=t).paths[0][0].angle_rad)
                for t in range(100_000)
            ]
        )
        assert abs(sines.mean()) < 0.01

    def test_range_bounds_over_many_draws(self):
        cfg = ScenarioConfig(n_sub=1, n_a=2, n_users=1, n_paths=1)
        ranges = np.array(
            [sample_scenario(cfg, seed=4, trial=t).paths[0][0].range_m for t in range(100_000)]
        )
        assert ranges.min() >= 5.0 and ranges.max() <= 200.0
        # Uniform on [5, 200]: extremes should approach the bounds.
        assert ranges.min() < 5.1 and ranges.max() > 199.9

    def test_channel_energy_matches_gain_variance(self):
        # E||h_k||^2 = N under unit-variance path gains.
        cfg = ScenarioConfig(n_sub=2, n_a=4, n_users=1, n_paths=3)
        n = cfg.n_sub * cfg.n_a
        energies = [
            np.linalg.norm(sample_scenario(cfg, seed=6, trial=t).h[:, 0]) ** 2
            for t in range(10_000)
        ]
        assert abs(np.mean(energies) / n - 1.0) < 0.05


class TestSubarrayApproximation:
    def test_far_field_local_angles_equal_global(self):
        g = geo(n_sub=4, n_a=8)
        theta = 0.4
        local, _ = subarray_approximation(g, theta, 1e9)
        np.testing.assert_allclose(local, theta, atol=1e-9)

    def test_single_subarray_correlation_when_rule_holds(self):
        g = geo(n_sub=1, n_a=8)
        r = 5.0
        dphi, valid = max_phase_error(g, r)
        assert valid
        _, stacked = subarray_approximation(g, 0.0, r)
        b = array_response(g, 0.0, r)
        assert abs(np.vdot(stacked, b)) >= 0.999

    def test_per_subarray_correlation_at_close_range(self):
        # 32-element subarrays at 3 mm wavelength, user at 5 m broadside.
        g = geo(n_sub=8, n_a=32, wavelength=3e-3)
        r = 5.0
        local, _ = subarray_approximation(g, 0.0, r)
        b = array_response(g, 0.0, r)
        for n in range(g.n_sub):
            block = b[n * g.n_a : (n + 1) * g.n_a]
            block = block / np.linalg.norm(block)
            a = steering_vector(g.n_a, math.sin(local[n]))
            assert abs(np.vdot(a, block)) >= 0.99

    def test_nonpositive_range_rejected(self):
        with pytest.raises(ValueError):
            subarray_approximation(geo(), 0.0, -1.0)


class TestMaxPhaseError:
    def test_reference_numbers(self):
        # N_a=32, d=1.5mm, lambda=3mm, r=5m: aperture 46.5 mm, error ~0.113 rad.
        g = geo(n_sub=1, n_a=32, wavelength=3e-3)
        assert g.subarray_aperture_m == pytest.approx(46.5e-3)
        dphi, valid = max_phase_error(g, 5.0)
        expected = 2 * np.pi * (0.0465**2 / (8 * 5.0)) / 3e-3
        assert dphi == pytest.approx(expected, rel=1e-12)
        assert dphi == pytest.approx(0.113, abs=5e-4)
        assert valid

    def test_vanishes_in_far_field(self):
        dphi, valid = max_phase_error(geo(n_a=32), 1e12)
        assert dphi < 1e-10
        assert valid

    def test_boundary_range_hits_pi_over_eight(self):
        g = geo(n_sub=1, n_a=32, wavelength=3e-3)
        r_boundary = 2 * g.subarray_aperture_m**2 / g.wavelength_m
        dphi, valid = max_phase_error(g, r_boundary)
        assert dphi == pytest.approx(np.pi / 8, rel=1e-12)
        assert not valid  # strict inequality at the boundary

    def test_nonpositive_range_rejected(self):
        with pytest.raises(ValueError):
            max_phase_error(geo(), 0.0)
