"""Near-field spherical-wave channel model for sub-connected uniform linear arrays.

The array is a ULA of ``n_sub`` subarrays with ``n_a`` elements each, all at
half-wavelength spacing by default.  Channels follow the geometric multipath
model: each path contributes a complex gain times the near-field array
response evaluated at the path's angle and range, so wavefront curvature
across the aperture is captured exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from xlsim.codebook import steering_vector

SPEED_OF_LIGHT = 299_792_458.0
"""Exact speed of light in m/s (not the 3e8 shorthand)."""

PLANE_WAVE_PHASE_LIMIT = np.pi / 8
"""Largest tolerable phase error for treating a subarray as far-field."""


@dataclass(frozen=True)
class ArrayGeometry:
    """ULA of ``n_sub`` subarrays with ``n_a`` consecutive elements each.

    Element offsets are symmetric about the array center: element n (1-based)
    sits at ``delta_n * spacing_m`` with ``delta_n = (2n - N - 1) / 2`` and
    ``N = n_sub * n_a``.  Adjacent subarrays share the same inter-element
    spacing, so subarray centers are ``n_a * spacing_m`` apart.
    """

    n_sub: int
    n_a: int
    wavelength_m: float
    spacing_m: float = 0.0  # 0 means "default to wavelength_m / 2"

    def __post_init__(self):
        if self.n_sub < 1 or self.n_a < 1:
            raise ValueError("n_sub and n_a must be >= 1")
        if self.wavelength_m <= 0:
            raise ValueError("wavelength_m must be positive")
        if self.spacing_m == 0.0:
            object.__setattr__(self, "spacing_m", self.wavelength_m / 2)
        if self.spacing_m <= 0:
            raise ValueError("spacing_m must be positive")

    @property
    def n_elements(self) -> int:
        return self.n_sub * self.n_a

    @property
    def element_offsets(self) -> np.ndarray:
        """Signed half-integer offsets delta_n, symmetric and summing to zero."""
        n = np.arange(1, self.n_elements + 1)
        return (2 * n - self.n_elements - 1) / 2

    @property
    def element_positions_m(self) -> np.ndarray:
        return self.element_offsets * self.spacing_m

    @property
    def subarray_centers_m(self) -> np.ndarray:
        """Center coordinate of each subarray along the array axis."""
        n = np.arange(1, self.n_sub + 1)
        return self.spacing_m * self.n_a * (2 * n - 1 - self.n_sub) / 2

    @property
    def subarray_aperture_m(self) -> float:
        return (self.n_a - 1) * self.spacing_m


@dataclass(frozen=True)
class ChannelPath:
    """One propagation path: complex gain, angle from broadside, range."""

    gain: complex
    angle_rad: float
    range_m: float

    def __post_init__(self):
        if self.range_m <= 0:
            raise ValueError("range_m must be strictly positive")


@dataclass(frozen=True)
class ScenarioConfig:
    """Multiuser drop configuration: array geometry plus per-user path statistics.

    Path parameters are drawn as gain ~ CN(0, 1), sin(angle) ~ U[-1, 1] and
    range ~ U[r_min, r_max] meters.  The number of dominant paths per user is
    configurable (``n_paths``); there is no canonical value, so treat it as a
    scenario knob.
    """

    n_sub: int
    n_a: int
    n_users: int
    n_paths: int = 3
    carrier_hz: float = 100e9
    spacing_m: float = 0.0
    r_min_m: float = 5.0
    r_max_m: float = 200.0

    def __post_init__(self):
        if self.n_users < 1:
            raise ValueError("n_users must be >= 1")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.carrier_hz <= 0:
            raise ValueError("carrier_hz must be positive")
        if not (0 < self.r_min_m <= self.r_max_m):
            raise ValueError("need 0 < r_min_m <= r_max_m")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.n_sub, self.n_a, self.wavelength_m, self.spacing_m)


@dataclass(frozen=True)
class ChannelRealization:
    """One multiuser channel draw: per-user path lists and the N x K matrix."""

    geometry: ArrayGeometry
    paths: tuple[tuple[ChannelPath, ...], ...]
    h: np.ndarray = field(repr=False)

    @property
    def n_users(self) -> int:
        return len(self.paths)


def element_distances(geometry: ArrayGeometry, angle_rad: float, range_m: float) -> np.ndarray:
    """Distance from each array element to a point at (angle, range).

    The point sits at range ``range_m`` from the array center, at angle
    ``angle_rad`` measured from broadside; element n is offset by
    ``delta_n * spacing`` along the array axis, giving

        dist_n = sqrt(r^2 + (delta_n d)^2 - 2 r delta_n d sin(theta)).

    Returns
    -------
    ndarray of shape (n_elements,), all entries strictly positive.
    """
    if range_m <= 0:
        raise ValueError("range_m must be strictly positive")
    x = geometry.element_positions_m
    sq = range_m**2 + x**2 - 2.0 * range_m * x * math.sin(angle_rad)
    # Guard tiny negatives from cancellation when the point sits on an element.
    return np.sqrt(np.maximum(sq, 0.0))


def array_response(geometry: ArrayGeometry, angle_rad: float, range_m: float) -> np.ndarray:
    """Near-field array response vector, unit Euclidean norm.

    Entry n is ``exp(-j 2 pi / lambda * (dist_n - r)) / sqrt(N)`` where
    ``dist_n`` comes from :func:`element_distances`.  Subtracting the
    center range keeps phases numerically small at long ranges.
    """
    dist = element_distances(geometry, angle_rad, range_m)
    phase = -2.0 * np.pi / geometry.wavelength_m * (dist - range_m)
    return np.exp(1j * phase) / np.sqrt(geometry.n_elements)


def generate_channel(geometry: ArrayGeometry, paths: tuple[ChannelPath, ...] | list[ChannelPath]) -> np.ndarray:
    """Single-user channel vector from its path list.

    h = sqrt(N / L) * sum_l gain_l * exp(-j 2 pi r_l / lambda) * b(theta_l, r_l)

    The common ``exp(-j 2 pi r / lambda)`` phase cancels in every rate and
    loss metric but is kept so realizations are bit-reproducible.
    """
    if len(paths) == 0:
        raise ValueError("paths must be non-empty")
    n = geometry.n_elements
    h = np.zeros(n, dtype=complex)
    for p in paths:
        phase = -2.0 * np.pi * p.range_m / geometry.wavelength_m
        h += p.gain * np.exp(1j * phase) * array_response(geometry, p.angle_rad, p.range_m)
    return np.sqrt(n / len(paths)) * h


def _path_rng(seed: int, trial: int, user: int, path: int) -> np.random.Generator:
    # Counter-style keying: every (seed, trial, user, path) gets its own
    # stream, so trials can run on any number of workers in any order.
    return np.random.default_rng([seed, trial, user, path])


def sample_scenario(config: ScenarioConfig, seed: int, trial: int = 0) -> ChannelRealization:
    """Draw one multiuser channel realization.

    Deterministic for a fixed (seed, trial): path parameters come from
    independent keyed streams, one per (user, path), so results do not
    depend on evaluation order or worker count.
    """
    geometry = config.geometry
    users = []
    columns = []
    for k in range(config.n_users):
        paths = []
        for ell in range(config.n_paths):
            rng = _path_rng(seed, trial, k, ell)
            re, im = rng.standard_normal(2)
            gain = complex(re, im) / np.sqrt(2.0)
            sin_theta = rng.uniform(-1.0, 1.0)
            r = rng.uniform(config.r_min_m, config.r_max_m)
            paths.append(ChannelPath(gain=gain, angle_rad=math.asin(sin_theta), range_m=r))
        users.append(tuple(paths))
        columns.append(generate_channel(geometry, paths))
    h = np.column_stack(columns)
    h.setflags(write=False)
    return ChannelRealization(geometry=geometry, paths=tuple(users), h=h)


def subarray_approximation(
    geometry: ArrayGeometry, angle_rad: float, range_m: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per-subarray plane-wave approximation of the near-field response.

    Each subarray sees the point from its own center, at the local angle
    given by the spherical geometry; stacking the per-subarray far-field
    steering vectors approximates the exact response up to a per-subarray
    phase.

    Returns
    -------
    local_angles : ndarray of shape (n_sub,)
        Local incident angle at each subarray center, radians from broadside.
    stacked : ndarray of shape (n_elements,)
        Concatenation of the n_sub far-field steering vectors, normalized to
        unit overall norm.
    """
    if range_m <= 0:
        raise ValueError("range_m must be strictly positive")
    centers = geometry.subarray_centers_m
    dx = range_m * math.sin(angle_rad) - centers
    dy = range_m * math.cos(angle_rad)
    local_angles = np.arctan2(dx, dy)
    blocks = [steering_vector(geometry.n_a, math.sin(a)) for a in local_angles]
    stacked = np.concatenate(blocks) / np.sqrt(geometry.n_sub)
    return local_angles, stacked


def max_phase_error(geometry: ArrayGeometry, range_m: float) -> tuple[float, bool]:
    """Worst-case plane-wave phase error of one subarray at the given range.

    The path-difference bound across a subarray of aperture
    ``D = (n_a - 1) * spacing`` is ``D^2 / (8 r)``, giving a phase error
    ``2 pi D^2 / (8 r lambda)``.  The second return value reports whether
    the error is below pi/8, the usual negligibility threshold.
    """
    if range_m <= 0:
        raise ValueError("range_m must be strictly positive")
    d_sub = geometry.subarray_aperture_m
    delta_phi = 2.0 * np.pi * d_sub**2 / (8.0 * range_m) / geometry.wavelength_m
    return delta_phi, bool(delta_phi < PLANE_WAVE_PHASE_LIMIT)
