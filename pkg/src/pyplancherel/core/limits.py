"""Edge and bulk limit sweeps, limit-shape curves and sampled diagram profiles."""
import concurrent.futures
import dataclasses
import logging
import math
from typing import Callable, Iterable, Literal, TypeAlias

import numpy as np
import numpy.typing as npt
from scipy import integrate

from pyplancherel.core import kernels, orthopoly, partitions
from pyplancherel.core.errors import DomainError, NumericError
from pyplancherel.core.lattice import Site, Window, span, window

_LOG = logging.getLogger(__name__)

DEFAULT_EDGE_WINDOW: Window = span(0, 10)
DEFAULT_BULK_OFFSETS: Window = span(-5, 5)
DEFAULT_EDGE_GRID: tuple[int, ...] = (100, 400, 1600, 6400)
DEFAULT_BULK_GRID: tuple[int, ...] = (25, 100, 400)

EDGE_WINDOW_GUARD = 30

# Quadrature tolerances for the mixture limit shape.
_RETURN_TOLERANCE = 1e-6
_AREA_TOLERANCE = 1e-5

FloatArray = orthopoly.FloatArray


@dataclasses.dataclass(frozen=True, slots=True)
class CharlierEdge:
    """θ(N) = N + s√N, i.e. poissonization parameter ν(N) = N² + sN^{3/2}."""

    s: float

    def theta(self, N: int) -> float:
        return N + self.s * math.sqrt(N)

    def nu(self, N: int) -> float:
        return N * self.theta(N)


@dataclasses.dataclass(frozen=True, slots=True)
class KrawtchoukBulk:
    """L = 2N - 1 and the window is shifted to N + round(cN)."""

    c: float
    p: float

    def __post_init__(self):
        # Validates |c| < 2√(p(1-p)).
        kernels.phi_from_cp(self.c, self.p)

    @property
    def phi(self) -> float:
        return kernels.phi_from_cp(self.c, self.p)

    def shift(self, N: int) -> int:
        return N + round(self.c * N)


Regime: TypeAlias = CharlierEdge | KrawtchoukBulk


@dataclasses.dataclass(frozen=True, slots=True)
class RegimeSpec:
    regime: Regime
    grid: tuple[int, ...]
    window: Window

    def __post_init__(self):
        grid = tuple(int(N) for N in self.grid)
        if not grid or any(a >= b for a, b in zip(grid, grid[1:])):
            raise DomainError(f"N-grid must be nonempty and increasing: {grid}")
        if grid[0] < 1:
            raise DomainError(f"N-grid must be positive: {grid}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "window", window(self.window))


@dataclasses.dataclass(frozen=True, slots=True)
class ConvergenceReport:
    """Sup-norm distances on the window between finite-N kernels and the limit."""

    regime: RegimeSpec
    entries: tuple[tuple[int, float], ...]
    limit: str

    @property
    def distances(self) -> tuple[float, ...]:
        return tuple(distance for _, distance in self.entries)

    @property
    def passed(self) -> bool:
        """Whether the distance at the largest N is below half that at the smallest."""
        return self.distances[-1] < self.distances[0] / 2

    @property
    def decreasing(self) -> bool:
        return all(a > b for a, b in zip(self.distances, self.distances[1:]))


def _sweep(
    grid: tuple[int, ...], distance: Callable[[int], float], max_workers: int | None
) -> tuple[tuple[int, float], ...]:
    if max_workers is None or max_workers <= 1:
        distances = [distance(N) for N in grid]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers) as executor:
            distances = list(executor.map(distance, grid))
    for N, value in zip(grid, distances):
        if not math.isfinite(value):
            raise NumericError(f"non-finite distance at N={N}", index=grid.index(N))
    return tuple(zip(grid, distances))


def charlier_edge_sweep(
    s: float,
    grid: Iterable[int] = DEFAULT_EDGE_GRID,
    sites: Iterable[Site] = DEFAULT_EDGE_WINDOW,
    max_workers: int | None = None,
) -> ConvergenceReport:
    """Measures max |K^ch_{N,θ(N)} - K^he_s| on a window of Z_+ along an N-grid."""
    spec = RegimeSpec(CharlierEdge(s), tuple(grid), tuple(sites))
    if len(spec.window) > EDGE_WINDOW_GUARD or spec.window[0] < 0:
        raise DomainError("edge windows are subsets of Z_+ with at most 30 sites")
    limit = kernels.hermite_kernel(s)
    target = limit.matrix(spec.window)

    def distance(N: int) -> float:
        theta = spec.regime.theta(N)
        if theta <= 0:
            raise DomainError(f"θ(N) = {theta} is not positive at N={N}")
        approximation = kernels.charlier_kernel(N, theta).matrix(spec.window)
        value = float(np.max(np.abs(approximation - target)))
        _LOG.debug("edge s=%g N=%d distance=%.3e", s, N, value)
        return value

    entries = _sweep(spec.grid, distance, max_workers)
    report = ConvergenceReport(spec, entries, repr(limit))
    _LOG.info("edge sweep s=%g: passed=%s", s, report.passed)
    return report


def krawtchouk_bulk_sweep(
    c: float,
    p: float,
    grid: Iterable[int] = DEFAULT_BULK_GRID,
    offsets: Iterable[Site] = DEFAULT_BULK_OFFSETS,
    max_workers: int | None = None,
) -> ConvergenceReport:
    """Measures max |K^kr_{p,2N-1}(N + a_N + ·) - K^dsine_φ| along an N-grid.

    N values whose shifted window leaves {0..2N-1} (c close to the admissible
    bound at small N) are skipped; the sweep starts at the first N that fits.
    """
    regime = KrawtchoukBulk(c, p)
    spec = RegimeSpec(regime, tuple(grid), tuple(offsets))
    fitting = tuple(N for N in spec.grid if _bulk_window_fits(regime, spec.window, N))
    if not fitting:
        raise DomainError(f"shifted window leaves {{0..2N-1}} for all N in {spec.grid}")
    if fitting != spec.grid:
        skipped = sorted(set(spec.grid) - set(fitting))
        _LOG.info("bulk sweep c=%g: window does not fit at N=%s", c, skipped)
        spec = dataclasses.replace(spec, grid=fitting)
    limit = kernels.sine_kernel(regime.phi)
    target = limit.matrix(spec.window)

    def distance(N: int) -> float:
        size = 2 * N - 1
        sites = np.asarray(spec.window) + regime.shift(N)
        approximation = kernels.krawtchouk_kernel(N, p, size).matrix(sites)
        value = float(np.max(np.abs(approximation - target)))
        _LOG.debug("bulk c=%g p=%g N=%d distance=%.3e", c, p, N, value)
        return value

    entries = _sweep(spec.grid, distance, max_workers)
    report = ConvergenceReport(spec, entries, repr(limit))
    _LOG.info("bulk sweep c=%g p=%g: passed=%s", c, p, report.passed)
    return report


def _bulk_window_fits(regime: KrawtchoukBulk, offsets: Window, N: int) -> bool:
    shift = regime.shift(N)
    return shift + offsets[0] >= 0 and shift + offsets[-1] <= 2 * N - 1


def edge_interval_left_end(N: int, s: float) -> float:
    """Returns (θ - N + 1)/√θ with θ = N + s√N, which tends to s."""
    theta = CharlierEdge(s).theta(N)
    if theta <= 0:
        raise DomainError(f"θ(N) = {theta} is not positive")
    return (theta - N + 1) / math.sqrt(theta)


def sine_spectral_interval(c: float, p: float) -> tuple[float, float]:
    """Returns the limiting spectral interval of the shifted Krawtchouk operator.

    Its left end equals 2cos φ(c, p).
    """
    kernels.phi_from_cp(c, p)
    scale = math.sqrt((1 - c * c) * p * (1 - p))
    return c * (1 - 2 * p) / scale, (c * (1 - 2 * p) + 1) / scale


def symmetric_grid(half_width: float, points: int) -> FloatArray:
    """Returns 'points' equally spaced values on [-w, w], with 0 exact when odd."""
    if points < 2:
        raise DomainError(f"need at least 2 grid points, got {points}")
    return (2.0 * np.arange(points) - (points - 1)) / (points - 1) * half_width


def _check_omega_domain(u: FloatArray):
    if np.any(np.abs(u) > 2.0):
        raise DomainError("Ω is defined on [-2, 2]")


def omega(u: npt.ArrayLike) -> FloatArray:
    """Ω(u) = (2/π)(u arcsin(u/2) + √(4 - u²))."""
    u = np.asarray(u, dtype=float)
    _check_omega_domain(u)
    return 2.0 / np.pi * (u * np.arcsin(u / 2.0) + np.sqrt(4.0 - u * u))


def omega_derivative(u: npt.ArrayLike) -> FloatArray:
    """Ω′(u) = (2/π) arcsin(u/2)."""
    u = np.asarray(u, dtype=float)
    _check_omega_domain(u)
    return 2.0 / np.pi * np.arcsin(u / 2.0)


def omega_density(u: npt.ArrayLike) -> FloatArray:
    """Returns (1 + Ω′(u))/2, the limiting particle density."""
    return (1.0 + omega_derivative(u)) / 2.0


@dataclasses.dataclass(frozen=True, slots=True, eq=False)
class LimitCurve:
    """A sampled curve v(u) on [u_0, u_-1].

    Outside the sampled range the boundary follows the coordinate axes
    (v = |u|), or, for diagrams filling more than half of the unit box, its far
    edges (v = 2 - |u| up to |u| = 1).
    """

    name: str
    u: FloatArray
    v: FloatArray
    exterior: Literal["axes", "box"] = "axes"

    def evaluate(self, u: npt.ArrayLike) -> FloatArray:
        u = np.asarray(u, dtype=float)
        inside = np.interp(u, self.u, self.v)
        outside = np.abs(u)
        if self.exterior == "box":
            outside = np.where(outside <= 1.0, 2.0 - outside, outside)
        return np.where((u < self.u[0]) | (u > self.u[-1]), outside, inside)


def omega_curve(points: int = 101) -> LimitCurve:
    """Returns the Plancherel limit shape Ω sampled on [-2, 2]."""
    u = symmetric_grid(2.0, points)
    return LimitCurve("omega", u, omega(u))


def _mix_derivative(c: FloatArray | float, p: float) -> FloatArray:
    c = np.asarray(c, dtype=float)
    numerator = c * (1 - 2 * p)
    denominator = 2 * np.sqrt(np.clip((1 - c * c) * p * (1 - p), 0.0, None))
    # At p = 1/2 the numerator vanishes identically, including at c = ±1.
    with np.errstate(divide="ignore", invalid="ignore"):
        argument = np.where(numerator == 0, 0.0, numerator / denominator)
    return 1.0 - 2.0 / np.pi * np.arccos(np.clip(argument, -1.0, 1.0))


def mix_derivative(c: npt.ArrayLike, p: float) -> FloatArray:
    """Returns F′(c) = 1 - 2φ(c, p)/π on the admissible range |c| <= c_max."""
    c = np.asarray(c, dtype=float)
    if np.any(np.abs(c) > kernels.bulk_bound(p)):
        raise DomainError("F′ is defined on |c| <= 2√(p(1-p))")
    return _mix_derivative(c, p)


def limit_shape_F(p: float, points: int = 201) -> LimitCurve:
    """Integrates F′ = 1 - 2φ/π into the limit shape of the mixture measure.

    The curve starts on the coordinate axes, F(-c_max) = c_max, when p <= 1/2;
    for p > 1/2 the diagram covers more than half of the box and the curve
    starts on its far edge, F(-c_max) = 2 - c_max.

    Raises:
        NumericError: F fails to return to its anchor at c_max, or the enclosed
            area differs from p.
    """
    if points < 100:
        raise DomainError(f"limit shapes need at least 100 points, got {points}")
    bound = kernels.bulk_bound(p)
    anchor = bound if p <= 0.5 else 2.0 - bound
    u = symmetric_grid(bound, points)

    def derivative(c: float) -> float:
        return float(_mix_derivative(c, p))

    increments = [
        integrate.quad(derivative, a, b, epsabs=1e-13, epsrel=1e-10, limit=200)[0]
        for a, b in zip(u, u[1:])
    ]
    v = anchor + np.concatenate([[0.0], np.cumsum(increments)])
    if abs(v[-1] - anchor) > _RETURN_TOLERANCE:
        raise NumericError(f"F(c_max) = {v[-1]!r} does not return to {anchor!r}")
    moment, _ = integrate.quad(
        lambda c: c * derivative(c), -bound, bound, epsabs=1e-13, limit=400
    )
    # ∫(F - |u|) over [-c_max, c_max] by parts, plus the box corners for p > 1/2.
    area = 0.5 * (2.0 * bound * anchor - moment - bound * bound)
    if p > 0.5:
        area += (1.0 - bound) ** 2
    if abs(area - p) > _AREA_TOLERANCE:
        raise NumericError(f"limit shape area {area!r} differs from p={p}")
    _LOG.debug("limit shape p=%g: c_max=%g area=%.12f", p, bound, area)
    return LimitCurve(f"mixf(p={p})", u, v, "axes" if p <= 0.5 else "box")


def profile_from_partition(
    partition: partitions.Partition, scale: float = 1.0
) -> LimitCurve:
    """Returns the boundary v(u) of a diagram in rotated coordinates, over 'scale'.

    At integer u, v(u) = u + 2 #{particles λ_i - i >= u}; the diagram's corners
    all sit at integer u, so linear interpolation is exact.
    """
    length = partition.length
    first = partition.part(1)
    u = np.arange(-length - 1, first + 2)
    shifted = np.array([part - i for i, part in enumerate(partition.parts, start=1)])
    counts = (shifted[None, :] >= u[:, None]).sum(axis=1) if length else 0
    v = u + 2 * (counts + np.maximum(0, -u - length))
    return LimitCurve(str(partition) or "∅", u / scale, v / scale)


def profile_from_sample(
    config: partitions.ParticleConfiguration, N: int
) -> LimitCurve:
    """Returns the profile of the diagram encoded by a configuration, scaled by 1/N."""
    if config.count != N:
        raise DomainError(f"expected {N} points, got {config.count}")
    return profile_from_partition(partitions.from_config(config), N)


def mean_profile(
    configs: Iterable[partitions.ParticleConfiguration], N: int, grid: npt.ArrayLike
) -> FloatArray:
    """Averages sampled profiles on a grid of u."""
    grid = np.asarray(grid, dtype=float)
    profiles = [profile_from_sample(config, N).evaluate(grid) for config in configs]
    if not profiles:
        raise DomainError("no configurations to average")
    return np.mean(profiles, axis=0)
