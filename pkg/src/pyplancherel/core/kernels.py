"""Correlation kernels on discrete ground sets.

`Kernel` is the base class; each family subclasses it and provides either a
`basis` (finite-rank projections, K = ΦΦᵀ) or its own `_block`. Gram matrices
are symmetrized from the upper triangle so that K(x, y) = K(y, x) exactly.
"""
import dataclasses
import logging
import math
from typing import Iterable

import numpy as np
import numpy.typing as npt
from scipy import integrate, special

from pyplancherel.core import orthopoly
from pyplancherel.core.errors import DomainError, GuardError
from pyplancherel.core.lattice import Site

_LOG = logging.getLogger(__name__)

HERMITE_S_GUARD = 40.0
HERMITE_SITE_GUARD = 300

# Relative slack that closes spectral intervals up to eigensolver accuracy.
_INTERVAL_SLACK = 1e-9

FloatArray = orthopoly.FloatArray
IntArray = npt.NDArray[np.int64]


@dataclasses.dataclass(frozen=True, slots=True)
class GroundSet:
    """A lattice interval [low, high]; None marks an unbounded side.

    'truncation' is the last site used when an infinite ground set must be cut
    to a finite one (sampling, traces).
    """

    low: int | None
    high: int | None
    truncation: int | None = None

    def check(self, sites: IntArray):
        if sites.size == 0:
            return
        if self.low is not None and sites.min() < self.low:
            raise DomainError(f"site {sites.min()} is below {self.low}")
        if self.high is not None and sites.max() > self.high:
            raise DomainError(f"site {sites.max()} is above {self.high}")

    def sites(self) -> IntArray:
        """Returns the finite (or truncated) ground set."""
        high = self.high if self.high is not None else self.truncation
        if self.low is None or high is None:
            raise DomainError("ground set has no finite truncation")
        return np.arange(self.low, high + 1)


def _as_sites(sites: Iterable[Site]) -> IntArray:
    return np.asarray(list(sites), dtype=np.int64)


@dataclasses.dataclass(frozen=True, slots=True)
class Kernel:
    """Base kernel class, to be subclassed per family.

    Subclasses implement 'ground' and either 'basis' (a finite-rank projection
    K(x, y) = Σ_m φ_m(x)φ_m(y)) or '_block'.
    """

    @property
    def ground(self) -> GroundSet:
        raise NotImplementedError

    @property
    def rank(self) -> int | None:
        return None

    def basis(self, sites: IntArray) -> FloatArray:
        """Returns Φ with Φ[i, m] = φ_m(sites[i]), for finite-rank projections."""
        raise NotImplementedError(f"{type(self).__name__} has no finite basis")

    def _block(self, xs: IntArray, ys: IntArray) -> FloatArray:
        sites, inverse = np.unique(np.concatenate([xs, ys]), return_inverse=True)
        phi = self.basis(sites)
        return phi[inverse[: xs.size]] @ phi[inverse[xs.size :]].T

    def matrix(self, sites: Iterable[Site]) -> FloatArray:
        """Returns the Gram matrix [K(x_i, x_j)] over 'sites'."""
        sites = _as_sites(sites)
        self.ground.check(sites)
        if sites.size == 0:
            return np.zeros((0, 0))
        block = self._block(sites, sites)
        return np.triu(block) + np.triu(block, 1).T

    def evaluate(self, x: Site, y: Site) -> float:
        """Returns K(x, y), evaluated with the arguments in increasing order."""
        low, high = sorted((x, y))
        sites = np.array([low, high], dtype=np.int64)
        self.ground.check(sites)
        return float(self._block(sites[:1], sites[1:])[0, 0])


@dataclasses.dataclass(frozen=True, slots=True)
class CharlierKernel(Kernel):
    """K^ch_{N,θ}(x, y) = Σ_{m<N} C̃_m(x; θ)C̃_m(y; θ) on Z_+."""

    N: int
    theta: float

    def __post_init__(self):
        if self.N < 1:
            raise DomainError(f"N must be positive, got {self.N}")
        if not self.theta > 0:
            raise DomainError(f"θ must be positive, got {self.theta}")

    @property
    def ground(self) -> GroundSet:
        # The top particle sits at λ_1 + N - 1.
        return GroundSet(0, None, orthopoly.charlier_cutoff(self.theta) + self.N)

    @property
    def rank(self) -> int:
        return self.N

    def basis(self, sites: IntArray) -> FloatArray:
        top = int(sites.max())
        if top < self.N:
            # Self-duality: degrees up to 'top' at the points 0..N-1.
            table = orthopoly.charlier_functions(top, np.arange(self.N), self.theta)
            return table[sites]
        return orthopoly.charlier_functions(self.N - 1, sites, self.theta).T


@dataclasses.dataclass(frozen=True, slots=True)
class KrawtchoukKernel(Kernel):
    """K^kr(x, y) = Σ_{m<N} K̃_m(x; p, L)K̃_m(y; p, L) on {0..L}."""

    N: int
    p: float
    L: int

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise DomainError(f"p must lie in (0, 1), got {self.p}")
        if not 1 <= self.N <= self.L + 1:
            raise DomainError(f"need 1 <= N <= L+1, got N={self.N}, L={self.L}")

    @property
    def ground(self) -> GroundSet:
        return GroundSet(0, self.L)

    @property
    def rank(self) -> int:
        return self.N

    def basis(self, sites: IntArray) -> FloatArray:
        top = int(sites.max())
        if top < self.N:
            table = orthopoly.krawtchouk_functions(
                top, np.arange(self.N), self.p, self.L
            )
            return table[sites]
        return orthopoly.krawtchouk_functions(self.N - 1, sites, self.p, self.L).T


@dataclasses.dataclass(frozen=True, slots=True)
class HermiteKernel(Kernel):
    """The discrete Hermite kernel K^he_s on Z_+.

    With a = s/√2 and h_n the orthonormal Hermite functions at a, for x >= y:

        K(x, y) = 2^{-1/2} Σ_k g_k h_{x-1-k} h_{y-k} + [x = y] erfc(a)/2,
        g_k = √(y! (x-k-1)! / ((y-k)! x!)),  k = 0..min(y, x-1),

    which is the descent I(x, y) = e^{-a²}H_{x-1}H_y + 2y I(x-1, y-1) of the
    defining integral written in orthonormal functions.
    """

    s: float

    def __post_init__(self):
        if not abs(self.s) <= HERMITE_S_GUARD:
            raise GuardError(f"|s| must not exceed {HERMITE_S_GUARD}, got {self.s}")

    @property
    def ground(self) -> GroundSet:
        return GroundSet(0, HERMITE_SITE_GUARD, HERMITE_SITE_GUARD)

    def _block(self, xs: IntArray, ys: IntArray) -> FloatArray:
        a = self.s / math.sqrt(2.0)
        top = int(max(xs.max(), ys.max()))
        h = orthopoly.hermite_functions(top, [a])[:, 0]
        tail = 0.5 * special.erfc(a)
        block = np.empty((xs.size, ys.size))
        for i, x_value in enumerate(xs):
            for j, y_value in enumerate(ys):
                x, y = max(x_value, y_value), min(x_value, y_value)
                block[i, j] = _hermite_entry(h, tail, int(x), int(y))
        return block


def _hermite_entry(h: FloatArray, tail: float, x: int, y: int) -> float:
    value = tail if x == y else 0.0
    if x == 0:
        return value
    k = np.arange(min(y, x - 1) + 1)
    log_g = 0.5 * (
        special.gammaln(y + 1)
        - special.gammaln(y - k + 1)
        + special.gammaln(x - k)
        - special.gammaln(x + 1)
    )
    terms = np.exp(log_g) * h[x - 1 - k] * h[y - k]
    return value + float(terms.sum()) / math.sqrt(2.0)


@dataclasses.dataclass(frozen=True, slots=True)
class SineKernel(Kernel):
    """K(x, y) = sin(φ(x-y))/(π(x-y)), with φ/π on the diagonal, on Z."""

    phi: float

    def __post_init__(self):
        if not 0.0 <= self.phi <= math.pi:
            raise DomainError(f"φ must lie in [0, π], got {self.phi}")

    @property
    def ground(self) -> GroundSet:
        return GroundSet(None, None)

    def _block(self, xs: IntArray, ys: IntArray) -> FloatArray:
        distance = (xs[:, None] - ys[None, :]).astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            block = np.sin(self.phi * distance) / (math.pi * distance)
        return np.where(distance == 0, self.phi / math.pi, block)


@dataclasses.dataclass(frozen=True, slots=True, eq=False)
class SpectralProjectionKernel(Kernel):
    """Projection of a truncated Jacobi operator onto a closed eigenvalue interval."""

    operator: orthopoly.JacobiOperator
    low: float
    high: float
    spectrum: orthopoly.Eigensystem = dataclasses.field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        slack = _INTERVAL_SLACK * max(self.operator.norm_bound(), 1.0)
        spectrum = orthopoly.eigensystem(
            self.operator, (self.low - slack, self.high + slack)
        )
        _LOG.debug(
            "projection of %s onto [%g, %g] has rank %d",
            self.operator.family,
            self.low,
            self.high,
            spectrum.values.size,
        )
        object.__setattr__(self, "spectrum", spectrum)

    @property
    def ground(self) -> GroundSet:
        origin = self.operator.origin
        return GroundSet(origin, origin + self.operator.cutoff - 1)

    @property
    def rank(self) -> int:
        return int(self.spectrum.values.size)

    def basis(self, sites: IntArray) -> FloatArray:
        return self.spectrum.vectors[sites - self.operator.origin]


def charlier_kernel(N: int, theta: float) -> CharlierKernel:
    return CharlierKernel(N, theta)


def krawtchouk_kernel(N: int, p: float, L: int) -> KrawtchoukKernel:
    return KrawtchoukKernel(N, p, L)


def hermite_kernel(s: float) -> HermiteKernel:
    return HermiteKernel(s)


def sine_kernel(phi: float) -> SineKernel:
    return SineKernel(phi)


def spectral_projection_kernel(
    operator: orthopoly.JacobiOperator, interval: tuple[float, float]
) -> SpectralProjectionKernel:
    """Returns P = Σ_{μ_i ∈ [a, b]} v_i v_iᵀ; infinite ends are allowed."""
    low, high = interval
    return SpectralProjectionKernel(operator, low, high)


def bulk_bound(p: float) -> float:
    """Returns c_max = 2√(p(1-p)), the bound on admissible bulk positions c."""
    if not 0 < p < 1:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    return 2.0 * math.sqrt(p * (1.0 - p))


def phi_from_cp(c: float, p: float) -> float:
    """Returns φ = arccos(c(1-2p)/(2√((1-c²)p(1-p)))) for |c| < 2√(p(1-p))."""
    if not abs(c) < bulk_bound(p):
        raise DomainError(f"|c|={abs(c)} must be below 2√(p(1-p))={bulk_bound(p)}")
    argument = c * (1 - 2 * p) / (2 * math.sqrt((1 - c * c) * p * (1 - p)))
    return math.acos(min(1.0, max(-1.0, argument)))


def _cd_prefactor(a: float, x: int, y: int, constant: float) -> float:
    return math.exp(
        -0.5
        * (
            math.log(constant)
            + special.gammaln(x + 1)
            + special.gammaln(y + 1)
            + (x + y) * math.log(2.0)
        )
        - a * a
    )


def hermite_kernel_form(s: float, x: Site, y: Site, form: str = "integral") -> float:
    """Evaluates K^he_s(x, y) through one of its equivalent expressions.

    Forms:
        integral: the descent of `HermiteKernel`.
        quadrature: `hermite_kernel_quadrature`.
        cd34: (π x!y!2^{x+y})^{-1/2} e^{-a²} [x H_{x-1}H_y - y H_x H_{y-1}]/(x-y).
        cd35corrected: (4π x!y!2^{x+y})^{-1/2} e^{-a²} [H_x H_{y+1} - H_{x+1}H_y]/(x-y).
        cd35printed: the same with the numerator reversed; it equals -K.

    The Christoffel-Darboux forms are defined off the diagonal only.
    """
    match form:
        case "integral":
            return hermite_kernel(s).evaluate(x, y)
        case "quadrature":
            return hermite_kernel_quadrature(s, x, y)
        case "cd34" | "cd35corrected" | "cd35printed":
            pass
        case _:
            raise DomainError(f"unknown Hermite kernel form {form!r}")
    if x == y:
        raise DomainError(f"form {form} is undefined on the diagonal")
    if min(x, y) < 0 or max(x, y) > HERMITE_SITE_GUARD:
        raise DomainError(f"sites ({x}, {y}) outside [0, {HERMITE_SITE_GUARD}]")
    a = s / math.sqrt(2.0)
    H = orthopoly.hermite_polynomials(max(x, y) + 1, [a])[:, 0]
    if form == "cd34":
        numerator = (x * H[x - 1] * H[y] if x else 0.0) - (
            y * H[x] * H[y - 1] if y else 0.0
        )
        return _cd_prefactor(a, x, y, math.pi) * numerator / (x - y)
    numerator = H[x] * H[y + 1] - H[x + 1] * H[y]
    if form == "cd35printed":
        numerator = -numerator
    return _cd_prefactor(a, x, y, 4 * math.pi) * numerator / (x - y)


def hermite_quadrature_matrix(s: float, sites: Iterable[Site]) -> FloatArray:
    """Integrates ∫_s^∞ h_x(t/√2)h_y(t/√2) dt/√2 for all pairs of 'sites' at once.

    The upper limit sits well beyond the oscillatory zone of the highest degree,
    where the integrand is below 1e-13.
    """
    sites = _as_sites(sites)
    top = int(sites.max())
    upper = max(s, math.sqrt(2.0) * (math.sqrt(2.0 * top + 1.0) + 9.0))

    def integrand(t: float) -> FloatArray:
        h = orthopoly.hermite_functions(top, [t / math.sqrt(2.0)])[sites, 0]
        return np.outer(h, h) / math.sqrt(2.0)

    if upper <= s:
        return np.zeros((sites.size, sites.size))
    value, _ = integrate.quad_vec(
        integrand, s, upper, epsabs=1e-13, epsrel=1e-12, norm="max"
    )
    return value


def hermite_kernel_quadrature(s: float, x: Site, y: Site) -> float:
    """Adaptive-quadrature value of K^he_s(x, y), independent of the descent."""
    return float(hermite_quadrature_matrix(s, [x, y])[0, 1])
