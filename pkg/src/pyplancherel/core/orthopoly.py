"""Hermite, Charlier and Krawtchouk polynomials, normalized lattice functions and
their Jacobi operators.

Normalized functions are evaluated with degree recurrences rescaled so that the
oscillatory region stays O(1), and weight factors are carried in log space:

    c_{m+1} = [(m + θ - x) c_m / √θ - √m c_{m-1}] / √(m+1),
    C̃_m(x;θ) = exp(½(x log θ - log x! - θ)) · c_m(x).

Along the degree, each column is run upwards only up to its turning point; past
it the functions decay in m and are taken from a downward recurrence matched
there. Both families are self-dual (C̃_m(x) = C̃_x(m), K̃_m(x) = K̃_x(m)), so a
table of functions can be produced along whichever index is shorter.
"""
import dataclasses
import logging
import math
from fractions import Fraction
from typing import TypeAlias

import numpy as np
import numpy.typing as npt
from scipy import linalg, special

from pyplancherel.core.errors import DomainError, GuardError, NumericError

_LOG = logging.getLogger(__name__)

HERMITE_DEGREE_GUARD = 400
EIGEN_CUTOFF_GUARD = 20000

# Accumulated magnitude at which the rescaled recurrences renormalize.
_RESCALE_THRESHOLD = 1e100

# Residual above which an eigenpair is reported as lost, relative to ‖J‖.
_RESIDUAL_TOLERANCE = 1e-10

FloatArray: TypeAlias = npt.NDArray[np.float64]


def hermite(n: int, t: float) -> float:
    """Returns the physicists' Hermite polynomial H_n(t).

    Uses H_{n+1}(t) = 2t H_n(t) - 2n H_{n-1}(t) seeded by H_0 = 1, H_1 = 2t.
    E.g: hermite(2, 0.0) => -2.0
    """
    return float(hermite_polynomials(n, np.array([t]))[n, 0])


def hermite_polynomials(n_max: int, t: npt.ArrayLike) -> FloatArray:
    """Returns the table H_n(t_j) for n = 0..n_max, shape (n_max + 1, len(t))."""
    if not 0 <= n_max <= HERMITE_DEGREE_GUARD:
        raise GuardError(f"Hermite degree {n_max} outside [0, {HERMITE_DEGREE_GUARD}]")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    table = np.empty((n_max + 1, t.size))
    table[0] = 1.0
    if n_max >= 1:
        table[1] = 2.0 * t
    for n in range(1, n_max):
        table[n + 1] = 2.0 * t * table[n] - 2.0 * n * table[n - 1]
    return table


def hermite_functions(n_max: int, t: npt.ArrayLike) -> FloatArray:
    """Returns the orthonormal Hermite functions h_n(t) = H_n(t)e^{-t²/2}/√(2^n n! √π).

    Shape (n_max + 1, len(t)); computed by the normalized three-term recurrence,
    so no factorials or powers of two are formed.
    """
    if not 0 <= n_max <= HERMITE_DEGREE_GUARD:
        raise GuardError(f"Hermite degree {n_max} outside [0, {HERMITE_DEGREE_GUARD}]")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    table = np.empty((n_max + 1, t.size))
    table[0] = np.pi**-0.25 * np.exp(-0.5 * t * t)
    if n_max >= 1:
        table[1] = math.sqrt(2.0) * t * table[0]
    for n in range(1, n_max):
        table[n + 1] = (
            math.sqrt(2.0 / (n + 1)) * t * table[n]
            - math.sqrt(n / (n + 1)) * table[n - 1]
        )
    return table


def _check_site(x: int, high: int | None = None):
    if x < 0 or (high is not None and x > high):
        raise DomainError(f"site {x} outside the lattice")


def charlier(m: int, x: int, theta: float | Fraction) -> float:
    """Returns the Charlier polynomial C_m(x; θ), normalized by C_m(0) = 1.

    Runs θC_{m+1} = (m + θ - x)C_m - mC_{m-1} in exact rational arithmetic
    (θ is taken at its exact binary value), then rounds once.
    E.g: charlier(2, 1, 2) => 0.0
    """
    if not theta > 0:
        raise DomainError(f"θ must be positive, got {theta}")
    if m < 0:
        raise DomainError(f"degree must be nonnegative, got {m}")
    _check_site(x)
    theta = Fraction(theta)
    previous, current = Fraction(0), Fraction(1)
    for k in range(m):
        previous, current = current, ((k + theta - x) * current - k * previous) / theta
    return float(current)


def _check_krawtchouk(p: float | Fraction, size: int):
    if not 0 < p < 1:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if size < 1:
        raise DomainError(f"L must be positive, got {size}")


def krawtchouk(m: int, x: int, p: float | Fraction, size: int) -> float:
    """Returns the Krawtchouk polynomial K_m(x; p, L), normalized by K_m(0) = 1.

    Runs p(L-m)K_{m+1} = [p(L-m) + m(1-p) - x]K_m - m(1-p)K_{m-1} in exact
    rational arithmetic, then rounds once.
    E.g: krawtchouk(1, 4, 0.5, 4) => -1.0
    """
    _check_krawtchouk(p, size)
    if not 0 <= m <= size:
        raise DomainError(f"degree {m} outside [0, {size}]")
    _check_site(x, size)
    p = Fraction(p)
    previous, current = Fraction(0), Fraction(1)
    for k in range(m):
        step = p * (size - k)
        previous, current = current, (
            (step + k * (1 - p) - x) * current - k * (1 - p) * previous
        ) / step
    return float(current)


def charlier_weight(x: npt.ArrayLike, theta: float) -> FloatArray:
    """Returns log W^ch_θ(x) = x log θ - log x!."""
    x = np.asarray(x, dtype=float)
    return x * math.log(theta) - special.gammaln(x + 1)


def krawtchouk_weight(x: npt.ArrayLike, p: float, size: int) -> FloatArray:
    """Returns log W^kr_{p,L}(x) = log C(L,x) + x log p + (L-x) log(1-p)."""
    x = np.asarray(x, dtype=float)
    return (
        special.gammaln(size + 1)
        - special.gammaln(x + 1)
        - special.gammaln(size - x + 1)
        + x * math.log(p)
        + (size - x) * math.log1p(-p)
    )


def charlier_norm_sq(m: int, theta: float) -> float:
    """Returns ‖C_m‖² = θ^{-m} e^θ m!."""
    return math.exp(theta - m * math.log(theta) + special.gammaln(m + 1))


def krawtchouk_norm_sq(m: int, p: float, size: int) -> float:
    """Returns ‖K_m‖² = ((1-p)/p)^m / C(L, m) with respect to the normalized weight."""
    return math.exp(
        m * (math.log1p(-p) - math.log(p))
        - special.gammaln(size + 1)
        + special.gammaln(m + 1)
        + special.gammaln(size - m + 1)
    )


def charlier_cutoff(theta: float) -> int:
    """Returns x_max, a truncation of Z_+ leaving Poisson(θ) tail mass below 1e-14."""
    return max(80, math.ceil(theta + 12.0 * math.sqrt(theta) + 50.0))


def _rescale(
    current: FloatArray, other: FloatArray, log_scale: FloatArray
) -> tuple[FloatArray, FloatArray, FloatArray]:
    big = np.abs(current) > _RESCALE_THRESHOLD
    if not big.any():
        return current, other, log_scale
    factor = np.where(big, np.abs(current), 1.0)
    return current / factor, other / factor, log_scale + np.log(factor)


def _upward(
    m_max: int, x: FloatArray, diagonal, offdiagonal, log_start: FloatArray
) -> tuple[FloatArray, FloatArray]:
    """Runs a_m ψ_{m+1} = d_m ψ_m - a_{m-1} ψ_{m-1} upwards from ψ_{-1} = 0.

    Returns the signs and log-magnitudes of ψ_0..ψ_{m_max}; log ψ_0 = 'log_start'.
    """
    signs = np.ones((m_max + 1, x.size))
    logs = np.empty((m_max + 1, x.size))
    logs[0] = log_start
    previous, current = np.zeros(x.size), np.ones(x.size)
    log_scale = np.asarray(log_start, dtype=float).copy()
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for m in range(m_max):
            previous, current = current, (
                diagonal(m, x) * current - offdiagonal(m - 1) * previous
            ) / offdiagonal(m)
            current, previous, log_scale = _rescale(current, previous, log_scale)
            signs[m + 1] = np.sign(current)
            logs[m + 1] = np.log(np.abs(current)) + log_scale
    return signs, logs


def _downward(
    m_max: int, start: int, x: FloatArray, diagonal, offdiagonal
) -> tuple[FloatArray, FloatArray]:
    """Runs the same recurrence downwards from ψ_{start+1} = 0, ψ_start = 1.

    The result is the minimal solution up to a per-site factor; rows above
    'm_max' are not kept.
    """
    signs = np.ones((m_max + 1, x.size))
    logs = np.zeros((m_max + 1, x.size))
    following, current = np.zeros(x.size), np.ones(x.size)
    log_scale = np.zeros(x.size)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for m in range(start, 0, -1):
            following, current = current, (
                diagonal(m, x) * current - offdiagonal(m) * following
            ) / offdiagonal(m - 1)
            current, following, log_scale = _rescale(current, following, log_scale)
            if m - 1 <= m_max:
                signs[m - 1] = np.sign(current)
                logs[m - 1] = np.log(np.abs(current)) + log_scale
    return signs, logs


def _two_sided_table(
    m_max: int,
    x: FloatArray,
    diagonal,
    offdiagonal,
    log_start: FloatArray,
    turning: FloatArray,
    start: int,
) -> FloatArray:
    """Evaluates normalized functions ψ_m(x_j), m = 0..m_max, stably in m.

    Below the turning point 'turning[j]' the upward recurrence is used; above
    it ψ decays in m, and the downward (Miller) solution started at 'start' is
    matched to the upward one on the two rows at the turning point.
    """
    signs, logs = _upward(m_max, x, diagonal, offdiagonal, log_start)
    match = np.clip(np.floor(turning), 0, m_max).astype(int)
    columns = np.flatnonzero(match < m_max)
    if columns.size:
        _LOG.debug("downward recurrence on %d of %d sites", columns.size, x.size)
        down_signs, down_logs = _downward(
            m_max, max(start, m_max), x[columns], diagonal, offdiagonal
        )
        rows = np.stack([match[columns], match[columns] + 1])
        local = np.arange(columns.size)
        up_log, down_log = logs[rows, columns], down_logs[rows, local]
        up_ref, down_ref = up_log.max(axis=0), down_log.max(axis=0)
        with np.errstate(invalid="ignore", under="ignore"):
            up = signs[rows, columns] * np.exp(up_log - up_ref)
            down = down_signs[rows, local] * np.exp(down_log - down_ref)
            ratio = (up * down).sum(axis=0) / (down * down).sum(axis=0)
        tail = np.arange(m_max + 1)[:, None] > match[columns][None, :]
        shifted = down_logs + np.log(np.abs(ratio)) + up_ref - down_ref
        logs[:, columns] = np.where(tail, shifted, logs[:, columns])
        signs[:, columns] = np.where(
            tail, down_signs * np.sign(ratio), signs[:, columns]
        )
    with np.errstate(under="ignore"):
        return signs * np.exp(logs)


def _miller_margin(scale: float) -> int:
    """Extra steps beyond m_max at which a downward recurrence is started."""
    return 40 + math.ceil(30.0 * np.cbrt(scale))


def charlier_functions(m_max: int, x: npt.ArrayLike, theta: float) -> FloatArray:
    """Returns the table C̃_m(x_j; θ) for m = 0..m_max, shape (m_max + 1, len(x)).

    Past the turning point m = (√x + √θ)² the functions decay in m, and that
    part of each column is produced by a downward recurrence.
    """
    if not theta > 0:
        raise DomainError(f"θ must be positive, got {theta}")
    if m_max < 0:
        raise DomainError(f"degree must be nonnegative, got {m_max}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if (x < 0).any():
        raise DomainError("Charlier sites must be nonnegative")
    root = math.sqrt(theta)

    def diagonal(m, sites):
        return (m + theta - sites) / root

    def offdiagonal(m):
        return math.sqrt(m + 1)

    return _two_sided_table(
        m_max,
        x,
        diagonal,
        offdiagonal,
        0.5 * (charlier_weight(x, theta) - theta),
        (np.sqrt(x) + root) ** 2,
        m_max + _miller_margin((m_max + 1) * (1 + root)),
    )


def _krawtchouk_turning(x: FloatArray, p: float, size: int) -> FloatArray:
    # Upper root of (centre_m - x)² = 4p(1-p)m(L-m) as a quadratic in m.
    linear = 2 * (1 - 2 * p) * (p * size - x) - 4 * p * (1 - p) * size
    constant = (p * size - x) ** 2
    discriminant = np.clip(linear * linear - 4 * constant, 0.0, None)
    return (-linear + np.sqrt(discriminant)) / 2


def krawtchouk_functions(
    m_max: int, x: npt.ArrayLike, p: float, size: int
) -> FloatArray:
    """Returns the table K̃_m(x_j; p, L) for m = 0..m_max, shape (m_max + 1, len(x))."""
    _check_krawtchouk(p, size)
    if not 0 <= m_max <= size:
        raise DomainError(f"degree {m_max} outside [0, {size}]")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if ((x < 0) | (x > size)).any():
        raise DomainError(f"Krawtchouk sites must lie in [0, {size}]")
    root = math.sqrt(p * (1 - p))

    def diagonal(m, sites):
        return (p * (size - m) + m * (1 - p) - sites) / root

    def offdiagonal(m):
        return math.sqrt((size - m) * (m + 1))

    # Started at m = L the downward recurrence is exact, since a_L = 0.
    return _two_sided_table(
        m_max,
        x,
        diagonal,
        offdiagonal,
        0.5 * krawtchouk_weight(x, p, size),
        _krawtchouk_turning(x, p, size),
        min(size, m_max + _miller_margin(size)),
    )


def normalized_function(family: str, m: int, x: int, **params) -> float:
    """Returns C̃_m(x; θ) ("charlier", θ=) or K̃_m(x; p, L) ("krawtchouk", p=, L=).

    The recurrence runs along min(m, x) by self-duality.
    """
    low, high = sorted((m, x))
    if low < 0:
        raise DomainError(f"degree and site must be nonnegative, got ({m}, {x})")
    match family:
        case "charlier":
            return float(charlier_functions(low, [high], params["theta"])[low, 0])
        case "krawtchouk":
            return float(
                krawtchouk_functions(low, [high], params["p"], params["L"])[low, 0]
            )
    raise DomainError(f"unknown family {family!r}")


def charlier_spectrum(theta: float, count: int) -> FloatArray:
    """Returns the top 'count' eigenvalues (θ - m)/√θ of the Charlier operator."""
    return (theta - np.arange(count)) / math.sqrt(theta)


def krawtchouk_spectrum(p: float, size: int) -> FloatArray:
    """Returns the eigenvalues (pL - m)/(L√(p(1-p))), m = 0..L, in decreasing order."""
    return (p * size - np.arange(size + 1)) / (size * math.sqrt(p * (1 - p)))


@dataclasses.dataclass(frozen=True, slots=True)
class HermiteOperator:
    """b_x = 0, a_x = √(x+1)."""


@dataclasses.dataclass(frozen=True, slots=True)
class CharlierOperator:
    """b_x = -x/√θ, a_x = √(x+1)."""

    theta: float


@dataclasses.dataclass(frozen=True, slots=True)
class KrawtchoukOperator:
    """The normalized Krawtchouk difference operator on {0..L}."""

    p: float
    L: int


@dataclasses.dataclass(frozen=True, slots=True)
class FreeShiftOperator:
    """b_x = 0, a_x = 1 on a window of Z starting at 'origin'."""

    origin: int = 0


OperatorFamily: TypeAlias = (
    HermiteOperator | CharlierOperator | KrawtchoukOperator | FreeShiftOperator
)


@dataclasses.dataclass(frozen=True, slots=True)
class JacobiOperator:
    """A symmetric tridiagonal operator on the sites origin..origin+K-1."""

    family: OperatorFamily
    diagonal: FloatArray
    offdiagonal: FloatArray
    origin: int = 0

    def __post_init__(self):
        if self.offdiagonal.size != self.diagonal.size - 1:
            raise DomainError("off-diagonal must be one shorter than the diagonal")
        self.diagonal.setflags(write=False)
        self.offdiagonal.setflags(write=False)

    @property
    def cutoff(self) -> int:
        return self.diagonal.size

    def norm_bound(self) -> float:
        """Returns a Gershgorin upper bound for ‖J‖."""
        offdiagonal = np.abs(self.offdiagonal)
        radius = np.zeros(self.cutoff)
        radius[:-1] += offdiagonal
        radius[1:] += offdiagonal
        return float(np.max(np.abs(self.diagonal) + radius))

    def dense(self) -> FloatArray:
        """Returns J as a dense matrix."""
        return (
            np.diag(self.diagonal)
            + np.diag(self.offdiagonal, 1)
            + np.diag(self.offdiagonal, -1)
        )

    def apply(self, vectors: FloatArray) -> FloatArray:
        """Returns J @ vectors without forming J."""
        result = self.diagonal[:, None] * vectors
        result[:-1] += self.offdiagonal[:, None] * vectors[1:]
        result[1:] += self.offdiagonal[:, None] * vectors[:-1]
        return result


def jacobi(family: OperatorFamily, cutoff: int | None = None) -> JacobiOperator:
    """Builds the K x K Jacobi operator of a family.

    Hermite and Charlier operators are upper-left corners of semi-infinite
    matrices and need a cutoff; the Krawtchouk operator is finite with K = L+1.
    """
    match family:
        case KrawtchoukOperator(p=p, L=size):
            _check_krawtchouk(p, size)
            if cutoff is not None and cutoff != size + 1:
                raise DomainError(f"Krawtchouk operators have K = L+1 = {size + 1}")
            cutoff = size + 1
    if cutoff is None or cutoff < 2:
        raise DomainError(f"cutoff must be at least 2, got {cutoff}")
    if cutoff > EIGEN_CUTOFF_GUARD:
        raise GuardError(f"cutoff {cutoff} exceeds {EIGEN_CUTOFF_GUARD}")
    sites = np.arange(cutoff, dtype=float)
    origin = 0
    match family:
        case HermiteOperator():
            diagonal, offdiagonal = np.zeros(cutoff), np.sqrt(sites[1:])
        case CharlierOperator(theta=theta):
            if not theta > 0:
                raise DomainError(f"θ must be positive, got {theta}")
            diagonal, offdiagonal = -sites / math.sqrt(theta), np.sqrt(sites[1:])
        case KrawtchoukOperator(p=p, L=size):
            diagonal = sites * (2 * p - 1) / (size * math.sqrt(p * (1 - p)))
            offdiagonal = np.sqrt((size - sites[:-1]) * (sites[:-1] + 1)) / size
        case FreeShiftOperator(origin=origin):
            diagonal, offdiagonal = np.zeros(cutoff), np.ones(cutoff - 1)
        case _:
            raise DomainError(f"unknown operator family {family!r}")
    return JacobiOperator(family, diagonal, offdiagonal, origin)


@dataclasses.dataclass(frozen=True, slots=True)
class Eigensystem:
    """Eigenvalues in decreasing order and the matching orthonormal columns."""

    values: FloatArray
    vectors: FloatArray


def eigensystem(
    operator: JacobiOperator, interval: tuple[float, float] | None = None
) -> Eigensystem:
    """Diagonalizes a Jacobi operator, optionally only on the closed 'interval'.

    Raises:
        NumericError: the eigensolver failed, or an eigenpair has a residual
            ‖Jv - μv‖ above 1e-10‖J‖ (the index of the first bad pair is attached).
    """
    norm = operator.norm_bound()
    _LOG.debug("eigensystem of %s, K=%d", operator.family, operator.cutoff)
    try:
        if interval is None:
            values, vectors = linalg.eigh_tridiagonal(
                operator.diagonal, operator.offdiagonal
            )
        else:
            low, high = (
                float(np.clip(bound, -norm - 1.0, norm + 1.0)) for bound in interval
            )
            if high < low:
                return Eigensystem(np.empty(0), np.empty((operator.cutoff, 0)))
            values, vectors = linalg.eigh_tridiagonal(
                operator.diagonal,
                operator.offdiagonal,
                select="v",
                select_range=(np.nextafter(low, -np.inf), high),
            )
    except (linalg.LinAlgError, ValueError) as error:
        raise NumericError(f"tridiagonal eigensolver failed: {error}") from error
    order = np.argsort(values)[::-1]
    values, vectors = values[order], vectors[:, order]
    if values.size:
        residual = np.linalg.norm(
            operator.apply(vectors) - vectors * values, axis=0
        )
        bad = np.flatnonzero(residual > _RESIDUAL_TOLERANCE * max(norm, 1.0))
        if bad.size:
            raise NumericError("eigenpair lost accuracy", index=int(bad[0]))
    return Eigensystem(values, vectors)
