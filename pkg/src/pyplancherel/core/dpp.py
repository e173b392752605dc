"""Determinantal point processes: correlation functions, finite-window
distributions, exact sampling of projection kernels and brute-force ensembles."""
import dataclasses
import itertools
import logging
import math
from fractions import Fraction
from typing import Iterator, TypeAlias

import numpy as np
import numpy.typing as npt
from scipy import linalg, special

from pyplancherel.core import kernels as kernels_
from pyplancherel.core import orthopoly, partitions
from pyplancherel.core.errors import DomainError, GuardError, NumericError
from pyplancherel.core.lattice import Site, Window, window

_LOG = logging.getLogger(__name__)

WINDOW_GUARD = 20
ENUMERATION_GUARD = 10**6

# Probabilities below -NEGATIVE_TOLERANCE are reported; above it they are clamped.
NEGATIVE_TOLERANCE = 1e-12
# Sampler conditional mass below which the basis is considered degenerate.
DEGENERATE_MASS = 1e-12

_DETERMINANT_CHUNK = 4096

FloatArray = orthopoly.FloatArray
IntArray = npt.NDArray[np.int64]


def correlation(
    kernel: kernels_.Kernel, points: tuple[Site, ...] | list[Site]
) -> float:
    """Returns ρ_k(x_1, ..., x_k) = det[K(x_i, x_j)]; ρ_0 = 1."""
    if len(set(points)) != len(points):
        raise DomainError(f"correlation points must be distinct: {points}")
    if not points:
        return 1.0
    return float(np.linalg.det(kernel.matrix(points)))


@dataclasses.dataclass(frozen=True, slots=True, eq=False)
class WindowDistribution:
    """The law of X ∩ A. Subsets are bitmasks: bit i stands for window[i]."""

    window: Window
    probabilities: FloatArray

    def _mask(self, subset: tuple[Site, ...]) -> int:
        try:
            return sum(1 << self.window.index(site) for site in set(subset))
        except ValueError as error:
            raise DomainError(f"{subset} is not a subset of {self.window}") from error

    def probability(self, subset: tuple[Site, ...] | list[Site]) -> float:
        """Returns P(X ∩ A = subset)."""
        return float(self.probabilities[self._mask(tuple(subset))])

    def items(self) -> Iterator[tuple[tuple[Site, ...], float]]:
        """Returns a generator over (subset, probability) by increasing mask."""
        for mask, value in enumerate(self.probabilities):
            subset = tuple(
                site for bit, site in enumerate(self.window) if mask >> bit & 1
            )
            yield subset, float(value)

    def as_dict(self) -> dict[tuple[Site, ...], float]:
        return dict(self.items())

    def particle_number_distribution(self) -> FloatArray:
        """Returns P(|X ∩ A| = k) for k = 0..|A|."""
        masks = range(self.probabilities.size)
        counts = np.array([bin(mask).count("1") for mask in masks])
        return np.bincount(
            counts, weights=self.probabilities, minlength=len(self.window) + 1
        )

    def mean_count(self) -> float:
        """Returns E|X ∩ A|."""
        distribution = self.particle_number_distribution()
        return float(np.dot(np.arange(distribution.size), distribution))


def window_distribution(
    kernel: kernels_.Kernel, sites: tuple[Site, ...] | list[Site]
) -> WindowDistribution:
    """Computes the law of X ∩ A by inclusion-exclusion over ρ.

    P(X_A = S) = Σ_{S ⊆ T ⊆ A} (-1)^{|T \\ S|} ρ_{|T|}(T).
    """
    sites = window(sites)
    size = len(sites)
    if size > WINDOW_GUARD:
        raise GuardError(f"window of {size} sites exceeds {WINDOW_GUARD}")
    gram = kernel.matrix(sites)
    rho = np.ones(1 << size)
    for count in range(1, size + 1):
        combinations = np.array(
            list(itertools.combinations(range(size), count)), dtype=np.int64
        )
        masks = np.left_shift(1, combinations).sum(axis=1)
        for start in range(0, len(combinations), _DETERMINANT_CHUNK):
            chunk = combinations[start : start + _DETERMINANT_CHUNK]
            rho[masks[start : start + _DETERMINANT_CHUNK]] = np.linalg.det(
                gram[chunk[:, :, None], chunk[:, None, :]]
            )
    # Möbius inversion over supersets, one bit at a time.
    probabilities = rho.copy()
    masks = np.arange(1 << size)
    for bit in range(size):
        without = masks[(masks >> bit & 1) == 0]
        probabilities[without] -= probabilities[without | (1 << bit)]
    if probabilities.min() < -NEGATIVE_TOLERANCE:
        index = int(np.argmin(probabilities))
        raise NumericError(
            f"negative window probability {probabilities[index]:.3g}", index=index
        )
    probabilities = np.clip(probabilities, 0.0, None)
    total = probabilities.sum()
    if abs(total - 1.0) > 1e-10:
        raise NumericError(f"window probabilities sum to {total!r}")
    return WindowDistribution(sites, probabilities)


def _projection_basis(kernel: kernels_.Kernel) -> tuple[IntArray, FloatArray]:
    if kernel.rank is None:
        raise DomainError(f"{kernel!r} is not a finite-rank projection")
    sites = kernel.ground.sites()
    basis, _ = linalg.qr(kernel.basis(sites), mode="economic")
    return sites, basis


def _sample_from_basis(
    sites: IntArray, basis: FloatArray, rng: np.random.Generator
) -> partitions.ParticleConfiguration:
    vectors = basis
    chosen: list[int] = []
    while vectors.shape[1]:
        weights = np.einsum("ij,ij->i", vectors, vectors)
        total = weights.sum()
        if total < DEGENERATE_MASS:
            raise NumericError("conditional density vanished", index=len(chosen))
        row = rng.choice(sites.size, p=weights / total)
        chosen.append(int(sites[row]))
        # Condition on the chosen site: eliminate it with the largest pivot,
        # drop that direction, then re-orthonormalize.
        column = int(np.argmax(np.abs(vectors[row])))
        vectors = vectors - np.outer(
            vectors[:, column], vectors[row] / vectors[row, column]
        )
        vectors = np.delete(vectors, column, axis=1)
        if vectors.shape[1]:
            vectors, _ = linalg.qr(vectors, mode="economic")
    return partitions.ParticleConfiguration(tuple(sorted(chosen, reverse=True)))


def sample(
    kernel: kernels_.Kernel, rng: np.random.Generator
) -> partitions.ParticleConfiguration:
    """Draws one configuration of a finite-rank projection DPP; it has rank points."""
    sites, basis = _projection_basis(kernel)
    return _sample_from_basis(sites, basis, rng)


def sample_many(
    kernel: kernels_.Kernel, count: int, rng: np.random.Generator
) -> list[partitions.ParticleConfiguration]:
    """Draws 'count' independent configurations, sharing one projection basis."""
    sites, basis = _projection_basis(kernel)
    _LOG.debug(
        "sampling %d configurations of %r on %d sites", count, kernel, sites.size
    )
    return [_sample_from_basis(sites, basis, rng) for _ in range(count)]


@dataclasses.dataclass(frozen=True, slots=True)
class CharlierEnsemble:
    """N particles on Z_+ with weight ∏ θ^{x_i}/x_i! · ∏ (x_i - x_j)²."""

    N: int
    theta: float

    def __post_init__(self):
        if self.N < 1 or not self.theta > 0:
            raise DomainError(f"invalid Charlier ensemble N={self.N}, θ={self.theta}")


@dataclasses.dataclass(frozen=True, slots=True)
class KrawtchoukEnsemble:
    """N particles on {0..L} with binomial weights; L defaults to 2N - 1."""

    N: int
    p: float
    L: int | None = None

    def __post_init__(self):
        if self.L is None:
            object.__setattr__(self, "L", 2 * self.N - 1)
        if not 0 < self.p < 1 or not 1 <= self.N <= self.L + 1:
            raise DomainError(
                f"invalid Krawtchouk ensemble N={self.N}, p={self.p}, L={self.L}"
            )


EnsembleSpec: TypeAlias = CharlierEnsemble | KrawtchoukEnsemble


def ensemble_kernel(spec: EnsembleSpec) -> kernels_.Kernel:
    """Returns the correlation kernel of an orthogonal polynomial ensemble."""
    match spec:
        case CharlierEnsemble(N=N, theta=theta):
            return kernels_.charlier_kernel(N, theta)
        case KrawtchoukEnsemble(N=N, p=p, L=size):
            return kernels_.krawtchouk_kernel(N, p, size)
    raise DomainError(f"unknown ensemble {spec!r}")


@dataclasses.dataclass(frozen=True, slots=True, eq=False)
class EnsembleDistribution:
    """All N-point subsets of a finite site set with their probabilities.

    'configurations' has one increasing row of sites per subset.
    """

    configurations: IntArray
    probabilities: FloatArray

    def correlation(self, points: tuple[Site, ...] | list[Site]) -> float:
        """Returns ρ_k(points) = P(points ⊆ X)."""
        if len(set(points)) != len(points):
            raise DomainError(f"correlation points must be distinct: {points}")
        mask = np.ones(len(self.probabilities), dtype=bool)
        for point in points:
            mask &= (self.configurations == point).any(axis=1)
        return float(self.probabilities[mask].sum())

    def particle_count_mean(self, sites: tuple[Site, ...] | list[Site]) -> float:
        """Returns E|X ∩ sites|."""
        return sum(self.correlation((site,)) for site in window(sites))

    def probability(self, points: tuple[Site, ...] | list[Site]) -> float:
        """Returns P(X = points)."""
        target = np.array(sorted(points))
        rows = np.flatnonzero((self.configurations == target).all(axis=1))
        return float(self.probabilities[rows].sum())


def enumerate_ensemble(
    spec: EnsembleSpec, truncation: int | None = None
) -> EnsembleDistribution:
    """Enumerates an ensemble over every N-point subset of its (truncated) lattice.

    Charlier ensembles live on {0..truncation}, by default the kernel's ground
    truncation; Krawtchouk ensembles on {0..L}.
    """
    match spec:
        case CharlierEnsemble(N=N, theta=theta):
            top = (
                ensemble_kernel(spec).ground.truncation
                if truncation is None
                else truncation
            )
            log_weight = orthopoly.charlier_weight(np.arange(top + 1), theta)
        case KrawtchoukEnsemble(N=N, p=p, L=size):
            log_weight = orthopoly.krawtchouk_weight(np.arange(size + 1), p, size)
        case _:
            raise DomainError(f"unknown ensemble {spec!r}")
    if math.comb(log_weight.size, N) > ENUMERATION_GUARD:
        raise GuardError(
            f"C({log_weight.size}, {N}) subsets exceed {ENUMERATION_GUARD}"
        )
    configurations = np.array(
        list(itertools.combinations(range(log_weight.size), N)), dtype=np.int64
    ).reshape(-1, N)
    _LOG.debug("enumerating %s over %d subsets", spec, len(configurations))
    upper = np.triu_indices(N, 1)
    gaps = configurations[:, upper[1]] - configurations[:, upper[0]]
    log_total = log_weight[configurations].sum(axis=1) + 2.0 * np.log(gaps).sum(axis=1)
    probabilities = np.exp(log_total - special.logsumexp(log_total))
    return EnsembleDistribution(configurations, probabilities)


@dataclasses.dataclass(frozen=True, slots=True)
class ProportionalityReport:
    """Exact ratios measure weight / ensemble weight, one per diagram."""

    ratios: dict[partitions.Partition, Fraction]

    @property
    def proportional(self) -> bool:
        return len(set(self.ratios.values())) == 1

    @property
    def constant(self) -> Fraction | None:
        return next(iter(self.ratios.values())) if self.proportional else None


def _vandermonde_squared(points: tuple[int, ...]) -> int:
    return math.prod((a - b) ** 2 for a, b in itertools.combinations(points, 2))


def ensemble_weight_ratio_check(
    spec: partitions.PoissonSchurWeyl | partitions.MixKrawtchouk,
    max_size: int = 12,
) -> ProportionalityReport:
    """Compares a measure on diagrams with its N-particle ensemble, exactly.

    PoissonSchurWeyl(ν, N) is set against the Charlier ensemble with θ = ν/N
    (diagrams with |λ| <= max_size); MixKrawtchouk(p, N) against the Krawtchouk
    ensemble with L = 2N - 1 (all diagrams in the N x N box). Both sides use
    x_i = λ_i + N - i and exact rationals.
    """
    ratios: dict[partitions.Partition, Fraction] = {}
    match spec:
        case partitions.PoissonSchurWeyl(nu=nu, N=rows):
            exact = partitions.PoissonSchurWeyl(Fraction(nu), rows)
            theta = Fraction(nu) / rows
            for partition in partitions.support(exact, max_size):
                points = partitions.to_config(partition, rows).points
                weight = math.prod(
                    theta**x / math.factorial(x) for x in points
                ) * _vandermonde_squared(points)
                ratios[partition] = partitions.measure_weight(exact, partition) / weight
        case partitions.MixKrawtchouk(p=p, N=rows):
            exact = partitions.MixKrawtchouk(Fraction(p), rows)
            p, size = Fraction(p), 2 * rows - 1
            for partition in partitions.support(exact):
                points = partitions.to_config(partition, rows).points
                weight = math.prod(
                    math.comb(size, x) * p**x * (1 - p) ** (size - x) for x in points
                ) * _vandermonde_squared(points)
                ratios[partition] = partitions.measure_weight(exact, partition) / weight
        case _:
            raise DomainError(f"no ensemble counterpart for {spec!r}")
    return ProportionalityReport(ratios)
