"""Partitions, their particle encodings, exact dimensions and measures on them.

All dimension formulas run in arbitrary-precision integer arithmetic. Measure
weights are exact `Fraction`s whenever the measure parameters are exact (ints
or `Fraction`s) and binary64 floats otherwise.
"""
import dataclasses
import functools
import logging
import math
from fractions import Fraction
from typing import Iterator, TypeAlias

import numpy as np
from scipy import special, stats

from pyplancherel.core.errors import DomainError, NumericError

_LOG = logging.getLogger(__name__)

# Type alias for a real parameter that may be exact (rational) or binary64.
Real: TypeAlias = int | float | Fraction

# Poisson tail mass left out by `poisson_truncation`.
POISSON_TAIL = 1e-13


@dataclasses.dataclass(frozen=True, slots=True)
class Partition:
    """A partition stored without trailing zeros: weakly decreasing positive parts."""

    parts: tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(part) for part in self.parts)
        if any(part <= 0 for part in parts):
            raise DomainError(f"parts must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise DomainError(f"parts must be weakly decreasing: {parts}")
        object.__setattr__(self, "parts", parts)

    def __str__(self) -> str:
        return ",".join(str(part) for part in self.parts)

    @classmethod
    def from_parts(cls, parts: "tuple[int, ...] | list[int]") -> "Partition":
        """Builds a partition from a sequence that may carry trailing zeros."""
        trimmed = list(parts)
        while trimmed and trimmed[-1] == 0:
            trimmed.pop()
        return cls(tuple(trimmed))

    @classmethod
    def from_string(cls, text: str) -> "Partition":
        """Parses the comma-separated form, e.g "3,1,1"; "" is the empty partition."""
        text = text.strip()
        if not text:
            return cls()
        try:
            return cls.from_parts([int(chunk) for chunk in text.split(",")])
        except ValueError as error:
            raise DomainError(f"invalid partition {text!r}") from error

    @property
    def size(self) -> int:
        """|λ|, the number of boxes."""
        return sum(self.parts)

    @property
    def length(self) -> int:
        """ℓ(λ), the number of nonzero rows."""
        return len(self.parts)

    def part(self, index: int) -> int:
        """Returns λ_index (1-based), zero beyond the length."""
        return self.parts[index - 1] if index <= len(self.parts) else 0

    def conjugate(self) -> "Partition":
        """Returns λ′, the transposed diagram."""
        if not self.parts:
            return self
        return Partition(
            tuple(
                sum(1 for part in self.parts if part >= column)
                for column in range(1, self.parts[0] + 1)
            )
        )

    def fits(self, rows: int, columns: int | None = None) -> bool:
        """Whether λ fits in a box with 'rows' rows and 'columns' columns."""
        if self.length > rows:
            return False
        return columns is None or not self.parts or self.parts[0] <= columns


@dataclasses.dataclass(frozen=True, slots=True)
class ParticleConfiguration:
    """A strictly decreasing finite point set on a lattice.

    With 'doubled' set, points are half-integers k + 1/2 stored exactly as the odd
    integers 2k + 1 (the encoding of `frontier`); otherwise they are integers (the
    N-point encoding of `to_config`).
    """

    points: tuple[int, ...]
    doubled: bool = False

    def __post_init__(self):
        points = tuple(int(point) for point in self.points)
        if any(a <= b for a, b in zip(points, points[1:])):
            raise DomainError(f"points must be strictly decreasing: {points}")
        if self.doubled and any(point % 2 == 0 for point in points):
            raise DomainError(f"doubled half-integers must be odd: {points}")
        object.__setattr__(self, "points", points)

    def __str__(self) -> str:
        return ",".join(str(value) for value in self.values())

    @property
    def count(self) -> int:
        return len(self.points)

    def values(self) -> tuple[Fraction, ...]:
        """Returns the points as exact rationals."""
        if self.doubled:
            return tuple(Fraction(point, 2) for point in self.points)
        return tuple(Fraction(point) for point in self.points)

    @classmethod
    def from_string(cls, text: str) -> "ParticleConfiguration":
        """Parses a comma-separated integer list, in any order."""
        text = text.strip()
        if not text:
            return cls(())
        try:
            points = sorted((int(chunk) for chunk in text.split(",")), reverse=True)
        except ValueError as error:
            raise DomainError(f"invalid configuration {text!r}") from error
        return cls(tuple(points))


def to_config(partition: Partition, rows: int) -> ParticleConfiguration:
    """Returns the N-point encoding x_i = λ_i + N - i, i = 1..N."""
    if rows < 1:
        raise DomainError(f"N must be positive, got {rows}")
    if partition.length > rows:
        raise DomainError(f"ℓ(λ)={partition.length} exceeds N={rows}")
    return ParticleConfiguration(
        tuple(partition.part(i) + rows - i for i in range(1, rows + 1))
    )


def from_config(config: ParticleConfiguration) -> Partition:
    """Inverts `to_config`: λ_i = x_i - N + i."""
    if config.doubled:
        raise DomainError("half-integer configurations do not encode an N-point λ")
    if config.points and config.points[-1] < 0:
        raise DomainError(f"N-point configurations live on Z_+: {config.points}")
    rows = config.count
    return Partition.from_parts(
        [point - rows + i for i, point in enumerate(config.points, start=1)]
    )


def _doubled_bounds(low: Real, high: Real) -> tuple[Fraction, Fraction]:
    low_2, high_2 = 2 * Fraction(low), 2 * Fraction(high)
    if high_2 < low_2:
        raise DomainError(f"empty window [{low}, {high}]")
    return low_2, high_2


def frontier(partition: Partition, low: Real, high: Real) -> ParticleConfiguration:
    """Returns X(λ) = {λ_i - i + 1/2} intersected with the window [low, high].

    The result is a doubled configuration (see `ParticleConfiguration`).
    """
    low_2, high_2 = _doubled_bounds(low, high)
    points: list[int] = []
    index = 1
    # Particles strictly decrease with the index, and below the last row they
    # fill every negative half-integer; stop once below the window.
    while (point := 2 * (partition.part(index) - index) + 1) >= low_2:
        if point <= high_2:
            points.append(point)
        index += 1
    return ParticleConfiguration(tuple(points), doubled=True)


def holes(partition: Partition, low: Real, high: Real) -> ParticleConfiguration:
    """Returns the unoccupied half-integers of the window [low, high]."""
    low_2, high_2 = _doubled_bounds(low, high)
    occupied = set(frontier(partition, low, high).points)
    first = math.ceil(low_2)
    first += 1 - first % 2
    return ParticleConfiguration(
        tuple(
            sorted(
                (
                    point
                    for point in range(first, math.floor(high_2) + 1, 2)
                    if point not in occupied
                ),
                reverse=True,
            )
        ),
        doubled=True,
    )


def _vandermonde(points: tuple[int, ...]) -> int:
    """∏_{i<j} (x_i - x_j) for a decreasing sequence."""
    return math.prod(
        points[i] - points[j]
        for i in range(len(points))
        for j in range(i + 1, len(points))
    )


def dim_sym(partition: Partition, rows: int | None = None) -> int:
    """Returns dim λ by Frobenius' formula.

    dim λ / |λ|! = ∏_{i<j}(x_i - x_j) / ∏ x_i! with x_i = λ_i + N - i, for any
    N >= ℓ(λ) ('rows', by default ℓ(λ)).
    """
    rows = max(partition.length, 1) if rows is None else rows
    points = to_config(partition, rows).points
    numerator = math.factorial(partition.size) * _vandermonde(points)
    denominator = math.prod(math.factorial(point) for point in points)
    quotient, remainder = divmod(numerator, denominator)
    if remainder:
        raise NumericError(f"Frobenius formula is not integral for {partition}")
    return quotient


def dim_un(partition: Partition, rows: int) -> int:
    """Returns Dim_N λ = ∏_{1<=i<j<=N} (x_i - x_j)/(j - i) (Weyl's formula)."""
    points = to_config(partition, rows).points
    denominator = math.prod(math.factorial(k) for k in range(1, rows))
    quotient, remainder = divmod(_vandermonde(points), denominator)
    if remainder:
        raise NumericError(f"Weyl formula is not integral for {partition}, N={rows}")
    return quotient


def hat(partition: Partition, rows: int, columns: int) -> Partition:
    """Returns λ̂ = (M - λ_N, ..., M - λ_1), the complement of λ in (M^N)."""
    if not partition.fits(rows, columns):
        raise DomainError(f"{partition} does not fit in ({columns}^{rows})")
    return Partition.from_parts(
        [columns - partition.part(rows + 1 - i) for i in range(1, rows + 1)]
    )


@functools.lru_cache(maxsize=None)
def _tableaux(parts: tuple[int, ...]) -> int:
    if not parts:
        return 1
    total = 0
    for index, part in enumerate(parts):
        # A corner: the next row is strictly shorter.
        if index + 1 == len(parts) or parts[index + 1] < part:
            shrunk = list(parts)
            shrunk[index] -= 1
            total += _tableaux(tuple(shrunk[:-1] if shrunk[-1] == 0 else shrunk))
    return total


def standard_tableaux_count(partition: Partition) -> int:
    """Counts standard Young tableaux of shape λ by removing corners recursively."""
    return _tableaux(partition.parts)


def partitions_of(
    size: int, max_length: int | None = None, max_part: int | None = None
) -> Iterator[Partition]:
    """Returns a generator over partitions of 'size', in reverse lexicographic order.

    E.g: partitions_of(3) => (3), (2,1), (1,1,1).
    """
    if size < 0:
        raise DomainError(f"size must be nonnegative, got {size}")

    def generate(rest: int, bound: int, rows: int) -> Iterator[tuple[int, ...]]:
        if rest == 0:
            yield ()
            return
        if rows == 0:
            return
        for first in range(min(rest, bound), 0, -1):
            for tail in generate(rest - first, first, rows - 1):
                yield (first,) + tail

    bound = size if max_part is None else max_part
    rows = size if max_length is None else max_length
    return (Partition(parts) for parts in generate(size, bound, rows))


def partitions_in_box(rows: int, columns: int) -> Iterator[Partition]:
    """Returns a generator over Y(N, M), all diagrams inside (M^N), by size."""
    for size in range(rows * columns + 1):
        yield from partitions_of(size, rows, columns)


@dataclasses.dataclass(frozen=True, slots=True)
class Plancherel:
    """M^Pl_n(λ) = (dim λ)² / n! on Y_n."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise DomainError(f"n must be nonnegative, got {self.n}")


@dataclasses.dataclass(frozen=True, slots=True)
class SchurWeyl:
    """M^SW_{n,N}(λ) = dim λ · Dim_N λ / N^n on Y_n(N)."""

    n: int
    N: int

    def __post_init__(self):
        if self.n < 0 or self.N < 1:
            raise DomainError(f"invalid Schur-Weyl parameters n={self.n}, N={self.N}")


@dataclasses.dataclass(frozen=True, slots=True)
class PoissonSchurWeyl:
    """The poissonization e^{-ν} ν^{|λ|}/|λ|! · M^SW_{|λ|,N}(λ) on Y(N)."""

    nu: Real
    N: int

    def __post_init__(self):
        if not self.nu > 0 or self.N < 1:
            raise DomainError(f"invalid parameters ν={self.nu}, N={self.N}")


@dataclasses.dataclass(frozen=True, slots=True)
class Rectangle:
    """M_{n,N,M}(λ) = dim λ · dim λ̂ / dim (M^N) on Y_n(N, M)."""

    n: int
    N: int
    M: int

    def __post_init__(self):
        if self.N < 1 or self.M < 1 or not 0 <= self.n <= self.N * self.M:
            raise DomainError(
                f"invalid rectangle parameters n={self.n}, N={self.N}, M={self.M}"
            )


@dataclasses.dataclass(frozen=True, slots=True)
class MixKrawtchouk:
    """Binomial(N², p) mixture of M_{n,N,N} over n, on Y(N, N)."""

    p: Real
    N: int

    def __post_init__(self):
        if not 0 < self.p < 1 or self.N < 1:
            raise DomainError(f"invalid parameters p={self.p}, N={self.N}")


MeasureSpec: TypeAlias = (
    Plancherel | SchurWeyl | PoissonSchurWeyl | Rectangle | MixKrawtchouk
)


def is_exact(value: Real) -> bool:
    """Whether a parameter requests exact rational arithmetic."""
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def _require(condition: bool, spec: MeasureSpec, partition: Partition):
    if not condition:
        raise DomainError(f"{partition or '∅'} is outside the support of {spec}")


def measure_weight(spec: MeasureSpec, partition: Partition) -> Fraction | float:
    """Returns the weight of λ under a measure.

    Plancherel, Schur-Weyl and rectangle weights are exact. PoissonSchurWeyl with
    an exact ν returns the weight divided by e^{-ν}, so that ratios stay exact;
    MixKrawtchouk with an exact p is exact. Binary64 parameters give floats.
    """
    size = partition.size
    match spec:
        case Plancherel(n=n):
            _require(size == n, spec, partition)
            return Fraction(dim_sym(partition) ** 2, math.factorial(n))
        case SchurWeyl(n=n, N=rows):
            _require(size == n and partition.length <= rows, spec, partition)
            return Fraction(dim_sym(partition) * dim_un(partition, rows), rows**n)
        case Rectangle(n=n, N=rows, M=columns):
            _require(size == n and partition.fits(rows, columns), spec, partition)
            full = Partition((columns,) * rows)
            return Fraction(
                dim_sym(partition) * dim_sym(hat(partition, rows, columns)),
                dim_sym(full),
            )
        case PoissonSchurWeyl(nu=nu, N=rows):
            _require(partition.length <= rows, spec, partition)
            schur_weyl = measure_weight(SchurWeyl(size, rows), partition)
            if is_exact(nu):
                return Fraction(nu) ** size / math.factorial(size) * schur_weyl
            return math.exp(
                -nu
                + size * math.log(nu)
                - special.gammaln(size + 1)
                + math.log(schur_weyl.numerator)
                - math.log(schur_weyl.denominator)
            )
        case MixKrawtchouk(p=p, N=rows):
            _require(partition.fits(rows, rows), spec, partition)
            boxes = rows * rows
            rectangle = measure_weight(Rectangle(size, rows, rows), partition)
            if is_exact(p):
                p = Fraction(p)
                return (
                    math.comb(boxes, size)
                    * p**size
                    * (1 - p) ** (boxes - size)
                    * rectangle
                )
            return math.exp(
                math.log(math.comb(boxes, size))
                + size * math.log(p)
                + (boxes - size) * math.log1p(-p)
                + math.log(rectangle.numerator)
                - math.log(rectangle.denominator)
            )
    raise DomainError(f"unknown measure {spec!r}")


def poisson_truncation(nu: Real, tail: float = POISSON_TAIL) -> int:
    """Returns n_max such that the Poisson(ν) mass above n_max is below 'tail'."""
    return int(stats.poisson.isf(tail, float(nu))) + 1


def support(spec: MeasureSpec, max_size: int | None = None) -> Iterator[Partition]:
    """Returns a generator over the support of a measure.

    The PoissonSchurWeyl support is infinite and is truncated at |λ| <= max_size
    (by default `poisson_truncation(ν)`).
    """
    match spec:
        case Plancherel(n=n):
            return partitions_of(n)
        case SchurWeyl(n=n, N=rows):
            return partitions_of(n, max_length=rows)
        case Rectangle(n=n, N=rows, M=columns):
            return partitions_of(n, rows, columns)
        case MixKrawtchouk(N=rows):
            return partitions_in_box(rows, rows)
        case PoissonSchurWeyl(nu=nu, N=rows):
            top = poisson_truncation(nu) if max_size is None else max_size
            return (
                partition
                for size in range(top + 1)
                for partition in partitions_of(size, max_length=rows)
            )
    raise DomainError(f"unknown measure {spec!r}")


def sample_partition(
    spec: MeasureSpec, rng: np.random.Generator, max_size: int | None = None
) -> Partition:
    """Draws λ from a measure by enumerating its (truncated) support.

    Conditioning M^PSW on |λ| = n recovers M^SW_{n,N}, so this also samples the
    unpoissonized Schur-Weyl measure directly.
    """
    partitions = list(support(spec, max_size))
    weights = np.array([float(measure_weight(spec, item)) for item in partitions])
    _LOG.debug("sampling %s over %d diagrams", spec, len(partitions))
    return partitions[rng.choice(len(partitions), p=weights / weights.sum())]
