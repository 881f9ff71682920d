"""Exact linear algebra and counting over prime fields F_p.

Matrices and vectors are immutable value types holding int residues in
[0, p).  All arithmetic is exact; counting formulas return arbitrary
precision ints and exact ratios return Fractions, so identities can be
checked with zero tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from random import Random

from .errors import DimensionMismatchError, NonPrimeError, SingularMatrixError

_PRIMES_SEEN: set[int] = set()


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def check_prime(p: int) -> int:
    """Validate a field modulus by trial division (desk scale, small p)."""
    if p not in _PRIMES_SEEN:
        if not isinstance(p, int) or not is_prime(p):
            raise NonPrimeError(f"modulus {p!r} is not a prime")
        _PRIMES_SEEN.add(p)
    return p


@dataclass(frozen=True)
class PrimeField:
    """A prime field F_p; exists mostly to validate and carry the modulus."""

    p: int

    def __post_init__(self):
        check_prime(self.p)

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in F_p")
        return pow(a, self.p - 2, self.p)

    def elements(self):
        return range(self.p)


@dataclass(frozen=True)
class FpVector:
    p: int
    entries: tuple[int, ...]

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "entries", tuple(e % self.p for e in self.entries))

    def __len__(self):
        return len(self.entries)

    def __add__(self, other: "FpVector") -> "FpVector":
        _same_field(self, other)
        return FpVector(self.p, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "FpVector") -> "FpVector":
        _same_field(self, other)
        return FpVector(self.p, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def is_zero(self) -> bool:
        return all(e == 0 for e in self.entries)

    def dot(self, other: "FpVector") -> int:
        _same_field(self, other)
        return sum(a * b for a, b in zip(self.entries, other.entries)) % self.p


@dataclass(frozen=True)
class FpMatrix:
    """Dense matrix over F_p, entries stored row-major."""

    p: int
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        check_prime(self.p)
        if self.rows * self.cols != len(self.entries):
            raise DimensionMismatchError(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries, "
                f"got {len(self.entries)}"
            )
        object.__setattr__(self, "entries", tuple(e % self.p for e in self.entries))

    @classmethod
    def from_rows(cls, p: int, rows) -> "FpMatrix":
        rows = [tuple(r) for r in rows]
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise DimensionMismatchError("ragged rows")
        flat = tuple(x for r in rows for x in r)
        return cls(p, len(rows), len(rows[0]) if rows else 0, flat)

    @classmethod
    def identity(cls, n: int, p: int) -> "FpMatrix":
        return cls(p, n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int) -> "FpMatrix":
        return cls(p, rows, cols, (0,) * (rows * cols))

    def entry(self, i: int, j: int) -> int:
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def is_square(self) -> bool:
        return self.rows == self.cols

    def __add__(self, other: "FpMatrix") -> "FpMatrix":
        _same_shape(self, other)
        return FpMatrix(self.p, self.rows, self.cols,
                        tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "FpMatrix") -> "FpMatrix":
        _same_shape(self, other)
        return FpMatrix(self.p, self.rows, self.cols,
                        tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "FpMatrix":
        return FpMatrix(self.p, self.rows, self.cols, tuple(-a for a in self.entries))

    def __matmul__(self, other):
        if isinstance(other, FpVector):
            if self.p != other.p or self.cols != len(other):
                raise DimensionMismatchError("matrix @ vector shape mismatch")
            return FpVector(self.p, tuple(
                sum(self.entry(i, k) * other.entries[k] for k in range(self.cols))
                for i in range(self.rows)))
        _compatible_product(self, other)
        p, n, m, kk = self.p, self.rows, other.cols, self.cols
        a, b = self.entries, other.entries
        bc = other.cols
        out = []
        for i in range(n):
            arow = a[i * kk : (i + 1) * kk]
            for j in range(m):
                out.append(sum(arow[k] * b[k * bc + j] for k in range(kk)) % p)
        return FpMatrix(p, n, m, tuple(out))

    def transpose(self) -> "FpMatrix":
        return FpMatrix(self.p, self.cols, self.rows,
                        tuple(self.entry(i, j) for j in range(self.cols) for i in range(self.rows)))


def _same_field(a, b):
    if a.p != b.p:
        raise DimensionMismatchError(f"mixed moduli {a.p} and {b.p}")


def _same_shape(a: FpMatrix, b: FpMatrix):
    if a.p != b.p or a.rows != b.rows or a.cols != b.cols:
        raise DimensionMismatchError("shape or modulus mismatch")


def _compatible_product(a: FpMatrix, b: FpMatrix):
    if a.p != b.p or a.cols != b.rows:
        raise DimensionMismatchError("incompatible product shapes")


def _eliminate(rows: list[list[int]], p: int, pivot_cols: int | None = None) -> int:
    """In-place Gauss-Jordan over F_p; returns the rank.

    Pivot choice is the first row with a nonzero entry in the current
    column; exact arithmetic needs no magnitude-based pivoting.  With
    pivot_cols set, pivots are restricted to the leading columns (the rest
    of each row is still reduced), giving the rank of that leading block.
    """
    nr = len(rows)
    nc = len(rows[0]) if nr else 0
    if pivot_cols is not None:
        nc = pivot_cols
    rank = 0
    for col in range(nc):
        if rank == nr:
            break
        piv = None
        for r in range(rank, nr):
            if rows[r][col]:
                piv = r
                break
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], p - 2, p)
        rows[rank] = [(x * inv) % p for x in rows[rank]]
        lead = rows[rank]
        for r in range(nr):
            if r != rank and rows[r][col]:
                f = rows[r][col]
                rows[r] = [(a - f * b) % p for a, b in zip(rows[r], lead)]
        rank += 1
    return rank


def mat_rank(m: FpMatrix) -> int:
    return _eliminate(m.to_rows(), m.p)


def mat_inverse(m: FpMatrix) -> FpMatrix:
    if not m.is_square():
        raise DimensionMismatchError("inverse of a non-square matrix")
    n, p = m.rows, m.p
    aug = [list(m.row(i)) + [int(i == j) for j in range(n)] for i in range(n)]
    if _eliminate(aug, p, pivot_cols=n) < n:
        raise SingularMatrixError(f"rank < {n}")
    return FpMatrix(p, n, n, tuple(aug[i][n + j] for i in range(n) for j in range(n)))


def solve_linear(m: FpMatrix, b: FpVector) -> FpVector:
    """Solve m t = b for invertible square m."""
    if not m.is_square():
        raise DimensionMismatchError("system matrix must be square")
    if m.p != b.p or m.rows != len(b):
        raise DimensionMismatchError("right-hand side does not match the system")
    n, p = m.rows, m.p
    aug = [list(m.row(i)) + [b.entries[i]] for i in range(n)]
    if _eliminate(aug, p, pivot_cols=n) < n:
        raise SingularMatrixError(f"rank < {n}")
    return FpVector(p, tuple(aug[i][n] for i in range(n)))


def random_matrix(rows: int, cols: int, p: int, rng: Random) -> FpMatrix:
    check_prime(p)
    return FpMatrix(p, rows, cols, tuple(rng.randrange(p) for _ in range(rows * cols)))


def random_invertible(n: int, p: int, rng: Random) -> FpMatrix:
    """Uniform over GL(n, F_p) by rejection on uniform matrices.

    Acceptance probability prod_{k>=1}(1 - p^-k) exceeds 0.28 for every p,
    so the expected number of draws is below 4.
    """
    while True:
        m = random_matrix(n, n, p, rng)
        if mat_rank(m) == n:
            return m


def random_of_rank(n: int, p: int, r: int, rng: Random) -> FpMatrix:
    """Uniform over n x n matrices of rank exactly r.

    Sampled as G1 diag(I_r, 0) G2 with G1, G2 uniform invertible; GL x GL
    acts transitively on the rank-r set with stabilizers of constant size,
    so the image is uniform.
    """
    if not 0 <= r <= n:
        raise ValueError(f"rank {r} out of range for size {n}")
    if r == 0:
        return FpMatrix.zeros(n, n, p)
    d = FpMatrix(p, n, n, tuple(int(i == j and i < r) for i in range(n) for j in range(n)))
    return random_invertible(n, p, rng) @ d @ random_invertible(n, p, rng)


def all_matrices(n: int, p: int, rows: int | None = None, cols: int | None = None):
    """Iterate every rows x cols matrix over F_p (defaults to n x n)."""
    rows = n if rows is None else rows
    cols = n if cols is None else cols
    for entries in itertools.product(range(p), repeat=rows * cols):
        yield FpMatrix(p, rows, cols, entries)


def all_invertible(n: int, p: int):
    for m in all_matrices(n, p):
        if mat_rank(m) == n:
            yield m


def gaussian_binomial(n: int, r: int, p: int) -> int:
    """q-binomial coefficient at q = p: the number of r-dim subspaces of F_p^n."""
    if not 0 <= r <= n:
        raise ValueError(f"need 0 <= r <= n, got r={r}, n={n}")
    # q-Pascal recurrence keeps everything in exact ints.
    prev = [1]
    for row in range(1, n + 1):
        cur = [1] * (row + 1)
        for j in range(1, row):
            cur[j] = prev[j - 1] + p**j * prev[j]
        prev = cur
    return prev[r]


def count_rank_matrices(n: int, p: int, r: int) -> int:
    """Exact number of n x n matrices over F_p with rank exactly r."""
    if not 0 <= r <= n:
        raise ValueError(f"need 0 <= r <= n, got r={r}, n={n}")
    check_prime(p)
    surj = 1
    for k in range(r):
        surj *= p**n - p**k
    return gaussian_binomial(n, r, p) * surj


@dataclass(frozen=True)
class RankCensus:
    """Counts of n x n matrices over F_p by exact rank."""

    n: int
    p: int
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != self.n + 1:
            raise ValueError("need one count per rank 0..n")
        if self.counts[0] != 1 or sum(self.counts) != self.p ** (self.n * self.n):
            raise ValueError("census fails its consistency checks")

    @classmethod
    def from_formula(cls, n: int, p: int) -> "RankCensus":
        return cls(n, p, tuple(count_rank_matrices(n, p, r) for r in range(n + 1)))

    @classmethod
    def from_enumeration(cls, n: int, p: int) -> "RankCensus":
        counts = [0] * (n + 1)
        for m in all_matrices(n, p):
            counts[mat_rank(m)] += 1
        return cls(n, p, tuple(counts))


def rank_ratio_alpha(n: int, p: int) -> Fraction:
    """Exact ratio #\\{rank n\\} / #\\{rank n-1\\} among n x n matrices over F_p.

    Closed form (1 + 1/(p^n - 1)) (p-1)^2 / p; equality with the census
    ratio is a tested invariant.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    check_prime(p)
    return (1 + Fraction(1, p**n - 1)) * Fraction((p - 1) ** 2, p)
