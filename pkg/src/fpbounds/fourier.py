"""Fourier analysis on the additive group F_p^N.

Points and frequencies are indexed 0 .. p^N - 1 via little-endian base-p
digits: index i has digits (i % p, (i // p) % p, ...).  When points are
square matrices the digits are the row-major matrix entries, so entry
(r, c) of an n x n matrix is digit r*n + c.  This is the one fixed
convention; tables produced under it are comparable across runs.

The transform is the normalized character sum

    fhat(s) = p^-N  sum_x  omega^{-<s, x>} f(x),   omega = e^{2 pi i / p},

evaluated exactly in rationals when p = 2 (omega = -1) and the input
values are ints or Fractions, and in complex doubles otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DimensionMismatchError, SizeLimitError
from .fields import FpMatrix, check_prime, mat_rank

DEFAULT_ENUMERATION_CAP = 4096
DEFAULT_SPECTRAL_CAP = 81

TRANSFORM_TOL = 1e-9
SPECTRUM_TOL = 1e-6


def point_digits(index: int, p: int, N: int) -> tuple[int, ...]:
    out = []
    for _ in range(N):
        out.append(index % p)
        index //= p
    return tuple(out)


def digits_point(digits, p: int) -> int:
    index = 0
    for d in reversed(tuple(digits)):
        index = index * p + (d % p)
    return index


def matrix_at_point(index: int, n: int, p: int) -> FpMatrix:
    return FpMatrix(p, n, n, point_digits(index, p, n * n))


def point_of_matrix(m: FpMatrix) -> int:
    return digits_point(m.entries, m.p)


def _check_cap(p: int, N: int, cap: int):
    if p**N > cap:
        raise SizeLimitError(f"p^N = {p**N} exceeds cap {cap}")


@dataclass(frozen=True)
class GroupFunction:
    """A function F_p^N -> C stored as p^N values in point-index order."""

    p: int
    N: int
    values: tuple

    def __post_init__(self):
        check_prime(self.p)
        if len(self.values) != self.p**self.N:
            raise DimensionMismatchError(
                f"need {self.p**self.N} values, got {len(self.values)}")

    def is_exact(self) -> bool:
        return self.p == 2 and all(isinstance(v, (int, Fraction)) for v in self.values)


@dataclass(frozen=True)
class FourierTable:
    """Fourier coefficients indexed by frequency, same convention as points."""

    p: int
    N: int
    coefficients: tuple

    def __post_init__(self):
        check_prime(self.p)
        if len(self.coefficients) != self.p**self.N:
            raise DimensionMismatchError(
                f"need {self.p**self.N} coefficients, got {len(self.coefficients)}")


@dataclass(frozen=True)
class PartialSignFunction:
    """Point classes +1 / -1 / 0, where 0 marks an undefined point."""

    p: int
    N: int
    signs: tuple[int, ...]

    def __post_init__(self):
        check_prime(self.p)
        if len(self.signs) != self.p**self.N:
            raise DimensionMismatchError("one class per point required")
        if any(s not in (-1, 0, 1) for s in self.signs):
            raise ValueError("classes must be -1, 0 (undefined) or +1")
        if all(s == 0 for s in self.signs):
            raise ValueError("at least one point must be defined")

    def domain_size(self) -> int:
        return sum(1 for s in self.signs if s)


@dataclass(frozen=True)
class SpectrumReport:
    singular_values: tuple[float, ...]
    scaled_fourier_magnitudes: tuple[float, ...]
    max_deviation: float


def _digit_table(p: int, N: int) -> np.ndarray:
    size = p**N
    table = np.zeros((size, N), dtype=np.int64)
    idx = np.arange(size)
    for j in range(N):
        table[:, j] = idx % p
        idx = idx // p
    return table


def dft(f: GroupFunction, cap: int = DEFAULT_ENUMERATION_CAP) -> FourierTable:
    _check_cap(f.p, f.N, cap)
    p, N = f.p, f.N
    size = p**N
    if f.is_exact():
        # p = 2 exact path: omega = -1, coefficients are rationals.
        coeffs = []
        vals = f.values
        for s in range(size):
            acc = 0
            for x in range(size):
                if bin(s & x).count("1") & 1:
                    acc -= vals[x]
                else:
                    acc += vals[x]
            coeffs.append(Fraction(acc, size))
        return FourierTable(p, N, tuple(coeffs))
    digits = _digit_table(p, N)
    vals = np.asarray(f.values, dtype=complex)
    powers = np.exp(-2j * math.pi * np.arange(p) / p)
    coeffs = np.empty(size, dtype=complex)
    # Chunk over frequencies to keep the p^N x p^N character block small.
    chunk = max(1, min(size, (1 << 22) // max(size, 1)))
    for start in range(0, size, chunk):
        block = digits[start : start + chunk]
        dots = (block @ digits.T) % p
        coeffs[start : start + chunk] = powers[dots] @ vals
    coeffs /= size
    return FourierTable(p, N, tuple(coeffs.tolist()))


def _conj(v):
    return v.conjugate() if isinstance(v, complex) else v


def idft(table: FourierTable, cap: int = DEFAULT_ENUMERATION_CAP) -> GroupFunction:
    """Invert via f = p^N (hat((fhat)*))*, the conjugate-transform-conjugate rule."""
    p, N = table.p, table.N
    size = p**N
    inner = GroupFunction(p, N, tuple(_conj(c) for c in table.coefficients))
    outer = dft(inner, cap=cap)
    return GroupFunction(p, N, tuple(size * _conj(c) for c in outer.coefficients))


def idft_roundtrip(f: GroupFunction, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """Max |reconstructed - original| after a transform round trip."""
    rebuilt = idft(dft(f, cap=cap), cap=cap)
    return max(abs(a - b) for a, b in zip(rebuilt.values, f.values))


def parseval_gap(f: GroupFunction, table: FourierTable) -> float:
    lhs = sum(abs(c) ** 2 for c in table.coefficients)
    rhs = Fraction(1, f.p**f.N) * sum(abs(v) ** 2 for v in f.values) \
        if f.is_exact() else sum(abs(v) ** 2 for v in f.values) / f.p**f.N
    return abs(lhs - rhs)


def theta(n: int, p: int, cap: int = DEFAULT_ENUMERATION_CAP) -> GroupFunction:
    """Indicator of full rank on n x n matrices, viewed as a function on F_p^(n^2)."""
    N = n * n
    _check_cap(p, N, cap)
    vals = tuple(int(mat_rank(matrix_at_point(i, n, p)) == n) for i in range(p**N))
    return GroupFunction(p, N, vals)


def theta_hat_closed(s: FpMatrix) -> Fraction:
    """Closed form for the full-rank indicator's coefficient at frequency s.

    Depends on s only through r = rank(s):
        (-1)^r p^{-n(n+1)/2} prod_{k=1}^{n-r} (p^k - 1).
    """
    if not s.is_square():
        raise DimensionMismatchError("frequency must be a square matrix")
    n, p = s.rows, s.p
    r = mat_rank(s)
    value = Fraction((-1) ** r, p ** (n * (n + 1) // 2))
    for k in range(1, n - r + 1):
        value *= p**k - 1
    return value


def theta_hat_l1_exact(n: int, p: int) -> Fraction:
    """Exact l1 norm of the full-rank indicator's coefficient table."""
    value = Fraction(1, p**n)
    for k in range(1, n + 1):
        value *= p**k - 1
    for k in range(n):
        value *= Fraction(1 + p**k, p**k)
    return value


def theta_hat_l1_closed(n: int, p: int) -> float:
    """Float variant of theta_hat_l1_exact, summed in log space for large n."""
    log = -n * math.log(p)
    for k in range(1, n + 1):
        log += k * math.log(p) + math.log1p(-float(p) ** -k)
    for k in range(n):
        log += math.log1p(float(p) ** -k)
    return math.exp(log)


def fourier_l1(table: FourierTable):
    return sum(abs(c) for c in table.coefficients)


def fourier_linf(table: FourierTable):
    return max(abs(c) for c in table.coefficients)


def plus_composed_matrix(g: GroupFunction, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """The p^N x p^N matrix F[x, y] = g(x + y), addition taken in F_p^N."""
    _check_cap(g.p, g.N, cap)
    p, N = g.p, g.N
    size = p**N
    vals = np.asarray([complex(v) for v in g.values])
    if p == 2:
        idx = np.arange(size)
        return vals[idx[:, None] ^ idx[None, :]]
    digits = _digit_table(p, N)
    weights = p ** np.arange(N, dtype=np.int64)
    out = np.empty((size, size), dtype=complex)
    for x in range(size):
        out[x] = vals[((digits[x] + digits) % p) @ weights]
    return out


def hermitian_eigenvalues(matrix: np.ndarray, tol: float = 1e-12,
                          max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Sweeps run until every off-diagonal entry is below tol relative to the
    Frobenius norm of the input.
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    if n == 1:
        return np.array([a[0, 0].real])
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = np.abs(a - np.diag(np.diag(a)))
        if off.max() <= tol * scale:
            break
        for k in range(n - 1):
            for l in range(k + 1, n):
                z = a[k, l]
                if abs(z) <= tol * scale * 1e-2:
                    continue
                phase = z / abs(z)
                angle = 0.5 * math.atan2(2.0 * abs(z), (a[k, k] - a[l, l]).real)
                c = math.cos(angle)
                s = math.sin(angle)
                u = np.array([[c, -s * phase], [s * phase.conjugate(), c]])
                a[:, [k, l]] = a[:, [k, l]] @ u
                a[[k, l], :] = u.conj().T @ a[[k, l], :]
    return np.diag(a).real


def verify_spectrum(g: GroupFunction, cap: int = DEFAULT_SPECTRAL_CAP) -> SpectrumReport:
    """Compare singular values of the plus-composed matrix with p^N |ghat|.

    Singular values come from the Hermitian eigenproblem of F^dag F; the
    scaled coefficient magnitudes come from the transform.  Sorted
    descending, they must agree elementwise.
    """
    _check_cap(g.p, g.N, cap)
    size = g.p**g.N
    f = plus_composed_matrix(g, cap=cap)
    gram = f.conj().T @ f
    eig = hermitian_eigenvalues(gram)
    sigma = np.sqrt(np.clip(eig, 0.0, None))
    sigma = tuple(sorted((float(v) for v in sigma), reverse=True))
    table = dft(g, cap=cap)
    mags = tuple(sorted((size * abs(complex(c)) for c in table.coefficients), reverse=True))
    dev = max(abs(a - b) for a, b in zip(sigma, mags))
    return SpectrumReport(sigma, mags, dev)


def fourier_table_csv(table: FourierTable) -> str:
    """CSV dump with columns s_digits, re, im (digits little-endian, joined)."""
    lines = ["s_digits,re,im"]
    for s in range(table.p**table.N):
        digits = "".join(str(d) for d in point_digits(s, table.p, table.N))
        c = complex(table.coefficients[s])
        lines.append(f"{digits},{c.real!r},{c.imag!r}")
    return "\n".join(lines) + "\n"
