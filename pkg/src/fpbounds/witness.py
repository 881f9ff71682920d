"""Dual-norm lower-bound certificates for the approximate Fourier l1 norm.

A certificate instantiates the dual quotient

    bound = ( <g, psi.dom(g)>  -  ||psi.dom~(g)||_1  -  eps ||psi||_1 )
            / ( p^N ||psihat||_inf )

whose value lower-bounds the eps-approximate Fourier l1 norm of the
partial sign function g; p^N ||.hat||_inf is the dual of the Fourier l1
norm.  The canonical witness for the rank sign function is psi =
(-1)^n thetahat, whose terms all have closed forms.

An independent oracle, approx_fourier_l1_exact, computes the approximate
norm itself as an exact-rational linear program (p = 2 only) so the
certificates can be checked against true optima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import (DimensionMismatchError, NonpositiveBoundError,
                     SizeLimitError, UnsupportedFieldError, ZeroWitnessError)
from .fields import mat_rank
from .fourier import (DEFAULT_ENUMERATION_CAP, FourierTable, GroupFunction,
                      PartialSignFunction, dft, fourier_linf, matrix_at_point,
                      theta, theta_hat_closed, theta_hat_l1_closed,
                      theta_hat_l1_exact)
from .lp import simplex_min

LP_POINT_CAP = 16

MAIN_TERM_CAVEAT = ("main term only: additive O(log n + log 1/delta) terms of the "
                    "trace-norm bound are not estimated")


@dataclass(frozen=True)
class WitnessCertificate:
    """Evaluated dual quotient; exact Fractions where the inputs were exact."""

    epsilon: object
    correlation: object
    outside_mass: object
    witness_l1: object
    dual_denominator: object
    bound: object

    def bound_log2(self) -> float:
        """log2 of the bound, safe for values far outside float range."""
        b = self.bound
        if b <= 0:
            raise NonpositiveBoundError(f"bound {b} is not positive")
        if isinstance(b, Fraction):
            return math.log2(b.numerator) - math.log2(b.denominator)
        return math.log2(b)


@dataclass(frozen=True)
class ApproxNormLP:
    """Exact LP solution of the approximate-norm minimization (p = 2)."""

    p: int
    N: int
    epsilon: Fraction
    optimum: Fraction
    optimizer: tuple[Fraction, ...]


@dataclass(frozen=True)
class BoundReport:
    trace_norm_lower: object
    main_term_bits: float
    caveat: str = MAIN_TERM_CAVEAT


def rank_sign_function(n: int, p: int,
                       cap: int = DEFAULT_ENUMERATION_CAP) -> PartialSignFunction:
    """+1 on full-rank matrices, -1 on rank n-1, undefined below."""
    th = theta(n, p, cap=cap)  # reuses the cap check
    signs = []
    for i in range(p ** (n * n)):
        r = mat_rank(matrix_at_point(i, n, p))
        signs.append(1 if r == n else (-1 if r == n - 1 else 0))
    return PartialSignFunction(th.p, th.N, tuple(signs))


def theta_witness(n: int, p: int,
                  cap: int = DEFAULT_ENUMERATION_CAP) -> GroupFunction:
    """The canonical rank witness psi = (-1)^n thetahat as a point function.

    Built from the closed form, which equals the transform of theta at
    every frequency (a tested identity), so the values are exact rationals
    for every p.
    """
    N = n * n
    if p**N > cap:
        raise SizeLimitError(f"p^N = {p**N} exceeds cap {cap}")
    sign = (-1) ** n
    vals = tuple(sign * theta_hat_closed(matrix_at_point(i, n, p)) for i in range(p**N))
    return GroupFunction(p, N, vals)


def dual_bound(g: PartialSignFunction, psi: GroupFunction, epsilon,
               cap: int = DEFAULT_ENUMERATION_CAP) -> WitnessCertificate:
    """Evaluate the dual quotient for an explicit witness psi.

    Exact rationals when p = 2 and psi has exact values; complex inputs
    fall back to doubles.  The denominator p^N ||psihat||_inf comes from
    one more transform of psi.
    """
    if g.p != psi.p or g.N != psi.N:
        raise DimensionMismatchError("sign function and witness live on different groups")
    if all(v == 0 for v in psi.values):
        raise ZeroWitnessError("witness is identically zero")
    if not 0 < float(epsilon) < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    size = g.p**g.N
    exact = psi.is_exact() or all(isinstance(v, (int, Fraction)) for v in psi.values)
    correlation = Fraction(0) if exact else 0.0
    outside = Fraction(0) if exact else 0.0
    total = Fraction(0) if exact else 0.0
    for x in range(size):
        v = psi.values[x]
        total += abs(v)
        s = g.signs[x]
        if s:
            correlation += s * v
        else:
            outside += abs(v)
    denominator = size * fourier_linf(dft(psi, cap=cap))
    eps = Fraction(epsilon) if exact and not isinstance(epsilon, float) else float(epsilon)
    if exact and isinstance(eps, float):
        eps = Fraction(epsilon).limit_denominator(10**12)
    bound = (correlation - outside - eps * total) / denominator
    return WitnessCertificate(eps, correlation, outside, total, denominator, bound)


def _prod_pk_minus_1(n: int, p: int) -> int:
    out = 1
    for k in range(1, n + 1):
        out *= p**k - 1
    return out


def rank_correlation_closed(n: int, p: int) -> Fraction:
    """Closed form of <g, psi.dom(g)> for the rank witness."""
    lead = 1 + Fraction(p - Fraction(1, p ** (n - 1)), p - 1)
    return lead * Fraction(_prod_pk_minus_1(n, p), p**n)


def rank_bound_constant(n: int, p: int, epsilon) -> Fraction:
    """The bracketed constant multiplying p^-n prod(p^k - 1) in the rank bound:

        2 (1 + (p - p^{1-n}) / (p-1))  -  (1 + eps) prod_{k=0}^{n-1} (1 + p^k)/p^k
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    eps = Fraction(epsilon) if not isinstance(epsilon, float) else Fraction(epsilon).limit_denominator(10**12)
    lead = 2 * (1 + Fraction(p - Fraction(1, p ** (n - 1)), p - 1))
    tail = Fraction(1)
    for k in range(n):
        tail *= Fraction(1 + p**k, p**k)
    return lead - (1 + eps) * tail


def rank_bound_log2(n: int, p: int, epsilon) -> float:
    """log2 of the closed-form rank bound, evaluated in log space.

    The O(1) constant is computed directly; the growing factor
    p^-n prod(p^k - 1) contributes sum_k (k log2 p + log2(1 - p^-k)) - n log2 p,
    summed via log1p so nothing overflows.
    """
    const = float(rank_bound_constant(n, p, epsilon))
    if const <= 0:
        raise NonpositiveBoundError(f"constant {const} is not positive")
    log2 = math.log2(const) - n * math.log2(p)
    for k in range(1, n + 1):
        log2 += k * math.log2(p) + math.log1p(-float(p) ** -k) / math.log(2)
    return log2


def rank_witness_bound(n: int, p: int, epsilon) -> WitnessCertificate:
    """Certificate for the rank sign function from closed forms only.

    correlation and ||psi||_1 use the product formulas, the denominator is
    p^{n^2} ||psihat||_inf = 1 exactly (double transform of thetahat), and
    outside mass is ||psi||_1 - correlation because psi agrees in sign with
    g on its domain.  Exact rationals at every n; use bound_log2() for
    float reporting when the numbers outgrow doubles.
    """
    eps = Fraction(epsilon) if not isinstance(epsilon, float) else Fraction(epsilon).limit_denominator(10**12)
    if not 0 < eps < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    correlation = rank_correlation_closed(n, p)
    witness_l1 = theta_hat_l1_exact(n, p)
    outside = witness_l1 - correlation
    bound = 2 * correlation - (1 + eps) * witness_l1
    return WitnessCertificate(eps, correlation, outside, witness_l1, Fraction(1), bound)


def approx_fourier_l1_exact(g: PartialSignFunction, epsilon,
                            point_cap: int = LP_POINT_CAP) -> ApproxNormLP:
    """Exact optimum of  min ||phihat||_1  over the approximate-norm box.

    Restricted to p = 2, where coefficients are real and the objective
    linearizes with one auxiliary variable per frequency.  Solved by the
    exact-rational simplex; independent of the dual certificates.
    """
    if g.p != 2:
        raise UnsupportedFieldError("LP oracle only covers p = 2")
    size = 2**g.N
    if size > point_cap:
        raise SizeLimitError(f"{size} points exceed the LP cap {point_cap}")
    eps = Fraction(epsilon) if not isinstance(epsilon, float) else Fraction(epsilon).limit_denominator(10**12)
    if not 0 < eps < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    lo = []
    hi = []
    for s in g.signs:
        if s == 1:
            lo.append(1 - eps), hi.append(1 + eps)
        elif s == -1:
            lo.append(-1 - eps), hi.append(-1 + eps)
        else:
            lo.append(-1 - eps), hi.append(1 + eps)
    chi = [[(-1 if bin(s & x).count("1") & 1 else 1) for x in range(size)]
           for s in range(size)]

    # Variables: t_x = phi(x) - lo_x (size), u_s >= |phihat(s)| (size), then
    # slacks: two per frequency inequality and one per upper bound.
    nt, nu = size, size
    nslack = 2 * size + size
    ncols = nt + nu + nslack
    rows, rhs, cost = [], [], [Fraction(0)] * ncols
    for s in range(size):
        cost[nt + s] = Fraction(1)
    base = [Fraction(sum(chi[s][x] * lo[x] for x in range(size)), size) for s in range(size)]
    slack = nt + nu
    for s in range(size):
        row = [Fraction(0)] * ncols
        for x in range(size):
            row[x] = Fraction(-chi[s][x], size)
        row[nt + s] = Fraction(1)
        row[slack] = Fraction(-1)
        slack += 1
        rows.append(row)
        rhs.append(base[s])
        row = [Fraction(0)] * ncols
        for x in range(size):
            row[x] = Fraction(chi[s][x], size)
        row[nt + s] = Fraction(1)
        row[slack] = Fraction(-1)
        slack += 1
        rows.append(row)
        rhs.append(-base[s])
    for x in range(size):
        row = [Fraction(0)] * ncols
        row[x] = Fraction(1)
        row[slack] = Fraction(1)
        slack += 1
        rows.append(row)
        rhs.append(hi[x] - lo[x])

    optimum, solution = simplex_min(cost, rows, rhs)
    phi = tuple(solution[x] + lo[x] for x in range(size))
    # The u_s can exceed |phihat(s)| at an optimum only if some u is slack,
    # which a minimal objective forbids; recompute the norm to be safe.
    coeffs = [Fraction(sum(chi[s][x] * phi[x] for x in range(size)), size)
              for s in range(size)]
    norm = sum(abs(c) for c in coeffs)
    assert norm == optimum, "LP optimum must equal the norm of its optimizer"
    return ApproxNormLP(2, g.N, eps, optimum, phi)


def comm_bound_main_term(cert: WitnessCertificate, p: int, N: int) -> BoundReport:
    """Trace-norm main term of a certificate: p^N bound, and its bit count.

    main_term_bits = log2((p^N bound)^2 / p^{2N}) = 2 log2(bound).
    """
    if cert.bound <= 0:
        raise NonpositiveBoundError(f"bound {cert.bound} is not positive")
    bits = 2.0 * cert.bound_log2()
    try:
        trace = p**N * cert.bound
        float(trace)
    except OverflowError:
        trace = math.inf
    return BoundReport(trace, bits)


def _number_to_string(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def certificate_json_dict(cert: WitnessCertificate) -> dict:
    """Serialize with the fixed key set; exact rationals become strings."""
    return {
        "epsilon": _number_to_string(cert.epsilon),
        "correlation": _number_to_string(cert.correlation),
        "outsideMass": _number_to_string(cert.outside_mass),
        "witnessL1": _number_to_string(cert.witness_l1),
        "dualDenominator": _number_to_string(cert.dual_denominator),
        "bound": _number_to_string(cert.bound),
        "mainTermBits": 2.0 * cert.bound_log2() if cert.bound > 0 else None,
    }
