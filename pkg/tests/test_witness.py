"""Witness certificates against enumeration and the exact LP oracle."""

import json
import math
from fractions import Fraction
from random import Random

import pytest

from fpbounds.errors import (NonpositiveBoundError, SizeLimitError,
                             UnsupportedFieldError, ZeroWitnessError)
from fpbounds.fourier import (GroupFunction, PartialSignFunction, dft,
                              fourier_l1, fourier_linf, theta)
from fpbounds.witness import (approx_fourier_l1_exact, certificate_json_dict,
                              comm_bound_main_term, dual_bound,
                              rank_bound_constant, rank_bound_log2,
                              rank_correlation_closed, rank_sign_function,
                              rank_witness_bound, theta_witness)

EPS = Fraction(1, 4)


def test_dual_bound_rank_n1():
    cert = dual_bound(rank_sign_function(1, 2), theta_witness(1, 2), EPS)
    assert cert.correlation == 1
    assert cert.outside_mass == 0
    assert cert.witness_l1 == 1
    assert cert.dual_denominator == 1
    assert cert.bound == Fraction(3, 4)


def test_dual_bound_rank_n2():
    cert = dual_bound(rank_sign_function(2, 2), theta_witness(2, 2), EPS)
    assert cert.correlation == Fraction(15, 8)
    assert cert.outside_mass == Fraction(3, 8)
    assert cert.witness_l1 == Fraction(9, 4)
    assert cert.dual_denominator == 1
    assert cert.bound == Fraction(15, 16)
    assert float(cert.bound) == 0.9375


def test_dual_bound_discrepancy_style_witness():
    g = rank_sign_function(2, 2)
    psi = GroupFunction(2, 4, tuple(g.signs))  # the function itself, zero off-domain
    cert = dual_bound(g, psi, EPS)
    assert math.isfinite(float(cert.bound))


def test_dual_bound_errors():
    g = rank_sign_function(1, 2)
    with pytest.raises(ZeroWitnessError):
        dual_bound(g, GroupFunction(2, 1, (0, 0)), EPS)
    with pytest.raises(ValueError):
        dual_bound(g, theta_witness(1, 2), Fraction(3, 2))


def test_closed_forms_match_enumeration_exactly():
    for n in (1, 2):
        closed = rank_witness_bound(n, 2, EPS)
        enum = dual_bound(rank_sign_function(n, 2), theta_witness(n, 2), EPS)
        assert closed.correlation == enum.correlation
        assert closed.outside_mass == enum.outside_mass
        assert closed.witness_l1 == enum.witness_l1
        assert closed.dual_denominator == enum.dual_denominator
        assert closed.bound == enum.bound


def test_closed_correlation_p3():
    enum = dual_bound(rank_sign_function(2, 3), theta_witness(2, 3), EPS)
    assert enum.correlation == rank_correlation_closed(2, 3)
    # the p = 3 denominator comes from the complex transform, so compare in floats
    assert abs(float(enum.bound) - float(rank_witness_bound(2, 3, EPS).bound)) < 1e-9


def test_witness_double_transform_linf():
    # ||psihat||_inf = p^{-n^2} so the dual denominator is exactly 1
    for n, p in ((1, 2), (2, 2), (1, 3)):
        psi = theta_witness(n, p)
        value = fourier_linf(dft(psi))
        target = p ** (-(n * n))
        assert abs(float(value) - target) < 1e-9
    psi = theta_witness(2, 3)
    assert abs(fourier_linf(dft(psi)) - 3.0**-4) < 1e-9


def test_rank_bound_constant_values():
    # with eps = 1/4: exact 5/4 at (2, 2); the paper's asymptotic gates at n = 10
    assert rank_bound_constant(2, 2, EPS) == Fraction(5, 4)
    assert rank_bound_constant(10, 2, EPS) > Fraction(28, 1000)
    assert rank_bound_constant(10, 3, EPS) > Fraction(8, 100)
    # consistency with the n=2 certificate: bound = constant * p^-n prod(p^k - 1)
    scale = Fraction(3, 4)  # 2^-2 * (2-1)(4-1)
    assert rank_bound_constant(2, 2, EPS) * scale == Fraction(15, 16)


def test_rank_bound_constant_monotone_in_eps():
    values = [rank_bound_constant(4, 2, Fraction(k, 20)) for k in range(1, 16)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_rank_witness_bound_large_n():
    cert = rank_witness_bound(10, 2, EPS)
    assert cert.bound >= Fraction(28, 1000) * 2 ** (10 * 7 // 2)
    # log-space evaluation agrees with the exact value
    assert abs(rank_bound_log2(10, 2, EPS) - cert.bound_log2()) < 1e-9
    huge = rank_witness_bound(60, 2, EPS)  # far beyond float range
    assert huge.bound_log2() > 1500


def test_lp_oracle_tight_at_n1():
    g = rank_sign_function(1, 2)
    lp = approx_fourier_l1_exact(g, EPS)
    assert lp.optimum == Fraction(3, 4)
    assert lp.optimum == dual_bound(g, theta_witness(1, 2), EPS).bound


def test_lp_oracle_single_defined_point():
    # one +1 point: best feasible is the constant 1 - eps, so optimum 3/4
    g = PartialSignFunction(2, 2, (1, 0, 0, 0))
    lp = approx_fourier_l1_exact(g, EPS)
    assert lp.optimum == Fraction(3, 4)


def test_lp_oracle_n2_weak_duality_and_sandwich():
    g = rank_sign_function(2, 2)
    lp = approx_fourier_l1_exact(g, EPS)
    # frozen optimum, cross-checked against an independent float LP solver
    assert lp.optimum == Fraction(5, 2)
    assert dual_bound(g, theta_witness(2, 2), EPS).bound <= lp.optimum
    filled = GroupFunction(2, 4, tuple(g.signs))
    assert lp.optimum <= fourier_l1(dft(filled))


def test_lp_optimizer_is_feasible():
    g = rank_sign_function(2, 2)
    eps = EPS
    lp = approx_fourier_l1_exact(g, eps)
    for sign, value in zip(g.signs, lp.optimizer):
        if sign == 1:
            assert 1 - eps <= value <= 1 + eps
        elif sign == -1:
            assert -1 - eps <= value <= -1 + eps
        else:
            assert -1 - eps <= value <= 1 + eps


def test_lp_weak_duality_random_witnesses():
    g = rank_sign_function(2, 2)
    optimum = approx_fourier_l1_exact(g, EPS).optimum
    rng = Random(42)
    for _ in range(25):
        vals = tuple(rng.randrange(-3, 4) for _ in range(16))
        if not any(vals):
            continue
        cert = dual_bound(g, GroupFunction(2, 4, vals), EPS)
        assert cert.bound <= optimum


def test_lp_oracle_guards():
    with pytest.raises(UnsupportedFieldError):
        approx_fourier_l1_exact(rank_sign_function(1, 3), EPS)
    with pytest.raises(SizeLimitError):
        approx_fourier_l1_exact(rank_sign_function(2, 2), EPS, point_cap=8)


def test_comm_bound_main_term():
    from fpbounds.witness import WitnessCertificate
    unit = WitnessCertificate(EPS, 1, 0, 1, 1, Fraction(1))
    assert comm_bound_main_term(unit, 2, 1).main_term_bits == 0

    cert = rank_witness_bound(2, 2, EPS)
    report = comm_bound_main_term(cert, 2, 4)
    assert abs(report.main_term_bits - 2 * math.log2(0.9375)) < 1e-12
    assert report.trace_norm_lower == 16 * Fraction(15, 16)
    assert "O(log n + log 1/delta)" in report.caveat

    big = rank_witness_bound(10, 2, EPS)
    assert comm_bound_main_term(big, 2, 100).main_term_bits >= 2 * math.log2(0.028) + 70

    negative = rank_witness_bound(2, 2, Fraction(9, 10))
    assert negative.bound < 0
    with pytest.raises(NonpositiveBoundError):
        comm_bound_main_term(negative, 2, 4)


def test_certificate_json():
    cert = rank_witness_bound(2, 2, EPS)
    blob = json.dumps(certificate_json_dict(cert))
    data = json.loads(blob)
    assert set(data) == {"epsilon", "correlation", "outsideMass", "witnessL1",
                         "dualDenominator", "bound", "mainTermBits"}
    assert data["bound"] == "15/16"
    assert data["correlation"] == "15/8"
    assert abs(data["mainTermBits"] + 0.1862188087829626) < 1e-12
