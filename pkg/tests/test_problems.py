"""Instance generators, oracles, and reduction protocols."""

import math
from collections import Counter
from random import Random

import pytest

from fpbounds.errors import (DimensionMismatchError, PromiseViolationError,
                             ZeroVectorError)
from fpbounds.fields import (FpMatrix, FpVector, all_invertible, all_matrices,
                             mat_inverse, mat_rank, random_of_rank, solve_linear)
from fpbounds.problems import (AdvantageReport, HamInstance, IpInstance,
                               NoisyOracle, RankInstance, SlsInstance,
                               additive_to_concat, augment_for_inverse,
                               concat_parity_fix, estimate_advantage,
                               estimate_p0, gen_ham_instance, gen_ip_instance,
                               gen_rank_instance, gen_subspace_instance,
                               gip_eval, inverse_entry_zero, ip_dprime_to_prime,
                               pad_rank, reduce_inverse_to_sls,
                               reduce_rank_to_inverse, reduce_rank_to_inverse_p2,
                               sandwich_uniform, sls_first_coordinate_zero,
                               spawn_rng, stack_rank, subspace_intersection_dim)

from conftest import chi2_crit, chi2_stat, freq_band


def test_spawn_rng_reproducible_and_independent():
    a = spawn_rng(7, "alpha", 0).random()
    b = spawn_rng(7, "alpha", 0).random()
    c = spawn_rng(7, "alpha", 1).random()
    assert a == b and a != c


def test_instance_promises_enforced():
    with pytest.raises(PromiseViolationError):
        RankInstance(FpMatrix.zeros(2, 2, 2), FpMatrix.zeros(2, 2, 2), 1, 2)
    with pytest.raises(PromiseViolationError):
        IpInstance(FpVector(3, (1, 1)), FpVector(3, (1, 1)), "ip")  # <x,y> = 2
    with pytest.raises(PromiseViolationError):
        IpInstance(FpVector(3, (0, 1)), FpVector(3, (1, 1)), "ip_prime")
    with pytest.raises(PromiseViolationError):
        HamInstance(FpVector(2, (1, 1, 0)), FpVector(2, (0, 0, 1)), 0)  # weight 3
    with pytest.raises(ZeroVectorError):
        SlsInstance(FpMatrix.identity(2, 3), FpMatrix.zeros(2, 2, 3), FpVector(3, (0, 0)))


def test_generators_hit_both_sides():
    rng = Random(21)
    for target in (1, 2):
        inst = gen_rank_instance(2, 3, 1, target, rng)
        assert mat_rank(inst.x + inst.y) == target
    for target in (0, 1):
        inst = gen_ip_instance(5, 5, target, rng, "ip_prime")
        assert inst.x.dot(inst.y) == target
    for target in (1, 3):
        inst = gen_ham_instance(5, 1, target, rng)
        assert sum((inst.x + inst.y).entries) == target


def test_rank_share_marginal_uniform():
    rng = Random(22)
    trials = 40_000
    counts = Counter(gen_rank_instance(2, 2, 1, 2, rng).x for _ in range(trials))
    expected = [trials / 16] * 16
    assert chi2_stat([counts[m] for m in all_matrices(2, 2)], expected) < chi2_crit(15)


def test_subspace_instances():
    rng = Random(23)
    for dim in (0, 1):
        for _ in range(20):
            inst = gen_subspace_instance(4, 2, dim, rng)
            assert subspace_intersection_dim(inst) == dim
    for _ in range(50):
        inst = gen_subspace_instance(2, 2, rng.randrange(2), rng)
        assert subspace_intersection_dim(inst) == inst.intersect_dim
    with pytest.raises(ValueError):
        gen_subspace_instance(3, 2, 0, rng)


def test_noisy_oracle_flip_rate():
    rng = Random(24)
    oracle = NoisyOracle(lambda _: True, 0.2)
    trials = 30_000
    flips = sum(not oracle.query(None, rng) for _ in range(trials))
    assert abs(flips / trials - 0.2) < freq_band(0.2, trials)
    exact = NoisyOracle(lambda _: False, 0.0)
    assert not any(exact.query(None, rng) for _ in range(100))


def test_inverse_entry_zero_block_identity():
    # the augmented matrix keeps the input as its lower-right block, so the
    # (1,1) entry of the inverse vanishes iff the input was rank deficient
    rng = Random(25)
    for a in all_matrices(2, 3):
        for _ in range(3):
            a2 = augment_for_inverse(a, rng)
            assert a2.rows == 3 and a2.cols == 3
            if mat_rank(a2) == 3:
                assert inverse_entry_zero(a2) == (mat_rank(a) < 2)
            else:
                assert not inverse_entry_zero(a2)


def test_reduce_promise_guards():
    rng = Random(26)
    oracle = NoisyOracle(inverse_entry_zero, 0.0)
    with pytest.raises(PromiseViolationError):
        reduce_rank_to_inverse(FpMatrix.zeros(3, 3, 3), oracle, rng)  # rank 0
    with pytest.raises(PromiseViolationError):
        reduce_rank_to_inverse(FpMatrix.identity(2, 2), oracle, rng)  # p = 2
    with pytest.raises(PromiseViolationError):
        reduce_rank_to_inverse_p2(FpMatrix.identity(2, 3), oracle, rng)


def test_noiseless_acceptance_probability_p3():
    # rank(a) = n-2 with a perfect oracle accepts iff both augmentations
    # raise the rank: probability (1 - 1/p)^2 = 4/9 at p = 3
    rng = Random(27)
    oracle = NoisyOracle(inverse_entry_zero, 0.0)
    trials = 20_000
    hits = 0
    for i in range(trials):
        r = spawn_rng(27, i)
        hits += reduce_rank_to_inverse(random_of_rank(2, 3, 1, r), oracle, r)
    assert abs(hits / trials - 4 / 9) < freq_band(4 / 9, trials)


def test_sandwich_uniform_preserves_rank_and_uniformizes():
    rng = Random(28)
    for _ in range(50):
        m = random_of_rank(3, 2, rng.randrange(4), rng)
        assert mat_rank(sandwich_uniform(m, rng)) == mat_rank(m)
    # a fixed rank-1 seed must spread uniformly over all nine rank-1 matrices
    seed_matrix = FpMatrix.from_rows(2, [[1, 0], [0, 0]])
    trials = 45_000
    counts = Counter(sandwich_uniform(seed_matrix, rng) for _ in range(trials))
    rank_one = [m for m in all_matrices(2, 2) if mat_rank(m) == 1]
    assert set(counts) == set(rank_one)
    assert chi2_stat([counts[m] for m in rank_one], [trials / 9] * 9) < chi2_crit(8)


def test_reduction_gaps_small_scale():
    rep3 = estimate_advantage(3, 3, 1 / 20, 4000, seed=303)
    assert rep3.beta_hat - rep3.alpha_hat >= 1 / 18 - 3 * rep3.gap_stderr()
    rep2 = estimate_advantage(3, 2, 1 / 20, 4000, seed=304)
    assert abs(rep2.beta_hat - rep2.alpha_hat) >= 17 / 80 - 3 * rep2.gap_stderr()
    # the observed sign resolves the written inequality: beta exceeds alpha
    assert rep2.beta_hat > rep2.alpha_hat
    assert rep2.p0_hat is not None and abs(rep2.p0_hat - 1 / 20) < 0.02


def test_estimate_p0_matches_oracle_singular_behavior():
    oracle = NoisyOracle(inverse_entry_zero, 0.1)
    p0 = estimate_p0(oracle, 3, 2, Random(31), draws=4000)
    assert abs(p0 - 0.1) < freq_band(0.1, 4000)


def test_perfect_reduction_sanity():
    # a perfect rank decision makes alpha 0 and beta 1 exactly
    def perfect(a, oracle, rng):
        return mat_rank(a) == a.rows - 1

    rep = estimate_advantage(3, 3, 0.0, 500, seed=305, reduction=perfect)
    assert rep.alpha_hat == 0.0 and rep.beta_hat == 1.0


def test_advantage_report_json_keys():
    rep = AdvantageReport("rank_to_inverse", 3, 3, 0.05, 10, 0.1, 0.5, 0.01, 9)
    assert set(rep.json_dict()) == {"problem", "n", "p", "delta", "trials",
                                    "alphaHat", "betaHat", "stderr", "seed"}


def test_reduce_inverse_to_sls_identity_and_canonical_q():
    for p in (2, 3):
        b = FpVector(p, (0, 1))
        for z in all_invertible(2, p):
            x = FpMatrix.zeros(2, 2, p)
            xp, yp, b_out = reduce_inverse_to_sls(x, z, b)
            assert b_out == b
            t = solve_linear(xp + yp, b_out)
            assert t.entries[0] == mat_inverse(z).entry(0, 0)
    # b = e1 gives the identity transformation
    b = FpVector(3, (1, 0))
    z = FpMatrix.from_rows(3, [[1, 2], [1, 1]])
    xp, yp, _ = reduce_inverse_to_sls(FpMatrix.zeros(2, 2, 3), z, b)
    assert xp == FpMatrix.zeros(2, 2, 3) and yp == z
    with pytest.raises(ZeroVectorError):
        reduce_inverse_to_sls(z, z, FpVector(3, (0, 0)))


def test_sls_decision_matches_inverse_predicate():
    b = FpVector(3, (1, 2))
    for z in all_invertible(2, 3):
        xp, yp, b_out = reduce_inverse_to_sls(FpMatrix.zeros(2, 2, 3), z, b)
        inst = SlsInstance(xp, yp, b_out)
        assert sls_first_coordinate_zero(inst) == inverse_entry_zero(z)


def test_additive_to_concat_identity():
    zero = FpMatrix.zeros(2, 2, 2)
    xp, yp = additive_to_concat(zero, zero)
    assert stack_rank(xp, yp) == 2
    for x in all_matrices(2, 2):
        for y in all_matrices(2, 2):
            xp, yp = additive_to_concat(x, y)
            assert mat_rank(x + y) == stack_rank(xp, yp) - 2
    for x in all_matrices(2, 3):
        for y in all_matrices(2, 3):
            xp, yp = additive_to_concat(x, y)
            assert mat_rank(x + y) == stack_rank(xp, yp) - 2


def test_concat_parity_fix():
    assert concat_parity_fix(FpMatrix.identity(2, 2)) == FpMatrix.identity(3, 2)
    for m in all_matrices(2, 2):
        out = concat_parity_fix(m)
        if mat_rank(m) == 2:
            assert mat_inverse(out).entry(0, 0) == mat_inverse(m).entry(0, 0)
        else:
            assert mat_rank(out) < 3


def test_pad_rank():
    assert mat_rank(pad_rank(FpMatrix.identity(2, 2), 4)) == 2
    assert pad_rank(FpMatrix.zeros(2, 2, 3), 3) == FpMatrix.zeros(3, 3, 3)
    for m in all_matrices(2, 2):
        assert mat_rank(pad_rank(m, 3)) == mat_rank(m)
    with pytest.raises(DimensionMismatchError):
        pad_rank(FpMatrix.identity(3, 2), 2)


def test_ip_dprime_to_prime():
    x = FpVector(3, (0, 2, 0, 1))
    y = FpVector(3, (1, 2, 2, 1))
    mask, (xr, yr) = ip_dprime_to_prime(x, y)
    assert [i for i in range(4) if mask >> i & 1] == [0, 2]
    assert len(xr) == 2 and 0 not in xr.entries
    assert xr.dot(yr) == x.dot(y)

    dense = FpVector(3, (1, 2, 1))
    mask, (xr, yr) = ip_dprime_to_prime(dense, FpVector(3, (2, 2, 1)))
    assert mask == 0 and xr == dense

    rng = Random(33)
    for _ in range(1000):
        inst = gen_ip_instance(6, 5, rng.randrange(2), rng, "ip_dprime")
        _, (xr, yr) = ip_dprime_to_prime(inst.x, inst.y)
        assert xr.dot(yr) == inst.x.dot(inst.y)
        if len(xr):
            IpInstance(xr, yr, "ip_prime")  # restriction satisfies the stronger promise


def test_gip():
    x = FpVector(3, (1, 2))
    y = FpVector(3, (2, 2))
    z = FpVector(3, (1, 1))
    assert gip_eval([x, y]) == x.dot(y)
    assert gip_eval([x, y, z]) == 0  # 1*2*1 + 2*2*1 = 6 = 0 mod 3
    assert gip_eval([x, FpVector(3, (0, 0))]) == 0
    with pytest.raises(DimensionMismatchError):
        gip_eval([x, FpVector(3, (1, 2, 1))])
