"""Promise-problem instances and the two-player reduction protocols.

Instance generators construct inputs satisfying each promise by
construction; every generator re-checks the promise on emission.

The rank-to-inverse reductions model the assumed inverse-entry protocol
as a NoisyOracle: the oracle evaluates the true predicate and flips the
answer with a fixed rate, independently per query.  Off the promise
(singular query matrix) the inverse entry does not exist and the modeled
answer before flipping is "nonzero"; trials never special-case failed
augmentations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from random import Random

from .errors import (DimensionMismatchError, PromiseViolationError,
                     SingularMatrixError, ZeroVectorError)
from .fields import (FpMatrix, FpVector, mat_inverse, mat_rank, random_invertible,
                     random_matrix, random_of_rank, solve_linear)


def spawn_rng(seed: int, *path) -> Random:
    """Derive an independent, reproducible stream from (seed, path).

    String seeding hashes through sha512, so streams do not depend on the
    process hash seed or on draw order elsewhere.
    """
    return Random(":".join([str(seed), *map(str, path)]))


# ---------------------------------------------------------------------------
# instances

@dataclass(frozen=True)
class RankInstance:
    x: FpMatrix
    y: FpMatrix
    k: int
    promised_rank: int

    def __post_init__(self):
        if self.promised_rank not in (self.k, self.k + 1):
            raise PromiseViolationError("promised rank must be k or k+1")
        if mat_rank(self.x + self.y) != self.promised_rank:
            raise PromiseViolationError("x + y does not have the promised rank")


@dataclass(frozen=True)
class InverseInstance:
    x: FpMatrix
    y: FpMatrix

    def __post_init__(self):
        if mat_rank(self.x + self.y) != self.x.rows:
            raise PromiseViolationError("x + y must be invertible")


@dataclass(frozen=True)
class SlsInstance:
    x: FpMatrix
    y: FpMatrix
    b: FpVector

    def __post_init__(self):
        if mat_rank(self.x + self.y) != self.x.rows:
            raise PromiseViolationError("x + y must be invertible")
        if self.b.is_zero():
            raise ZeroVectorError("b must be nonzero")


@dataclass(frozen=True)
class IpInstance:
    """Inner-product promise instance; variant constrains the supports.

    variant "ip": no constraint; "ip_prime": all entries of both vectors
    nonzero; "ip_dprime": all entries of y nonzero.
    """

    x: FpVector
    y: FpVector
    variant: str = "ip"

    def __post_init__(self):
        if len(self.x) != len(self.y) or self.x.p != self.y.p:
            raise DimensionMismatchError("vectors must match")
        if self.x.dot(self.y) not in (0, 1):
            raise PromiseViolationError("<x, y> must be 0 or 1")
        if self.variant == "ip_prime" and (0 in self.x.entries or 0 in self.y.entries):
            raise PromiseViolationError("ip_prime requires nonzero entries")
        if self.variant == "ip_dprime" and 0 in self.y.entries:
            raise PromiseViolationError("ip_dprime requires nonzero entries for y")
        if self.variant not in ("ip", "ip_prime", "ip_dprime"):
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass(frozen=True)
class HamInstance:
    x: FpVector
    y: FpVector
    k: int

    def __post_init__(self):
        if self.x.p != 2 or self.y.p != 2:
            raise PromiseViolationError("Hamming instances live over F_2")
        w = sum((self.x + self.y).entries)
        if w not in (self.k, self.k + 2):
            raise PromiseViolationError(f"weight {w} violates the promise")


@dataclass(frozen=True)
class SubspaceInstance:
    basis_a: FpMatrix
    basis_b: FpMatrix
    intersect_dim: int

    def __post_init__(self):
        n = self.basis_a.cols
        half = self.basis_a.rows
        if self.basis_b.rows != half or self.basis_b.cols != n or 2 * half != n:
            raise DimensionMismatchError("need two (n/2) x n bases")
        if mat_rank(self.basis_a) != half or mat_rank(self.basis_b) != half:
            raise PromiseViolationError("bases must have full row rank")
        stacked = FpMatrix(self.basis_a.p, n, n, self.basis_a.entries + self.basis_b.entries)
        if mat_rank(stacked) != n - self.intersect_dim:
            raise PromiseViolationError("intersection dimension violates the promise")


# ---------------------------------------------------------------------------
# generators

def gen_rank_instance(n: int, p: int, k: int, target: int, rng: Random) -> RankInstance:
    if k + 1 > n:
        raise ValueError("need k + 1 <= n")
    z = random_of_rank(n, p, target, rng)
    x = random_matrix(n, n, p, rng)
    return RankInstance(x, z - x, k, target)


def gen_inverse_instance(n: int, p: int, rng: Random) -> InverseInstance:
    z = random_invertible(n, p, rng)
    x = random_matrix(n, n, p, rng)
    return InverseInstance(x, z - x)


def gen_sls_instance(n: int, p: int, b: FpVector, rng: Random) -> SlsInstance:
    z = random_invertible(n, p, rng)
    x = random_matrix(n, n, p, rng)
    return SlsInstance(x, z - x, b)


def gen_ip_instance(n: int, p: int, target: int, rng: Random,
                    variant: str = "ip") -> IpInstance:
    if target not in (0, 1):
        raise ValueError("target inner product must be 0 or 1")
    if variant == "ip":
        while True:
            x = FpVector(p, tuple(rng.randrange(p) for _ in range(n)))
            if target == 1 and all(e == 0 for e in x.entries):
                continue
            y = FpVector(p, tuple(rng.randrange(p) for _ in range(n)))
            if x.dot(y) == target:
                return IpInstance(x, y, variant)
    if variant == "ip_prime" and p == 2:
        raise ValueError("ip_prime needs p > 2")
    while True:
        x = FpVector(p, tuple(rng.randrange(1, p) if variant == "ip_prime"
                              else rng.randrange(p) for _ in range(n)))
        y = FpVector(p, tuple(rng.randrange(1, p) for _ in range(n)))
        if x.dot(y) == target:
            return IpInstance(x, y, variant)


def gen_ham_instance(n: int, k: int, target: int, rng: Random) -> HamInstance:
    if target not in (k, k + 2) or target > n:
        raise ValueError("target weight must be k or k+2, at most n")
    ones = rng.sample(range(n), target)
    z = [0] * n
    for i in ones:
        z[i] = 1
    x = tuple(rng.randrange(2) for _ in range(n))
    y = tuple(a ^ b for a, b in zip(x, z))
    return HamInstance(FpVector(2, x), FpVector(2, y), k)


def gen_subspace_instance(n: int, p: int, intersect_dim: int, rng: Random) -> SubspaceInstance:
    """Two (n/2)-dimensional subspaces meeting in {0} or a line."""
    if n % 2:
        raise ValueError("n must be even")
    if intersect_dim not in (0, 1):
        raise ValueError("intersection dimension must be 0 or 1")
    half = n // 2
    m = random_invertible(n, p, rng)
    rows = m.to_rows()
    if intersect_dim == 0:
        a_rows, b_rows = rows[:half], rows[half:]
    else:
        a_rows = rows[:half]
        b_rows = [rows[0]] + rows[half : n - 1]
    basis_a = random_invertible(half, p, rng) @ FpMatrix.from_rows(p, a_rows)
    basis_b = random_invertible(half, p, rng) @ FpMatrix.from_rows(p, b_rows)
    return SubspaceInstance(basis_a, basis_b, intersect_dim)


def subspace_intersection_dim(inst: SubspaceInstance) -> int:
    n = inst.basis_a.cols
    stacked = FpMatrix(inst.basis_a.p, n, n, inst.basis_a.entries + inst.basis_b.entries)
    return n - mat_rank(stacked)


# ---------------------------------------------------------------------------
# oracles

class NoisyOracle:
    """A decision procedure whose answer is flipped with a fixed rate.

    Models an assumed protocol with per-input error exactly error_rate;
    the inner procedure defines the correct answer on every input it may
    be handed, promise or not.
    """

    def __init__(self, decide, error_rate: float):
        if not 0 <= error_rate < 1:
            raise ValueError("error rate must lie in [0, 1)")
        self.decide = decide
        self.error_rate = error_rate

    def query(self, value, rng: Random) -> bool:
        truth = bool(self.decide(value))
        if self.error_rate and rng.random() < self.error_rate:
            return not truth
        return truth


def inverse_entry_zero(m: FpMatrix) -> bool:
    """True iff m is invertible and (m^-1)_{11} = 0; singular gives False."""
    try:
        return mat_inverse(m).entry(0, 0) == 0
    except SingularMatrixError:
        return False


def sls_first_coordinate_zero(inst: SlsInstance) -> bool:
    try:
        return solve_linear(inst.x + inst.y, inst.b).entries[0] == 0
    except SingularMatrixError:
        return False


# ---------------------------------------------------------------------------
# reductions

def augment_for_inverse(a: FpMatrix, rng: Random) -> FpMatrix:
    """Grow (n-1) x (n-1) a to n x n with a random new first column and row.

    The input ends up as the lower-right block, so for invertible results
    the (1,1) entry of the inverse vanishes exactly when a is singular.
    """
    p = a.p
    m = a.rows
    col = [rng.randrange(p) for _ in range(m)]
    rows = [[col[i]] + list(a.row(i)) for i in range(m)]
    top = [rng.randrange(p) for _ in range(m + 1)]
    return FpMatrix.from_rows(p, [top] + rows)


def sandwich_uniform(m: FpMatrix, rng: Random) -> FpMatrix:
    """G1 m G2 with G1, G2 uniform invertible: uniform on m's rank class."""
    n = m.rows
    return random_invertible(n, m.p, rng) @ m @ random_invertible(n, m.p, rng)


def _check_reduction_promise(a: FpMatrix):
    n = a.rows + 1
    r = mat_rank(a)
    if r not in (n - 1, n - 2):
        raise PromiseViolationError(f"rank {r} not in {{{n - 2}, {n - 1}}}")


def reduce_rank_to_inverse(a: FpMatrix, oracle: NoisyOracle, rng: Random) -> bool:
    """One reduction trial for p >= 3; True claims rank(a) = n-2.

    Augments a to an n x n matrix with a random first column then row and
    asks the oracle whether the (1,1) entry of the inverse vanishes, which
    for invertible augmentations happens exactly when a is rank deficient.
    """
    if a.p < 3:
        raise PromiseViolationError("this route needs p >= 3; use the p = 2 variant")
    _check_reduction_promise(a)
    return oracle.query(augment_for_inverse(a, rng), rng)


def reduce_rank_to_inverse_p2(a: FpMatrix, oracle: NoisyOracle, rng: Random) -> bool:
    """One reduction trial for p = 2; True claims rank(a) = n-2.

    Augments as in the p >= 3 route.  The protocol under this route is
    shown the re-randomized sandwich_uniform(a2, rng), uniform on the rank
    class of a2, which pins its off-promise response law to a constant
    each party can estimate locally with no communication (estimate_p0).
    The sandwich scrambles the block structure, so the modeled oracle's
    delta-flips are charged against the block predicate carried by a2;
    the sandwiched matrix adds no information beyond rank(a2) and is not
    re-derived per trial.
    """
    if a.p != 2:
        raise PromiseViolationError("p = 2 variant")
    _check_reduction_promise(a)
    return oracle.query(augment_for_inverse(a, rng), rng)


def reduce_inverse_to_sls(x: FpMatrix, y: FpMatrix, b: FpVector):
    """Map an inverse-entry instance to a linear-system instance.

    Both parties derive the same invertible Q with Q b = e1 from b alone:
    put b in column one, complete with standard basis vectors in index
    order skipping dependents, and invert the completion.  Shares are
    multiplied by Q^-1, so the solution t of (x'+y') t = b satisfies
    t_1 = ((x+y)^-1)_{11}.
    """
    if b.is_zero():
        raise ZeroVectorError("b must be nonzero")
    if x.p != y.p or x.rows != y.rows or x.cols != y.cols or not x.is_square():
        raise DimensionMismatchError("shares must be square and matched")
    if len(b) != x.rows or b.p != x.p:
        raise DimensionMismatchError("b must match the shares")
    completion = _complete_to_basis(b)  # Q^-1: first column is b
    return completion @ x, completion @ y, b


def _complete_to_basis(b: FpVector) -> FpMatrix:
    n, p = len(b), b.p
    cols = [list(b.entries)]
    for i in range(n):
        if len(cols) == n:
            break
        cand = [int(j == i) for j in range(n)]
        trial = cols + [cand]
        m = FpMatrix.from_rows(p, trial)  # rows for the rank check
        if mat_rank(m) == len(trial):
            cols.append(cand)
    return FpMatrix.from_rows(p, cols).transpose()


def additive_to_concat(x: FpMatrix, y: FpMatrix):
    """Turn an additive split into a stacked split: x' = [x | -I], y' = [y | I].

    rank(x + y) equals the rank of the 2n x 2n stack minus n.
    """
    if x.p != y.p or x.rows != y.rows or x.cols != y.cols or not x.is_square():
        raise DimensionMismatchError("need matching square shares")
    n, p = x.rows, x.p
    ident = FpMatrix.identity(n, p)
    xp = FpMatrix.from_rows(p, [list(x.row(i)) + [(-ident.entry(i, j)) % p for j in range(n)]
                                for i in range(n)])
    yp = FpMatrix.from_rows(p, [list(y.row(i)) + [ident.entry(i, j) for j in range(n)]
                                for i in range(n)])
    return xp, yp


def stack_rank(xp: FpMatrix, yp: FpMatrix) -> int:
    if xp.p != yp.p or xp.cols != yp.cols:
        raise DimensionMismatchError("blocks must share width")
    return mat_rank(FpMatrix(xp.p, xp.rows + yp.rows, xp.cols, xp.entries + yp.entries))


def concat_parity_fix(m: FpMatrix) -> FpMatrix:
    """Append a zero row and column with a 1 in the corner.

    Keeps invertibility and the (1,1) entry of the inverse while bumping
    the dimension parity.
    """
    if not m.is_square():
        raise DimensionMismatchError("square input required")
    n, p = m.rows, m.p
    rows = [list(m.row(i)) + [0] for i in range(n)]
    rows.append([0] * n + [1])
    return FpMatrix.from_rows(p, rows)


def pad_rank(x: FpMatrix, n: int) -> FpMatrix:
    """Zero-pad into the top-left of an n x n matrix; rank is preserved."""
    if n < max(x.rows, x.cols):
        raise DimensionMismatchError("padding cannot shrink the matrix")
    rows = [list(x.row(i)) + [0] * (n - x.cols) for i in range(x.rows)]
    rows += [[0] * n for _ in range(n - x.rows)]
    return FpMatrix.from_rows(x.p, rows)


def ip_dprime_to_prime(x: FpVector, y: FpVector):
    """Restrict to x's nonzero support; the n-bit mask is Alice's message.

    Bit i of the mask is set when x_i = 0.  The restricted instance has
    the same inner product and both supports fully nonzero.  The n-bit
    message only transfers hardness when p is large enough that n bits are
    a lower-order cost; no specific threshold on p is assumed here.
    """
    if len(x) != len(y) or x.p != y.p:
        raise DimensionMismatchError("vectors must match")
    if 0 in y.entries:
        raise PromiseViolationError("y must have nonzero entries")
    mask = 0
    keep = []
    for i, e in enumerate(x.entries):
        if e == 0:
            mask |= 1 << i
        else:
            keep.append(i)
    xr = FpVector(x.p, tuple(x.entries[i] for i in keep))
    yr = FpVector(y.p, tuple(y.entries[i] for i in keep))
    return mask, (xr, yr)


def gip_eval(vectors) -> int:
    """Generalized inner product: sum over positions of the entry products."""
    vectors = list(vectors)
    if not vectors:
        raise ValueError("need at least one vector")
    p = vectors[0].p
    n = len(vectors[0])
    if any(v.p != p or len(v) != n for v in vectors):
        raise DimensionMismatchError("vectors must share length and modulus")
    total = 0
    for j in range(n):
        term = 1
        for v in vectors:
            term = (term * v.entries[j]) % p
        total += term
    return total % p


# ---------------------------------------------------------------------------
# Monte Carlo advantage estimation

@dataclass(frozen=True)
class AdvantageReport:
    """Empirical acceptance frequencies of a reduction on both promise sides.

    alpha_hat is the frequency of True decisions when rank(a) = n-1,
    beta_hat when rank(a) = n-2.  stderr is the Wald error
    sqrt(alpha_hat (1 - alpha_hat) / trials) convention applied per side;
    gap_stderr combines both sides for gap tests.
    """

    problem: str
    n: int
    p: int
    delta: float
    trials: int
    alpha_hat: float
    beta_hat: float
    stderr: float
    seed: int
    p0_hat: float | None = field(default=None, compare=False)

    def gap_stderr(self) -> float:
        va = self.alpha_hat * (1 - self.alpha_hat)
        vb = self.beta_hat * (1 - self.beta_hat)
        return math.sqrt((va + vb) / self.trials)

    def json_dict(self) -> dict:
        return {
            "problem": self.problem,
            "n": self.n,
            "p": self.p,
            "delta": self.delta,
            "trials": self.trials,
            "alphaHat": self.alpha_hat,
            "betaHat": self.beta_hat,
            "stderr": self.stderr,
            "seed": self.seed,
        }


def majority_trials(gap: float, target_error: float = 1 / 20) -> int:
    """Odd repetition count driving a majority decision's error below target.

    Hoeffding: a majority over T trials across a frequency gap errs with
    probability at most exp(-T gap^2 / 2), so T = ceil(2 ln(1/target) / gap^2)
    suffices; rounded up to odd to avoid ties.
    """
    if not 0 < gap <= 1:
        raise ValueError("gap must lie in (0, 1]")
    t = math.ceil(2 * math.log(1 / target_error) / gap**2)
    return t if t % 2 else t + 1


def decide_rank_by_majority(a: FpMatrix, oracle: NoisyOracle, rng: Random,
                            reduction, trials: int, threshold: float) -> bool:
    """Repeat a one-shot reduction and threshold the claim frequency.

    True claims rank(a) = n-2.  threshold should sit between the two
    conditional acceptance rates, e.g. their midpoint.
    """
    hits = sum(reduction(a, oracle, rng) for _ in range(trials))
    return hits / trials > threshold


def estimate_p0(oracle: NoisyOracle, n: int, p: int, rng: Random,
                draws: int = 10_000) -> float:
    """Oracle's zero-claim rate on uniform rank n-1 inputs, sampled locally."""
    hits = sum(oracle.query(random_of_rank(n, p, n - 1, rng), rng) for _ in range(draws))
    return hits / draws


def estimate_advantage(n: int, p: int, delta: float, trials: int, seed: int,
                       reduction=None, oracle: NoisyOracle | None = None,
                       problem: str = "rank_to_inverse") -> AdvantageReport:
    """Run a reduction on fresh promise instances of both ranks.

    Each trial draws its own rng stream from (seed, side, index) so runs
    are reproducible and order-independent.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if oracle is None:
        oracle = NoisyOracle(inverse_entry_zero, delta)
    if reduction is None:
        reduction = reduce_rank_to_inverse_p2 if p == 2 else reduce_rank_to_inverse
    m = n - 1
    counts = {}
    for side, rank in (("alpha", n - 1), ("beta", n - 2)):
        hits = 0
        for i in range(trials):
            rng = spawn_rng(seed, side, i)
            a = random_of_rank(m, p, rank, rng)
            hits += reduction(a, oracle, rng)
        counts[side] = hits / trials
    alpha, beta = counts["alpha"], counts["beta"]
    stderr = math.sqrt(alpha * (1 - alpha) / trials)
    p0 = estimate_p0(oracle, n, p, spawn_rng(seed, "p0")) if p == 2 else None
    return AdvantageReport(problem, n, p, delta, trials, alpha, beta, stderr, seed, p0)
