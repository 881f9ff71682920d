"""Partitioned group problems, uniformizing families, and symmetrization.

A PartitionedProblem is a finite group G together with a class function:
classify(g) returns a hashable class value, or None where the problem is
undefined.  The defined classes partition dom(f); promise inputs are the
pairs whose product falls in a defined class.

A UniformizerFamily is a finite indexed set of input maps
(g1, g2) -> (g1', g2'); it uniformizes the problem when, for every defined
class and every pair in its preimage, applying a uniformly drawn map gives
exactly the uniform distribution on that preimage.  verify_uniformizing
checks this by exact counting.

Class functions here are the finest level sets the builtin families can
uniformize: rank for matrices, weight for Hamming, coordinate sum for the
unit-vector product group, and full cycle type for permutations (the
two-sided conjugation family mixes permutations only within a conjugacy
class, so coarser two-value classes are provably not uniformized; the
one-cycle decision is class_value == (n,)).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from random import Random

from .errors import BudgetExhaustedError, SizeLimitError
from .fields import FpMatrix, all_invertible, all_matrices, mat_rank
from .protocols import Protocol, RandomTape, Transcript, run_coordinator, run_with_tape

EXACT_CHECK_BUDGET = 10**8


# ---------------------------------------------------------------------------
# groups and problems

@dataclass(frozen=True)
class FiniteGroup:
    """Explicit finite group: element table plus op, inverse, identity."""

    name: str
    elements: tuple
    op: object
    inv: object
    identity: object

    @property
    def index(self) -> dict:
        if "_index" not in self.__dict__:
            object.__setattr__(self, "_index", {g: i for i, g in enumerate(self.elements)})
        return self.__dict__["_index"]

    def product(self, items):
        acc = self.identity
        for x in items:
            acc = self.op(acc, x)
        return acc


@dataclass(frozen=True)
class PartitionedProblem:
    name: str
    group: FiniteGroup
    classify: object
    params: dict = field(default_factory=dict)

    @property
    def class_values(self) -> tuple:
        if "_values" not in self.__dict__:
            values = sorted({v for g in self.group.elements
                             if (v := self.classify(g)) is not None},
                            key=repr)
            object.__setattr__(self, "_values", tuple(values))
        return self.__dict__["_values"]

    @property
    def classes(self) -> dict:
        """Defined class value -> tuple of elements (the level sets)."""
        if "_classes" not in self.__dict__:
            out = {v: [] for v in self.class_values}
            for g in self.group.elements:
                v = self.classify(g)
                if v is not None:
                    out[v].append(g)
            object.__setattr__(self, "_classes",
                               {v: tuple(els) for v, els in out.items()})
        return self.__dict__["_classes"]

    def pre_pairs(self, value) -> tuple:
        """All pairs (g1, g2) whose product lies in the given class."""
        members = set(self.classes[value])
        return tuple((g1, g2) for g1 in self.group.elements for g2 in self.group.elements
                     if self.group.op(g1, g2) in members)


@dataclass(frozen=True)
class UniformizerFamily:
    name: str
    indices: tuple
    apply: object

    @property
    def size(self) -> int:
        return len(self.indices)


# ---------------------------------------------------------------------------
# builtin problems

def matrix_group(n: int, p: int) -> FiniteGroup:
    elements = tuple(all_matrices(n, p))
    return FiniteGroup(f"M_{n}(F_{p})", elements,
                       op=lambda a, b: a + b, inv=lambda a: -a,
                       identity=FpMatrix.zeros(n, n, p))


def rank_problem(n: int, p: int) -> PartitionedProblem:
    """Classes are the two promised ranks n and n-1; lower ranks undefined."""

    def classify(m):
        r = mat_rank(m)
        return r if r >= n - 1 else None

    return PartitionedProblem("rank", matrix_group(n, p), classify, {"n": n, "p": p})


def bitvector_group(n: int) -> FiniteGroup:
    elements = tuple(itertools.product(range(2), repeat=n))
    return FiniteGroup(f"F_2^{n}", elements,
                       op=lambda a, b: tuple(x ^ y for x, y in zip(a, b)),
                       inv=lambda a: a, identity=(0,) * n)


def ham_problem(n: int, k: int) -> PartitionedProblem:
    if k + 2 > n:
        raise ValueError("need k + 2 <= n for both classes to be nonempty")

    def classify(v):
        w = sum(v)
        return w if w in (k, k + 2) else None

    return PartitionedProblem("ham", bitvector_group(n), classify, {"n": n, "k": k})


def unit_vector_group(n: int, p: int) -> FiniteGroup:
    elements = tuple(itertools.product(range(1, p), repeat=n))
    return FiniteGroup(f"(F_{p}*)^{n}", elements,
                       op=lambda a, b, p=p: tuple(x * y % p for x, y in zip(a, b)),
                       inv=lambda a, p=p: tuple(pow(x, -1, p) for x in a),
                       identity=(1,) * n)


def ip_prime_problem(n: int, p: int) -> PartitionedProblem:
    """Classes are coordinate-sum values; the decision is class_value == 0."""
    if p <= 2:
        raise ValueError("the unit-vector group needs p > 2")

    def classify(v, p=p):
        return sum(v) % p

    return PartitionedProblem("ip_prime", unit_vector_group(n, p), classify,
                              {"n": n, "p": p})


def permutation_group(n: int) -> FiniteGroup:
    elements = tuple(itertools.permutations(range(n)))

    def op(a, b):  # apply b first, then a
        return tuple(a[b[i]] for i in range(len(a)))

    def inv(a):
        out = [0] * len(a)
        for i, v in enumerate(a):
            out[v] = i
        return tuple(out)

    return FiniteGroup(f"S_{n}", elements, op, inv, tuple(range(n)))


def cycle_type(perm) -> tuple[int, ...]:
    seen = [False] * len(perm)
    lengths = []
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, size = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            size += 1
        lengths.append(size)
    return tuple(sorted(lengths, reverse=True))


def cycle_count(perm) -> int:
    """Number of cycles, fixed points included."""
    return len(cycle_type(perm))


def cycle_problem(n: int) -> PartitionedProblem:
    """Classes are cycle types; a permutation is a full cycle iff type == (n,)."""
    return PartitionedProblem("cycle", permutation_group(n), cycle_type, {"n": n})


PROBLEM_BUILDERS = {
    "rank": rank_problem,
    "ham": ham_problem,
    "ip_prime": ip_prime_problem,
    "cycle": cycle_problem,
}


def builtin_problems(n: int, p: int = 3, k: int = 0) -> dict[str, PartitionedProblem]:
    return {
        "rank": rank_problem(n, p),
        "ham": ham_problem(max(n, k + 2), k),
        "ip_prime": ip_prime_problem(n, p),
        "cycle": cycle_problem(n),
    }


# ---------------------------------------------------------------------------
# builtin uniformizing families

def rank_family(n: int, p: int, two_sided: bool = True) -> UniformizerFamily:
    """Maps (g1, g2) -> (a (g1 - b) c, a (g2 + b) c) with a, c invertible.

    The one-sided variant (c = identity) preserves classes but fixes the
    row space of the product, so for n >= 2 it fails exact uniformization
    on the rank n-1 class; the two-sided family acts transitively on every
    rank class and passes exactly.  two_sided=False is kept for that
    negative check.
    """
    gl = tuple(all_invertible(n, p))
    shifts = tuple(all_matrices(n, p))
    if two_sided:
        indices = tuple(itertools.product(gl, gl, shifts))

        def apply(idx, g1, g2):
            a, c, b = idx
            return a @ (g1 - b) @ c, a @ (g2 + b) @ c
    else:
        indices = tuple(itertools.product(gl, shifts))

        def apply(idx, g1, g2):
            a, b = idx
            return a @ (g1 - b), a @ (g2 + b)

    tag = "two-sided" if two_sided else "one-sided"
    return UniformizerFamily(f"rank-{tag}[n={n},p={p}]", indices, apply)


def ham_family(n: int) -> UniformizerFamily:
    """Maps (g1, g2) -> (sigma(g1 + b), sigma(g2 + b)) over F_2^n."""
    perms = tuple(itertools.permutations(range(n)))
    shifts = tuple(itertools.product(range(2), repeat=n))
    indices = tuple(itertools.product(perms, shifts))

    def apply(idx, g1, g2):
        sigma, b = idx
        u = tuple(g1[sigma[i]] ^ b[sigma[i]] for i in range(n))
        v = tuple(g2[sigma[i]] ^ b[sigma[i]] for i in range(n))
        return u, v

    return UniformizerFamily(f"ham[n={n}]", indices, apply)


def ip_prime_family(n: int, p: int) -> UniformizerFamily:
    """CANDIDATE family: coordinate permutation plus unit rescaling.

    Maps (g1, g2) -> (sigma(g1 * c), sigma(g2 * c^-1)); the product's
    coordinate sum is preserved.  No uniformizing family is known for this
    problem; this one mixes only within permutation orbits of the product,
    so verify_uniformizing decides its status per (n, p) and it must stay
    gated behind that check.
    """
    perms = tuple(itertools.permutations(range(n)))
    units = tuple(itertools.product(range(1, p), repeat=n))
    indices = tuple(itertools.product(perms, units))

    def apply(idx, g1, g2, p=p):
        sigma, c = idx
        u = tuple(g1[sigma[i]] * c[sigma[i]] % p for i in range(n))
        v = tuple(g2[sigma[i]] * pow(c[sigma[i]], -1, p) % p for i in range(n))
        return u, v

    return UniformizerFamily(f"ip_prime-candidate[n={n},p={p}]", indices, apply)


def cycle_family(n: int) -> UniformizerFamily:
    """Maps (g1, g2) -> (sigma^-1 g1 tau^-1, tau g2 sigma); product is conjugated."""
    perms = tuple(itertools.permutations(range(n)))
    indices = tuple(itertools.product(perms, perms))

    def compose(a, b):
        return tuple(a[b[i]] for i in range(len(a)))

    def invert(a):
        out = [0] * len(a)
        for i, v in enumerate(a):
            out[v] = i
        return tuple(out)

    def apply(idx, g1, g2):
        sigma, tau = idx
        return (compose(compose(invert(sigma), g1), invert(tau)),
                compose(compose(tau, g2), sigma))

    return UniformizerFamily(f"cycle[n={n}]", indices, apply)


def builtin_family(problem: PartitionedProblem) -> UniformizerFamily:
    kind = problem.name
    prm = problem.params
    if kind == "rank":
        return rank_family(prm["n"], prm["p"])
    if kind == "ham":
        return ham_family(prm["n"])
    if kind == "ip_prime":
        return ip_prime_family(prm["n"], prm["p"])
    if kind == "cycle":
        return cycle_family(prm["n"])
    raise ValueError(f"no builtin family for {kind!r}")


# ---------------------------------------------------------------------------
# exact verification

@dataclass(frozen=True)
class UniformizingReport:
    problem: str
    params: dict
    family_size: int
    input_pairs: int
    max_tv_deviation: float
    passed: bool

    def json_dict(self) -> dict:
        return {
            "problem": self.problem,
            "params": self.params,
            "familySize": self.family_size,
            "inputPairs": self.input_pairs,
            "maxTVDeviation": self.max_tv_deviation,
            "pass": self.passed,
        }


def verify_uniformizing(problem: PartitionedProblem, family: UniformizerFamily,
                        budget: int = EXACT_CHECK_BUDGET) -> UniformizingReport:
    """Exact check of the uniformizing property by counting images.

    For each defined class and each input pair in its preimage, the image
    multiset over the whole family must put an identical count on every
    pair of that preimage.  The comparison is exact; the reported TV
    deviation is the worst total-variation gap found (0.0 on a pass).
    """
    size = len(problem.group.elements)
    if size * size * family.size > budget:
        raise SizeLimitError(f"|G|^2 |H| = {size * size * family.size} exceeds {budget}")
    worst = Fraction(0)
    pairs_checked = 0
    passed = True
    for value in problem.class_values:
        pre = problem.pre_pairs(value)
        pre_set = set(pre)
        share, remainder = divmod(family.size, len(pre))
        for g1, g2 in pre:
            pairs_checked += 1
            counts: dict = {}
            for idx in family.indices:
                image = family.apply(idx, g1, g2)
                counts[image] = counts.get(image, 0) + 1
            if set(counts) - pre_set:
                # images escaped the class preimage: maximal deviation
                passed = False
                worst = max(worst, Fraction(1))
                continue
            if remainder or any(c != share for c in counts.values()) \
                    or len(counts) != len(pre):
                passed = False
            tv = sum(abs(Fraction(counts.get(pair, 0), family.size) - Fraction(1, len(pre)))
                     for pair in pre) / 2
            worst = max(worst, tv)
    return UniformizingReport(problem.name, dict(problem.params), family.size,
                              pairs_checked, float(worst), passed)


def family_bijection_check(problem: PartitionedProblem, family: UniformizerFamily) -> bool:
    """Each member must permute every class preimage (image counting)."""
    for value in problem.class_values:
        pre = problem.pre_pairs(value)
        pre_set = set(pre)
        for idx in family.indices:
            images = {family.apply(idx, g1, g2) for g1, g2 in pre}
            if len(images) != len(pre) or images - pre_set:
                return False
    return True


# ---------------------------------------------------------------------------
# sub-uniform sampling

class SubUniformSampler:
    """Samples promise pairs: class by weight, uniform within the preimage.

    Default weights are sub-uniform, 1 / #classes each.  A pair is drawn
    as (g1, g1^-1 z) with z uniform in the class and g1 uniform in G,
    which is uniform on the preimage by translation invariance.
    """

    def __init__(self, problem: PartitionedProblem, weights: dict | None = None):
        self.problem = problem
        values = problem.class_values
        if weights is None:
            weights = {v: Fraction(1, len(values)) for v in values}
        if set(weights) - set(values):
            raise ValueError("weights must be supported on defined classes")
        total = sum(weights.values())
        if total != 1:
            raise ValueError("weights must sum to 1")
        self.weights = {v: Fraction(w) for v, w in weights.items() if w}

    def _draw_class(self, rng: Random):
        u = rng.random()
        acc = 0.0
        values = list(self.weights)
        for v in values:
            acc += float(self.weights[v])
            if u < acc:
                return v
        return values[-1]

    def sample(self, rng: Random):
        return self.sample_s(2, rng)

    def sample_s(self, s: int, rng: Random) -> tuple:
        """Uniform on {(x_1..x_s): product in class}, class drawn by weight."""
        group = self.problem.group
        value = self._draw_class(rng)
        members = self.problem.classes[value]
        z = members[rng.randrange(len(members))]
        xs = [group.elements[rng.randrange(len(group.elements))] for _ in range(s - 1)]
        prefix = group.product(xs)
        xs.append(group.op(group.inv(prefix), z))
        return tuple(xs)

    def law(self) -> dict:
        """Exact pair law at s = 2: weight(class) / |pre(class)| per pair."""
        out = {}
        for value, w in self.weights.items():
            pre = self.problem.pre_pairs(value)
            prob = w / len(pre)
            for pair in pre:
                out[pair] = prob
        return out


def sample_subuniform(problem: PartitionedProblem, weights, rng: Random):
    return SubUniformSampler(problem, weights).sample(rng)


def sample_subuniform_s(problem: PartitionedProblem, s: int, weights, rng: Random):
    return SubUniformSampler(problem, weights).sample_s(s, rng)


# ---------------------------------------------------------------------------
# re-randomization, symmetrization, derandomization

def rerandomize(problem: PartitionedProblem, family: UniformizerFamily,
                base_protocol: Protocol, g1, g2, rng: Random):
    """Run the base protocol on a uniformly re-mapped input; returns its output.

    The composite's distribution on a fixed promise input equals the base
    protocol's on the uniform distribution over that input's class
    preimage, so its worst-case error is at most #classes times the base
    protocol's sub-uniform error; communication cost is unchanged.
    """
    idx = family.indices[rng.randrange(family.size)]
    h1, h2 = family.apply(idx, g1, g2)
    return run_coordinator(base_protocol, (h1, h2), rng).output


def symmetrize(problem: PartitionedProblem, protocol: Protocol, s: int,
               g1, g2, rng: Random):
    """Simulate one random player of an s-player protocol on a two-player input.

    Player j is chosen uniformly; the simulated player gets g2 and the
    remaining inputs are drawn uniformly conditioned on their product,
    taken in cyclic order starting after j, being g1.  The full ordered
    product is then a conjugate of g1 x g2, so its class is preserved for
    every builtin (classes are conjugation-invariant); for abelian groups
    this is plain conditioning on the complement product.  Returns
    (output, bits touching player j).
    """
    if protocol.players != s:
        raise ValueError("protocol player count does not match s")
    group = problem.group
    j = rng.randrange(s)
    order = [(j + 1 + t) % s for t in range(s - 1)]
    xs: dict[int, object] = {j: g2}
    prefix = group.identity
    for pos in order[:-1]:
        x = group.elements[rng.randrange(len(group.elements))]
        xs[pos] = x
        prefix = group.op(prefix, x)
    xs[order[-1]] = group.op(group.inv(prefix), g1)
    inputs = tuple(xs[i] for i in range(s))
    transcript = run_coordinator(protocol, inputs, rng)
    return transcript.output, transcript.bits_touching(j)


@dataclass(frozen=True)
class CoinFixing:
    """A deterministic protocol: shared tape frozen to a concrete word list."""

    protocol: Protocol
    words: tuple[int, ...]
    nu_error: float
    cost: int


def _census_error_and_cost(protocol: Protocol, problem: PartitionedProblem,
                           weights: dict, words) -> tuple[Fraction, int]:
    """Exact sub-uniform error and max cost of a protocol with fixed coins."""
    err = Fraction(0)
    cost = 0
    for value, w in weights.items():
        pre = problem.pre_pairs(value)
        wrong = 0
        for g1, g2 in pre:
            t = run_with_tape(protocol, (g1, g2), RandomTape(words))
            cost = max(cost, t.total_bits)
            if t.output != value:
                wrong += 1
        err += w * Fraction(wrong, len(pre))
    return err, cost


def markov_derandomize(protocol: Protocol, problem: PartitionedProblem,
                       delta: float, sample_budget: int, rng: Random) -> CoinFixing:
    """Search sampled coin fixings for one that is cheap and accurate.

    Accepts the first fixing with cost <= E[cost] / delta and exact
    sub-uniform error <= 2 delta, where E[cost] is the mean cost over the
    sampled fixings; existence for large budgets follows from a Markov
    argument.  Raises BudgetExhaustedError carrying the best candidate
    (by error, then cost) when no sample qualifies.
    """
    if protocol.players != 2:
        raise ValueError("derandomization applies to two-player protocols")
    values = problem.class_values
    weights = {v: Fraction(1, len(values)) for v in values}
    candidates = []
    for _ in range(sample_budget):
        words = tuple(rng.getrandbits(32) for _ in range(protocol.tape_words))
        err, cost = _census_error_and_cost(protocol, problem, weights, words)
        candidates.append((err, cost, words))
    mean_cost = sum(c for _, c, _ in candidates) / len(candidates)
    limit = mean_cost / delta
    for err, cost, words in candidates:
        if cost <= limit and err <= 2 * Fraction(delta).limit_denominator(10**9):
            return CoinFixing(protocol, words, float(err), cost)
    best = min(candidates, key=lambda t: (t[0], t[1]))
    raise BudgetExhaustedError(
        f"no fixing within budget {sample_budget}; best error {float(best[0]):.4f}",
        best=CoinFixing(protocol, best[2], float(best[0]), best[1]))
