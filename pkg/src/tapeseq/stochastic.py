"""Probability-weighted sequencing: expected objective, exact weighted DP and the FPTAS.

Probabilities are handled as :class:`fractions.Fraction` outside the DP and
as exact integers inside it.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .exact import BlockProgram, MEMORY_LIMIT_BYTES, TooLarge, solve_integer_weights, table_bytes
from .tape import (
    EmptyRequests,
    Evaluation,
    IncompletePlan,
    InvalidInstance,
    RequestSet,
    Tape,
    check_sequence,
    evaluate_sequence,
    response_times,
    restrict_to_requested,
)


class PrecisionError(ValueError):
    """Scaled probabilities are not integers."""


def _fraction(p) -> Fraction:
    if isinstance(p, float):
        # floats are taken at their decimal reading, e.g. 0.1 -> 1/10
        return Fraction(repr(p))
    return Fraction(p)


@dataclass(frozen=True)
class StochasticProfile:
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        probs = tuple(_fraction(p) for p in self.probs)
        if any(p < 0 or p > 1 for p in probs):
            raise InvalidInstance("probabilities must lie in [0, 1]")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, n: int, p) -> "StochasticProfile":
        return cls((_fraction(p),) * n)

    @classmethod
    def from_requests(cls, requests: RequestSet) -> "StochasticProfile":
        return cls(tuple(Fraction(w) for w in requests.weights))

    @property
    def n(self) -> int:
        return len(self.probs)

    @property
    def q0(self) -> Fraction:
        return sum(self.probs, Fraction(0))

    def positive(self) -> tuple[int, ...]:
        return tuple(i + 1 for i, p in enumerate(self.probs) if p > 0)


def _check_profile(tape: Tape, weights: Sequence) -> None:
    if len(weights) != tape.n:
        raise InvalidInstance(f"{len(weights)} probabilities for a {tape.n}-file tape")


def expected_objective(tape: Tape, profile: StochasticProfile, seq: Sequence[int]) -> Fraction:
    """Sum of p_i times the response time of file i when ``seq`` is followed in full."""
    _check_profile(tape, profile.probs)
    seq = check_sequence(tape, seq, profile.positive())
    times = response_times(tape, seq)
    return sum((profile.probs[i - 1] * t for i, t in zip(seq, times)), Fraction(0))


def expected_latency_form(tape: Tape, profile: StochasticProfile, seq: Sequence[int]) -> Fraction:
    """Same value as :func:`expected_objective`, charged as remaining probability x movement."""
    _check_profile(tape, profile.probs)
    seq = check_sequence(tape, seq, profile.positive())
    left = profile.q0
    total = Fraction(0)
    pos = tape.length
    for i in seq:
        total += left * abs(pos - tape.left(i))
        total += (left - profile.probs[i - 1]) * tape.size(i)
        left -= profile.probs[i - 1]
        pos = tape.right(i)
    return total


def integer_weights(profile, scale=1) -> tuple[int, ...]:
    """``p_i * scale`` as integers, or :class:`PrecisionError` if any is fractional.

    ``profile`` is a :class:`StochasticProfile` or any sequence of
    non-negative numbers (weights above one are allowed there).
    """
    probs = profile.probs if isinstance(profile, StochasticProfile) else [_fraction(p) for p in profile]
    if any(p < 0 for p in probs):
        raise InvalidInstance("weights must be non-negative")
    scaled = [p * _fraction(scale) for p in probs]
    bad = [k + 1 for k, q in enumerate(scaled) if q.denominator != 1]
    if bad:
        raise PrecisionError(f"probabilities of files {bad} are not integers after scaling by {scale}")
    return tuple(int(q) for q in scaled)


class SparseProgram:
    """Lazily memoized weighted DP keyed by (i, j, Q); only reachable states are stored."""

    reconstruct = BlockProgram.reconstruct

    def __init__(self, tape: Tape, weights: Sequence[int]):
        self.tape = tape
        self.sizes = list(tape.sizes)
        self.lefts = [*tape.lefts, tape.length]
        self.prefix = [0]
        for w in weights:
            self.prefix.append(self.prefix[-1] + int(w))
        self.top = self.prefix[-1]
        self._rew: dict[tuple[int, int, int], int] = {}
        self._fwd: dict[tuple[int, int, int], int] = {}

    @property
    def states(self) -> int:
        return len(self._rew) + len(self._fwd)

    @property
    def value(self) -> int:
        return self._r(0, self.tape.n - 1, self.top)

    def _r(self, i: int, j: int, k: int) -> int:
        key = (i, j, k)
        hit = self._rew.get(key)
        if hit is not None:
            return hit
        pre, sizes = self.prefix, self.sizes
        left_over = k - (pre[j + 1] - pre[i])
        if i == j:
            best = k * sizes[i] + 2 * left_over * sizes[i]
        else:
            best = self._f(i, j, k) + left_over * (self.lefts[j + 1] - self.lefts[i])
            for jp in range(i + 1, j + 1):
                best = min(best, self._r(jp, j, k) + self._r(i, jp - 1, k - (pre[j + 1] - pre[jp])))
        self._rew[key] = best
        return best

    def _f(self, i: int, j: int, k: int) -> int:
        key = (i, j, k)
        hit = self._fwd.get(key)
        if hit is not None:
            return hit
        pre, sizes, lefts = self.prefix, self.sizes, self.lefts
        sj = sizes[j]
        left_over = k - (pre[j + 1] - pre[i])
        if i == j:
            value = k * sj + left_over * sj
        else:
            before_j = k - (pre[j] - pre[i])
            best = None
            for jp in range(i, j):
                if jp + 1 <= j - 1:
                    block = self._r(jp + 1, j - 1, k)
                    rest = k - (pre[j] - pre[jp + 1])
                else:
                    block, rest = 0, k
                cand = block + self._f(i, jp, rest) + before_j * (lefts[j] - lefts[jp + 1])
                if best is None or cand < best:
                    best = cand
            value = k * sj + best + left_over * sj
        self._fwd[key] = value
        return value


def _solve_sparse(tape: Tape, weights: Sequence[int]) -> tuple[int, tuple[int, ...], int]:
    positive = [k for k, w in enumerate(weights) if w > 0]
    if not positive:
        raise EmptyRequests("all weights are zero")
    cut = positive[0]
    program = SparseProgram(Tape(tape.sizes[cut:]), weights[cut:])
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10 * tape.n + 1000))
    try:
        value = program.value
    finally:
        sys.setrecursionlimit(limit)
    order = tuple(i + cut for i in program.reconstruct() if weights[i + cut - 1] > 0)
    return value, order, program.states


@dataclass(frozen=True)
class WeightedSolution:
    value: Fraction
    sequence: tuple[int, ...]
    integer_value: int
    scale: Fraction
    states: int


def solve_weighted(
    tape: Tape,
    profile,
    scale=1,
    method: str = "auto",
    memory_limit: int = MEMORY_LIMIT_BYTES,
) -> WeightedSolution:
    """Exact minimum of the expected objective.

    ``profile`` is a :class:`StochasticProfile` or a plain weight sequence;
    ``scale`` must turn every entry into an integer.  ``method`` picks
    the dense compiled tables ("dense"), the lazily memoized recursion
    ("sparse"), or dense when it fits in memory ("auto").
    """
    scale = _fraction(scale)
    if scale <= 0:
        raise ValueError("scale must be positive")
    weights = integer_weights(profile, scale)
    _check_profile(tape, weights)
    if not any(weights):
        raise EmptyRequests("every probability is zero")
    if method == "auto":
        method = "dense" if table_bytes(tape.n, sum(weights)) <= memory_limit else "sparse"
    if method == "dense":
        value, seq, states = solve_integer_weights(tape, weights, memory_limit)
    elif method == "sparse":
        value, seq, states = _solve_sparse(tape, weights)
    else:
        raise ValueError(f"unknown method {method!r}")
    return WeightedSolution(Fraction(value) / scale, seq, value, scale, states)


def common_scale(profile: StochasticProfile) -> int:
    """Smallest positive integer that makes every probability integral."""
    return math.lcm(*(p.denominator for p in profile.probs))


@dataclass(frozen=True)
class ScaledInstance:
    tape: Tape
    weights: tuple[int, ...]
    K: Fraction
    epsilon: Fraction
    p_min: Fraction
    p_max: Fraction
    original_n: int

    @property
    def total_weight(self) -> int:
        return sum(self.weights)


def weight_bound(n: int, epsilon) -> int:
    """Upper bound on the total rounded weight of a scaled instance."""
    eps = _fraction(epsilon)
    return n * math.floor(Fraction((n + 3) * (n + 1)) / (eps * n * n)) + math.floor(2 * (n + 3) * (n + 1) / eps)


def fptas_scale(tape: Tape, profile: StochasticProfile, epsilon) -> ScaledInstance:
    """Normalize by the smallest positive probability, append two end files, round down by K."""
    _check_profile(tape, profile.probs)
    eps = _fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    positive = [p for p in profile.probs if p > 0]
    if not positive:
        raise EmptyRequests("every probability is zero")
    n = tape.n
    p_min = min(positive)
    scaled = [p / p_min for p in profile.probs]
    p_max = max(scaled)
    scaled += [Fraction(0), 2 * n * n * p_max]
    K = eps * n * n * p_max / ((n + 3) * (n + 1))
    weights = tuple(math.floor(q / K) for q in scaled)
    extended = Tape(tape.sizes + (tape.length, tape.length))
    return ScaledInstance(extended, weights, K, eps, p_min, p_max, n)


def _cheapest_insertion(tape: Tape, profile: StochasticProfile, seq: list[int], missing: Iterable[int]) -> list[int]:
    for x in sorted(missing):
        best = None
        for pos in range(len(seq) + 1):
            cand = seq[:pos] + [x] + seq[pos:]
            probs = StochasticProfile(tuple(p if (k + 1) in cand else 0 for k, p in enumerate(profile.probs)))
            value = expected_objective(tape, probs, cand)
            if best is None or value < best[0]:
                best = (value, cand)
        seq = best[1]
    return seq


@dataclass(frozen=True)
class FPTASResult:
    sequence: tuple[int, ...]
    value: Fraction
    lower_bound: Fraction
    scaled: ScaledInstance


def fptas_solve(tape: Tape, profile: StochasticProfile, epsilon, method: str = "auto") -> FPTASResult:
    """A sequence whose expected objective is within (1 + epsilon) of the optimum.

    Files whose rounded weight is zero are absent from the scaled optimum;
    they are inserted afterwards, each at the position that raises the
    expected objective least.
    """
    inst = fptas_scale(tape, profile, epsilon)
    n = inst.original_n
    if method == "sparse":
        _, seq, _ = _solve_sparse(inst.tape, inst.weights)
    else:
        _, seq, _ = solve_integer_weights(inst.tape, inst.weights)
    seq = [i for i in seq if i <= n]
    missing = set(profile.positive()) - set(seq)
    if missing:
        seq = _cheapest_insertion(tape, profile, seq, missing)
    value = expected_objective(tape, profile, seq)
    return FPTASResult(tuple(seq), value, value / (1 + inst.epsilon), inst)


def evaluate_realization(tape: Tape, master_seq: Sequence[int], realized: RequestSet) -> Evaluation:
    """Follow ``master_seq`` skipping files that were not requested."""
    if len(realized.weights) != tape.n:
        raise InvalidInstance(f"{len(realized.weights)} request flags for a {tape.n}-file tape")
    seq = restrict_to_requested(check_sequence(tape, master_seq), realized)
    return evaluate_sequence(tape, realized, seq)

