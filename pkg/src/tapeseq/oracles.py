"""Exhaustive search oracles used to certify the solvers on small instances."""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations

from .stochastic import StochasticProfile, expected_objective
from .tape import EmptyRequests, RequestSet, Tape, check_dimensions

MAX_REQUESTS = 9
MAX_WEIGHTED_FILES = 8


class OracleRefused(ValueError):
    pass


def oracle_best_sequence(tape: Tape, requests: RequestSet, limit: int = MAX_REQUESTS) -> tuple[int, tuple[int, ...]]:
    """Minimum total response time over every ordering of the requested files.

    Depth-first search charging the latency form (pending count x movement),
    which only grows along a branch, so branches at or above the incumbent
    are cut.  Ties keep the lexicographically smallest ordering.
    """
    check_dimensions(tape, requests)
    ids = requests.ids()
    if not ids:
        raise EmptyRequests("no file is requested")
    if len(ids) > limit:
        raise OracleRefused(f"{len(ids)} requests exceed the enumeration limit of {limit}")
    lefts = {i: tape.left(i) for i in ids}
    rights = {i: tape.right(i) for i in ids}
    best = [None, ()]
    path: list[int] = []

    def dfs(pos: int, pending: int, cost: int, remaining: tuple[int, ...]) -> None:
        if best[0] is not None and cost >= best[0]:
            if remaining or cost > best[0]:
                return
        if not remaining:
            if best[0] is None or cost < best[0]:
                best[0], best[1] = cost, tuple(path)
            return
        for k, i in enumerate(remaining):
            step = pending * abs(pos - lefts[i]) + (pending - 1) * (rights[i] - lefts[i])
            path.append(i)
            dfs(rights[i], pending - 1, cost + step, remaining[:k] + remaining[k + 1:])
            path.pop()

    dfs(tape.length, len(ids), 0, ids)
    return best[0], best[1]


def oracle_weighted_best(tape: Tape, profile: StochasticProfile, limit: int = MAX_WEIGHTED_FILES) -> tuple[Fraction, tuple[int, ...]]:
    """Minimum expected objective over every permutation of the positive-probability files."""
    if tape.n > limit:
        raise OracleRefused(f"{tape.n} files exceed the enumeration limit of {limit}")
    ids = profile.positive()
    if not ids:
        raise EmptyRequests("every probability is zero")
    best = None
    for perm in permutations(ids):
        value = expected_objective(tape, profile, perm)
        if best is None or value < best[0]:
            best = (value, perm)
    return best
