"""Exact dynamic program over rewind blocks and forward sweeps.

Two value tables are filled bottom-up over file ranges ``[i, j]`` and the
pending weight ``k`` carried when the head first reaches the right edge of
file ``j``:

* ``rewind[i, j, k]`` reads every request in the range and leaves the head
  at the left edge of ``i``;
* ``forward[i, j, k]`` does the same but finishes at the right edge of ``j``
  with ``j`` the last file read.

Costs are charged in latency form: each unit of head travel costs the weight
still pending.  Weights are non-negative integers, so the same kernel serves
0/1 requests and integer-scaled probabilities.  Ranges are stored in a packed
upper-triangular layout to halve memory.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .tape import EmptyRequests, RequestSet, Tape, check_dimensions, evaluate_sequence

INF = np.iinfo(np.int64).max // 4

# Default refusal threshold for the two dense tables.
MEMORY_LIMIT_BYTES = 3 * 1024**3


class StateError(ValueError):
    pass


class TooLarge(ValueError):
    pass


@numba.njit(cache=True)
def _tri(i, j):
    return j * (j + 1) // 2 + i


@numba.njit(cache=True)
def _fill(sizes, weights, top):
    n = sizes.shape[0]
    lefts = np.zeros(n + 1, dtype=np.int64)
    prefix = np.zeros(n + 1, dtype=np.int64)
    for a in range(n):
        lefts[a + 1] = lefts[a] + sizes[a]
        prefix[a + 1] = prefix[a] + weights[a]
    rew = np.full((n * (n + 1) // 2, top + 1), INF, dtype=np.int64)
    fwd = np.full((n * (n + 1) // 2, top + 1), INF, dtype=np.int64)
    best = np.empty(top + 1, dtype=np.int64)
    # k is the innermost loop everywhere so that every table row is read contiguously
    for span in range(n):
        for i in range(n - span):
            j = i + span
            inside = prefix[j + 1] - prefix[i]
            ij = _tri(i, j)
            sj = sizes[j]
            if i == j:
                for k in range(inside, top + 1):
                    fwd[ij, k] = k * sj + (k - inside) * sj
                    rew[ij, k] = k * sj + 2 * (k - inside) * sj
                continue
            # forward: previous forward file jp, block jp+1..j-1 read on the way down
            before = prefix[j] - prefix[i]
            best[inside:] = INF
            for jp in range(i, j):
                gap = lefts[j] - lefts[jp + 1]
                frow = _tri(i, jp)
                if jp + 1 <= j - 1:
                    brow = _tri(jp + 1, j - 1)
                    shift = prefix[j] - prefix[jp + 1]
                    for k in range(inside, top + 1):
                        cand = rew[brow, k] + fwd[frow, k - shift] + (k - before) * gap
                        if cand < best[k]:
                            best[k] = cand
                else:
                    for k in range(inside, top + 1):
                        cand = fwd[frow, k] + (k - before) * gap
                        if cand < best[k]:
                            best[k] = cand
            span_len = lefts[j + 1] - lefts[i]
            for k in range(inside, top + 1):
                f = k * sj + best[k] + (k - inside) * sj
                fwd[ij, k] = f
                # rewind: sweep forward then back to l_i, or split off a right block
                rew[ij, k] = f + (k - inside) * span_len
            for jp in range(i + 1, j + 1):
                arow = _tri(jp, j)
                brow = _tri(i, jp - 1)
                shift = prefix[j + 1] - prefix[jp]
                for k in range(inside, top + 1):
                    cand = rew[arow, k] + rew[brow, k - shift]
                    if cand < rew[ij, k]:
                        rew[ij, k] = cand
    return rew, fwd


def table_bytes(n: int, top: int) -> int:
    return 2 * 8 * (n * (n + 1) // 2) * (top + 1)


class BlockProgram:
    """Filled DP tables for one tape and integer weight vector (head start at the tape end)."""

    def __init__(self, tape: Tape, weights: Sequence[int], memory_limit: int = MEMORY_LIMIT_BYTES):
        self.tape = tape
        self.weights = np.asarray(weights, dtype=np.int64)
        if self.weights.shape != (tape.n,):
            raise ValueError("one weight per file required")
        if (self.weights < 0).any():
            raise ValueError("weights must be non-negative")
        self.top = int(self.weights.sum())
        need = table_bytes(tape.n, self.top)
        if need > memory_limit:
            raise TooLarge(f"DP tables need {need / 2**30:.1f} GiB (limit {memory_limit / 2**30:.1f} GiB)")
        self.sizes = np.asarray(tape.sizes, dtype=np.int64)
        self.prefix = np.concatenate([[0], np.cumsum(self.weights)])
        self.lefts = np.concatenate([[0], np.cumsum(self.sizes)])
        self._rew, self._fwd = _fill(self.sizes, self.weights, self.top)

    @property
    def states(self) -> int:
        return int((self._rew < INF).sum() + (self._fwd < INF).sum())

    def _weight(self, i: int, j: int) -> int:
        return int(self.prefix[j + 1] - self.prefix[i])

    def _lookup(self, table, i: int, j: int, k: int) -> int:
        # 1-based public ids
        if not 1 <= i <= j <= self.tape.n:
            raise StateError(f"invalid range [{i}, {j}]")
        if not self._weight(i - 1, j - 1) <= k <= self.top:
            raise StateError(f"pending weight {k} cannot cover range [{i}, {j}]")
        return int(table[_tri(i - 1, j - 1), k])

    def rewind_value(self, i: int, j: int, k: int) -> int:
        return self._lookup(self._rew, i, j, k)

    def forward_value(self, i: int, j: int, k: int) -> int:
        return self._lookup(self._fwd, i, j, k)

    @property
    def value(self) -> int:
        return self.rewind_value(1, self.tape.n, self.top)

    def _r(self, i: int, j: int, k: int) -> int:
        return int(self._rew[_tri(i, j), k])

    def _f(self, i: int, j: int, k: int) -> int:
        return int(self._fwd[_tri(i, j), k])

    def reconstruct(self) -> list[int]:
        """Files in reading order along one optimal path (may include zero-weight files).

        Ties prefer the forward sweep over splits, then the smallest split point.
        """
        rew, fwd, pre, lefts, sizes = self._r, self._f, self.prefix, self.lefts, self.sizes
        out: list[int] = []
        # stack of (kind, i, j, k) with 0-based ranges; kind "R", "F" or "read"
        stack = [("R", 0, self.tape.n - 1, self.top)]
        while stack:
            kind, i, j, k = stack.pop()
            if kind == "read":
                out.append(i + 1)
                continue
            if i == j:
                out.append(i + 1)
                continue
            left_over = k - int(pre[j + 1] - pre[i])
            if kind == "R":
                target = rew(i, j, k)
                f = fwd(i, j, k) + left_over * (lefts[j + 1] - lefts[i])
                if f == target:
                    stack.append(("F", i, j, k))
                    continue
                for jp in range(i + 1, j + 1):
                    rest = k - int(pre[j + 1] - pre[jp])
                    if rew(jp, j, k) + rew(i, jp - 1, rest) == target:
                        stack.append(("R", i, jp - 1, rest))
                        stack.append(("R", jp, j, k))
                        break
                else:
                    raise AssertionError("rewind table inconsistent")
            else:
                target = fwd(i, j, k)
                sj = sizes[j]
                before_j = k - int(pre[j] - pre[i])
                for jp in range(i, j):
                    if jp + 1 <= j - 1:
                        block = rew(jp + 1, j - 1, k)
                        rest = k - int(pre[j] - pre[jp + 1])
                    else:
                        block = 0
                        rest = k
                    cand = k * sj + block + fwd(i, jp, rest) + before_j * (lefts[j] - lefts[jp + 1]) + left_over * sj
                    if cand == target:
                        stack.append(("read", j, j, 0))
                        stack.append(("F", i, jp, rest))
                        if jp + 1 <= j - 1:
                            stack.append(("R", jp + 1, j - 1, k))
                        break
                else:
                    raise AssertionError("forward table inconsistent")
        return out


@dataclass(frozen=True)
class DPSolution:
    value: int
    sequence: tuple[int, ...]
    states: int


def solve_integer_weights(
    tape: Tape, weights: Sequence[int], memory_limit: int = MEMORY_LIMIT_BYTES
) -> tuple[int, tuple[int, ...], int]:
    """Minimum of sum(w_i * R_i) and a sequence of the positive-weight files achieving it.

    Files left of the leftmost positive weight are cut off first so that the
    forward stage starts at the leftmost file that matters.  Returns
    ``(value, sequence, states)`` with original ids.
    """
    weights = [int(w) for w in weights]
    if len(weights) != tape.n:
        raise ValueError(f"{len(weights)} weights for a {tape.n}-file tape")
    positive = [k for k, w in enumerate(weights) if w > 0]
    if not positive:
        raise EmptyRequests("all weights are zero")
    cut = positive[0]
    program = BlockProgram(Tape(tape.sizes[cut:]), weights[cut:], memory_limit)
    order = tuple(i + cut for i in program.reconstruct() if weights[i + cut - 1] > 0)
    return program.value, order, program.states


def solve_exact(tape: Tape, requests: RequestSet, memory_limit: int = MEMORY_LIMIT_BYTES) -> DPSolution:
    """Optimal total response time and one optimal reading sequence of the requested files."""
    check_dimensions(tape, requests)
    if requests.m == 0:
        raise EmptyRequests("no file is requested")
    value, seq, states = solve_integer_weights(tape, requests.weights, memory_limit)
    assert evaluate_sequence(tape, requests, seq).total == value
    return DPSolution(value, seq, states)
