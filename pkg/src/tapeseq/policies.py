"""Low-complexity sequencing policies: FIFO, FIFF, SSF, FIFILA and LFL."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .tape import (
    IncompletePlan,
    RequestSet,
    Tape,
    check_dimensions,
    check_sequence,
    evaluate_sequence,
    rebase_to_first_request,
    response_times,
)


class NotApplicable(ValueError):
    pass


def fifo(tape: Tape, requests: RequestSet, arrival_order: Sequence[int]) -> tuple[int, ...]:
    """Read files in the order the requests arrived."""
    check_dimensions(tape, requests)
    order = check_sequence(tape, arrival_order, requests.ids())
    if len(order) != requests.m:
        raise IncompletePlan("arrival order must list exactly the requested files")
    return order


def random_arrival(requests: RequestSet, rng: np.random.Generator) -> tuple[int, ...]:
    ids = np.array(requests.ids(), dtype=np.int64)
    return tuple(int(i) for i in rng.permutation(ids))


def fiff(requests: RequestSet) -> tuple[int, ...]:
    return requests.ids()


def ssf(tape: Tape, requests: RequestSet) -> tuple[int, ...]:
    check_dimensions(tape, requests)
    return tuple(sorted(requests.ids(), key=lambda i: (tape.size(i), i)))


def fifila(requests: RequestSet) -> tuple[int, ...]:
    return requests.ids()[::-1]


@dataclass(frozen=True)
class PostponementReport:
    position: int
    file: int
    delta_cost: int
    delta_saving: int
    candidate: tuple[int, ...]

    @property
    def violated(self) -> bool:
        return self.delta_cost < self.delta_saving


def _postpone(seq: tuple[int, ...], t: int) -> tuple[int, ...]:
    x = seq[t]
    rest = seq[:t] + seq[t + 1:]
    pivot = rest.index(min(rest))
    k = pivot
    while k < len(rest) and rest[k] < x:
        k += 1
    return rest[:k] + (x,) + rest[k:]


def postponement_report(tape: Tape, requests: RequestSet, seq: Sequence[int], t: int) -> PostponementReport:
    """Cost/saving of moving the rewind-stage file at 0-based position ``t`` to the forward stage.

    The saving is twice the file size times the requests still pending after
    position ``t``.  The cost is measured directly: the change in the file's
    own response time once it is re-inserted among the forward-stage files in
    ascending order.
    """
    check_dimensions(tape, requests)
    seq = check_sequence(tape, seq, requests.ids())
    if not 0 <= t < len(seq):
        raise IndexError(t)
    pivot = seq.index(min(seq))
    if t >= pivot:
        raise NotApplicable(f"file {seq[t]} at position {t} is in the forward stage")
    x = seq[t]
    served = sum(1 for i in seq[: t + 1] if i in requests)
    saving = 2 * tape.size(x) * (requests.m - served)
    candidate = _postpone(seq, t)
    old = response_times(tape, seq)[t]
    new = response_times(tape, candidate)[candidate.index(x)]
    return PostponementReport(t, x, new - old, saving, candidate)


def revisit_gap(tape: Tape, seq: Sequence[int], t: int) -> int | None:
    """Time between the first and second visit of ``seq[t]``, or None if it is never re-crossed.

    Only defined when a later move passes over the file's left edge
    rightwards; :func:`postponement_report` does not depend on it.
    """
    seq = check_sequence(tape, seq)
    target = tape.left(seq[t])
    for eta in range(t + 1, len(seq) - 1):
        if tape.left(seq[eta]) < target < tape.left(seq[eta + 1]):
            return sum(
                tape.size(seq[u]) + abs(tape.left(seq[u + 1]) - tape.right(seq[u]))
                for u in range(t, eta + 1)
            )
    return None


def lfl(tape: Tape, requests: RequestSet) -> tuple[int, ...]:
    """Large-Files-Last: FIFILA with violating rewind files pushed to the forward stage.

    On sequences shaped "rewind descending, forward ascending" the move test
    for a rewind file ``x`` reduces to ``l_x + B_x < s_x * (c_x + |F|)`` with
    ``B_x``/``c_x`` the size/count of rewind files left of ``x``.  A move only
    makes the other tests easier to violate, so the fixed point does not
    depend on the scan order and all currently violated files can be moved
    in one round.
    """
    check_dimensions(tape, requests)
    base = rebase_to_first_request(tape, requests)
    ids = np.array(base.requests.ids(), dtype=np.int64)
    sizes = np.array(base.tape.sizes, dtype=np.int64)[ids - 1]
    lefts = np.array(base.tape.lefts, dtype=np.int64)[ids - 1]
    rewind = np.ones(len(ids), dtype=bool)
    rewind[0] = False
    while True:
        rs = np.where(rewind, sizes, 0)
        size_left = np.cumsum(rs) - rs
        count_left = np.cumsum(rewind) - rewind
        n_forward = len(ids) - int(rewind.sum())
        moving = rewind & (lefts + size_left < sizes * (count_left + n_forward))
        if not moving.any():
            break
        rewind &= ~moving
    order = np.concatenate([ids[rewind][::-1], ids[~rewind]])
    return base.to_original(int(i) for i in order)


def lfl_by_scan(tape: Tape, requests: RequestSet) -> tuple[int, ...]:
    """Reference LFL: restart a left-to-right scan after each violated move."""
    seq = fifila(requests)
    moved = True
    while moved:
        moved = False
        pivot = seq.index(min(seq))
        for t in range(pivot):
            report = postponement_report(tape, requests, seq, t)
            if report.violated:
                seq = report.candidate
                moved = True
                break
    return seq


def policy_total(tape: Tape, requests: RequestSet, seq: Sequence[int]) -> int:
    return evaluate_sequence(tape, requests, seq).total


def fifo_shuffle_totals(tape: Tape, requests: RequestSet, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Totals of ``samples`` uniformly random arrival orders, evaluated in one vectorized pass."""
    check_dimensions(tape, requests)
    ids = np.array(requests.ids(), dtype=np.int64)
    if samples < 1 or len(ids) == 0:
        return np.zeros(0, dtype=np.int64)
    lefts = np.array(tape.lefts, dtype=np.int64)[ids - 1]
    sizes = np.array(tape.sizes, dtype=np.int64)[ids - 1]
    perms = rng.permuted(np.tile(np.arange(len(ids)), (samples, 1)), axis=1)
    left = lefts[perms]
    right = left + sizes[perms]
    start = np.concatenate([np.full((samples, 1), tape.length, dtype=np.int64), right[:, :-1]], axis=1)
    steps = np.abs(start - left)
    steps[:, 1:] += sizes[perms][:, :-1]
    return np.cumsum(steps, axis=1).sum(axis=1)


def fifo_pass_through_total(tape: Tape, requests: RequestSet, arrival_order: Sequence[int]) -> int:
    """Total response when requests are worked off in arrival order but served on the fly.

    The head targets the oldest unserved request; any requested file whose
    left edge it crosses while moving rightward is read on the way and
    leaves the queue.  Only the order of leftward jumps follows arrivals.
    """
    order = fifo(tape, requests, arrival_order)
    pending = set(order)
    lefts = sorted(tape.left(i) for i in order)
    by_left = {tape.left(i): i for i in order}
    now, pos, total = 0, tape.length, 0
    for x in order:
        if x not in pending:
            continue
        lx = tape.left(x)
        if lx >= pos:
            for left in lefts:
                if pos <= left <= lx and by_left[left] in pending:
                    total += now + left - pos
                    pending.discard(by_left[left])
            now += lx - pos
        else:
            now += pos - lx
            total += now
            pending.discard(x)
        now += tape.size(x)
        pos = tape.right(x)
    return total


@numba.njit(cache=True)
def _pass_through_batch(lefts, sizes, length, perms):
    samples, m = perms.shape
    out = np.zeros(samples, dtype=np.int64)
    served = np.zeros(m, dtype=np.bool_)
    for s in range(samples):
        served[:] = False
        now = 0
        pos = length
        total = 0
        for t in range(m):
            x = perms[s, t]
            if served[x]:
                continue
            lx = lefts[x]
            if lx >= pos:
                # first requested file whose left edge is at or right of the head
                k = np.searchsorted(lefts, pos)
                while k <= x:
                    if not served[k]:
                        served[k] = True
                        total += now + lefts[k] - pos
                    k += 1
                now += lx - pos
            else:
                now += pos - lx
                total += now
                served[x] = True
            now += sizes[x]
            pos = lx + sizes[x]
        out[s] = total
    return out


def fifo_pass_through_totals(tape: Tape, requests: RequestSet, samples: int, rng: np.random.Generator) -> np.ndarray:
    """:func:`fifo_pass_through_total` for ``samples`` uniformly random arrival orders."""
    check_dimensions(tape, requests)
    ids = np.array(requests.ids(), dtype=np.int64)
    if samples < 1 or len(ids) == 0:
        return np.zeros(0, dtype=np.int64)
    lefts = np.array(tape.lefts, dtype=np.int64)[ids - 1]
    sizes = np.array(tape.sizes, dtype=np.int64)[ids - 1]
    perms = rng.permuted(np.tile(np.arange(len(ids)), (samples, 1)), axis=1)
    return _pass_through_batch(lefts, sizes, tape.length, perms)
