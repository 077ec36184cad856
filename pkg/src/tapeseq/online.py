"""Online requests with release times: the augmenting-reading-interval schedule and online FIFO.

Head paths are piecewise linear in (time, position).  A request counts as
serviced when the head reaches the left edge of its file moving rightward at
or after the release time (the read start), matching the offline response
definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .tape import InvalidInstance, Tape


class SimulationIncomplete(RuntimeError):
    pass


@dataclass(frozen=True)
class OnlineRequest:
    file: int
    release: int

    def __post_init__(self):
        if self.release < 0:
            raise InvalidInstance(f"release {self.release} is negative")


@dataclass(frozen=True)
class OnlineInstance:
    tape: Tape
    requests: tuple[OnlineRequest, ...]

    def __post_init__(self):
        object.__setattr__(self, "requests", tuple(self.requests))
        for r in self.requests:
            if not 1 <= r.file <= self.tape.n:
                raise InvalidInstance(f"request for file {r.file} outside 1..{self.tape.n}")

    @classmethod
    def at_time_zero(cls, tape: Tape, files: Sequence[int]) -> "OnlineInstance":
        return cls(tape, tuple(OnlineRequest(i, 0) for i in files))

    @property
    def delta(self) -> int:
        return math.gcd(*self.tape.sizes)

    @property
    def L_prime(self) -> int:
        return self.tape.length // self.delta


@dataclass(frozen=True)
class ServiceRecord:
    file: int
    release: int
    service_time: int

    @property
    def response(self) -> int:
        return self.service_time

    @property
    def adjusted(self) -> int:
        return self.service_time - self.release


@dataclass(frozen=True)
class HeadTrace:
    """Head path breakpoints ``(time, position)`` and one record per request, in request order."""

    path: tuple[tuple[int, int], ...]
    records: tuple[ServiceRecord, ...]

    def segments(self):
        return zip(self.path, self.path[1:])

    def is_valid_path(self) -> bool:
        """Times increase; each segment is stationary or moves at unit speed."""
        for (t0, p0), (t1, p1) in self.segments():
            if t1 < t0:
                return False
            if p1 != p0 and abs(p1 - p0) != t1 - t0:
                return False
        return True


def _ceil_log(x: int, base: int) -> int:
    """Smallest t >= 0 with base**t >= x, in exact integer arithmetic."""
    t, power = 0, 1
    while power < x:
        power *= base
        t += 1
    return t


def ari_passes(tape_or_length, alpha: int = 2) -> list[int]:
    """Pass depths in intervals: min(alpha**t, L') for t = 1..ceil(log_alpha L').

    Accepts a :class:`Tape` (intervals are the gcd of the sizes) or the
    interval count ``L'`` directly.
    """
    if int(alpha) != alpha or alpha < 2:
        raise ValueError(f"alpha must be an integer >= 2, got {alpha}")
    if isinstance(tape_or_length, Tape):
        length = tape_or_length.length // math.gcd(*tape_or_length.sizes)
    else:
        length = int(tape_or_length)
    if length < 1:
        raise ValueError("the tape must have positive length")
    count = max(1, _ceil_log(length, alpha))
    return [min(alpha**t, length) for t in range(1, count + 1)]


def _pass_bounds(instance: OnlineInstance, alpha: int):
    """Yield (start_time, depth_in_bits) for every pass, repeating full sweeps after the schedule."""
    delta = instance.delta
    start = 0
    for depth in ari_passes(instance.L_prime, alpha):
        yield start, depth * delta
        start += 2 * depth * delta
    full = instance.tape.length
    while True:
        yield start, full
        start += 2 * full


def simulate_ari(instance: OnlineInstance, alpha: int = 2) -> HeadTrace:
    """Run the oblivious pass schedule; full-depth sweeps continue while requests are pending."""
    tape = instance.tape
    L = tape.length
    scheduled = len(ari_passes(instance.L_prime, alpha))
    pending = {k: r for k, r in enumerate(instance.requests)}
    service: dict[int, int] = {}
    path = [(0, L)]
    guard = scheduled + 2 + 2 * (max((r.release for r in instance.requests), default=0) // L + 2)
    for count, (start, depth) in enumerate(_pass_bounds(instance, alpha), start=1):
        if count > scheduled and not pending:
            break
        if count > guard:
            raise SimulationIncomplete(f"requests {sorted(pending)} never serviced")
        turn = L - depth
        path.append((start + depth, turn))
        path.append((start + 2 * depth, L))
        for k, r in list(pending.items()):
            left = tape.left(r.file)
            if left < turn:
                continue
            crossing = start + depth + (left - turn)
            if crossing >= r.release:
                service[k] = crossing
                del pending[k]
    records = tuple(ServiceRecord(r.file, r.release, service[k]) for k, r in enumerate(instance.requests))
    return HeadTrace(tuple(path), records)


def simulate_online_fifo(instance: OnlineInstance) -> HeadTrace:
    """Serve requests by release time (ties by position in the request list), idling when none is pending."""
    tape = instance.tape
    order = sorted(range(len(instance.requests)), key=lambda k: (instance.requests[k].release, k))
    now, pos = 0, tape.length
    path = [(0, pos)]
    service: dict[int, int] = {}
    for k in order:
        r = instance.requests[k]
        if now < r.release:
            now = r.release
            path.append((now, pos))
        left = tape.left(r.file)
        now += abs(pos - left)
        pos = left
        path.append((now, pos))
        service[k] = now
        now += tape.size(r.file)
        pos = tape.right(r.file)
        path.append((now, pos))
    records = tuple(ServiceRecord(r.file, r.release, service[k]) for k, r in enumerate(instance.requests))
    return HeadTrace(tuple(path), records)


@dataclass(frozen=True)
class ResponseSummary:
    responses: tuple[int, ...]
    adjusted: tuple[int, ...]
    total_response: int
    total_adjusted: int

    @property
    def count(self) -> int:
        return len(self.responses)


def response_metrics(trace: HeadTrace) -> ResponseSummary:
    responses = tuple(r.response for r in trace.records)
    adjusted = tuple(r.adjusted for r in trace.records)
    return ResponseSummary(responses, adjusted, sum(responses), sum(adjusted))


def first_visit_time(trace: HeadTrace, position: int) -> int | None:
    """First strictly positive time at which the head is at ``position`` moving rightward.

    A leftmost turning point counts as a rightward visit.  Returns None if the
    path never does so.
    """
    for (t0, p0), (t1, p1) in trace.segments():
        if p1 > p0 and p0 <= position <= p1:
            t = t0 + (position - p0)
            if t > 0:
                return t
    return None


def ari_path(length: int, alpha: int = 2) -> HeadTrace:
    """The bare pass schedule on a tape of ``length`` unit intervals, without requests."""
    return simulate_ari(OnlineInstance(Tape((1,) * length), ()), alpha)


# Three unit files, head resting at the left edge of file 2 at the decision time.
ADVERSARY_TAPE = Tape((1, 1, 1))


@dataclass(frozen=True)
class AdversaryCase:
    """Outcome of the adjusted-response adversary against one family of head moves.

    ``family`` describes what the policy does during the unit of time before
    the adversary releases its request: "right" (reach the left edge of file
    3), "left" (reach the left edge of file 1) or "stay".
    """

    family: str
    head_at_release: int
    requested_file: int
    policy_adjusted: int
    optimal_adjusted: int

    @property
    def ratio(self) -> float:
        if self.optimal_adjusted == 0:
            return math.inf if self.policy_adjusted > 0 else 1.0
        return self.policy_adjusted / self.optimal_adjusted


def adversary_case(family: str) -> AdversaryCase:
    tape = ADVERSARY_TAPE
    start = tape.left(2)
    moves = {"right": tape.left(3), "left": tape.left(1), "stay": start}
    if family not in moves:
        raise ValueError(f"unknown family {family!r}")
    head = moves[family]
    # the adversary asks for a file whose left edge the head is not on
    requested = 1 if family == "stay" else 2
    target = tape.left(requested)
    # an offline policy that knows the release can be at the target exactly then
    return AdversaryCase(family, head, requested, abs(head - target), 0)
