"""Tape geometry and the total-response-time objective.

Positions, sizes and times are plain integers in bit units with unit head
speed.  The head always starts at the right end of the tape (position ``L``),
where the table of contents lives.  Files are identified by 1-based ids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import accumulate
from typing import Iterable, NamedTuple, Sequence

# Virtual file id for the head start position; its right edge is at L.
HEAD = 0


class InvalidInstance(ValueError):
    pass


class IncompletePlan(ValueError):
    """A sequence misses a requested file (or is otherwise malformed)."""


class EmptyRequests(ValueError):
    pass


@dataclass(frozen=True)
class FileRecord:
    id: int
    size: int
    left: int

    @property
    def right(self) -> int:
        return self.left + self.size


@dataclass(frozen=True)
class Tape:
    sizes: tuple[int, ...]
    lefts: tuple[int, ...] = field(init=False, repr=False, compare=False)
    length: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes:
            raise InvalidInstance("a tape needs at least one file")
        if any(s < 1 for s in sizes):
            raise InvalidInstance(f"file sizes must be positive integers, got {sizes}")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "lefts", (0, *accumulate(sizes[:-1])))
        object.__setattr__(self, "length", sum(sizes))

    @property
    def n(self) -> int:
        return len(self.sizes)

    def size(self, i: int) -> int:
        return self.sizes[self._index(i)]

    def left(self, i: int) -> int:
        if i == HEAD:
            return self.length
        return self.lefts[self._index(i)]

    def right(self, i: int) -> int:
        if i == HEAD:
            return self.length
        k = self._index(i)
        return self.lefts[k] + self.sizes[k]

    def file(self, i: int) -> FileRecord:
        k = self._index(i)
        return FileRecord(i, self.sizes[k], self.lefts[k])

    def files(self) -> list[FileRecord]:
        return [FileRecord(k + 1, s, l) for k, (s, l) in enumerate(zip(self.sizes, self.lefts))]

    def _index(self, i: int) -> int:
        if not 1 <= i <= len(self.sizes):
            raise InvalidInstance(f"file id {i} outside 1..{len(self.sizes)}")
        return i - 1


def build_tape(sizes: Iterable[int]) -> Tape:
    return Tape(tuple(sizes))


@dataclass(frozen=True)
class RequestSet:
    """Per-file 0/1 request indicators, indexed like the tape (id 1 first)."""

    weights: tuple[int, ...]

    def __post_init__(self):
        weights = tuple(int(w) for w in self.weights)
        if any(w not in (0, 1) for w in weights):
            raise InvalidInstance("request indicators must be 0 or 1")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_ids(cls, n: int, ids: Iterable[int]) -> "RequestSet":
        weights = [0] * n
        for i in ids:
            if not 1 <= i <= n:
                raise InvalidInstance(f"requested id {i} outside 1..{n}")
            weights[i - 1] = 1
        return cls(tuple(weights))

    @classmethod
    def all(cls, n: int) -> "RequestSet":
        return cls((1,) * n)

    @property
    def m(self) -> int:
        return sum(self.weights)

    def ids(self) -> tuple[int, ...]:
        return tuple(i + 1 for i, w in enumerate(self.weights) if w)

    def __contains__(self, i: int) -> bool:
        return 1 <= i <= len(self.weights) and self.weights[i - 1] == 1


@dataclass(frozen=True)
class Evaluation:
    order: tuple[int, ...]
    responses: tuple[int, ...]
    total: int
    distance_traversed: int
    rewind: frozenset[int]
    forward: frozenset[int]

    def response_of(self, file_id: int) -> int:
        return self.responses[self.order.index(file_id)]


def distance(tape: Tape, from_file: int, to_file: int) -> int:
    """Head travel from the right edge of ``from_file`` to the left edge of ``to_file``."""
    if to_file == HEAD:
        raise InvalidInstance("the head start is only valid as an origin")
    return abs(tape.left(to_file) - tape.right(from_file))


def check_sequence(tape: Tape, seq: Sequence[int], required: Iterable[int] = ()) -> tuple[int, ...]:
    seq = tuple(int(i) for i in seq)
    if len(set(seq)) != len(seq):
        raise IncompletePlan(f"duplicate ids in sequence {seq}")
    for i in seq:
        if not 1 <= i <= tape.n:
            raise IncompletePlan(f"id {i} outside 1..{tape.n}")
    missing = set(required) - set(seq)
    if missing:
        raise IncompletePlan(f"sequence misses requested files {sorted(missing)}")
    return seq


def response_times(tape: Tape, seq: Sequence[int]) -> list[int]:
    """Time at which the head first reaches the left edge of each file in ``seq``."""
    times = []
    now = 0
    pos = tape.length
    for i in seq:
        left = tape.left(i)
        now += abs(pos - left)
        times.append(now)
        now += tape.size(i)
        pos = left + tape.size(i)
    return times


def stage_partition(tape: Tape, seq: Sequence[int]) -> tuple[frozenset[int], frozenset[int]]:
    """Split ``seq`` into files read before / after the head first reaches the origin.

    The origin is the left edge of the leftmost file in the sequence (bit 0
    when file 1 is present), so the rewind stage is everything read before it.
    """
    seq = tuple(seq)
    if not seq:
        return frozenset(), frozenset()
    pivot = seq.index(min(seq))
    return frozenset(seq[:pivot]), frozenset(seq[pivot:])


def check_dimensions(tape: Tape, requests: RequestSet) -> None:
    if len(requests.weights) != tape.n:
        raise InvalidInstance(f"{len(requests.weights)} request flags for a {tape.n}-file tape")


def evaluate_sequence(tape: Tape, requests: RequestSet, seq: Sequence[int]) -> Evaluation:
    check_dimensions(tape, requests)
    seq = check_sequence(tape, seq, requests.ids())
    times = response_times(tape, seq)
    total = sum(t for i, t in zip(seq, times) if i in requests)
    travelled = times[-1] + tape.size(seq[-1]) if seq else 0
    rewind, forward = stage_partition(tape, seq)
    return Evaluation(seq, tuple(times), total, travelled, rewind, forward)


def latency_objective(tape: Tape, requests: RequestSet, seq: Sequence[int]) -> int:
    """Same total as :func:`evaluate_sequence`, accumulated as pending-count x movement."""
    check_dimensions(tape, requests)
    seq = check_sequence(tape, seq, requests.ids())
    pending = requests.m
    total = 0
    prev = HEAD
    for i in seq:
        step = (tape.size(prev) if prev != HEAD else 0) + distance(tape, prev, i)
        total += pending * step
        if i in requests:
            pending -= 1
        prev = i
    return total


def canonicalize_forward(tape: Tape, requests: RequestSet, seq: Sequence[int]) -> tuple[int, ...]:
    """Reorder the forward stage ascending; never increases the objective."""
    seq = check_sequence(tape, seq, requests.ids())
    if not seq:
        return seq
    pivot = seq.index(min(seq))
    return seq[:pivot] + tuple(sorted(seq[pivot:]))


def restrict_to_requested(seq: Sequence[int], realized: RequestSet | Iterable[int]) -> tuple[int, ...]:
    wanted = set(realized.ids() if isinstance(realized, RequestSet) else realized)
    missing = wanted - set(seq)
    if missing:
        raise IncompletePlan(f"realized requests {sorted(missing)} are not in the plan")
    return tuple(i for i in seq if i in wanted)


class Rebased(NamedTuple):
    tape: Tape
    requests: RequestSet
    offset: int
    dropped: int

    def to_original(self, seq: Iterable[int]) -> tuple[int, ...]:
        return tuple(i + self.dropped for i in seq)

    def to_rebased(self, seq: Iterable[int]) -> tuple[int, ...]:
        return tuple(i - self.dropped for i in seq)


def rebase_to_first_request(tape: Tape, requests: RequestSet) -> Rebased:
    """Drop files left of the leftmost request; the head start stays the physical end.

    ``offset`` is the dropped length in bits and ``dropped`` the number of
    dropped files, so rebased id ``k`` is original id ``k + dropped``.
    """
    ids = requests.ids()
    if not ids:
        raise EmptyRequests("no file is requested")
    first = ids[0]
    if first == 1:
        return Rebased(tape, requests, 0, 0)
    k = first - 1
    return Rebased(Tape(tape.sizes[k:]), RequestSet(requests.weights[k:]), tape.lefts[k], k)
