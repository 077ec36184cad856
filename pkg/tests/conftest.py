import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from tapeseq.tape import RequestSet, Tape, evaluate_sequence

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

THREE_SIZES = (15, 4, 2)
FIVE_SIZES = (2, 2, 8, 2, 1)


@pytest.fixture
def three_files():
    tape = Tape(THREE_SIZES)
    return tape, RequestSet.all(tape.n)


@pytest.fixture
def five_files():
    tape = Tape(FIVE_SIZES)
    return tape, RequestSet.all(tape.n)


def permutation_minimum(tape, requests):
    """Plain enumeration of every ordering of the requested files."""
    best = None
    for perm in itertools.permutations(requests.ids()):
        total = evaluate_sequence(tape, requests, perm).total
        if best is None or total < best:
            best = total
    return best


def weighted_permutation_minimum(tape, weights):
    """Plain enumeration of sum(w * R) over orderings of the positive-weight files."""
    ids = [i + 1 for i, w in enumerate(weights) if w > 0]
    return min(weighted_total(tape, weights, perm) for perm in itertools.permutations(ids))


def weighted_total(tape, weights, seq):
    now, pos, total = 0, tape.length, 0
    for i in seq:
        now += abs(pos - tape.left(i))
        total += weights[i - 1] * now
        now += tape.size(i)
        pos = tape.right(i)
    return total


def random_instance(rng, n_max=8, size_max=20, n_min=1):
    n = int(rng.integers(n_min, n_max + 1))
    sizes = tuple(int(s) for s in rng.integers(1, size_max + 1, n))
    flags = rng.random(n) < rng.uniform(0.2, 1.0)
    if not flags.any():
        flags[rng.integers(n)] = True
    return Tape(sizes), RequestSet(tuple(int(f) for f in flags))


@st.composite
def instances(draw, n_max=7, size_max=20):
    n = draw(st.integers(1, n_max))
    sizes = tuple(draw(st.lists(st.integers(1, size_max), min_size=n, max_size=n)))
    flags = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    if not any(flags):
        flags[draw(st.integers(0, n - 1))] = 1
    return Tape(sizes), RequestSet(tuple(flags))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA = pytest.StashKey[list]()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        number, title = marker.args
        verdict = "PASS" if report.passed else "FAIL"
        item.config.stash.setdefault(_CRITERIA, []).append((number, title, verdict))


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_CRITERIA, [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, verdict in sorted(results):
        terminalreporter.write_line(f"criterion {number:2d} {verdict}: {title}")
