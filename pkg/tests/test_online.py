import pytest
from hypothesis import given
from hypothesis import strategies as st

from tapeseq.exact import solve_exact
from tapeseq.instances import gen_zigzag
from tapeseq.online import (
    HeadTrace,
    OnlineInstance,
    OnlineRequest,
    ServiceRecord,
    adversary_case,
    ari_passes,
    ari_path,
    first_visit_time,
    response_metrics,
    simulate_ari,
    simulate_online_fifo,
)
from tapeseq.tape import InvalidInstance, RequestSet, Tape, evaluate_sequence


@st.composite
def online_instances(draw, n_max=8, size_max=6, release_max=60):
    n = draw(st.integers(1, n_max))
    unit = draw(st.integers(1, 3))
    sizes = tuple(unit * s for s in draw(st.lists(st.integers(1, size_max), min_size=n, max_size=n)))
    count = draw(st.integers(1, 2 * n))
    reqs = tuple(
        OnlineRequest(draw(st.integers(1, n)), draw(st.integers(0, release_max))) for _ in range(count)
    )
    return OnlineInstance(Tape(sizes), reqs)


@pytest.mark.parametrize("length, depths", [(16, [2, 4, 8, 16]), (5, [2, 4, 5]), (1, [1])])
def test_ari_passes(length, depths):
    assert ari_passes(length) == depths


def test_ari_passes_use_gcd_intervals():
    assert ari_passes(Tape((2, 4, 6))) == [2, 4, 6]
    assert ari_passes(27, alpha=3) == [3, 9, 27]


@pytest.mark.parametrize("alpha", [1, 0, 2.5])
def test_ari_passes_reject_alpha(alpha):
    with pytest.raises(ValueError):
        ari_passes(8, alpha)


def test_instance_constants():
    inst = OnlineInstance(Tape((4, 6, 2)), ())
    assert inst.delta == 2
    assert inst.L_prime * inst.delta == inst.tape.length
    with pytest.raises(InvalidInstance):
        OnlineInstance(Tape((1,)), (OnlineRequest(2, 0),))
    with pytest.raises(InvalidInstance):
        OnlineRequest(1, -1)


@pytest.mark.parametrize("k", range(2, 7))
def test_first_visit_formula(k):
    trace = ari_path(128)
    assert first_visit_time(trace, 128 - 2**k) == 3 * 2**k - 4


def test_first_visit_boundaries():
    trace = ari_path(16)
    assert first_visit_time(trace, 16) == 4
    assert first_visit_time(trace, 0) == 2 * (2 + 4 + 8) + 16
    assert first_visit_time(ari_path(4), 17) is None


def test_adjacent_file_served_on_first_pass():
    inst = OnlineInstance.at_time_zero(Tape((1,) * 8), [8])
    trace = simulate_ari(inst)
    assert trace.records[0].service_time == 3


def test_ari_path_is_oblivious():
    tape = Tape((2, 3, 1, 4))
    quiet = simulate_ari(OnlineInstance(tape, ()))
    busy = simulate_ari(OnlineInstance(tape, (OnlineRequest(4, 0), OnlineRequest(2, 1))))
    assert busy.path[: len(quiet.path)] == quiet.path


def test_late_release_waits_for_a_full_sweep():
    tape = Tape((1,) * 4)
    trace = simulate_ari(OnlineInstance(tape, (OnlineRequest(1, 100),)))
    record = trace.records[0]
    assert record.service_time >= 100
    assert trace.is_valid_path()


@given(online_instances())
def test_ari_per_request_bound(inst):
    trace = simulate_ari(inst)
    assert trace.is_valid_path()
    L = inst.tape.length
    for r in trace.records:
        assert r.release <= r.service_time
        assert r.response <= 7 * max(r.release, L - inst.tape.left(r.file))


@given(online_instances(release_max=0))
def test_ari_against_offline_optimum(inst):
    files = sorted({r.file for r in inst.requests})
    inst = OnlineInstance.at_time_zero(inst.tape, files)
    total = response_metrics(simulate_ari(inst)).total_response
    best = solve_exact(inst.tape, RequestSet.from_ids(inst.tape.n, files)).value
    assert total <= 7 * best


def test_other_alphas_are_worse_at_probe_positions():
    def worst(alpha):
        L = alpha**6
        trace = ari_path(L, alpha)
        return max(first_visit_time(trace, L - x) / x for x in (alpha**k + 1 for k in range(1, 6)))

    assert worst(2) < worst(3) < worst(4)
    assert worst(2) <= 7


def test_online_fifo_matches_offline_order():
    tape = Tape((3, 1, 4, 1, 5))
    order = (2, 5, 1, 4)
    trace = simulate_online_fifo(OnlineInstance.at_time_zero(tape, order))
    ev = evaluate_sequence(tape, RequestSet.from_ids(5, order), order)
    assert tuple(r.service_time for r in trace.records) == ev.responses
    assert trace.is_valid_path()


def test_online_fifo_single_late_request():
    tape = Tape((3, 4))
    trace = simulate_online_fifo(OnlineInstance(tape, (OnlineRequest(1, 10),)))
    assert trace.records[0].service_time == 10 + tape.length
    assert trace.path[:2] == ((0, 7), (10, 7))


def test_online_fifo_release_order():
    tape = Tape((1,) * 5)
    reqs = (OnlineRequest(5, 20), OnlineRequest(1, 0), OnlineRequest(3, 0))
    trace = simulate_online_fifo(OnlineInstance(tape, reqs))
    assert [r.service_time for r in trace.records] == [20 + 1, 5, 5 + 1 + 1]


@pytest.mark.parametrize("n", [8, 16, 32, 64])
def test_zigzag_increments(n):
    trace = simulate_online_fifo(gen_zigzag(n).online())
    served = {r.file: r.service_time for r in trace.records}
    left = [served[n // 2 - k] for k in range(n // 2)]
    for k in range(1, n // 2):
        assert left[k] - left[k - 1] == 4 * k + 1


def test_zigzag_service_times():
    trace = simulate_online_fifo(gen_zigzag(8).online())
    assert [r.service_time for r in trace.records] == [5, 6, 10, 13, 19, 24, 32, 39]


def test_zigzag_ratio_grows():
    ratios = []
    for n in (8, 16, 32, 64):
        inst = gen_zigzag(n)
        fifo_total = response_metrics(simulate_online_fifo(inst.online())).total_response
        ascending = evaluate_sequence(inst.tape, inst.requests, tuple(range(1, n + 1))).total
        ratios.append(fifo_total / ascending)
    assert all(a < b for a, b in zip(ratios, ratios[1:]))


def test_response_metrics_example():
    trace = HeadTrace(((0, 10), (10, 0)), (ServiceRecord(1, 7, 10),))
    summary = response_metrics(trace)
    assert summary.adjusted == (3,)
    assert summary.responses == (10,)
    assert summary.count == 1


@given(online_instances())
def test_metric_algebra(inst):
    for trace in (simulate_ari(inst), simulate_online_fifo(inst)):
        summary = response_metrics(trace)
        assert summary.total_adjusted == summary.total_response - sum(r.release for r in inst.requests)
        assert trace.is_valid_path()


@given(online_instances(release_max=0))
def test_metrics_coincide_at_time_zero(inst):
    summary = response_metrics(simulate_ari(inst))
    assert summary.total_adjusted == summary.total_response


@pytest.mark.parametrize("family", ["right", "left", "stay"])
def test_adjusted_adversary(family):
    case = adversary_case(family)
    assert case.optimal_adjusted == 0
    assert case.policy_adjusted >= 1
    assert case.ratio == float("inf")


def test_adjusted_adversary_unknown_family():
    with pytest.raises(ValueError):
        adversary_case("jump")
