import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import instances, permutation_minimum, random_instance
from tapeseq.exact import solve_exact
from tapeseq.instances import gen_fiff_adversarial
from tapeseq.policies import (
    NotApplicable,
    fifila,
    fiff,
    fifo,
    fifo_pass_through_total,
    fifo_pass_through_totals,
    fifo_shuffle_totals,
    lfl,
    lfl_by_scan,
    policy_total,
    postponement_report,
    random_arrival,
    revisit_gap,
    ssf,
)
from tapeseq.tape import IncompletePlan, RequestSet, Tape, evaluate_sequence


def total(tape, requests, seq):
    return evaluate_sequence(tape, requests, seq).total


def test_fifo_arrival_order(three_files):
    seq = fifo(*three_files, (1, 2, 3))
    assert seq == (1, 2, 3)
    assert total(*three_files, seq) == 97


def test_fifo_rejects_wrong_arrivals(three_files):
    tape, _ = three_files
    with pytest.raises(IncompletePlan):
        fifo(tape, RequestSet.from_ids(3, [1, 2]), (1, 2, 3))
    with pytest.raises(IncompletePlan):
        fifo(*three_files, (1, 2))


def test_random_arrival_is_permutation(rng):
    requests = RequestSet.from_ids(6, [2, 3, 5])
    assert sorted(random_arrival(requests, rng)) == [2, 3, 5]


def test_fiff_examples(five_files):
    assert fiff(RequestSet.from_ids(5, [1, 3, 5])) == (1, 3, 5)
    assert fiff(five_files[1]) == (1, 2, 3, 4, 5)
    assert total(*five_files, fiff(five_files[1])) == 107


def test_ssf_examples(five_files):
    assert ssf(*five_files) == (5, 1, 2, 4, 3)
    equal = Tape((3,) * 6)
    requests = RequestSet.from_ids(6, [2, 4, 5])
    assert ssf(equal, requests) == fiff(requests)


def test_ssf_reads_small_files_before_the_huge_one():
    tape = gen_fiff_adversarial(10).tape
    seq = ssf(tape, RequestSet.all(10))
    assert seq[-1] == 2


def test_fifila_examples(three_files, five_files):
    assert fifila(RequestSet.all(5)) == (5, 4, 3, 2, 1)
    assert total(*three_files, fifila(three_files[1])) == 45
    ev = evaluate_sequence(*five_files, fifila(five_files[1]))
    assert ev.responses == (1, 5, 17, 35, 41)
    assert ev.total == 99


def test_postponement_violated_move(five_files):
    report = postponement_report(*five_files, (5, 4, 3, 2, 1), 2)
    assert report.file == 3
    assert report.delta_saving == 2 * 8 * (5 - 3)
    assert report.violated
    assert total(*five_files, report.candidate) == 79


def test_postponement_non_violated_move(five_files):
    report = postponement_report(*five_files, (5, 4, 1, 2, 3), 1)
    assert report.file == 4
    assert report.delta_saving == 12
    assert not report.violated
    assert report.candidate == (5, 1, 2, 3, 4)
    assert total(*five_files, report.candidate) == 87


def test_postponement_without_pending_requests(five_files):
    tape, _ = five_files
    requests = RequestSet.from_ids(5, [5])
    report = postponement_report(tape, requests, (5, 4, 3, 2, 1), 0)
    assert report.delta_saving == 0
    assert not report.violated


def test_postponement_forward_file_is_not_applicable(five_files):
    with pytest.raises(NotApplicable):
        postponement_report(*five_files, (5, 4, 1, 2, 3), 3)


def test_revisit_gap(five_files):
    # file 3 in (5, 4, 3, 2, 1) is never passed again
    assert revisit_gap(five_files[0], (5, 4, 3, 2, 1), 2) is None
    # file 4 in (5, 4, 1, 2, 3) is passed again only if something right of it follows
    assert revisit_gap(five_files[0], (5, 4, 1, 2, 3), 1) is None
    # read 4, move to 0, read 1, move to the left edge of 5
    assert revisit_gap(five_files[0], (4, 1, 5), 0) == 2 + 14 + 2 + 12


def test_lfl_examples(three_files, five_files):
    assert lfl(*five_files) == (5, 4, 1, 2, 3)
    assert total(*five_files, lfl(*five_files)) == 75
    assert lfl(*three_files) == (3, 2, 1)


def test_lfl_on_equal_sizes_is_fifila():
    tape = Tape((4,) * 7)
    requests = RequestSet.from_ids(7, [2, 3, 6, 7])
    assert lfl(tape, requests) == fifila(requests)


@given(instances(n_max=8))
def test_lfl_matches_scan_reference(inst):
    assert lfl(*inst) == lfl_by_scan(*inst)


@given(instances(n_max=8))
def test_lfl_fixed_point(inst):
    tape, requests = inst
    seq = lfl(tape, requests)
    pivot = seq.index(min(seq))
    for t in range(pivot):
        assert not postponement_report(tape, requests, seq, t).violated


@given(instances(n_max=7))
def test_approximation_bounds(inst):
    tape, requests = inst
    best = solve_exact(tape, requests).value
    fila = total(tape, requests, fifila(requests))
    assert total(tape, requests, lfl(tape, requests)) <= fila
    assert fila <= 3 * best


@given(st.integers(1, 7), st.integers(1, 9), st.data())
def test_equal_sizes_are_solved_exactly(n, s, data):
    tape = Tape((s,) * n)
    flags = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(any))
    requests = RequestSet(tuple(flags))
    best = permutation_minimum(tape, requests)
    assert total(tape, requests, fifila(requests)) == best
    assert total(tape, requests, lfl(tape, requests)) == best
    everything = RequestSet.all(n)
    assert total(tape, everything, fiff(everything)) == permutation_minimum(tape, everything)


def test_lfl_moves_are_strict_improvements(rng):
    for _ in range(100):
        tape, requests = random_instance(rng, n_max=10)
        seq = fifila(requests)
        current = total(tape, requests, seq)
        moved = True
        while moved:
            moved = False
            pivot = seq.index(min(seq))
            for t in range(pivot):
                report = postponement_report(tape, requests, seq, t)
                if report.violated:
                    after = total(tape, requests, report.candidate)
                    assert after < current
                    seq, current, moved = report.candidate, after, True
                    break


@pytest.mark.parametrize("small, large", [(8, 16), (16, 32)])
def test_fiff_and_ssf_ratios_grow(small, large):
    def ratios(n):
        inst = gen_fiff_adversarial(n)
        best = total(inst.tape, inst.requests, lfl(inst.tape, inst.requests))
        return (
            total(inst.tape, inst.requests, fiff(inst.requests)) / best,
            total(inst.tape, inst.requests, ssf(inst.tape, inst.requests)) / best,
        )

    (f1, s1), (f2, s2) = ratios(small), ratios(large)
    assert f2 >= 1.5 * f1
    assert s2 >= 1.5 * s1


def test_strict_fifo_shuffles_match_sequence_evaluation():
    tape = Tape((5, 1, 7, 2, 9, 3))
    requests = RequestSet.from_ids(6, [1, 3, 4, 6])
    totals = fifo_shuffle_totals(tape, requests, 50, np.random.default_rng(3))
    ids = np.array(requests.ids())
    perms = np.random.default_rng(3).permuted(np.tile(np.arange(4), (50, 1)), axis=1)
    expected = [policy_total(tape, requests, fifo(tape, requests, ids[p])) for p in perms]
    assert totals.tolist() == expected


def test_pass_through_batch_matches_reference(rng):
    for _ in range(50):
        tape, requests = random_instance(rng, n_max=9)
        seed = int(rng.integers(1 << 30))
        totals = fifo_pass_through_totals(tape, requests, 20, np.random.default_rng(seed))
        ids = np.array(requests.ids())
        perms = np.random.default_rng(seed).permuted(np.tile(np.arange(len(ids)), (20, 1)), axis=1)
        expected = [fifo_pass_through_total(tape, requests, ids[p]) for p in perms]
        assert totals.tolist() == expected


def test_pass_through_never_exceeds_strict(rng):
    for _ in range(100):
        tape, requests = random_instance(rng, n_max=9)
        order = random_arrival(requests, rng)
        strict = policy_total(tape, requests, fifo(tape, requests, order))
        assert solve_exact(tape, requests).value <= fifo_pass_through_total(tape, requests, order) <= strict


def test_pass_through_serves_files_on_the_way(three_files):
    assert fifo_pass_through_total(*three_files, (1, 2, 3)) == 21 + 36 + 40
    # arrival (1, 3, 2): file 2 is read on the way to file 3 instead of after it
    assert fifo_pass_through_total(*three_files, (1, 3, 2)) == 21 + 36 + 40
    assert policy_total(*three_files, (1, 3, 2)) == 21 + 40 + 48
