from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from bochnerlab import gallery
from bochnerlab.dyadic import DyadicPartition, DyadicSet, subsets_of
from bochnerlab.functionals import PettisCapError, pettis_norm_exact
from bochnerlab.oscillation import (Status, b0_check, b1_check, b2_check,
                                    bocce_osc, default_test_sets,
                                    mean_vanishing_check,
                                    pettis_bocce_interval, pettis_bocce_osc,
                                    sequential_bocce_check,
                                    sequential_pettis_bocce_check,
                                    set_bocce_check, small_bocce_osc,
                                    small_bocce_set_check,
                                    small_mean_everywhere, tail_indices)
from bochnerlab.seqspace import SeqVec, SpaceKind
from bochnerlab.stepfn import (FunctionSequence, StepFunction, average,
                               constancy_partition, indicator_function,
                               l1_norm)

L2 = SpaceKind.L2
OMEGA = DyadicSet.full(0)
SAT = Status.SATISFIED_AT_RESOLUTION


def rv(i, v=SeqVec.unit(1)):
    """r_i times the vector v."""
    row = v.dense(v.support)
    return StepFunction(i, np.outer(gallery.rademacher(i), row), v.support, L2)


def constant_seq(K=6):
    f0 = gallery.random_step_function(np.random.default_rng(0), 2, 3)
    return FunctionSequence([f0] * K, f0, "constant")


def test_bocce_osc_examples():
    assert bocce_osc(rv(1), OMEGA) == 1
    const = StepFunction.constant(SeqVec({1: 2, 3: 1}), L2, level=2)
    assert bocce_osc(const, DyadicSet(2, 0b0110)) == 0
    half = StepFunction.real(1, [1.0, 0.0])
    assert bocce_osc(half, OMEGA) == 0.5
    assert bocce_osc(rv(2), DyadicSet.empty(3)) == 0


def test_bocce_osc_matches_loop():
    rng = np.random.default_rng(0)
    for i in range(100):
        kind = list(SpaceKind)[i % 3]
        f = gallery.random_step_function(rng, int(rng.integers(0, 4)), 3,
                                         kind)
        mask = int(rng.integers(1, 256))
        atoms = [a for a in range(8) if mask >> a & 1]
        assert bocce_osc(f, DyadicSet(3, mask)) == pytest.approx(
            oracles.bocce_by_loop(f, 3, atoms), rel=1e-12, abs=1e-15)


def test_pettis_bocce_examples():
    const = StepFunction.constant(SeqVec({1: 2}), L2, level=3)
    assert pettis_bocce_osc(const, DyadicSet(3, 0b1011)) == 0
    for k in range(1, 6):
        f = gallery.get("ex52", k).member(k)
        assert pettis_bocce_osc(f, OMEGA) == pytest.approx(1)
        assert bocce_osc(f, OMEGA) == pytest.approx(1)
    for k in range(1, 5):
        f = gallery.get("ex53", k).member(k)
        centred = f - StepFunction.constant(average(f), L2)
        p = pettis_bocce_osc(f, OMEGA)
        assert p == pytest.approx(pettis_norm_exact(centred).value)
        assert p <= bocce_osc(f, OMEGA) + 1e-12


def test_pettis_bocce_interval_exact_and_capped():
    f = gallery.get("ex55", 6).member(6)
    a = DyadicSet.atom(1, 0)
    lo, hi, exact = pettis_bocce_interval(f, a)
    assert exact and lo == hi
    lo2, hi2, exact2 = pettis_bocce_interval(f, a, cap=2)
    assert not exact2 and lo2 - 1e-12 <= lo <= hi2 + 1e-12
    with pytest.raises(PettisCapError):
        pettis_bocce_osc(f, a, cap=2)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 255),
       st.sampled_from(list(SpaceKind)))
def test_pettis_bocce_below_bocce(seed, mask, kind):
    f = gallery.random_step_function(np.random.default_rng(seed), 3, 3, kind)
    a = DyadicSet(3, mask)
    assert pettis_bocce_osc(f, a) <= bocce_osc(f, a) * (1 + 1e-12) + 1e-15


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 255),
       st.sampled_from(list(SpaceKind)))
def test_oscillation_inequalities(seed, mask, kind):
    rng = np.random.default_rng(seed)
    f = gallery.random_step_function(rng, 3, 3, kind)
    g = gallery.random_step_function(rng, 2, 3, kind)
    a = DyadicSet(3, mask)
    of, og = bocce_osc(f, a), bocce_osc(g, a)
    assert abs(of - og) <= bocce_osc(f - g, a) + 1e-12
    assert bocce_osc(f + g, a) <= of + og + 1e-12
    assert float(a.measure()) * of <= 2 * l1_norm(f, a) + 1e-12


def test_constancy_partition_has_zero_oscillation_on_sub_blocks():
    rng = np.random.default_rng(1)
    for _ in range(20):
        f = gallery.random_step_function(rng, 3, 2, density=0.3)
        f = StepFunction(3, np.round(f.data), f.coords, L2)
        for blk in constancy_partition(f).blocks:
            for sub in subsets_of(blk, 3):
                assert bocce_osc(f, sub) == 0


def test_default_families():
    assert [s.to_text() for s in default_test_sets(1)] == ["0:1", "1:1",
                                                           "1:2"]
    assert tail_indices(8) == [5, 6, 7, 8]
    assert tail_indices(1) == [1]


def test_sequential_bocce_examples():
    strong = gallery.get("strong", 8)
    assert sequential_bocce_check(strong).status is SAT
    assert sequential_bocce_check(constant_seq()).status is SAT
    v = sequential_bocce_check(gallery.get("ex52", 8), eps_grid=(0.5,),
                               test_sets=[OMEGA], search_level=4)
    assert v.status is Status.FALSIFIED
    assert v.falsifications[0]["min_osc"] == 1.0


def test_falsification_replays_by_brute_force():
    seq = gallery.get("ex52", 6)
    v = sequential_bocce_check(seq, eps_grid=(0.5,), test_sets=[OMEGA],
                               search_level=3)
    assert v.status is Status.FALSIFIED
    tail = tail_indices(6)
    for r in range(1, 9):
        for atoms in combinations(range(8), r):
            for k in tail:
                f = seq.member(k)
                assert oracles.bocce_by_loop(f, max(3, f.level),
                                             _expand(atoms, 3, f.level)) >= 0.5


def _expand(atoms, level, target):
    if target <= level:
        return list(atoms)
    shift = target - level
    return [a << shift | j for a in atoms for j in range(1 << shift)]


def test_witness_replays():
    seq = gallery.random_strong_sequence(np.random.default_rng(4), 10)
    v = sequential_bocce_check(seq)
    assert v.status is SAT
    for e in v.witnesses:
        w = e["witness"]
        a = DyadicSet.parse(w["set"])
        assert a.issubset(DyadicSet.parse(e["test_set"]))
        assert bocce_osc(seq.member(w["member"]), a) < e["eps"]
        assert w["member"] in tail_indices(10)


def test_registered_subsequences():
    seq = gallery.get("ex52", 8)
    v = sequential_bocce_check(seq, eps_grid=(0.5,), test_sets=[OMEGA],
                               subsequences=[[2, 4, 6, 8]])
    tags = {e["subsequence"] for e in v.entries}
    assert tags == {"full", "sub0"}
    with pytest.raises(ValueError):
        sequential_bocce_check(seq, subsequences=[[3, 2]])
    with pytest.raises(IndexError):
        sequential_bocce_check(seq, subsequences=[[9]])


def test_search_overflow_is_inconclusive():
    v = sequential_bocce_check(gallery.get("strong", 4), eps_grid=(0.5,),
                               test_sets=[OMEGA], search_level=5,
                               max_subsets=1000)
    assert v.status is Status.INCONCLUSIVE
    assert "exceed" in v.entries[0]["reason"]


def test_sequential_pettis_bocce_examples():
    v = sequential_pettis_bocce_check(gallery.get("ex53", 8),
                                      eps_grid=(0.5, 0.25, 0.125))
    assert v.status is SAT
    # the tail r_6 .. r_10 is nonconstant on every level-4 atom
    v = sequential_pettis_bocce_check(gallery.get("ex52", 10),
                                      eps_grid=(0.5,), test_sets=[OMEGA],
                                      search_level=4)
    assert v.status is Status.FALSIFIED
    assert sequential_pettis_bocce_check(gallery.get("zero", 4)).status is SAT


def test_set_bocce_examples():
    rng = np.random.default_rng(2)
    f = gallery.random_step_function(rng, 2, 3)
    assert set_bocce_check([f], search_level=2).status is SAT
    consts = [StepFunction.constant(SeqVec({1: c}), L2) for c in (1, -2, 5)]
    assert set_bocce_check(consts).status is SAT
    rad = [rv(k) for k in range(1, 5)]
    # each r_k, k <= 4, is constant on level-4 atoms
    assert set_bocce_check(rad, (0.5,), search_level=4).status is SAT
    v = set_bocce_check(rad, (0.5,), search_level=3)
    assert v.status is Status.FALSIFIED
    assert v.falsifications[0]["member"] == 4


def test_b_checks_examples():
    strong = gallery.get("strong", 8)
    assert b2_check(strong).status is SAT
    assert b1_check(strong).status is SAT
    assert b0_check(strong).status is SAT
    v = b0_check(gallery.get("ex52", 8), eps_grid=(0.5,), test_sets=[OMEGA],
                 search_level=4)
    assert v.status is Status.FALSIFIED
    for check in (b0_check, b1_check, b2_check):
        assert check(constant_seq()).status is SAT


def test_b1_with_given_partition():
    seq = gallery.get("ex52", 6)
    part = DyadicPartition.atoms(6)
    v = b1_check(seq, (0.5,), levels=(), partitions=[part])
    assert v.status is SAT
    assert v.entries[0]["witness"]["candidate"] == "given0"


def test_small_bocce_examples():
    f = StepFunction(2, [[1.0], [1.0], [2.0], [2.0]], [1], L2)
    assert small_bocce_osc(f, DyadicPartition.atoms(1)) == 0
    halves = DyadicPartition.atoms(1)
    assert small_bocce_osc(rv(2), halves) == 1
    assert small_bocce_osc(rv(1), halves) == 0


def test_small_bocce_ignores_exceptional_block():
    p = DyadicPartition([DyadicSet.atom(1, 0)], DyadicSet.atom(1, 1))
    f = rv(2)
    assert small_bocce_osc(f, p) == pytest.approx(0.5)


def test_small_bocce_set_check():
    rad = [rv(k) for k in range(1, 4)]
    v = small_bocce_set_check(rad, (0.5,))
    assert v.status is SAT
    assert v.entries[0]["witness"]["candidate"] == "atoms@3"
    v = small_bocce_set_check([rv(5)], (0.5,))
    assert v.status is Status.FALSIFIED


def test_small_mean_against_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(60):
        level = int(rng.integers(0, 4))
        vals = rng.random(1 << level) * (rng.random(1 << level) < 0.5)
        phi = StepFunction.real(level, vals)
        for eps in (0.5, 0.1, 0.01):
            holds, offender = small_mean_everywhere(phi, eps)
            assert holds == oracles.small_mean_brute(vals.tolist(), eps)
            if offender is not None:
                assert vals[offender.indicator()].min() >= eps


def test_mean_vanishing_check_rows():
    phi = StepFunction.real(2, [0.0, 0.3, 0.0, 0.0])
    rows = mean_vanishing_check(phi, [0.5, 0.25])
    assert [r["holds"] for r in rows] == [True, False]
    assert rows[1]["offender"] is not None
    with pytest.raises(OverflowError):
        small_mean_everywhere(StepFunction.real(5, np.zeros(32)), 0.1)


def test_verdict_serialization():
    v = b0_check(gallery.get("strong", 4), eps_grid=(0.5,))
    js = v.to_json()
    assert js["status"] == "SATISFIED_AT_RESOLUTION"
    assert js["resolution"]["search_level"] == 3
    assert v.status_at(0.5) is SAT


def test_indicator_function_roundtrip():
    f = indicator_function(DyadicSet.atom(2, 1), SeqVec({3: 2.0}), L2)
    assert bocce_osc(f, DyadicSet.atom(2, 1)) == 0
