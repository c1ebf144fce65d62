from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bochnerlab import config
from bochnerlab.dyadic import (DyadicPartition, DyadicSet, complement,
                               dyadic_interval, intersect, measure, refine,
                               subsets_of, union)


def sets_at(level):
    return st.integers(0, (1 << (1 << level)) - 1).map(
        lambda m: DyadicSet(level, m))


def test_measure_examples():
    assert measure(DyadicSet.full(3)) == 1
    for k in range(6):
        assert measure(dyadic_interval(k, 1)) == Fraction(1, 2 ** k)
    assert measure(DyadicSet.empty(4)) == 0


def test_refine_preserves_measure_and_points():
    half = DyadicSet.atom(1, 0)
    fine = refine(half, 3)
    assert fine.level == 3 and measure(fine) == Fraction(1, 2)
    assert fine.same_points(half)
    assert fine.indicator().tolist() == [True] * 4 + [False] * 4


def test_complement_of_first_half():
    assert complement(dyadic_interval(1, 1)) == dyadic_interval(1, 2)


def test_subsets_of_omega_level_one():
    got = list(subsets_of(DyadicSet.full(0), 1))
    assert got == [DyadicSet(1, 1), DyadicSet(1, 2), DyadicSet(1, 3)]


def test_subsets_of_counts_and_guard():
    b = DyadicSet.atom(1, 1)
    assert len(list(subsets_of(b, 3))) == 2 ** 4 - 1
    with pytest.raises(OverflowError):
        list(subsets_of(DyadicSet.full(0), 5, limit=100))


def test_operands_auto_refined():
    a = DyadicSet.atom(1, 0)
    b = DyadicSet.atom(2, 1)
    assert intersect(a, b) == b
    assert union(a, b).same_points(a)


def test_resolution_overflow():
    with pytest.raises(config.ResolutionError):
        DyadicSet(config.max_level() + 1, 0)
    with pytest.raises(config.ResolutionError):
        DyadicSet.atom(0, 0).refine(config.max_level() + 1)


def test_configured_max_level_is_restored():
    previous = config.configure(max_level=2)
    try:
        with pytest.raises(config.ResolutionError):
            DyadicSet.full(3)
    finally:
        config.configure(**previous)
    assert config.max_level() == 20


def test_text_roundtrip():
    s = DyadicSet(3, 0b10110010)
    assert s.to_text() == "3:b2"
    assert DyadicSet.parse(s.to_text()) == s
    with pytest.raises(ValueError):
        DyadicSet.parse("oops")


def test_immutable():
    s = DyadicSet.full(1)
    with pytest.raises(AttributeError):
        s.level = 2


@given(sets_at(3), sets_at(3))
def test_inclusion_exclusion(s, t):
    assert (measure(s | t) + measure(s & t)) == measure(s) + measure(t)


@given(sets_at(2), st.integers(2, 6))
def test_refine_measure_property(s, m):
    assert measure(refine(s, m)) == measure(s)


@given(sets_at(3), sets_at(3))
def test_boolean_algebra(s, t):
    assert ~(s | t) == (~s & ~t)
    assert (s - t) == (s & ~t)
    assert (s & t).issubset(s)


def test_partition_validation_and_labels():
    p = DyadicPartition.from_labels(2, [0, 0, 1, 2], exceptional_label=2)
    assert len(p) == 2
    assert p.exceptional == DyadicSet.atom(2, 3)
    assert sum(b.measure() for b in p.all_blocks()) == 1
    assert p.labels().tolist() == [0, 0, 1, -1]
    assert DyadicPartition.from_json(p.to_json()).labels().tolist() == \
        [0, 0, 1, -1]
    with pytest.raises(ValueError):
        DyadicPartition([DyadicSet.atom(1, 0)])
    with pytest.raises(ValueError):
        DyadicPartition([DyadicSet.full(1), DyadicSet.atom(1, 0)])
