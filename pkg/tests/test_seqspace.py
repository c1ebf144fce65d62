import math

import numpy as np
import pytest
from hypothesis import example, given, strategies as st

from bochnerlab.seqspace import (Functional, KindMismatchError, SeqVec,
                                 SpaceKind, dual_norm, norm, pair)

KINDS = list(SpaceKind)

sparse = st.dictionaries(st.integers(0, 12),
                         st.floats(-1e3, 1e3, allow_nan=False), max_size=6)


def test_norm_examples():
    assert norm(SeqVec.unit(4), SpaceKind.L2) == 1
    ones = SeqVec({i: 1.0 for i in range(1, 10)})
    assert norm(ones, SpaceKind.L2) == pytest.approx(3.0, abs=1e-15)
    assert norm(SeqVec.unit(5, 2.0 ** 5), SpaceKind.L2) == 32.0
    assert norm(ones, SpaceKind.L1) == 9
    assert norm(ones, SpaceKind.LINF) == 1


def test_duals():
    assert SpaceKind.L1.dual is SpaceKind.LINF
    assert SpaceKind.L2.dual.dual is SpaceKind.L2
    assert SpaceKind.parse("l1") is SpaceKind.L1


def test_pair_examples():
    k = 3
    assert pair(Functional.coordinate(k, SpaceKind.L2), SeqVec.unit(k)) == 1
    y = Functional(SeqVec({1: 0.5, 3: -2.0}), SpaceKind.L2)
    assert pair(y, SeqVec.unit(3, 2.0 ** 3)) == 2.0 ** 3 * -2.0
    assert dual_norm(Functional(SeqVec({1: 1, 2: 1}), SpaceKind.L1)) == 1


def test_pair_kind_mismatch():
    x = Functional.coordinate(1, SpaceKind.L1)
    with pytest.raises(KindMismatchError):
        pair(x, SeqVec.unit(1), SpaceKind.L2)


def test_zero_entries_dropped_and_immutable():
    v = SeqVec({1: 0.0, 2: 3.0})
    assert v.support == (2,)
    with pytest.raises(AttributeError):
        v.foo = 1
    with pytest.raises(ValueError):
        SeqVec({1: math.inf})
    with pytest.raises(ValueError):
        SeqVec({-1: 1.0})


def test_json_roundtrip():
    v = SeqVec({3: 1.5, 7: -2.0})
    assert v.to_json() == {"3": 1.5, "7": -2.0}
    assert SeqVec.from_json(v.to_json()) == v
    x = Functional(v, SpaceKind.L1)
    assert Functional.from_json(x.to_json()) == x


@given(sparse, sparse, st.sampled_from(KINDS))
def test_triangle_and_homogeneity(a, b, kind):
    u, v = SeqVec(a), SeqVec(b)
    lhs = norm(u + v, kind)
    rhs = norm(u, kind) + norm(v, kind)
    assert lhs <= rhs * (1 + 1e-12) + 1e-12
    assert norm(u * -2.5, kind) == pytest.approx(2.5 * norm(u, kind),
                                                 rel=1e-12, abs=1e-12)


@given(sparse, sparse, st.sampled_from(KINDS))
def test_holder(c, v, kind):
    x = Functional(SeqVec(c), kind)
    vec = SeqVec(v)
    bound = x.dual_norm() * norm(vec, kind)
    assert abs(pair(x, vec)) <= bound * (1 + 1e-12) + 1e-12


@given(sparse.filter(lambda d: any(x != 0 for x in d.values())))
@example({0: 2.2250738585e-313})
def test_l2_norm_attainment(v):
    vec = SeqVec(v)
    n = norm(vec, SpaceKind.L2)
    x = Functional(vec / n, SpaceKind.L2)
    assert pair(x, vec) == pytest.approx(n, rel=1e-12)


def test_normalized_functional():
    x = Functional(SeqVec({1: 3.0, 2: 4.0}), SpaceKind.L2)
    assert x.normalized().dual_norm() == pytest.approx(1.0)
    small = Functional(SeqVec({1: 0.5}), SpaceKind.L2)
    assert small.normalized() is small
    assert np.allclose(SeqVec({2: 1.0, 5: 2.0}).dense([5, 1, 2]), [2, 0, 1])
