from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bochnerlab import gallery
from bochnerlab.dyadic import DyadicSet
from bochnerlab.functionals import measure_deviation, ui_modulus
from bochnerlab.oscillation import DEFAULT_EPS_GRID
from bochnerlab.seqspace import SeqVec, SpaceKind
from bochnerlab.stepfn import FunctionSequence, StepFunction
from bochnerlab.tightbite import (CONSTANT_BALL, FINITE_SET,
                                  average_escape_gap, ball_escape,
                                  biting_decompose, finite_set_escape,
                                  finite_set_witness, theorem45_check,
                                  theorem48_check, tightness_search)

L2 = SpaceKind.L2


def test_ex34_tight_at_every_eps():
    found = tightness_search(gallery.get("ex34", 8))
    assert all(w.found and w.mode == CONSTANT_BALL for w in found)
    for w in found:
        m = int(round(-np.log2(w.eps)))
        assert w.dim >= min(m, 8) - 1
        assert w.max_escape <= Fraction(w.eps)


def test_ex34_finite_set_witness():
    seq = gallery.get("ex34", 8)
    for m in range(1, 6):
        w = finite_set_witness(seq, 2.0 ** -m)
        assert w.found and w.mode == FINITE_SET
        # the member with escape exactly 2^-m needs no point of its own
        expected = {SeqVec()} | {SeqVec.unit(k, 2.0 ** k)
                                 for k in range(1, m)}
        assert set(w.points) == expected


def test_ex32_not_tight():
    K = 6
    seq = gallery.get("ex32", K)
    w = tightness_search(seq, (0.5,))[0]
    assert not w.found
    for d in range(K):
        esc = tightness_search(seq, (0.5,), d_grid=[d])[0].escape
        assert all(esc[k - 1] == 1 for k in range(d + 1, K + 1))


def test_zero_sequence_tight_with_trivial_ball():
    w = tightness_search(gallery.get("zero", 4))
    assert all(x.found and x.radius == 0 and x.dim == 0 for x in w)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 4), st.floats(0, 4),
       st.integers(0, 4), st.integers(0, 4))
def test_escape_monotone_in_ball(seed, r1, r2, d1, d2):
    f = gallery.random_step_function(np.random.default_rng(seed), 3, 4)
    lo_r, hi_r = sorted((r1, r2))
    lo_d, hi_d = sorted((d1, d2))
    assert ball_escape(f, hi_r, hi_d) <= ball_escape(f, lo_r, lo_d)


def test_finite_set_escape():
    f = StepFunction(1, [[1.0, 0.0], [0.0, 2.0]], [1, 2], L2)
    assert finite_set_escape(f, [SeqVec.unit(1)]) == Fraction(1, 2)
    assert finite_set_escape(f, [SeqVec.unit(1), SeqVec.unit(2, 2.0)]) == 0
    assert finite_set_escape(f, [SeqVec.unit(1)], eta=10) == Fraction(1, 2)


def test_witness_contains():
    w = tightness_search(gallery.get("ex34", 4), (0.5,))[0]
    assert w.contains(SeqVec(), L2)
    assert not w.contains(SeqVec.unit(w.dim + 1), L2)


def test_spike_biting_exact():
    n = 10
    bite = biting_decompose(gallery.get("spike", n))
    assert bite.is_increasing()
    assert all(v == 0 for v in bite.bitten_l1)
    assert bite.removed_measure == [Fraction(1, 2 ** k)
                                    for k in range(1, n + 1)]
    for k, s in enumerate(bite.sets, start=1):
        assert s.same_points(~DyadicSet.atom(k, 0))
    assert all(v == 0 for v in bite.bitten_ui.values)


def test_biting_bounded_sequences_untouched():
    for name in ("zero", "ex52", "ex53", "ex32"):
        bite = biting_decompose(gallery.get(name, 6))
        assert all(m == 0 for m in bite.removed_measure)
    bite = biting_decompose(gallery.get("strong", 6))
    assert bite.is_increasing() and bite.removed_measure[-1] == 0
    bite = biting_decompose(gallery.get("spike", 4), schedule="quadratic")
    assert bite.is_increasing()
    with pytest.raises(ValueError):
        biting_decompose(gallery.get("spike", 4), schedule="cubic")


def test_theorem45_examples():
    ex32 = theorem45_check(gallery.get("ex32", 8))
    assert ex32["premises"]["tight"] is False and ex32["strong"] is False
    assert ex32["agreement"] == "agree"
    strong = theorem45_check(gallery.get("strong", 8))
    assert all(strong["premises"].values()) and strong["strong"]
    assert strong["agreement"] == "agree"
    ex34 = theorem45_check(gallery.get("ex34", 8))
    assert ex34["premises"]["weak"] is False
    assert any("no claim" in n for n in ex34["notes"])


def test_theorem48_examples():
    spike = theorem48_check(gallery.get("spike", 8))
    assert spike["conclusions"]["removed_in_measure"]
    strong = theorem48_check(gallery.get("strong", 8))
    assert strong["agreement"] == "agree"
    ex32 = theorem48_check(gallery.get("ex32", 8))
    assert ex32["agreement"] == "premises fail, no claim"


def test_average_gap_respects_bound():
    rng = np.random.default_rng(0)
    for _ in range(20):
        seq = gallery.random_strong_sequence(rng, 6, noise_level=4)
        for w in tightness_search(seq, DEFAULT_EPS_GRID[:3]):
            if not w.found:
                continue
            for f in seq:
                for b in (DyadicSet.full(0), DyadicSet.atom(1, 1)):
                    gap, bound = average_escape_gap(f, b, w)
                    assert gap <= bound + 1e-12


def test_in_measure_convergence_gives_finite_witness():
    seq = gallery.get("spike", 8)
    for eps in DEFAULT_EPS_GRID[:5]:
        devs = [measure_deviation(f, seq.limit, 0.5) for f in seq]
        assert devs[-1] <= eps
        assert finite_set_witness(seq, eps).found


def test_to_json_shapes():
    w = tightness_search(gallery.get("ex32", 3), (0.5,))[0]
    js = w.to_json()
    assert js["status"] == "NOT_FOUND" and js["mode"] == CONSTANT_BALL
    bite = biting_decompose(gallery.get("spike", 3))
    assert set(bite.to_json()) >= {"sets", "removed_measure", "bitten_ui"}
    ui = ui_modulus(bite.bitten, [1.0])
    assert ui.values == (0.0,)
    assert FunctionSequence(bite.removed).kind is L2
