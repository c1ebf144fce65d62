import numpy as np
import pytest

from bochnerlab import gallery
from bochnerlab.seqspace import SeqVec, SpaceKind
from bochnerlab.stepfn import integral, l1_norm


def test_every_name_builds():
    for name in gallery.names():
        seq = gallery.get(name, 5)
        assert len(seq) == 5 and seq.label == name
        assert l1_norm(seq.limit) == 0
    with pytest.raises(KeyError):
        gallery.get("nope", 3)
    with pytest.raises(ValueError):
        gallery.get("ex32", 0)


def test_rademacher_moments_and_orthogonality():
    for i in range(1, 7):
        r = gallery.gen_rademacher(i)
        assert integral(r) == SeqVec()
        assert l1_norm(r) == 1
    for i in range(1, 6):
        for j in range(i + 1, 7):
            prod = gallery.rademacher(i, 6) * gallery.rademacher(j, 6)
            assert prod.mean() == 0
    with pytest.raises(ValueError):
        gallery.rademacher(3, 2)
    with pytest.raises(ValueError):
        gallery.rademacher(0)


def test_member_shapes():
    ex53 = gallery.get("ex53", 4).member(3)
    assert ex53.level == 3 and list(ex53.coords) == list(range(9, 17))
    ex55 = gallery.get("ex55", 3).member(3)
    assert ex55.kind is SpaceKind.L1
    assert np.allclose(ex55.norms(), 1)
    spike = gallery.get("spike", 3).member(3)
    assert spike.norms().tolist() == [8] + [0] * 7


def test_distinguishing_tests_attached():
    assert len(gallery.report_config("ex34", 4).tests) == 1
    assert len(gallery.report_config("ex55", 4).duals) == 1
    assert gallery.report_config("ex32", 4).tests == []


def test_random_generators_are_seeded():
    a = gallery.random_sequence(np.random.default_rng(7), 4)
    b = gallery.random_sequence(np.random.default_rng(7), 4)
    assert all(f.equals(g) for f, g in zip(a, b))
    s = gallery.random_strong_sequence(np.random.default_rng(3), 8)
    assert s.limit.level <= 3
