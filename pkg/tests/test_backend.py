import os
import subprocess
import sys

import numpy as np
import pytest

from bochnerlab import _backend, _pykernels

ck = pytest.importorskip("bochnerlab._ckernels")


@pytest.mark.parametrize("kind", [0, 1, 2])
@pytest.mark.parametrize("m", [1, 2, 5, 9])
def test_sign_pattern_parity(kind, m):
    w = np.random.default_rng(m).normal(size=(m, 4))
    np.testing.assert_allclose(ck.sign_pattern_norms(w, kind),
                               _pykernels.sign_pattern_norms(w, kind),
                               rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("d", [1, 3, 8])
def test_dual_vertex_parity(d):
    rng = np.random.default_rng(d)
    v, mu = rng.normal(size=(6, d)), rng.random(6)
    np.testing.assert_allclose(ck.dual_vertex_values(v, mu),
                               _pykernels.dual_vertex_values(v, mu),
                               rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("kind", [0, 1, 2])
def test_bocce_masks_parity(kind):
    rng = np.random.default_rng(kind)
    x = rng.normal(size=(16, 3))
    w = np.full(16, 1 / 16)
    cell = np.where(rng.random(16) < 0.2, -1, np.arange(16) % 6)
    masks = np.arange(64, dtype=np.uint64)
    np.testing.assert_allclose(ck.bocce_osc_masks(x, w, cell, masks, kind),
                               _pykernels.bocce_osc_masks(x, w, cell, masks,
                                                          kind),
                               rtol=1e-12, atol=1e-12)


def test_empty_inputs():
    assert _pykernels.sign_pattern_norms(np.zeros((0, 2)), 1).tolist() == [0]
    assert ck.sign_pattern_norms(np.zeros((0, 2)), 1).tolist() == [0]
    assert _pykernels.dual_vertex_values(np.zeros((2, 0)), np.ones(2)) \
        .tolist() == [0]


def test_compiled_backend_selected():
    assert _backend.BACKEND == "cython"


def test_env_forces_python_fallback():
    env = dict(os.environ, BOCHNERLAB_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "from bochnerlab import BACKEND, gallery, pettis_norm_exact;"
         "print(BACKEND, pettis_norm_exact(gallery.get('ex53', 4)"
         ".member(4)).value)"],
        env=env, capture_output=True, text=True, check=True)
    name, value = out.stdout.split()
    assert name == "python" and float(value) == pytest.approx(0.25)
