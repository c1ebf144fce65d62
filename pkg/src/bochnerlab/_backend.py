"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
NumPy fallback. Setting ``BOCHNERLAB_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
kernels = _pykernels

if os.environ.get("BOCHNERLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        kernels = _ckernels
        BACKEND = "cython"

KIND_CODE = {"l1": 0, "l2": 1, "linf": 2}


def kind_code(kind):
    return KIND_CODE[kind.value]


def sign_pattern_norms(weighted, kind):
    return kernels.sign_pattern_norms(weighted, kind_code(kind))


def dual_vertex_values(values, weights):
    return kernels.dual_vertex_values(values, weights)


def bocce_osc_masks(x, w, cell, masks, kind):
    return kernels.bocce_osc_masks(x, w, cell, masks, kind_code(kind))
