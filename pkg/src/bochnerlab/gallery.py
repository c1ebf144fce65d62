"""Named sequences with known convergence behaviour.

Coordinates are 1-based (``e_1, e_2, ...``) and every sequence carries the
limit candidate ``0``. Use :func:`get` with one of :func:`names`.

=========== ===== =============================================
name        space member ``f_k``
=========== ===== =============================================
ex32        l2    constant ``e_k``
ex34        l2    ``2^k e_k`` on ``[0, 2^-k)``
ex52        l2    ``r_k e_k``
ex53        l2    ``e_{2^k + i}`` on the i-th atom of level k
ex53-scaled l2    ``2^{k/4}`` times the ex53 member
ex55        l1    ``(1/k) sum_{i<=k} r_i e_i``
spike       real  ``2^k`` on ``[0, 2^-k)``
rademacher  real  ``r_k``
strong      l2    ``(1/k) e_1`` on ``[0, 1/2)``
zero        l2    ``0``
=========== ===== =============================================

Here ``r_k`` is the k-th Rademacher function, ``+1`` on the first half and
``-1`` on the second half of each atom of level ``k - 1``.
"""

import numpy as np

from .convergence import ReportConfig, TestG
from .seqspace import SpaceKind
from .stepfn import FunctionSequence, StepFunction

__all__ = [
    "names",
    "get",
    "rademacher",
    "gen_ex32",
    "gen_ex34",
    "gen_ex52",
    "gen_ex53",
    "gen_ex53_scaled",
    "gen_ex55",
    "gen_spike",
    "gen_rademacher",
    "gen_rademacher_sequence",
    "gen_strong",
    "gen_zero",
    "ex34_test",
    "ex55_dual",
    "report_config",
    "random_step_function",
    "random_sequence",
    "random_strong_sequence",
]


def rademacher(i, level=None):
    """Atom values of ``r_i`` at ``level`` (default ``i``)."""
    if i < 1:
        raise ValueError("Rademacher index starts at 1")
    level = i if level is None else level
    if level < i:
        raise ValueError(f"r_{i} is not constant on level-{level} atoms")
    atoms = np.arange(1 << level)
    return 1.0 - 2.0 * ((atoms >> (level - i)) & 1)


def _seq(members, kind, label):
    return FunctionSequence(members, StepFunction.zero(kind), label)


def gen_ex32(K):
    kind = SpaceKind.L2
    return _seq([StepFunction(0, [[1.0]], [k], kind) for k in range(1, K + 1)],
                kind, "ex32")


def gen_ex34(K):
    kind = SpaceKind.L2
    members = []
    for k in range(1, K + 1):
        col = np.zeros(1 << k)
        col[0] = 2.0 ** k
        members.append(StepFunction(k, col[:, None], [k], kind))
    return _seq(members, kind, "ex34")


def gen_ex52(K):
    kind = SpaceKind.L2
    return _seq([StepFunction(k, rademacher(k)[:, None], [k], kind)
                 for k in range(1, K + 1)], kind, "ex52")


def _ex53_member(k, scale, kind):
    n = 1 << k
    coords = np.arange(n + 1, 2 * n + 1)
    return StepFunction(k, scale * np.eye(n), coords, kind)


def gen_ex53(K):
    kind = SpaceKind.L2
    return _seq([_ex53_member(k, 1.0, kind) for k in range(1, K + 1)],
                kind, "ex53")


def gen_ex53_scaled(K):
    kind = SpaceKind.L2
    return _seq([_ex53_member(k, 2.0 ** (k / 4), kind)
                 for k in range(1, K + 1)], kind, "ex53-scaled")


def gen_ex55(K):
    kind = SpaceKind.L1
    members = []
    for k in range(1, K + 1):
        data = np.column_stack([rademacher(i, k) for i in range(1, k + 1)])
        members.append(StepFunction(k, data / k, np.arange(1, k + 1), kind))
    return _seq(members, kind, "ex55")


def gen_spike(K):
    kind = SpaceKind.L2
    members = []
    for k in range(1, K + 1):
        vals = np.zeros(1 << k)
        vals[0] = 2.0 ** k
        members.append(StepFunction.real(k, vals, kind))
    return _seq(members, kind, "spike")


def gen_rademacher(i, kind=SpaceKind.L2):
    """``r_i`` as a real step function at level ``i``."""
    return StepFunction.real(i, rademacher(i), kind)


def gen_rademacher_sequence(K):
    kind = SpaceKind.L2
    return _seq([gen_rademacher(k, kind) for k in range(1, K + 1)], kind,
                "rademacher")


def gen_strong(K):
    kind = SpaceKind.L2
    return _seq([StepFunction(1, [[1.0 / k], [0.0]], [1], kind)
                 for k in range(1, K + 1)], kind, "strong")


def gen_zero(K):
    kind = SpaceKind.L2
    return _seq([StepFunction.zero(kind) for _ in range(K)], kind, "zero")


def ex34_test(K):
    """Linear test ``<x, b(omega)>`` with ``b = sum_j e_j 1_{[2^-(j+1), 2^-j)}``.

    Pairs with the ex34 member ``k`` to ``2^k mu([0, 2^-k) cap
    [2^-(k+1), 2^-k)) = 1/2`` for every k.
    """
    level = K + 1
    data = np.zeros((1 << level, K))
    for j in range(1, K + 1):
        # [2^-(j+1), 2^-j) is the second atom of level j + 1
        width = 1 << (level - j - 1)
        data[width:2 * width, j - 1] = 1.0
    b = StepFunction(level, data, np.arange(1, K + 1), SpaceKind.L2)
    return TestG(linear_terms=[b], label="ex34")


def ex55_dual(K):
    """Dual test ``b(omega) = (1_{[r_i = 1]}(omega))_{i <= K}`` in l-infinity.

    Against the ex55 member ``k`` it integrates to ``1/2`` for every k.
    """
    data = np.column_stack([(rademacher(i, K) > 0).astype(float)
                            for i in range(1, K + 1)])
    return StepFunction(K, data, np.arange(1, K + 1), SpaceKind.LINF)


_GENERATORS = {
    "ex32": gen_ex32,
    "ex34": gen_ex34,
    "ex52": gen_ex52,
    "ex53": gen_ex53,
    "ex53-scaled": gen_ex53_scaled,
    "ex55": gen_ex55,
    "spike": gen_spike,
    "rademacher": gen_rademacher_sequence,
    "strong": gen_strong,
    "zero": gen_zero,
}


def names():
    return list(_GENERATORS)


def get(name, K):
    """Prefix ``f_1 .. f_K`` of the named sequence."""
    try:
        gen = _GENERATORS[name]
    except KeyError:
        raise KeyError(f"unknown gallery sequence {name!r}; "
                       f"known: {', '.join(_GENERATORS)}") from None
    if K < 1:
        raise ValueError("prefix length must be positive")
    return gen(K)


def report_config(name, K, **overrides):
    """Report settings with the sequence's distinguishing test attached."""
    cfg = ReportConfig(**overrides)
    if name == "ex34":
        cfg.tests = list(cfg.tests) + [ex34_test(K)]
    elif name == "ex55":
        cfg.duals = list(cfg.duals) + [ex55_dual(K)]
    return cfg


def random_step_function(rng, level, ncoords=3, kind=SpaceKind.L2,
                         scale=1.0, density=0.7):
    """Step function with random Gaussian values on coordinates 1..ncoords.

    Each entry is zero with probability ``1 - density``.
    """
    data = rng.normal(size=(1 << level, ncoords)) * scale
    data *= rng.random(size=data.shape) < density
    return StepFunction(level, data, np.arange(1, ncoords + 1), kind)


def random_sequence(rng, K, max_level=4, ncoords=3, kind=SpaceKind.L2):
    """Random prefix with random member levels and a random limit."""
    members = [random_step_function(rng, int(rng.integers(0, max_level + 1)),
                                    ncoords, kind,
                                    scale=float(rng.choice([0.1, 1.0, 4.0])))
               for _ in range(K)]
    limit = random_step_function(rng, int(rng.integers(0, max_level + 1)),
                                 ncoords, kind)
    if rng.random() < 0.3:
        # converging variant: members collapse onto the limit
        members = [limit + m * (2.0 ** -k)
                   for k, m in enumerate(members, start=1)]
    return FunctionSequence(members, limit, "random")


def random_strong_sequence(rng, K, limit_level=3, noise_level=6, ncoords=3,
                           kind=SpaceKind.L2):
    """``f_k = f_0 + h_k`` with ``sup ||h_k|| <= 2^-(k+1)``.

    ``f_0`` lives at ``limit_level``, so it is constant on the atoms of
    that level; the perturbations are arbitrary at ``noise_level``.
    """
    f0 = random_step_function(rng, limit_level, ncoords, kind, density=1.0)
    members = []
    for k in range(1, K + 1):
        h = random_step_function(rng, noise_level, ncoords, kind,
                                 density=1.0)
        peak = float(h.norms().max())
        members.append(f0 + h * (2.0 ** -(k + 1) / peak))
    return FunctionSequence(members, f0, "random-strong")
