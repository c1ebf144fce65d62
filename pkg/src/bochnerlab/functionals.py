"""Norms and integrability moduli of step functions and finite families.

The Pettis norm of a step function ``f = sum_i v_i 1_{B_i}`` is

    sup_{||x*|| <= 1} sum_i mu(B_i) |x*(v_i)|
        = max_{s in {-1, 1}^m} || sum_i s_i mu(B_i) v_i ||,

because ``|a| = max(a, -a)`` and the supremum of a linear functional over
the dual ball is the primal norm. :func:`pettis_norm_exact` enumerates sign
patterns after two exact reductions: parallel values are merged (only
``|x*(v)|`` matters), and blocks are split into components with disjoint
coordinate support, which can be maximized independently. For l1 targets
the enumeration may instead run over the vertices of the l-infinity dual
ball, and for l-infinity targets the dual ball's vertices are the signed
unit vectors, so no enumeration is needed at all.
"""

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import _backend, config
from .seqspace import SeqVec, SpaceKind, array_norms
from .stepfn import FunctionSequence, l1_norm, scalarize

__all__ = [
    "PettisMethod",
    "PettisResult",
    "PettisCapError",
    "ModulusCurve",
    "value_blocks",
    "pettis_norm_exact",
    "pettis_norm_bounds",
    "pettis_norm_interval",
    "functional_integral",
    "ui_modulus",
    "equi_modulus",
    "pettis_ui_modulus",
    "measure_deviation",
    "ky_fan",
]

# relative slack when picking the first near-maximal sign pattern
_TIE_RTOL = 1e-12


class PettisCapError(ValueError):
    """Sign-pattern enumeration would exceed the configured block cap."""


class PettisMethod(str, enum.Enum):
    EXACT = "EXACT"
    BOUNDS = "BOUNDS"


@dataclass(frozen=True)
class PettisResult:
    """Value of the Pettis norm with the data that certifies it.

    For ``EXACT`` results ``blocks`` lists the merged value blocks as
    ``(direction, weight)`` pairs and ``witness`` the sign of each block;
    :meth:`recompute` rebuilds ``value`` from them. ``BOUNDS`` results carry
    ``lower <= value <= upper`` and no witness.
    """

    value: float
    method: PettisMethod
    lower: float
    upper: float
    kind: SpaceKind
    witness: tuple = None
    blocks: tuple = ()

    def recompute(self):
        if self.witness is None:
            raise ValueError("bounds-only result has no witness")
        total = SeqVec()
        for s, (u, weight) in zip(self.witness, self.blocks):
            total = total + u * (s * weight)
        return total.norm(self.kind)

    def to_json(self):
        out = {
            "value": self.value,
            "method": self.method.value,
            "lower": self.lower,
            "upper": self.upper,
        }
        if self.witness is not None:
            out["witness"] = list(self.witness)
            out["blocks"] = [{"direction": u.to_json(), "weight": w}
                             for u, w in self.blocks]
        return out


def value_blocks(f):
    """Merge the atoms of ``f`` into distinct value directions.

    Returns ``(coords, directions, weights)`` where each direction row is
    scaled so its first largest-magnitude entry is ``+1`` and ``weights``
    holds ``sum mu(atom) |c|`` over atoms whose value is ``c`` times that
    direction. Zero atoms are dropped. Rows are in first-seen atom order.
    """
    data = f.data
    coords = f.coords
    if coords.size == 0:
        return coords, np.zeros((0, 0)), np.zeros(0)
    live = np.flatnonzero(np.any(data != 0.0, axis=1))
    if live.size == 0:
        return coords, np.zeros((0, coords.size)), np.zeros(0)
    rows = data[live]
    pivot = np.argmax(np.abs(rows), axis=1)
    scale = rows[np.arange(rows.shape[0]), pivot]
    directions = rows / scale[:, None]
    keys = np.round(directions, 12) + 0.0
    _, first, inverse = np.unique(keys, axis=0, return_index=True,
                                  return_inverse=True)
    inverse = inverse.reshape(-1)
    weights = np.bincount(inverse, weights=np.abs(scale) * 2.0 ** -f.level)
    order = np.argsort(first, kind="stable")
    return coords, directions[first[order]], weights[order]


def _components(directions):
    # blocks and coordinates as one bipartite graph; blocks sharing a
    # coordinate end up in the same component
    m, d = directions.shape
    rows, cols = np.nonzero(directions)
    graph = csr_matrix((np.ones(rows.size, dtype=np.int8), (rows, m + cols)),
                       shape=(m + d, m + d))
    _, labels = connected_components(graph, directed=False)
    block_labels = labels[:m]
    _, compact = np.unique(block_labels, return_inverse=True)
    return int(compact.max()) + 1, compact.reshape(-1)


def _first_max(values):
    best = float(np.max(values))
    slack = _TIE_RTOL * max(1.0, abs(best))
    return int(np.flatnonzero(values >= best - slack)[0])


def _pattern_signs(p, m):
    signs = np.ones(m)
    for i in range(1, m):
        if (p >> (m - 1 - i)) & 1:
            signs[i] = -1.0
    return signs


def _component_signs(u, w, kind, cap):
    """Maximizing block signs for one coupled component."""
    m, d = u.shape
    if m == 1:
        return np.ones(1)
    if kind is SpaceKind.LINF:
        # dual ball vertices are +-e_j: value is max_j sum_i w_i |u_ij|
        scores = np.abs(u).T @ w
        j = _first_max(scores)
        signs = np.where(u[:, j] < 0, -1.0, 1.0)
    elif kind is SpaceKind.L1 and d < m:
        if d > cap:
            raise PettisCapError(
                f"component needs 2^{d - 1} dual vertices (cap {cap}); "
                "use pettis_norm_bounds")
        values = _backend.dual_vertex_values(u, w)
        p = _first_max(values)
        y = np.concatenate([[1.0], _pattern_signs(p, d)[1:]]) if d > 1 \
            else np.ones(1)
        signs = np.where(u @ y < 0, -1.0, 1.0)
    else:
        if m > cap:
            raise PettisCapError(
                f"component has {m} value blocks (cap {cap}); "
                "use pettis_norm_bounds")
        values = _backend.sign_pattern_norms(w[:, None] * u, kind)
        signs = _pattern_signs(_first_max(values), m)
    if signs[0] < 0:
        signs = -signs
    return signs


def pettis_norm_exact(f, cap=None):
    """Exact Pettis norm of a step function.

    Raises :class:`PettisCapError` when a coupled component needs more than
    ``2**(cap - 1)`` sign patterns (``cap`` defaults to the configured block
    cap).
    """
    cap = config.block_cap() if cap is None else cap
    coords, directions, weights = value_blocks(f)
    m = weights.size
    if m == 0:
        return PettisResult(0.0, PettisMethod.EXACT, 0.0, 0.0, f.kind,
                            witness=(), blocks=())
    n_comp, labels = _components(directions)
    signs = np.ones(m)
    for c in range(n_comp):
        rows = np.flatnonzero(labels == c)
        cols = np.flatnonzero(np.any(directions[rows] != 0.0, axis=0))
        u = directions[np.ix_(rows, cols)]
        signs[rows] = _component_signs(u, weights[rows], f.kind, cap)
    total = (signs * weights) @ directions
    value = float(array_norms(total, f.kind))
    blocks = tuple((SeqVec.from_dense(coords, row), float(w))
                   for row, w in zip(directions, weights))
    return PettisResult(value, PettisMethod.EXACT, value, value, f.kind,
                        witness=tuple(int(s) for s in signs), blocks=blocks)


def functional_integral(f, xstar):
    """``int |x*(f)| dmu``."""
    return l1_norm(scalarize(f, xstar))


def pettis_norm_bounds(f, functionals):
    """Bracket the Pettis norm with caller-supplied test functionals.

    Functionals outside the dual unit ball are rescaled into it. The lower
    bound is the best ``int |x*(f)|`` over the family; the upper bound is
    the Bochner norm ``int ||f||``.
    """
    upper = l1_norm(f)
    lower = 0.0
    for xstar in functionals:
        lower = max(lower, functional_integral(f, xstar.normalized()))
    lower = min(lower, upper)
    return PettisResult(lower, PettisMethod.BOUNDS, lower, upper, f.kind)


def _spectral_upper(f):
    """Cauchy-Schwarz bound ``sqrt(mu(supp f)) * sigma_max`` (l2 dual ball)."""
    n = f.norms()
    live = n > 0
    if not np.any(live):
        return 0.0
    mu = 2.0 ** -f.level
    rows = f.data[live] * math.sqrt(mu)
    sigma = float(np.linalg.norm(rows, 2))
    bound = math.sqrt(mu * int(live.sum())) * sigma
    if f.kind is SpaceKind.L1:
        # the l-infinity dual ball sits inside sqrt(D) times the l2 ball
        bound *= math.sqrt(f.coords.size)
    return bound


def _ascent_lower(f, starts=4, iters=50):
    """Value of concrete dual-ball functionals found by sign ascent."""
    _, directions, weights = value_blocks(f)
    if weights.size == 0:
        return 0.0
    best = 0.0
    rng = np.random.default_rng(0)
    for t in range(starts):
        signs = np.ones(weights.size) if t == 0 else \
            rng.choice([-1.0, 1.0], size=weights.size)
        for _ in range(iters):
            total = (signs * weights) @ directions
            if f.kind is SpaceKind.L2:
                nrm = np.linalg.norm(total)
                y = total / nrm if nrm > 0 else total
            elif f.kind is SpaceKind.L1:
                y = np.where(total < 0, -1.0, 1.0)
            else:
                y = np.zeros_like(total)
                j = int(np.argmax(np.abs(total)))
                y[j] = 1.0 if total[j] >= 0 else -1.0
            proj = directions @ y
            value = float(np.abs(proj) @ weights)
            best = max(best, value)
            new = np.where(proj < 0, -1.0, 1.0)
            if np.array_equal(new, signs):
                break
            signs = new
    return best


def pettis_norm_interval(f, cap=None):
    """Exact result when enumeration fits the cap, otherwise rigorous bounds.

    The fallback lower bound is attained by explicit dual-ball functionals
    (sign ascent); the upper bound is the smaller of the Bochner norm and a
    Cauchy-Schwarz spectral bound.
    """
    try:
        return pettis_norm_exact(f, cap)
    except PettisCapError:
        pass
    upper = min(l1_norm(f), _spectral_upper(f))
    lower = min(_ascent_lower(f), upper)
    return PettisResult(lower, PettisMethod.BOUNDS, lower, upper, f.kind)


@dataclass(frozen=True)
class ModulusCurve:
    """Sampled modulus ``threshold -> value``.

    ``direction`` is ``"nonincreasing"`` for tail-mass moduli in the
    truncation level and ``"nondecreasing"`` for set-size moduli.
    """

    name: str
    thresholds: tuple
    values: tuple
    direction: str = "nonincreasing"
    notes: str = field(default="", compare=False)

    def is_monotone(self, atol=1e-12):
        v = np.asarray(self.values)
        order = np.argsort(self.thresholds, kind="stable")
        steps = np.diff(v[order])
        if self.direction == "nonincreasing":
            return bool(np.all(steps <= atol))
        return bool(np.all(steps >= -atol))

    def at(self, threshold):
        return self.values[list(self.thresholds).index(threshold)]

    def csv_rows(self):
        return [(t, v) for t, v in zip(self.thresholds, self.values)]

    def to_json(self):
        out = {"name": self.name, "direction": self.direction,
               "thresholds": list(self.thresholds),
               "values": list(self.values)}
        if self.notes:
            out["notes"] = self.notes
        return out


def _members(seq):
    if isinstance(seq, FunctionSequence):
        return list(seq.members)
    return list(seq)


def _tail_mass(norms, mu, c):
    return float(norms[norms >= c].sum() * mu)


def ui_modulus(seq, thresholds):
    """``c -> sup_f int_[||f|| >= c] ||f|| dmu`` over the members."""
    members = _members(seq)
    data = [(f.norms(), 2.0 ** -f.level) for f in members]
    values = tuple(max((_tail_mass(n, mu, c) for n, mu in data), default=0.0)
                   for c in thresholds)
    return ModulusCurve("ui", tuple(float(c) for c in thresholds), values,
                        "nonincreasing")


def _worst_set_mass(norms, mu, delta):
    ordered = np.sort(norms)[::-1]
    if delta >= mu * ordered.size:
        return float(ordered.sum() * mu)
    full = int(delta // mu)
    mass = ordered[:full].sum() * mu
    rest = delta - full * mu
    if rest > 0 and full < ordered.size:
        mass += rest * ordered[full]
    return float(mass)


def equi_modulus(seq, deltas):
    """``delta -> sup_f sup_{mu(A) <= delta} int_A ||f|| dmu``.

    The inner supremum over measurable sets is attained greedily: take the
    atoms with the largest norm first and a fraction of the next atom.
    """
    members = _members(seq)
    data = [(f.norms(), 2.0 ** -f.level) for f in members]
    values = tuple(max((_worst_set_mass(n, mu, float(d)) for n, mu in data),
                       default=0.0) for d in deltas)
    return ModulusCurve("equi", tuple(float(d) for d in deltas), values,
                        "nondecreasing")


def pettis_ui_modulus(seq, functionals, thresholds):
    """UI modulus of ``{x*(f)}`` over members and the given functionals.

    Only the supplied functionals (rescaled into the dual ball) are used,
    so this is a lower bound for the supremum over the whole dual ball.
    """
    scalars = [scalarize(f, x.normalized())
               for f in _members(seq) for x in functionals]
    curve = ui_modulus(scalars, thresholds)
    return ModulusCurve("pettis_ui", curve.thresholds, curve.values,
                        "nonincreasing",
                        notes="lower bound: supremum over supplied functionals")


def measure_deviation(f, g, eps):
    """Exact ``mu{omega : ||f(omega) - g(omega)|| > eps}``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = f - g
    return Fraction(int(np.count_nonzero(d.norms() > eps)), 1 << d.level)


def ky_fan(f, g=None):
    """Ky Fan distance ``inf{eps : mu(||f - g|| > eps) <= eps}``.

    Metrizes convergence in measure; never exceeds ``sqrt(int ||f - g||)``.
    """
    d = f if g is None else f - g
    return _ky_fan_from_norms(d.norms(), 2.0 ** -d.level)


def _ky_fan_from_norms(norms, mu):
    vals, counts = np.unique(norms[norms > 0], return_counts=True)
    if vals.size == 0:
        return 0.0
    vals, counts = vals[::-1], counts[::-1]
    # for eps in [vals[j+1], vals[j]) the exceedance measure is tail[j]
    tail = np.cumsum(counts) * mu
    below = np.append(vals[1:], 0.0)
    best = float(vals[0])
    for j in range(vals.size):
        cand = max(below[j], tail[j])
        if cand < vals[j]:
            best = min(best, float(cand))
    return best
