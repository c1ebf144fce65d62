"""Tightness witnesses, biting decompositions and composite theorem checks.

Compact sets are constant in omega: either the truncated balls
``K_{R,d} = {x : ||x|| <= R, supp x within coordinates 0..d}`` or finite
point sets thickened by a radius ``eta`` inside the span of the points.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dyadic import DyadicSet
from .functionals import ky_fan, measure_deviation, ui_modulus
from .oscillation import DEFAULT_EPS_GRID, Status
from .seqspace import SeqVec, array_norms
from .stepfn import FunctionSequence, StepFunction, average, l1_norm

__all__ = [
    "CONSTANT_BALL",
    "FINITE_SET",
    "TightnessWitness",
    "BitingDecomposition",
    "ball_escape",
    "finite_set_escape",
    "tightness_search",
    "finite_set_witness",
    "average_escape_gap",
    "biting_decompose",
    "theorem45_check",
    "theorem48_check",
]

CONSTANT_BALL = "CONSTANT_BALL"
FINITE_SET = "FINITE_SET"

# relative slack when comparing a norm with the ball radius
_RADIUS_RTOL = 1e-12


@dataclass(frozen=True)
class TightnessWitness:
    """Constant compact set and per-member escape measures at one eps.

    ``escape[k-1]`` is ``mu{f_k not in K}``. When ``found`` is false the
    fields describe the grid point with the smallest maximal escape.
    """

    eps: float
    found: bool
    mode: str
    escape: tuple
    radius: float = None
    dim: int = None
    points: tuple = ()
    eta: float = 0.0

    @property
    def max_escape(self):
        return max(self.escape, default=Fraction(0))

    def contains(self, x, kind):
        if self.mode == CONSTANT_BALL:
            inside = x.norm(kind) <= self.radius * (1 + _RADIUS_RTOL)
            return inside and all(c <= self.dim for c in x.support)
        span = {c for p in self.points for c in p.support}
        if not set(x.support) <= span:
            return False
        return any((x - p).norm(kind) <= self.eta for p in self.points)

    def to_json(self):
        out = {"eps": self.eps, "status": "FOUND" if self.found
               else "NOT_FOUND", "mode": self.mode,
               "escape": list(self.escape),
               "max_escape": self.max_escape}
        if self.mode == CONSTANT_BALL:
            out.update(radius=self.radius, dim=self.dim)
        else:
            out.update(points=[p.to_json() for p in self.points],
                       eta=self.eta)
        return out


def _members(seq):
    return list(seq.members if isinstance(seq, FunctionSequence) else seq)


def _atom_profile(f):
    """Per-atom norm and largest supported coordinate (-1 for zero)."""
    norms = f.norms()
    if f.coords.size == 0:
        return norms, np.full(f.n_atoms, -1, dtype=np.int64)
    nz = f.data != 0.0
    last = np.where(nz.any(axis=1),
                    f.coords[f.coords.size - 1 - np.argmax(nz[:, ::-1],
                                                           axis=1)], -1)
    return norms, last


def ball_escape(f, radius, dim):
    """Exact ``mu{f not in K_{R,d}}``."""
    norms, last = _atom_profile(f)
    out = (norms > radius * (1 + _RADIUS_RTOL)) | (last > dim)
    return Fraction(int(np.count_nonzero(out)), f.n_atoms)


def finite_set_escape(f, points, eta=0.0):
    """Exact ``mu{f not in K}`` for ``K`` the ``eta``-thickened points,
    restricted to the span of the points."""
    points = [p if isinstance(p, SeqVec) else SeqVec(p) for p in points]
    span = sorted({c for p in points for c in p.support})
    outside = np.setdiff1d(f.coords, span)
    idx = np.searchsorted(f.coords, outside)
    off_span = (np.any(f.data[:, idx] != 0.0, axis=1) if idx.size
                else np.zeros(f.n_atoms, dtype=bool))
    cols = np.union1d(f.coords, span).astype(np.int64)
    vals = f.dense(cols)
    near = np.zeros(f.n_atoms, dtype=bool)
    for p in points:
        dist = array_norms(vals - p.dense(cols)[None, :], f.kind)
        near |= dist <= eta
    out = off_span | ~near
    return Fraction(int(np.count_nonzero(out)), f.n_atoms)


def _default_grids(members):
    n = len(members)
    early = members[:n - math.ceil(n / 3)] or members
    dims = sorted({0} | {int(c) for f in early for c in f.coords})
    top = max((float(f.norms().max(initial=0.0)) for f in members),
              default=0.0)
    radii = [0.0]
    j = 0
    while True:
        radii.append(2.0 ** j)
        if 2.0 ** j >= top:
            break
        j += 1
    return radii, dims


def tightness_search(seq, eps_grid=None, r_grid=None, d_grid=None):
    """Smallest constant ball ``K_{R,d}`` in the grids with escape <= eps.

    Defaults: radii ``0, 1, 2, 4, ...`` up to the largest member norm and
    dimension cutoffs at the coordinates used by members before the tail
    window. Witnesses are chosen by smallest ``d``, then smallest ``R``.
    """
    members = _members(seq)
    eps_grid = tuple(DEFAULT_EPS_GRID if eps_grid is None else eps_grid)
    radii, dims = _default_grids(members)
    radii = sorted(radii if r_grid is None else r_grid)
    dims = sorted(dims if d_grid is None else d_grid)
    table = {(d, r): tuple(ball_escape(f, r, d) for f in members)
             for d in dims for r in radii}
    out = []
    for eps in eps_grid:
        bound = Fraction(eps)
        best = None
        hit = None
        for d in dims:
            for r in radii:
                esc = table[(d, r)]
                worst = max(esc, default=Fraction(0))
                if best is None or worst < best[0]:
                    best = (worst, d, r, esc)
                if worst <= bound:
                    hit = (d, r, esc)
                    break
            if hit:
                break
        if hit:
            d, r, esc = hit
            out.append(TightnessWitness(eps, True, CONSTANT_BALL, esc,
                                        radius=r, dim=d))
        else:
            _, d, r, esc = best
            out.append(TightnessWitness(eps, False, CONSTANT_BALL, esc,
                                        radius=r, dim=d))
    return out


def finite_set_witness(seq, eps, eta=0.0):
    """Finite-set compact witness built from convergence in measure.

    Takes the first ``N`` after which ``mu{||f_k - f_0|| > eta} <= eps``
    (any nonzero deviation counts when ``eta`` is 0) and collects the values
    of ``f_0, f_1, .., f_N``. Every later member then escapes on at most
    eps; earlier ones do not escape at all.
    """
    if seq.limit is None:
        raise ValueError("finite-set witness needs a limit candidate")
    f0 = seq.limit
    members = list(seq.members)
    bound = Fraction(eps)
    dev = []
    for f in members:
        d = f - f0
        if eta > 0:
            dev.append(measure_deviation(f, f0, eta))
        else:
            dev.append(Fraction(int(np.count_nonzero(d.norms() > 0)),
                                d.n_atoms))
    n_keep = 0
    for k in range(len(members), 0, -1):
        if dev[k - 1] > bound:
            n_keep = k
            break
    points = {}
    for f in [f0] + members[:n_keep]:
        for i in range(f.n_atoms):
            v = f.value(i)
            points.setdefault(v, None)
    pts = tuple(points)
    esc = tuple(finite_set_escape(f, pts, eta) for f in members)
    return TightnessWitness(eps, max(esc, default=Fraction(0)) <= bound,
                            FINITE_SET, esc, points=pts, eta=eta)


def average_escape_gap(f, b, witness):
    """``||m_B f - m_B(f 1_{f in K})||`` and the bound it must respect.

    For a ball witness the escaping mass splits into atoms with norm above
    ``R`` (at most the UI modulus at ``R``) and atoms with norm at most ``R``
    (at most ``R`` times the escape measure). Returns ``(gap, bound)``.
    """
    if witness.mode != CONSTANT_BALL:
        raise ValueError("gap bound needs a constant-ball witness")
    level = max(f.level, b.level)
    g = f.refine(level)
    norms, last = _atom_profile(g)
    r = witness.radius
    inside = (norms <= r * (1 + _RADIUS_RTOL)) & (last <= witness.dim)
    kept = StepFunction(level, g.data * inside[:, None], g.coords, g.kind)
    gap = (average(g, b) - average(kept, b)).norm(f.kind)
    escape = float(ball_escape(f, r, witness.dim))
    mu = float(b.measure())
    tail = ui_modulus([f], [r]).values[0] if r > 0 else l1_norm(f)
    return gap, (r * escape + tail) / mu


@dataclass
class BitingDecomposition:
    """Increasing sets ``A_n`` and the split ``f_n = f_n 1_{A_n} + rest``."""

    indices: list
    thresholds: list
    sets: list
    bitten: list
    removed: list
    removed_measure: list
    bitten_l1: list
    removed_l1: list
    removed_ky_fan: list
    bitten_ui: object
    schedule: str = "linear"
    notes: list = field(default_factory=list)

    def is_increasing(self):
        return all(a.issubset(b) for a, b in zip(self.sets, self.sets[1:]))

    def to_json(self):
        return {
            "indices": self.indices,
            "schedule": self.schedule,
            "thresholds": self.thresholds,
            "sets": [s.to_text() for s in self.sets],
            "removed_measure": self.removed_measure,
            "bitten_l1": self.bitten_l1,
            "removed_l1": self.removed_l1,
            "removed_ky_fan": self.removed_ky_fan,
            "bitten_ui": self.bitten_ui.to_json(),
            "increasing": self.is_increasing(),
            "notes": self.notes,
        }


def _schedule(name, n, scale):
    if callable(name):
        return [float(name(k)) for k in range(1, n + 1)]
    if name == "linear":
        return [k * scale for k in range(1, n + 1)]
    if name == "quadratic":
        return [k * k * scale for k in range(1, n + 1)]
    raise ValueError(f"unknown schedule {name!r}")


def biting_decompose(seq, schedule="linear", target=1.0, tol=None):
    """Heuristic biting decomposition of a finite prefix.

    Truncation levels are ``c_n = n M / target`` (``"linear"``) or
    ``n^2 M / target`` (``"quadratic"``) with ``M`` the largest L1 norm, or
    a callable ``n -> c_n``. The sets are
    ``A_n = intersection over j >= n of [||f_j|| <= c_j]``, which makes them
    increasing and keeps every bitten part bounded by its own level.
    Members whose pointwise norm stays below ``c_1`` are never bitten, so a
    sequence with ``||f_n(t)|| <= max_j ||f_j||_1`` gets ``A_n = Omega``.
    """
    members = _members(seq)
    n = len(members)
    if n == 0:
        raise ValueError("empty sequence")
    level = max(f.level for f in members)
    big = max(l1_norm(f) for f in members)
    scale = big / target if big > 0 else 1.0
    levels = _schedule(schedule, n, scale)
    keep = np.ones(1 << level, dtype=bool)
    sets = [None] * n
    for j in range(n - 1, -1, -1):
        norms = members[j].refine(level).norms()
        keep &= norms <= levels[j] * (1 + _RADIUS_RTOL)
        sets[j] = keep.copy()
    sets = [DyadicSet.from_indicator(level, s) for s in sets]
    bitten, removed = [], []
    for f, s in zip(members, sets):
        g = f.refine(level)
        ind = s.indicator(level)[:, None]
        bitten.append(StepFunction(level, g.data * ind, g.coords, g.kind))
        removed.append(StepFunction(level, g.data * ~ind, g.coords, g.kind))
    notes = []
    if tol is not None:
        notes.append(f"tolerance {tol:g} used by composite checks")
    thresholds = [2.0 ** j for j in range(n + 1)]
    return BitingDecomposition(
        indices=list(range(1, n + 1)),
        thresholds=levels,
        sets=sets,
        bitten=bitten,
        removed=removed,
        removed_measure=[1 - s.measure() for s in sets],
        bitten_l1=[l1_norm(b) for b in bitten],
        removed_l1=[l1_norm(r) for r in removed],
        removed_ky_fan=[ky_fan(r) for r in removed],
        bitten_ui=ui_modulus(bitten, thresholds),
        schedule=schedule if isinstance(schedule, str) else "custom",
        notes=notes,
    )


def _verdict_flag(verdict):
    if verdict is None:
        return None
    if verdict.status is Status.SATISFIED_AT_RESOLUTION:
        return True
    if verdict.status is Status.FALSIFIED:
        return False
    return None


def _agreement(premises, conclusion):
    if any(v is None for v in premises.values()) or conclusion is None:
        return "undetermined"
    if all(premises.values()) == conclusion:
        return "agree"
    return "disagree"


def theorem45_check(seq, *, weak=None, ui=None, bocce=None, tight=None,
                    strong=None, tol=None):
    """Compare (weak convergence, sequential Bocce, tightness) with strong
    convergence on the prefix.

    Missing pieces are computed with default settings. Weak convergence
    counts only together with uniform integrability. The result reports
    agreement or disagreement between the two sides; it proves nothing.
    """
    from .convergence import lattice_report, ReportConfig
    from .oscillation import sequential_bocce_check

    if any(v is None for v in (weak, ui, strong)):
        rep = lattice_report(seq, ReportConfig(tol=tol, criteria=False,
                                               tightness=False, biting=False))
        weak = rep.flags["weak_surrogate"] if weak is None else weak
        ui = rep.flags["uniformly_integrable"] if ui is None else ui
        strong = rep.flags["strong"] if strong is None else strong
    if bocce is None:
        bocce = sequential_bocce_check(seq)
    if tight is None:
        tight = tightness_search(seq)
    premises = {"weak": bool(weak) and bool(ui),
                "sequential_bocce": _verdict_flag(bocce),
                "tight": all(w.found for w in tight)}
    notes = []
    if not ui:
        notes.append("not uniformly integrable: weak convergence premise "
                     "fails, no claim")
    return {"premises": premises, "strong": bool(strong),
            "agreement": _agreement(premises, bool(strong)), "notes": notes}


def theorem48_check(seq, *, bocce=None, tight=None, biting=None, tol=None):
    """Compare (bounded, tight, sequential Bocce) with the biting
    conclusions: ``mu(A_n) -> 1``, strong Cauchy behaviour of the bitten
    parts and vanishing in measure of the removed parts, all read on the
    tail window."""
    from .oscillation import sequential_bocce_check

    members = _members(seq)
    n = len(members)
    tol = 1.0 / math.sqrt(n) if tol is None else tol
    if bocce is None:
        bocce = sequential_bocce_check(seq)
    if tight is None:
        tight = tightness_search(seq)
    if biting is None:
        biting = biting_decompose(seq)
    tail = list(range(n - math.ceil(n / 3), n))
    premises = {"bounded": True,
                "tight": all(w.found for w in tight),
                "sequential_bocce": _verdict_flag(bocce)}
    spread = max((l1_norm(biting.bitten[i] - biting.bitten[j])
                  for i in tail for j in tail), default=0.0)
    conclusions = {
        "exhausting": float(max(biting.removed_measure[i] for i in tail))
        < tol,
        "bitten_cauchy": spread < tol,
        "removed_in_measure": max(biting.removed_ky_fan[i] for i in tail)
        < math.sqrt(tol),
    }
    conclusion = all(conclusions.values())
    if all(v is True for v in premises.values()):
        agreement = "agree" if conclusion else "disagree"
    elif any(v is None for v in premises.values()):
        agreement = "undetermined"
    else:
        agreement = "premises fail, no claim"
    return {"premises": premises, "conclusions": conclusions,
            "agreement": agreement, "bitten_tail_spread": spread}
