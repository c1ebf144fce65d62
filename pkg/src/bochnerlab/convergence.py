"""Convergence modes of a sequence of step functions and their lattice.

Every mode is measured on the deviations ``d_k = f_k - f_0`` (``f_0 = 0``
when no limit is given). A mode is flagged as converging when its metric
stays below ``tol`` on the tail window, the last ``ceil(K/3)`` members.
In-measure modes use the Ky Fan metric and the threshold ``sqrt(tol)``,
which is what an L1 bound of ``tol`` implies.

The flags are measured independently and then checked against the known
implications between the modes; a violation raises
:class:`LatticeViolation`, because it can only come from a bug or from
numerical noise at the threshold.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dyadic import DyadicSet
from .functionals import (PettisCapError, equi_modulus, ky_fan,
                          pettis_norm_interval, pettis_ui_modulus, ui_modulus)
from .oscillation import (DEFAULT_EPS_GRID, b0_check, b1_check, b2_check,
                          default_test_sets, sequential_bocce_check,
                          sequential_pettis_bocce_check)
from .seqspace import Functional, KindMismatchError, SeqVec
from .stepfn import FunctionSequence, StepFunction, integral, l1_norm, scalarize

__all__ = [
    "TestG",
    "ReportConfig",
    "LatticeReport",
    "LatticeViolation",
    "MissingLimitError",
    "IMPLICATIONS",
    "pair_integral",
    "strong_trend",
    "pettis_trend",
    "limited_trend",
    "scalar_modes",
    "weak_surrogate_trend",
    "delta_cauchy",
    "default_functionals",
    "tail_window",
    "lattice_report",
]


class LatticeViolation(AssertionError):
    """Convergence flags contradict an implication between modes."""


class MissingLimitError(ValueError):
    """A trend that needs a limit candidate was asked for without one."""


# (stronger, weaker): the left flag forces the right one
IMPLICATIONS = (
    ("strong", "pettis"),
    ("strong", "limited"),
    ("strong", "in_measure"),
    ("strong", "weak_surrogate"),
    ("limited", "scalarly_strong"),
    ("limited", "weak_surrogate"),
    ("pettis", "scalarly_strong"),
    ("pettis", "delta_cauchy"),
    ("scalarly_strong", "scalarly_in_measure"),
    ("scalarly_strong", "scalarly_weak"),
    ("in_measure", "scalarly_in_measure"),
    ("weak_surrogate", "sigma_linf_surrogate"),
    ("sigma_linf_surrogate", "weak_surrogate"),
)


def _unit(xstar):
    n = xstar.dual_norm()
    return xstar if n == 0 else Functional(xstar.coeffs / n, xstar.kind)


def pair_integral(h, b):
    """``int <h(omega), b(omega)> dmu`` for ``b`` valued in the dual of h."""
    if b.kind is not h.kind.dual:
        raise KindMismatchError(
            f"{b.kind.value}-valued function cannot pair with "
            f"{h.kind.value}-valued one")
    level = max(h.level, b.level)
    common, ih, ib = np.intersect1d(h.coords, b.coords, return_indices=True)
    if common.size == 0:
        return 0.0
    hd = h.refine(level).data[:, ih]
    bd = b.refine(level).data[:, ib]
    return float(np.sum(hd * bd) * 2.0 ** -level)


@dataclass(frozen=True)
class TestG:
    """Integrand ``g(omega, x)`` for the limited-convergence surrogate.

    ``g = sum_i |x*_i(x)| 1_{A_i}(omega) + sum_j <x, b_j(omega)>
    + sum_l ||x|| 1_{C_l}(omega)``. ``abs_terms`` holds ``(x*, A)`` pairs,
    ``linear_terms`` dual-valued step functions ``b_j`` and ``norm_terms``
    sets ``C_l``; the norm terms are only admitted together with a finite
    ``finite_dim`` (coordinates ``1 .. finite_dim``).
    """

    __test__ = False

    abs_terms: tuple = ()
    linear_terms: tuple = ()
    norm_terms: tuple = ()
    finite_dim: int = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "abs_terms", tuple(self.abs_terms))
        object.__setattr__(self, "linear_terms", tuple(self.linear_terms))
        object.__setattr__(self, "norm_terms", tuple(self.norm_terms))
        if self.norm_terms and self.finite_dim is None:
            raise ValueError("norm terms need a finite ambient dimension")

    def constant(self):
        """``C`` with ``|g(omega, x)| <= C ||x||``."""
        c = sum(x.dual_norm() for x, _ in self.abs_terms)
        c += sum(float(b.norms().max(initial=0.0)) for b in self.linear_terms)
        return c + len(self.norm_terms)

    def _check_support(self, h):
        if self.finite_dim is not None and self.norm_terms and h.coords.size:
            if h.coords.min() < 1 or h.coords.max() > self.finite_dim:
                raise ValueError(
                    f"support leaves coordinates 1..{self.finite_dim}")

    def integrate(self, h):
        """``int g(omega, h(omega)) dmu``."""
        self._check_support(h)
        total = 0.0
        for xstar, a in self.abs_terms:
            total += l1_norm(scalarize(h, xstar), a)
        for b in self.linear_terms:
            total += pair_integral(h, b)
        for c in self.norm_terms:
            total += l1_norm(h, c)
        return total

    def to_json(self):
        out = {"label": self.label,
               "abs_terms": [{"functional": x.to_json(), "set": a.to_text()}
                             for x, a in self.abs_terms],
               "linear_terms": [b.to_json() for b in self.linear_terms],
               "norm_terms": [c.to_text() for c in self.norm_terms],
               "constant": self.constant()}
        if self.finite_dim is not None:
            out["finite_dim"] = self.finite_dim
        return out


def _deviations(seq, require_limit=False):
    if require_limit and seq.limit is None:
        raise MissingLimitError("sequence has no limit candidate")
    return seq.deviations()


def strong_trend(seq):
    """``||f_k - f_0||_1`` for each member."""
    return np.array([l1_norm(d) for d in _deviations(seq, True)])


def pettis_trend(seq, cap=None):
    """Pettis norm of each deviation (exact or bracketed)."""
    return [pettis_norm_interval(d, cap) for d in _deviations(seq, True)]


def limited_trend(seq, tests):
    """``int g(d_k)`` per test (rows) and member (columns)."""
    devs = _deviations(seq, True)
    return np.array([[g.integrate(d) for d in devs] for g in tests]
                    ).reshape(len(tests), len(devs))


def scalar_modes(seq, functionals, test_sets=None, eps=None):
    """Scalar convergence metrics of ``x*(f_k - f_0)``.

    Returns a dict of arrays indexed ``[functional, member]`` (``"weak"``
    adds a test-set axis in the middle): ``strong`` is ``int |x* d_k|``,
    ``ky_fan`` the Ky Fan distance of ``x* d_k`` to zero, ``weak`` the
    integrals over test sets and, when ``eps`` is given, ``in_measure``
    holds ``mu{|x* d_k| > eps}``.
    """
    devs = _deviations(seq, True)
    test_sets = list(default_test_sets(1) if test_sets is None else test_sets)
    nf, nk, ns = len(functionals), len(devs), len(test_sets)
    out = {"strong": np.zeros((nf, nk)), "ky_fan": np.zeros((nf, nk)),
           "weak": np.zeros((nf, ns, nk))}
    if eps is not None:
        out["in_measure"] = np.zeros((nf, nk))
    for i, x in enumerate(functionals):
        for k, d in enumerate(devs):
            s = scalarize(d, x)
            out["strong"][i, k] = l1_norm(s)
            out["ky_fan"][i, k] = ky_fan(s)
            for j, b in enumerate(test_sets):
                out["weak"][i, j, k] = integral(s, b)[s.coords[0]] \
                    if s.coords.size else 0.0
            if eps is not None:
                out["in_measure"][i, k] = float(
                    np.count_nonzero(np.abs(s.norms()) > eps)
                    * 2.0 ** -s.level)
    return out


def weak_surrogate_trend(seq, duals):
    """``int <f_k - f_0, b>`` per dual-valued test function ``b``."""
    devs = _deviations(seq, True)
    return np.array([[pair_integral(d, b) for d in devs] for b in duals]
                    ).reshape(len(duals), len(devs))


def delta_cauchy(seq, test_sets=None):
    """``||m_B f_k - m_B f_0||`` per test set (rows) and member."""
    devs = _deviations(seq, True)
    test_sets = list(default_test_sets(1) if test_sets is None else test_sets)
    out = np.zeros((len(test_sets), len(devs)))
    for j, b in enumerate(test_sets):
        mu = float(b.measure())
        for k, d in enumerate(devs):
            out[j, k] = integral(d, b).norm(d.kind) / mu if mu else 0.0
    return out


def tail_window(n):
    """0-based indices of the last ``ceil(n/3)`` members."""
    return list(range(n - math.ceil(n / 3), n))


def default_functionals(seq, max_count=64):
    """Unit coordinate functionals on the early support, plus their sum.

    Early members are those before the tail window; the limit's support is
    included as well. The summed functional is rescaled to unit dual norm.
    """
    n = len(seq.members)
    early = seq.members[:n - math.ceil(n / 3)]
    coords = set()
    for f in early:
        coords.update(int(c) for c in f.coords)
    if seq.limit is not None:
        coords.update(int(c) for c in seq.limit.coords)
    coords = sorted(coords)[:max_count]
    family = [Functional.coordinate(c, seq.kind) for c in coords]
    if len(coords) > 1:
        family.append(_unit(Functional(SeqVec({c: 1.0 for c in coords}),
                                       seq.kind)))
    return family


@dataclass
class ReportConfig:
    """Knobs for :func:`lattice_report`.

    ``tol`` defaults to ``1/sqrt(K)``. ``functionals`` defaults to
    :func:`default_functionals`. ``tests`` and ``duals`` add limited tests
    and dual-valued weak test functions. ``test_sets`` are used for the
    scalar weak and delta-Cauchy metrics, ``eps_grid``, ``search_level``
    and ``criterion_sets`` for the oscillation checks.
    """

    tol: float = None
    functionals: list = None
    tests: list = field(default_factory=list)
    duals: list = field(default_factory=list)
    test_sets: list = None
    eps_grid: tuple = DEFAULT_EPS_GRID
    search_level: int = 3
    criterion_sets: list = None
    criteria: bool = True
    pettis_criterion: bool = True
    tightness: bool = True
    biting: bool = True
    block_cap: int = None


@dataclass
class LatticeReport:
    label: str
    K: int
    tol: float
    tail: list
    trends: dict = field(default_factory=dict)
    families: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    criteria: dict = field(default_factory=dict)
    moduli: dict = field(default_factory=dict)
    tightness: list = field(default_factory=list)
    biting: dict = None
    theorems: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def check_lattice(self):
        """Raise :class:`LatticeViolation` on a broken implication."""
        for strong, weak in IMPLICATIONS:
            if strong in self.flags and weak in self.flags:
                if self.flags[strong] and not self.flags[weak]:
                    raise LatticeViolation(
                        f"{self.label}: {strong} holds but {weak} does not")

    def to_json(self):
        return {
            "label": self.label,
            "K": self.K,
            "tol": self.tol,
            "tail": [k + 1 for k in self.tail],
            "trends": self.trends,
            "families": self.families,
            "flags": self.flags,
            "criteria": {k: v.to_json() for k, v in self.criteria.items()},
            "moduli": {k: v.to_json() for k, v in self.moduli.items()},
            "tightness": [t.to_json() for t in self.tightness],
            "biting": None if self.biting is None else self.biting.to_json(),
            "theorems": self.theorems,
            "errors": self.errors,
        }

    def csv_rows(self):
        """``(k, metric, value)`` rows: trends per member, then summaries."""
        rows = []
        for name in sorted(self.trends):
            for k, v in enumerate(self.trends[name], start=1):
                rows.append((k, f"trend.{name}", v))
        for name in sorted(self.flags):
            rows.append((self.K, f"flag.{name}", int(self.flags[name])))
        for name in sorted(self.criteria):
            rows.append((self.K, f"criterion.{name}",
                         self.criteria[name].status.value))
        for name in sorted(self.moduli):
            curve = self.moduli[name]
            for t, v in curve.csv_rows():
                rows.append((self.K, f"modulus.{name}.c={t:g}", v))
        return rows


def _tail_below(values, tail, bound):
    values = np.abs(np.asarray(values, dtype=float))
    if values.ndim == 1:
        return bool(values[tail].max(initial=0.0) < bound)
    return bool(values[..., tail].max(initial=0.0) < bound)


def _section(report, name, fn):
    try:
        return fn()
    except (ValueError, OverflowError, PettisCapError) as exc:
        report.errors[name] = f"{type(exc).__name__}: {exc}"
        return None


def lattice_report(seq, cfg=None):
    """Measure every convergence mode of ``seq`` and the oscillation criteria.

    Sections that fail record their error in ``errors`` and leave the
    rest of the report intact.
    """
    from .tightbite import (biting_decompose, theorem45_check,
                            theorem48_check, tightness_search)

    cfg = ReportConfig() if cfg is None else cfg
    if not isinstance(seq, FunctionSequence):
        seq = FunctionSequence(seq)
    if seq.limit is None:
        seq = FunctionSequence(seq.members, StepFunction.zero(seq.kind),
                               seq.label)
    n = len(seq.members)
    if n == 0:
        raise ValueError("empty sequence")
    tol = 1.0 / math.sqrt(n) if cfg.tol is None else float(cfg.tol)
    tail = tail_window(n)
    report = LatticeReport(seq.label, n, tol, tail)
    devs = seq.deviations()
    functionals = [_unit(x) for x in (default_functionals(seq)
                                      if cfg.functionals is None
                                      else cfg.functionals)]
    test_sets = list(default_test_sets(1) if cfg.test_sets is None
                     else cfg.test_sets)
    report.families = {
        "functionals": [x.to_json() for x in functionals],
        "test_sets": [b.to_text() for b in test_sets],
        "tests": [g.to_json() for g in cfg.tests],
        "duals": [b.to_json() for b in cfg.duals],
    }
    flags = report.flags
    trends = report.trends

    strong = strong_trend(seq)
    trends["strong"] = strong.tolist()
    flags["strong"] = _tail_below(strong, tail, tol)

    kf = np.array([ky_fan(d) for d in devs])
    trends["ky_fan"] = kf.tolist()
    flags["in_measure"] = _tail_below(kf, tail, math.sqrt(tol))

    pettis = _section(report, "pettis", lambda: pettis_trend(seq,
                                                             cfg.block_cap))
    if pettis is not None:
        trends["pettis"] = [r.upper for r in pettis]
        trends["pettis_lower"] = [r.lower for r in pettis]
        trends["pettis_exact"] = [int(r.method.value == "EXACT")
                                  for r in pettis]
        flags["pettis"] = _tail_below(trends["pettis"], tail, tol)

    # limited tests: caller tests, |x*| 1_Omega per functional, dual tests
    omega = DyadicSet.full(0)
    tests = list(cfg.tests)
    tests += [TestG(abs_terms=[(x, omega)], label=f"abs.f{i}")
              for i, x in enumerate(functionals)]
    tests += [TestG(linear_terms=[b], label=f"dual{i}")
              for i, b in enumerate(cfg.duals)]
    lim = limited_trend(seq, tests)
    consts = np.array([max(g.constant(), 1e-300) for g in tests])
    lim_norm = np.abs(lim) / consts[:, None] if tests else lim
    for i, g in enumerate(tests):
        trends[f"limited.{g.label or i}"] = lim_norm[i].tolist()
    flags["limited"] = _tail_below(lim_norm, tail, tol)

    sm = scalar_modes(seq, functionals, test_sets)
    for i in range(len(functionals)):
        trends[f"scalar_strong.f{i}"] = sm["strong"][i].tolist()
        trends[f"scalar_ky_fan.f{i}"] = sm["ky_fan"][i].tolist()
    flags["scalarly_strong"] = _tail_below(sm["strong"], tail, tol)
    flags["scalarly_in_measure"] = _tail_below(sm["ky_fan"], tail,
                                               math.sqrt(tol))
    flags["scalarly_weak"] = _tail_below(sm["weak"], tail, tol)

    if cfg.duals:
        weak = weak_surrogate_trend(seq, cfg.duals)
        sup = np.array([max(float(b.norms().max(initial=0.0)), 1e-300)
                        for b in cfg.duals])
        weak_norm = np.abs(weak) / sup[:, None]
        for i in range(len(cfg.duals)):
            trends[f"weak.dual{i}"] = weak_norm[i].tolist()
        flags["weak_surrogate"] = _tail_below(weak_norm, tail, tol)
    else:
        flags["weak_surrogate"] = flags["scalarly_weak"]
    flags["sigma_linf_surrogate"] = flags["weak_surrogate"]

    dc = delta_cauchy(seq, test_sets)
    mus = np.array([float(b.measure()) for b in test_sets])
    for j, b in enumerate(test_sets):
        trends[f"delta_cauchy.{b.to_text()}"] = dc[j].tolist()
    flags["delta_cauchy"] = _tail_below(dc * mus[:, None], tail, tol)

    half = math.ceil(n / 2)
    c_top = 2.0 ** half
    thresholds = [2.0 ** j for j in range(n + 1)]
    deltas = [2.0 ** -j for j in range(n + 1)]
    report.moduli["ui"] = ui_modulus(seq, thresholds)
    report.moduli["equi"] = equi_modulus(seq, deltas)
    if functionals:
        report.moduli["pettis_ui"] = pettis_ui_modulus(seq, functionals,
                                                       thresholds)
    flags["uniformly_integrable"] = report.moduli["ui"].at(c_top) < tol
    flags["equi_integrable"] = report.moduli["equi"].at(2.0 ** -half) < tol

    if cfg.criteria:
        crit_sets = cfg.criterion_sets
        kw = dict(eps_grid=cfg.eps_grid, test_sets=crit_sets,
                  search_level=cfg.search_level)
        checks = [("sequential_bocce", lambda: sequential_bocce_check(
                      seq, **kw)),
                  ("B0", lambda: b0_check(seq, **kw)),
                  ("B1", lambda: b1_check(
                      seq, cfg.eps_grid, search_level=cfg.search_level)),
                  ("B2", lambda: b2_check(
                      seq, cfg.eps_grid, search_level=cfg.search_level))]
        if cfg.pettis_criterion:
            checks.insert(1, ("sequential_pettis_bocce",
                              lambda: sequential_pettis_bocce_check(
                                  seq, cap=cfg.block_cap, **kw)))
        for name, fn in checks:
            verdict = _section(report, name, fn)
            if verdict is not None:
                report.criteria[name] = verdict

    if cfg.tightness:
        found = _section(report, "tightness", lambda: tightness_search(seq))
        if found is not None:
            report.tightness = found
    if cfg.biting:
        bite = _section(report, "biting", lambda: biting_decompose(seq,
                                                                   tol=tol))
        if bite is not None:
            report.biting = bite
    if "sequential_bocce" in report.criteria and cfg.tightness and \
            report.tightness:
        report.theorems["theorem45"] = theorem45_check(
            seq, weak=flags["weak_surrogate"],
            ui=flags["uniformly_integrable"],
            bocce=report.criteria["sequential_bocce"],
            tight=report.tightness, strong=flags["strong"])
        if report.biting is not None:
            report.theorems["theorem48"] = theorem48_check(
                seq, bocce=report.criteria["sequential_bocce"],
                tight=report.tightness, biting=report.biting, tol=tol)

    report.check_lattice()
    return report
