"""Oscillation of step functions over dyadic sets and finite Bocce checks.

The checkers replace the quantifiers of the oscillation criteria by finite
searches: test sets ``B`` come from a fixed family, candidate subsets
``A`` of ``B`` range over all unions of atoms at a search level, and
``liminf`` / ``eventually`` are read off the tail of the prefix (its second
half). Each check returns a :class:`CriterionVerdict` whose entries carry
enough data to recompute the deciding oscillation values.
"""

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import _backend, config
from .dyadic import DyadicPartition, DyadicSet
from .functionals import (PettisMethod, pettis_norm_exact,
                          pettis_norm_interval)
from .seqspace import SpaceKind, array_norms
from .stepfn import FunctionSequence, StepFunction, average

__all__ = [
    "Status",
    "CriterionVerdict",
    "DEFAULT_EPS_GRID",
    "default_test_sets",
    "bocce_osc",
    "pettis_bocce_osc",
    "pettis_bocce_interval",
    "sequential_bocce_check",
    "sequential_pettis_bocce_check",
    "set_bocce_check",
    "b0_check",
    "b1_check",
    "b2_check",
    "small_bocce_osc",
    "small_bocce_set_check",
    "small_mean_everywhere",
    "mean_vanishing_check",
    "tail_indices",
]

DEFAULT_EPS_GRID = tuple(2.0 ** -j for j in range(1, 7))


class Status(str, enum.Enum):
    SATISFIED_AT_RESOLUTION = "SATISFIED_AT_RESOLUTION"
    FALSIFIED = "FALSIFIED"
    INCONCLUSIVE = "INCONCLUSIVE"


def _combine(statuses):
    statuses = list(statuses)
    if Status.FALSIFIED in statuses:
        return Status.FALSIFIED
    if Status.INCONCLUSIVE in statuses:
        return Status.INCONCLUSIVE
    return Status.SATISFIED_AT_RESOLUTION


@dataclass
class CriterionVerdict:
    """Outcome of a finite criterion check.

    ``entries`` holds one record per (subsequence, eps, test set) or per eps,
    each with its own ``status`` and the witness or counter-evidence.
    ``resolution`` records the search space that was explored.
    """

    criterion: str
    status: Status
    entries: list = field(default_factory=list)
    resolution: dict = field(default_factory=dict)

    @property
    def witnesses(self):
        return [e for e in self.entries
                if e["status"] == Status.SATISFIED_AT_RESOLUTION.value]

    @property
    def falsifications(self):
        return [e for e in self.entries
                if e["status"] == Status.FALSIFIED.value]

    def status_at(self, eps):
        return _combine(Status(e["status"]) for e in self.entries
                        if e["eps"] == eps)

    def to_json(self):
        return {"criterion": self.criterion, "status": self.status.value,
                "entries": self.entries, "resolution": self.resolution}


def default_test_sets(level=1):
    """All dyadic intervals at levels ``0 .. level``."""
    return [DyadicSet.atom(j, i) for j in range(level + 1)
            for i in range(1 << j)]


def tail_indices(n):
    """1-based indices forming the tail (second half) of a length-n prefix."""
    return list(range(n // 2 + 1, n + 1))


# single-set oscillations

def bocce_osc(f, a):
    """``(1/mu(A)) int_A ||f - m_A f|| dmu``; zero when ``A`` is null."""
    mu = a.measure()
    if mu == 0:
        return 0.0
    level = max(f.level, a.level)
    g = f.refine(level)
    ind = a.indicator(level)
    x = g.data[ind]
    if x.shape[1] == 0:
        return 0.0
    dev = x - x.mean(axis=0)
    return float(array_norms(dev, f.kind).mean())


def _centered_on(f, a):
    m = average(f, a)
    shifted = f - StepFunction.constant(m, f.kind)
    return shifted.restrict(a)


def pettis_bocce_interval(f, a, cap=None):
    """Bracket of the Pettis-Bocce oscillation of ``f`` on ``A``.

    Returns ``(lower, upper, exact)``; ``exact`` means the Pettis norm was
    computed by full sign enumeration.
    """
    mu = float(a.measure())
    if mu == 0:
        return 0.0, 0.0, True
    r = pettis_norm_interval(_centered_on(f, a), cap)
    return r.lower / mu, r.upper / mu, r.method is PettisMethod.EXACT


def pettis_bocce_osc(f, a, cap=None):
    """``Pettis((f - m_A f) 1_A) / mu(A)``, computed exactly.

    Raises :class:`~bochnerlab.functionals.PettisCapError` when exact
    enumeration exceeds the block cap; see :func:`pettis_bocce_interval`.
    """
    mu = float(a.measure())
    if mu == 0:
        return 0.0
    return pettis_norm_exact(_centered_on(f, a), cap).value / mu


# subset search machinery

@lru_cache(maxsize=32)
def _subset_masks(m):
    """Nonempty masks over ``m`` cells by size, then lexicographic."""
    out = []
    for r in range(1, m + 1):
        for combo in combinations(range(m), r):
            mask = 0
            for c in combo:
                mask |= 1 << c
            out.append(mask)
    arr = np.array(out, dtype=np.uint64)
    arr.flags.writeable = False
    return arr


class _Search:
    """All unions of the search-level atoms inside a test set."""

    def __init__(self, b, level, limit):
        self.level = max(level, b.level)
        self.atoms = [int(i) for i in b.refine(self.level).atoms()]
        m = len(self.atoms)
        if m > 63 or (1 << m) - 1 > limit:
            raise OverflowError(
                f"{(1 << m) - 1} subsets of {b.to_text()} at level "
                f"{self.level} exceed limit {limit}")
        self.masks = _subset_masks(m)

    def cells(self, level):
        """Local cell per atom at ``level`` (``-1`` outside the test set)."""
        out = np.full(1 << level, -1, dtype=np.int64)
        shift = level - self.level
        for c, a in enumerate(self.atoms):
            out[a << shift:(a + 1) << shift] = c
        return out

    def subset(self, s):
        mask = int(self.masks[s])
        bits = 0
        for c, a in enumerate(self.atoms):
            if (mask >> c) & 1:
                bits |= 1 << a
        return DyadicSet(self.level, bits)


def _prepared(f, search):
    level = max(f.level, search.level)
    g = f.refine(level)
    return g, search.cells(level), np.full(g.n_atoms, 2.0 ** -level)


def _bocce_table(f, search):
    g, cells, w = _prepared(f, search)
    if g.coords.size == 0:
        return np.zeros(search.masks.size)
    return _backend.bocce_osc_masks(g.data, w, cells, search.masks, g.kind)


def _coordinate_table(f, search):
    """Best coordinate-functional lower bound for the Pettis-Bocce osc."""
    g, cells, w = _prepared(f, search)
    best = np.zeros(search.masks.size)
    for j in range(g.coords.size):
        col = np.ascontiguousarray(g.data[:, j:j + 1])
        best = np.maximum(best, _backend.bocce_osc_masks(
            col, w, cells, search.masks, SpaceKind.L1))
    return best


def _members_of(seq):
    if isinstance(seq, FunctionSequence):
        return list(seq.members)
    return list(seq)


def _subsequences(n, registered):
    out = [("full", list(range(1, n + 1)))]
    for i, idx in enumerate(registered or ()):
        idx = [int(k) for k in idx]
        if not idx or any(not 1 <= k <= n for k in idx):
            raise IndexError(f"subsequence {i} has indices outside 1..{n}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"subsequence {i} is not strictly increasing")
        out.append((f"sub{i}", idx))
    return out


def _resolution(eps_grid, test_sets, search_level, **extra):
    out = {"eps_grid": list(eps_grid),
           "test_sets": [b.to_text() for b in test_sets],
           "search_level": search_level,
           "liminf": "minimum over the second half of each index list"}
    out.update(extra)
    return out


def _sequential(criterion, seq, eps_grid, test_sets, search_level,
                subsequences, max_subsets, pettis, cap, max_refine):
    members = _members_of(seq)
    eps_grid = tuple(DEFAULT_EPS_GRID if eps_grid is None else eps_grid)
    test_sets = list(default_test_sets(1) if test_sets is None else test_sets)
    limit = config.max_subsets() if max_subsets is None else max_subsets
    entries = []
    for tag, idx in _subsequences(len(members), subsequences):
        tail = idx[len(idx) // 2:]
        for b in test_sets:
            try:
                search = _Search(b, search_level, limit)
            except OverflowError as exc:
                for eps in eps_grid:
                    entries.append({"subsequence": tag, "eps": eps,
                                    "test_set": b.to_text(),
                                    "status": Status.INCONCLUSIVE.value,
                                    "reason": str(exc)})
                continue
            rows = {k: (_coordinate_table if pettis else _bocce_table)(
                members[k - 1], search) for k in tail}
            low = np.vstack([rows[k] for k in tail])
            if pettis:
                # Pettis osc never exceeds the Bochner osc
                up = np.vstack([_bocce_table(members[k - 1], search)
                                for k in tail])
            else:
                up = low
            refiner = _Refiner(members, search, cap) if pettis else None
            for eps in eps_grid:
                entries.append(_decide(tag, eps, b, search, tail, low, up,
                                       refiner, max_refine))
    status = _combine(Status(e["status"]) for e in entries)
    res = _resolution(eps_grid, test_sets, search_level,
                      max_subsets=limit,
                      subsequences=[idx for _, idx in
                                    _subsequences(len(members),
                                                  subsequences)][1:])
    if pettis:
        res["block_cap"] = config.block_cap() if cap is None else cap
        res["max_refine"] = max_refine
    return CriterionVerdict(criterion, status, entries, res)


class _Refiner:
    """Cached Pettis-Bocce brackets for (subset, member) pairs."""

    def __init__(self, members, search, cap):
        self.members = members
        self.search = search
        self.cap = cap
        self.cache = {}

    def __call__(self, s, k):
        key = (s, k)
        if key not in self.cache:
            self.cache[key] = pettis_bocce_interval(
                self.members[k - 1], self.search.subset(s), self.cap)
        return self.cache[key]


def _witness(tag, eps, b, search, s, k, value, exact=True):
    return {"subsequence": tag, "eps": eps, "test_set": b.to_text(),
            "status": Status.SATISFIED_AT_RESOLUTION.value,
            "witness": {"set": search.subset(s).to_text(), "member": k,
                        "value": value, "exact": exact}}


def _decide(tag, eps, b, search, tail, low, up, refiner, max_refine):
    best_up = up.min(axis=0)
    hits = np.flatnonzero(best_up < eps)
    if hits.size:
        s = int(hits[0])
        r = int(np.argmin(up[:, s]))
        return _witness(tag, eps, b, search, s, tail[r], float(up[r, s]),
                        exact=refiner is None)
    best_low = low.min(axis=0)
    open_sets = np.flatnonzero(best_low < eps)
    if open_sets.size == 0:
        return {"subsequence": tag, "eps": eps, "test_set": b.to_text(),
                "status": Status.FALSIFIED.value,
                "min_osc": float(best_low.min()), "exhaustive": True}
    if refiner is None:
        raise AssertionError("exact tables cannot leave open sets")
    budget = max_refine
    unresolved = 0
    floor = math.inf
    for s in open_sets:
        s = int(s)
        settled_low = math.inf
        undecided = False
        for r in np.argsort(low[:, s], kind="stable"):
            if budget <= 0:
                undecided = True
                break
            budget -= 1
            lo, hi, exact = refiner(s, tail[r])
            if hi < eps:
                return _witness(tag, eps, b, search, s, tail[r], hi, exact)
            if lo < eps:
                undecided = True
            settled_low = min(settled_low, max(lo, low[r, s]))
        if undecided:
            unresolved += 1
        else:
            floor = min(floor, settled_low)
    if unresolved:
        return {"subsequence": tag, "eps": eps, "test_set": b.to_text(),
                "status": Status.INCONCLUSIVE.value,
                "unresolved_sets": unresolved,
                "reason": "Pettis norm brackets straddle eps"}
    closed = np.ones(best_low.size, dtype=bool)
    closed[open_sets] = False
    if closed.any():
        floor = min(floor, float(best_low[closed].min()))
    return {"subsequence": tag, "eps": eps, "test_set": b.to_text(),
            "status": Status.FALSIFIED.value, "min_osc": floor,
            "exhaustive": True}


def sequential_bocce_check(seq, eps_grid=None, test_sets=None,
                           search_level=3, subsequences=(),
                           max_subsets=None):
    """Finite check of the sequential Bocce criterion.

    For each eps, test set ``B`` and index list (the whole prefix plus any
    registered subsequences), look for ``A`` inside ``B`` at
    ``search_level`` whose Bocce oscillation drops below eps for some tail
    member. The witness is the first such ``A`` in size-then-lexicographic
    order. FALSIFIED entries mean every candidate ``A`` stays at or above
    eps on the whole tail.
    """
    return _sequential("sequential_bocce", seq, eps_grid, test_sets,
                       search_level, subsequences, max_subsets, False, None, 0)


def sequential_pettis_bocce_check(seq, eps_grid=None, test_sets=None,
                                  search_level=3, subsequences=(),
                                  max_subsets=None, cap=None,
                                  max_refine=256):
    """Sequential check with the Pettis-Bocce oscillation.

    Coordinate functionals give lower bounds and the Bochner oscillation an
    upper bound for every candidate set at once; sets where these straddle
    eps are refined with exact or spectral Pettis brackets, at most
    ``max_refine`` times per entry. Entries still undecided are
    INCONCLUSIVE.
    """
    return _sequential("sequential_pettis_bocce", seq, eps_grid, test_sets,
                       search_level, subsequences, max_subsets, True, cap,
                       max_refine)


def set_bocce_check(members, eps_grid=None, test_sets=None, search_level=3,
                    max_subsets=None):
    """Finite check of the Bocce criterion for a set of functions.

    For each eps and ``B``, every member needs some ``A`` with oscillation
    below eps; the witness is a greedy cover of the members by such sets.
    """
    members = list(members)
    eps_grid = tuple(DEFAULT_EPS_GRID if eps_grid is None else eps_grid)
    test_sets = list(default_test_sets(1) if test_sets is None else test_sets)
    limit = config.max_subsets() if max_subsets is None else max_subsets
    entries = []
    for b in test_sets:
        try:
            search = _Search(b, search_level, limit)
        except OverflowError as exc:
            entries.extend({"eps": eps, "test_set": b.to_text(),
                            "status": Status.INCONCLUSIVE.value,
                            "reason": str(exc)} for eps in eps_grid)
            continue
        table = np.vstack([_bocce_table(f, search) for f in members]) \
            if members else np.zeros((0, search.masks.size))
        for eps in eps_grid:
            good = table < eps
            bad = np.flatnonzero(~good.any(axis=1))
            if bad.size:
                i = int(bad[0])
                entries.append({"eps": eps, "test_set": b.to_text(),
                                "status": Status.FALSIFIED.value,
                                "member": i + 1,
                                "min_osc": float(table[i].min()),
                                "exhaustive": True})
                continue
            uncovered = np.ones(len(members), dtype=bool)
            cover = []
            while uncovered.any():
                gain = good[uncovered].sum(axis=0)
                s = int(np.argmax(gain))
                newly = np.flatnonzero(good[:, s] & uncovered)
                cover.append({"set": search.subset(s).to_text(),
                              "members": [int(i) + 1 for i in newly]})
                uncovered[newly] = False
            entries.append({"eps": eps, "test_set": b.to_text(),
                            "status": Status.SATISFIED_AT_RESOLUTION.value,
                            "cover": cover})
    status = _combine(Status(e["status"]) for e in entries)
    return CriterionVerdict("set_bocce", status, entries,
                            _resolution(eps_grid, test_sets, search_level,
                                        max_subsets=limit))


def b0_check(seq, eps_grid=None, test_sets=None, search_level=3,
             max_subsets=None):
    """Finite check of (B0): a ``C`` inside ``B`` with small oscillation for
    every tail member.

    Witnesses report ``C`` and the first index ``N`` from which the
    oscillation on ``C`` stays below eps through the end of the prefix.
    """
    members = _members_of(seq)
    eps_grid = tuple(DEFAULT_EPS_GRID if eps_grid is None else eps_grid)
    test_sets = list(default_test_sets(1) if test_sets is None else test_sets)
    limit = config.max_subsets() if max_subsets is None else max_subsets
    n = len(members)
    tail = tail_indices(n)
    entries = []
    for b in test_sets:
        try:
            search = _Search(b, search_level, limit)
        except OverflowError as exc:
            entries.extend({"eps": eps, "test_set": b.to_text(),
                            "status": Status.INCONCLUSIVE.value,
                            "reason": str(exc)} for eps in eps_grid)
            continue
        table = np.vstack([_bocce_table(f, search) for f in members])
        worst = table[[k - 1 for k in tail]].max(axis=0)
        for eps in eps_grid:
            hits = np.flatnonzero(worst < eps)
            if hits.size == 0:
                entries.append({"eps": eps, "test_set": b.to_text(),
                                "status": Status.FALSIFIED.value,
                                "min_tail_max": float(worst.min()),
                                "exhaustive": True})
                continue
            s = int(hits[0])
            above = np.flatnonzero(table[:, s] >= eps)
            start = int(above[-1]) + 2 if above.size else 1
            entries.append({"eps": eps, "test_set": b.to_text(),
                            "status": Status.SATISFIED_AT_RESOLUTION.value,
                            "witness": {"set": search.subset(s).to_text(),
                                        "N": start,
                                        "tail_max": float(worst[s])}})
    status = _combine(Status(e["status"]) for e in entries)
    return CriterionVerdict("B0", status, entries,
                            _resolution(eps_grid, test_sets, search_level,
                                        max_subsets=limit,
                                        tail=[tail[0], n] if tail else []))


def _tail_max_osc(members, tail, blocks, level):
    """Tail-maximal Bocce oscillation on each block (blocks at ``level``)."""
    out = np.zeros(len(blocks))
    for start in range(0, len(blocks), 64):
        chunk = blocks[start:start + 64]
        for k in tail:
            f = members[k - 1]
            lev = max(f.level, level)
            g = f.refine(lev)
            if g.coords.size == 0:
                continue
            cells = np.full(g.n_atoms, -1, dtype=np.int64)
            for c, blk in enumerate(chunk):
                cells[blk.indicator(lev)] = c
            masks = np.array([1 << c for c in range(len(chunk))],
                             dtype=np.uint64)
            osc = _backend.bocce_osc_masks(
                g.data, np.full(g.n_atoms, 2.0 ** -lev), cells, masks, g.kind)
            seg = out[start:start + len(chunk)]
            np.maximum(seg, osc, out=seg)
    return out


def _candidate_partitions(levels, partitions):
    for lev in levels:
        yield f"atoms@{lev}", None, lev
    for i, p in enumerate(partitions or ()):
        yield f"given{i}", p, p.level


def _block_ok_b1(members, tail, blocks, level, eps, depth):
    return _tail_max_osc(members, tail, blocks, level) < eps


def _block_ok_b2(members, tail, blocks, level, eps, depth):
    fine = level + depth
    config.check_level(fine)
    ok = np.ones(len(blocks), dtype=bool)
    for i, blk in enumerate(blocks):
        subs = [DyadicSet(fine, m) for m in _submasks(blk.refine(fine))]
        ok[i] = bool(np.all(_tail_max_osc(members, tail, subs, fine) < eps))
    return ok


def _submasks(s):
    bits = [1 << int(a) for a in s.atoms()]
    if len(bits) > 16:
        raise OverflowError(f"too many sub-blocks in {s.to_text()}")
    for r in range(1, len(bits) + 1):
        for combo in combinations(bits, r):
            yield sum(combo)


def _partition_check(name, seq, eps_grid, levels, partitions, acceptable,
                     depth, search_level):
    members = _members_of(seq)
    eps_grid = tuple(DEFAULT_EPS_GRID if eps_grid is None else eps_grid)
    if levels is None:
        levels = tuple(range(search_level + 1))
    n = len(members)
    tail = tail_indices(n)
    entries = []
    for eps in eps_grid:
        found = None
        best_bad = math.inf
        for tag, given, lev in _candidate_partitions(levels, partitions):
            if given is None:
                blocks = [DyadicSet.atom(lev, i) for i in range(1 << lev)]
            else:
                blocks = list(given.blocks)
            ok = acceptable(members, tail, blocks, lev, eps, depth)
            if given is None:
                good = [b for b, flag in zip(blocks, ok) if flag]
                bad_mask = 0
                for b, flag in zip(blocks, ok):
                    if not flag:
                        bad_mask |= b.mask
                exceptional = DyadicSet(lev, bad_mask)
            else:
                if not np.all(ok):
                    continue
                good = blocks
                exceptional = given.exceptional or DyadicSet.empty(lev)
            mu0 = exceptional.measure()
            best_bad = min(best_bad, float(mu0))
            if mu0 < Fraction(eps) and good:
                found = (tag, DyadicPartition(good, exceptional), mu0)
                break
        if found is None:
            entries.append({"eps": eps, "status": Status.FALSIFIED.value,
                            "min_exceptional_measure": best_bad,
                            "exhaustive": True})
        else:
            tag, part, mu0 = found
            entries.append({"eps": eps,
                            "status": Status.SATISFIED_AT_RESOLUTION.value,
                            "witness": {"candidate": tag,
                                        "partition": part.to_json(),
                                        "exceptional_measure": mu0,
                                        "N": tail[0] if tail else 1}})
    status = _combine(Status(e["status"]) for e in entries)
    res = {"eps_grid": list(eps_grid), "levels": list(levels),
           "given_partitions": len(partitions or ()),
           "blocks": "single atoms of each level, bad atoms pooled into A_0",
           "tail": [tail[0], n] if tail else []}
    if depth:
        res["sub_block_depth"] = depth
    return CriterionVerdict(name, status, entries, res)


def b1_check(seq, eps_grid=None, levels=None, partitions=(),
             search_level=3):
    """Finite check of (B1).

    Candidate partitions use the atoms of each level in ``levels`` as
    blocks, pooling atoms whose tail oscillation reaches eps into the
    exceptional block; caller-supplied partitions are tried as given.
    FALSIFIED means no candidate has an exceptional block of measure below
    eps. ``levels`` defaults to ``0 .. search_level``, the resolution
    :func:`b0_check` searches at.
    """
    return _partition_check("B1", seq, eps_grid, levels, partitions,
                            _block_ok_b1, 0, search_level)


def b2_check(seq, eps_grid=None, levels=None, partitions=(), depth=2,
             search_level=3):
    """Finite check of (B2): like :func:`b1_check`, but a block counts as
    good only when every union of its atoms ``depth`` levels finer also
    keeps the tail oscillation below eps."""
    return _partition_check("B2", seq, eps_grid, levels, partitions,
                            _block_ok_b2, depth, search_level)


def small_bocce_osc(f, partition):
    """``sum_i mu(A_i) osc_{A_i} f`` over the regular blocks of ``partition``."""
    blocks = list(partition.blocks)
    level = max(f.level, partition.level)
    g = f.refine(level)
    if g.coords.size == 0 or not blocks:
        return 0.0
    w = np.full(g.n_atoms, 2.0 ** -level)
    total = 0.0
    for start in range(0, len(blocks), 64):
        chunk = blocks[start:start + 64]
        cells = np.full(g.n_atoms, -1, dtype=np.int64)
        for c, blk in enumerate(chunk):
            cells[blk.indicator(level)] = c
        masks = np.array([1 << c for c in range(len(chunk))], dtype=np.uint64)
        osc = _backend.bocce_osc_masks(g.data, w, cells, masks, g.kind)
        mus = np.array([float(b.measure()) for b in chunk])
        total += float(osc @ mus)
    return total


def small_bocce_set_check(members, eps_grid=None, levels=(0, 1, 2, 3),
                          partitions=()):
    """Finite check of the small-Bocce criterion for a set of functions.

    Returns the first candidate partition (atoms of a level, then the given
    ones) on which every member has small-Bocce oscillation below eps.
    """
    members = list(members)
    eps_grid = tuple(DEFAULT_EPS_GRID if eps_grid is None else eps_grid)
    cands = [(f"atoms@{lev}", DyadicPartition.atoms(lev)) for lev in levels]
    cands += [(f"given{i}", p) for i, p in enumerate(partitions or ())]
    worst = [max((small_bocce_osc(f, p) for f in members), default=0.0)
             for _, p in cands]
    entries = []
    for eps in eps_grid:
        hit = next((i for i, v in enumerate(worst) if v < eps), None)
        if hit is None:
            entries.append({"eps": eps, "status": Status.FALSIFIED.value,
                            "min_value": min(worst, default=math.inf),
                            "exhaustive": True})
        else:
            entries.append({"eps": eps,
                            "status": Status.SATISFIED_AT_RESOLUTION.value,
                            "witness": {"candidate": cands[hit][0],
                                        "partition": cands[hit][1].to_json(),
                                        "value": worst[hit]}})
    status = _combine(Status(e["status"]) for e in entries)
    return CriterionVerdict("small_bocce_set", status, entries,
                            {"eps_grid": list(eps_grid),
                             "candidates": [c for c, _ in cands]})


def small_mean_everywhere(phi, eps, level=None):
    """Whether every nonempty ``B`` at ``level`` contains ``A`` with
    ``m_A(phi) < eps``.

    ``phi`` is a real-valued step function. Returns ``(holds, B)`` where
    ``B`` is the first offending set (by mask value) or ``None``.
    """
    level = phi.level if level is None else level
    if level < phi.level:
        raise ValueError("level must not be coarser than phi")
    n = 1 << level
    if n > 16:
        raise OverflowError(f"{(1 << n) - 1} sets at level {level}")
    vals = phi.refine(level).data
    vals = vals[:, 0] if vals.shape[1] else np.zeros(n)
    masks = np.arange(1 << n, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(n)[None, :]) & 1
    counts = bits.sum(axis=1)
    sums = bits @ vals
    best = np.full(1 << n, np.inf)
    best[1:] = sums[1:] / counts[1:]
    # subset-minimum transform: best[B] = min over nonempty A inside B
    for i in range(n):
        has = (masks >> i) & 1 == 1
        src = masks[has] ^ (1 << i)
        best[has] = np.minimum(best[has], best[src])
    bad = np.flatnonzero(best[1:] >= eps)
    if bad.size:
        return False, DyadicSet(level, int(bad[0]) + 1)
    return True, None


def mean_vanishing_check(phi, eps_grid, level=None):
    """Per-eps small-mean property of ``phi`` alongside ``max phi``.

    When the property holds at eps, ``max phi`` must stay below eps: the
    atoms themselves are admissible test sets.
    """
    out = []
    top = float(phi.data.max()) if phi.coords.size else 0.0
    for eps in eps_grid:
        holds, offender = small_mean_everywhere(phi, eps, level)
        out.append({"eps": eps, "holds": holds,
                    "offender": None if offender is None
                    else offender.to_text(),
                    "max_phi": top})
    return out
