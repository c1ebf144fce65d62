"""Vector-valued simple functions on the dyadic probability space.

A :class:`StepFunction` at level ``n`` is stored densely: one row per atom,
one column per coordinate in the union of the value supports. Functions at
different levels are reconciled by refining to the finer level.
"""

from fractions import Fraction

import numpy as np

from .dyadic import DyadicPartition, DyadicSet
from .seqspace import (Functional, KindMismatchError, SeqVec, SpaceKind,
                       array_norms)
from . import config

__all__ = [
    "StepFunction",
    "FunctionSequence",
    "REAL_COORD",
    "align",
    "integral",
    "average",
    "l1_norm",
    "pointwise_norm",
    "truncate",
    "cond_expectation",
    "scalarize",
    "constancy_partition",
    "indicator_function",
]

# coordinate used for real-valued step functions
REAL_COORD = 1


class StepFunction:
    """A map from the atoms at ``level`` to vectors of the space ``kind``.

    Parameters
    ----------
    level : int
        Dyadic resolution; the function has ``2**level`` atom values.
    data : array_like, shape (2**level, len(coords))
        Coordinate values per atom.
    coords : sequence of int
        Coordinate index of each column.
    kind : SpaceKind
        Norm of the target space.
    """

    __slots__ = ("_level", "_kind", "_coords", "_data")

    def __init__(self, level, data, coords, kind):
        config.check_level(level)
        if not isinstance(kind, SpaceKind):
            raise TypeError("kind must be a SpaceKind")
        coords = np.asarray(coords, dtype=np.int64).reshape(-1)
        data = np.array(data, dtype=np.float64, copy=True)
        if data.ndim == 1 and coords.size == 1:
            data = data[:, None]
        if data.shape != (1 << level, coords.size):
            raise ValueError(
                f"data shape {data.shape} does not match level {level} and "
                f"{coords.size} coordinates")
        if coords.size and (np.any(coords < 0)
                            or np.unique(coords).size != coords.size):
            raise ValueError("coordinates must be distinct and non-negative")
        if not np.all(np.isfinite(data)):
            raise ValueError("step function values must be finite")
        order = np.argsort(coords, kind="stable")
        coords, data = coords[order], data[:, order]
        live = np.any(data != 0.0, axis=0)
        coords, data = coords[live], np.ascontiguousarray(data[:, live])
        coords.flags.writeable = False
        data.flags.writeable = False
        object.__setattr__(self, "_level", int(level))
        object.__setattr__(self, "_kind", kind)
        object.__setattr__(self, "_coords", coords)
        object.__setattr__(self, "_data", data)

    def __setattr__(self, name, value):
        raise AttributeError("StepFunction is immutable")

    # constructors

    @classmethod
    def from_values(cls, level, values, kind):
        """Build from one :class:`SeqVec` (or mapping) per atom."""
        values = [v if isinstance(v, SeqVec) else SeqVec(v) for v in values]
        if len(values) != 1 << level:
            raise ValueError(f"expected {1 << level} values, got {len(values)}")
        coords = sorted({k for v in values for k in v.support})
        data = np.array([v.dense(coords) for v in values]).reshape(
            len(values), len(coords))
        return cls(level, data, coords, kind)

    @classmethod
    def constant(cls, value, kind, level=0):
        if not isinstance(value, SeqVec):
            value = SeqVec(value)
        coords = list(value.support)
        row = value.dense(coords)
        return cls(level, np.tile(row, (1 << level, 1)), coords, kind)

    @classmethod
    def zero(cls, kind=SpaceKind.L2, level=0):
        return cls(level, np.zeros((1 << level, 0)), [], kind)

    @classmethod
    def real(cls, level, values, kind=SpaceKind.L2):
        """Real-valued function with atom values ``values``."""
        values = np.asarray(values, dtype=float).reshape(-1)
        return cls(level, values[:, None], [REAL_COORD], kind)

    # accessors

    @property
    def level(self):
        return self._level

    @property
    def kind(self):
        return self._kind

    @property
    def coords(self):
        return self._coords

    @property
    def data(self):
        return self._data

    @property
    def n_atoms(self):
        return 1 << self._level

    def atom_measure(self):
        return Fraction(1, 1 << self._level)

    def weights(self):
        return np.full(1 << self._level, 2.0 ** -self._level)

    def value(self, i):
        return SeqVec.from_dense(self._coords, self._data[i])

    @property
    def values(self):
        return [self.value(i) for i in range(self.n_atoms)]

    def is_real(self):
        return self._coords.size <= 1

    def norms(self):
        """Per-atom norm of the value."""
        return array_norms(self._data, self._kind)

    def dense(self, coords):
        """Data re-expressed on the column set ``coords`` (a superset)."""
        coords = np.asarray(coords, dtype=np.int64)
        out = np.zeros((self.n_atoms, coords.size))
        if self._coords.size:
            idx = np.searchsorted(coords, self._coords)
            if np.any(idx >= coords.size) or np.any(
                    coords[np.minimum(idx, coords.size - 1)] != self._coords):
                raise ValueError("target coordinates miss part of the support")
            out[:, idx] = self._data
        return out

    def refine(self, level):
        if level < self._level:
            raise ValueError(f"cannot coarsen level {self._level} to {level}")
        if level == self._level:
            return self
        config.check_level(level)
        data = np.repeat(self._data, 1 << (level - self._level), axis=0)
        return StepFunction(level, data, self._coords, self._kind)

    def coarsest(self):
        """Same function at the lowest level that represents it exactly."""
        f = self
        while f._level > 0:
            pairs = f._data.reshape(-1, 2, f._coords.size)
            if not np.array_equal(pairs[:, 0], pairs[:, 1]):
                break
            f = StepFunction(f._level - 1, pairs[:, 0], f._coords, f._kind)
        return f

    # arithmetic

    def _check_kind(self, other):
        if other._kind is not self._kind:
            raise KindMismatchError(
                f"cannot combine {self._kind.value} and {other._kind.value}")

    def __add__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        self._check_kind(other)
        level, coords, (a, b) = align(self, other)
        return StepFunction(level, a + b, coords, self._kind)

    def __sub__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        self._check_kind(other)
        level, coords, (a, b) = align(self, other)
        return StepFunction(level, a - b, coords, self._kind)

    def __neg__(self):
        return StepFunction(self._level, -self._data, self._coords, self._kind)

    def __mul__(self, scalar):
        if isinstance(scalar, StepFunction):
            return NotImplemented
        return StepFunction(self._level, float(scalar) * self._data,
                            self._coords, self._kind)

    __rmul__ = __mul__

    def restrict(self, s):
        """``f 1_s``."""
        level = max(self._level, s.level)
        f = self.refine(level)
        ind = s.indicator(level)
        return StepFunction(level, f._data * ind[:, None], f._coords, f._kind)

    def equals(self, other, atol=0.0):
        if self._kind is not other._kind:
            return False
        level, coords, (a, b) = align(self, other)
        return bool(np.all(np.abs(a - b) <= atol))

    # serialization

    def to_json(self):
        return {
            "level": self._level,
            "kind": self._kind.value,
            "values": [{str(int(k)): float(x)
                        for k, x in zip(self._coords, row) if x != 0.0}
                       for row in self._data],
        }

    @classmethod
    def from_json(cls, data):
        try:
            level = int(data["level"])
            kind = SpaceKind.parse(data["kind"])
            values = [SeqVec.from_json(v) for v in data["values"]]
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValueError(f"malformed step function: {exc}") from exc
        return cls.from_values(level, values, kind)

    def __repr__(self):
        return (f"StepFunction(level={self._level}, kind={self._kind.value}, "
                f"coords={self._coords.tolist()})")


def align(*fs):
    """Refine to a common level and express all data on common columns."""
    level = max(f.level for f in fs)
    coords = np.unique(np.concatenate([f.coords for f in fs])) if fs else \
        np.zeros(0, dtype=np.int64)
    return level, coords, [f.refine(level).dense(coords) for f in fs]


def indicator_function(s, value, kind):
    """``1_s value`` as a step function at the level of ``s``."""
    if not isinstance(value, SeqVec):
        value = SeqVec(value)
    coords = list(value.support)
    row = value.dense(coords)
    data = np.outer(s.indicator().astype(float), row)
    return StepFunction(s.level, data, coords, kind)


def _on(f, s):
    level = max(f.level, s.level)
    return f.refine(level), s.indicator(level)


def integral(f, s=None):
    """Bochner integral of ``f`` over ``s`` (whole space by default)."""
    if s is None:
        s = DyadicSet.full(0)
    g, ind = _on(f, s)
    total = (g.data[ind].sum(axis=0) * 2.0 ** -g.level
             if g.coords.size else np.zeros(0))
    return SeqVec.from_dense(g.coords, total)


def average(f, s=None):
    """Average value over ``s``; the zero vector when ``s`` is null."""
    if s is None:
        s = DyadicSet.full(0)
    mu = s.measure()
    if mu == 0:
        return SeqVec()
    return integral(f, s) / float(mu)


def l1_norm(f, s=None):
    """``int_s ||f|| dmu`` (whole space by default)."""
    if s is None:
        return float(f.norms().sum() * 2.0 ** -f.level)
    g, ind = _on(f, s)
    return float(g.norms()[ind].sum() * 2.0 ** -g.level)


def pointwise_norm(f):
    return StepFunction.real(f.level, f.norms(), f.kind)


def truncate(f, bound):
    """``f 1_[||f|| <= bound]``."""
    if bound < 0:
        raise ValueError("truncation level must be non-negative")
    keep = f.norms() <= bound
    return StepFunction(f.level, f.data * keep[:, None], f.coords, f.kind)


def cond_expectation(f, partition):
    """Replace ``f`` on each block by its average there."""
    level = max(f.level, partition.level)
    g = f.refine(level)
    labels = np.full(1 << level, -1, dtype=np.int64)
    blocks = list(partition.all_blocks())
    for i, b in enumerate(blocks):
        labels[b.indicator(level)] = i
    out = np.zeros_like(g.data)
    for i in range(len(blocks)):
        sel = labels == i
        if np.any(sel):
            out[sel] = g.data[sel].mean(axis=0)
    return StepFunction(level, out, g.coords, g.kind)


def scalarize(f, xstar):
    """The real-valued function ``omega -> x*(f(omega))``."""
    if not isinstance(xstar, Functional):
        raise TypeError("scalarize needs a Functional")
    if xstar.kind is not f.kind:
        raise KindMismatchError(
            f"functional acts on {xstar.kind.value}, f is {f.kind.value}")
    if f.coords.size == 0:
        return StepFunction.real(f.level, np.zeros(f.n_atoms), f.kind)
    weights = xstar.coeffs.dense(f.coords)
    return StepFunction.real(f.level, f.data @ weights, f.kind)


def constancy_partition(f):
    """Partition of [0, 1) into the level sets of ``f`` (first-seen order)."""
    if f.coords.size == 0:
        return DyadicPartition([DyadicSet.full(f.level)])
    _, labels = np.unique(f.data, axis=0, return_inverse=True)
    labels = labels.reshape(-1)
    order = {}
    relabeled = np.array([order.setdefault(int(x), len(order))
                          for x in labels])
    return DyadicPartition.from_labels(f.level, relabeled)


class FunctionSequence:
    """A finite prefix ``f_1 .. f_K`` with an optional limit candidate.

    Members are addressed 1-based through :meth:`member`; ``members`` is a
    plain tuple.
    """

    def __init__(self, members, limit=None, label=""):
        members = tuple(members)
        kinds = {m.kind for m in members}
        if limit is not None:
            kinds.add(limit.kind)
        if len(kinds) > 1:
            raise KindMismatchError("sequence members live in different spaces")
        self.members = members
        self.limit = limit
        self.label = label
        self.kind = kinds.pop() if kinds else SpaceKind.L2

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def member(self, k):
        if not 1 <= k <= len(self.members):
            raise IndexError(f"member {k} outside 1..{len(self.members)}")
        return self.members[k - 1]

    @property
    def max_level(self):
        levels = [m.level for m in self.members]
        if self.limit is not None:
            levels.append(self.limit.level)
        return max(levels, default=0)

    def limit_or_zero(self):
        if self.limit is not None:
            return self.limit
        return StepFunction.zero(self.kind)

    def deviations(self):
        """``f_k - f_0`` for each member (``f_0 = 0`` when absent)."""
        f0 = self.limit_or_zero()
        return [m - f0 for m in self.members]

    def shifted(self, g):
        """The sequence ``(f_k + g)``; the limit shifts too."""
        return FunctionSequence([m + g for m in self.members],
                                None if self.limit is None else self.limit + g,
                                self.label)

    def prefix(self, n):
        return FunctionSequence(self.members[:n], self.limit, self.label)

    def to_json(self):
        return {
            "label": self.label,
            "members": [m.to_json() for m in self.members],
            "limit": None if self.limit is None else self.limit.to_json(),
        }

    @classmethod
    def from_json(cls, data):
        """Accept either a bare array of step functions or an object with
        ``members`` and optional ``limit`` / ``label``."""
        if isinstance(data, list):
            return cls([StepFunction.from_json(d) for d in data])
        if not isinstance(data, dict) or "members" not in data:
            raise ValueError("sequence JSON needs a 'members' array")
        limit = data.get("limit")
        return cls([StepFunction.from_json(d) for d in data["members"]],
                   None if limit is None else StepFunction.from_json(limit),
                   str(data.get("label", "")))

    def __repr__(self):
        return (f"FunctionSequence({self.label!r}, K={len(self.members)}, "
                f"limit={'yes' if self.limit is not None else 'no'})")
