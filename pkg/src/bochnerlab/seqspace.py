"""Finite-support sequences in l1, l2 and l-infinity, and their duals."""

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpaceKind",
    "SeqVec",
    "Functional",
    "KindMismatchError",
    "norm",
    "pair",
    "dual_norm",
    "array_norms",
]


class KindMismatchError(ValueError):
    """Operands live in incompatible spaces."""


class SpaceKind(enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @property
    def dual(self):
        return _DUAL[self]

    @classmethod
    def parse(cls, text):
        try:
            return cls(str(text).lower())
        except ValueError:
            raise ValueError(f"unknown space kind {text!r}") from None


_DUAL = {SpaceKind.L1: SpaceKind.LINF,
         SpaceKind.L2: SpaceKind.L2,
         SpaceKind.LINF: SpaceKind.L1}


def array_norms(data, kind, axis=-1):
    """Row norms of a dense coordinate array."""
    data = np.asarray(data, dtype=float)
    if data.shape[axis] == 0:
        return np.zeros(data.shape[:axis] + data.shape[axis:][1:])
    if kind is SpaceKind.L1:
        return np.abs(data).sum(axis=axis)
    if kind is SpaceKind.L2:
        return np.sqrt(np.square(data).sum(axis=axis))
    return np.abs(data).max(axis=axis)


class SeqVec:
    """Immutable sparse real sequence with finitely many nonzero entries.

    Coordinates are non-negative integers; entries equal to zero are
    dropped on construction.
    """

    __slots__ = ("_items",)

    def __init__(self, entries=None):
        if entries is None:
            entries = {}
        elif not isinstance(entries, dict):
            entries = dict(entries)
        items = []
        for k, v in entries.items():
            k = int(k)
            if k < 0:
                raise ValueError(f"negative coordinate {k}")
            v = float(v)
            if not math.isfinite(v):
                raise ValueError(f"non-finite entry at coordinate {k}")
            if v != 0.0:
                items.append((k, v))
        items.sort()
        object.__setattr__(self, "_items", tuple(items))

    def __setattr__(self, name, value):
        raise AttributeError("SeqVec is immutable")

    @classmethod
    def unit(cls, k, scale=1.0):
        return cls({k: scale})

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def from_dense(cls, coords, values):
        return cls(zip((int(c) for c in coords), (float(v) for v in values)))

    @property
    def support(self):
        return tuple(k for k, _ in self._items)

    def items(self):
        return self._items

    def to_dict(self):
        return dict(self._items)

    def dense(self, coords):
        """Values at ``coords`` (missing coordinates are zero)."""
        d = dict(self._items)
        return np.array([d.get(int(c), 0.0) for c in coords], dtype=float)

    def __getitem__(self, k):
        for j, v in self._items:
            if j == k:
                return v
        return 0.0

    def __len__(self):
        return len(self._items)

    def __bool__(self):
        return bool(self._items)

    def _combine(self, other, a, b):
        out = dict()
        for k, v in self._items:
            out[k] = a * v
        for k, v in other._items:
            out[k] = out.get(k, 0.0) + b * v
        return SeqVec(out)

    def __add__(self, other):
        if not isinstance(other, SeqVec):
            return NotImplemented
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        if not isinstance(other, SeqVec):
            return NotImplemented
        return self._combine(other, 1.0, -1.0)

    def __neg__(self):
        return SeqVec({k: -v for k, v in self._items})

    def __mul__(self, scalar):
        scalar = float(scalar)
        return SeqVec({k: scalar * v for k, v in self._items})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        # divide entrywise; 1/scalar overflows for subnormal scalars
        scalar = float(scalar)
        return SeqVec({k: v / scalar for k, v in self._items})

    def norm(self, kind):
        return norm(self, kind)

    def dot(self, other):
        d = dict(other._items)
        return math.fsum(v * d[k] for k, v in self._items if k in d)

    def to_json(self):
        return {str(k): v for k, v in self._items}

    @classmethod
    def from_json(cls, data):
        return cls({int(k): float(v) for k, v in data.items()})

    def __eq__(self, other):
        if not isinstance(other, SeqVec):
            return NotImplemented
        return self._items == other._items

    def __hash__(self):
        return hash(self._items)

    def __repr__(self):
        body = ", ".join(f"{k}: {v:g}" for k, v in self._items)
        return f"SeqVec({{{body}}})"


def norm(v, kind):
    """Norm of ``v`` in the sequence space ``kind``."""
    vals = [abs(x) for _, x in v.items()]
    if not vals:
        return 0.0
    if kind is SpaceKind.L1:
        return math.fsum(vals)
    if kind is SpaceKind.L2:
        scale = max(vals)
        return scale * math.sqrt(math.fsum((x / scale) ** 2 for x in vals))
    return max(vals)


@dataclass(frozen=True)
class Functional:
    """A finitely supported element of the dual of ``kind``.

    ``kind`` names the primal space the functional acts on, so the
    functional's own norm is taken in ``kind.dual``.
    """

    coeffs: SeqVec
    kind: SpaceKind

    @classmethod
    def coordinate(cls, k, kind, scale=1.0):
        return cls(SeqVec.unit(k, scale), kind)

    @classmethod
    def from_dict(cls, entries, kind):
        return cls(SeqVec(entries), kind)

    def dual_norm(self):
        return norm(self.coeffs, self.kind.dual)

    def normalized(self):
        """Rescale into the dual unit ball (no-op when already inside)."""
        n = self.dual_norm()
        if n <= 1.0:
            return self
        return Functional(self.coeffs / n, self.kind)

    def __call__(self, v, kind=None):
        return pair(self, v, kind)

    def to_json(self):
        return {"kind": self.kind.value, "coeffs": self.coeffs.to_json()}

    @classmethod
    def from_json(cls, data):
        return cls(SeqVec.from_json(data["coeffs"]),
                   SpaceKind.parse(data["kind"]))


def pair(xstar, v, kind=None):
    """Evaluate the functional ``xstar`` at ``v``.

    ``kind`` is the ambient space of ``v`` when known; a mismatch with the
    functional's primal space raises :class:`KindMismatchError`.
    """
    if kind is not None and kind is not xstar.kind:
        raise KindMismatchError(
            f"functional acts on {xstar.kind.value}, vector is in {kind.value}")
    return xstar.coeffs.dot(v)


def dual_norm(xstar):
    return xstar.dual_norm()
