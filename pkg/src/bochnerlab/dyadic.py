"""Dyadic subsets of [0, 1) with exact Lebesgue measure.

A set at level ``n`` is a union of the atoms ``[i 2^-n, (i+1) 2^-n)``,
``i = 0 .. 2^n - 1``, stored as a Python integer bitmask (bit ``i`` is
atom ``i``). Measures are :class:`fractions.Fraction` values.
"""

from fractions import Fraction
from itertools import combinations

import numpy as np

from . import config

__all__ = [
    "DyadicSet",
    "DyadicPartition",
    "measure",
    "refine",
    "intersect",
    "union",
    "complement",
    "difference",
    "subsets_of",
    "dyadic_interval",
    "common_level",
]


def _bits_to_int(bits):
    packed = np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def _int_to_bits(mask, n_atoms):
    nbytes = max(1, (n_atoms + 7) // 8)
    raw = np.frombuffer(mask.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n_atoms].astype(bool)


class DyadicSet:
    """Finite union of dyadic atoms at a fixed resolution level.

    Instances are immutable and hashable. Two sets describing the same
    subset of [0, 1) at different levels compare unequal; use
    :meth:`same_points` for level-independent comparison.
    """

    __slots__ = ("_level", "_mask")

    def __init__(self, level, mask):
        config.check_level(level)
        mask = int(mask)
        if mask < 0 or mask >> (1 << level):
            raise ValueError(f"mask {mask:#x} does not fit level {level}")
        object.__setattr__(self, "_level", int(level))
        object.__setattr__(self, "_mask", mask)

    def __setattr__(self, name, value):
        raise AttributeError("DyadicSet is immutable")

    @property
    def level(self):
        return self._level

    @property
    def mask(self):
        return self._mask

    @property
    def n_atoms(self):
        return 1 << self._level

    @classmethod
    def full(cls, level=0):
        return cls(level, (1 << (1 << level)) - 1)

    @classmethod
    def empty(cls, level=0):
        return cls(level, 0)

    @classmethod
    def atom(cls, level, index):
        """Atom ``[index 2^-level, (index+1) 2^-level)`` (0-based index)."""
        if not 0 <= index < (1 << level):
            raise IndexError(f"atom {index} out of range at level {level}")
        return cls(level, 1 << index)

    @classmethod
    def from_indicator(cls, level, indicator):
        indicator = np.asarray(indicator, dtype=bool)
        if indicator.shape != (1 << level,):
            raise ValueError("indicator length must be 2**level")
        return cls(level, _bits_to_int(indicator))

    @classmethod
    def from_atoms(cls, level, indices):
        mask = 0
        for i in indices:
            if not 0 <= i < (1 << level):
                raise IndexError(f"atom {i} out of range at level {level}")
            mask |= 1 << i
        return cls(level, mask)

    @classmethod
    def parse(cls, text):
        """Inverse of :meth:`to_text` (``"level:hexmask"``)."""
        try:
            level_text, hex_text = text.strip().split(":")
            return cls(int(level_text), int(hex_text, 16))
        except config.ResolutionError:
            raise
        except ValueError as exc:
            raise ValueError(f"malformed dyadic set {text!r}") from exc

    def to_text(self):
        return f"{self._level}:{self._mask:x}"

    def indicator(self, level=None):
        """Boolean membership array over the atoms at ``level``."""
        level = self._level if level is None else level
        if level < self._level:
            raise ValueError("cannot coarsen a dyadic set")
        bits = _int_to_bits(self._mask, 1 << self._level)
        return np.repeat(bits, 1 << (level - self._level))

    def atoms(self):
        """Indices of member atoms, ascending."""
        return np.flatnonzero(_int_to_bits(self._mask, 1 << self._level))

    def count(self):
        return self._mask.bit_count()

    def measure(self):
        return Fraction(self.count(), 1 << self._level)

    def is_empty(self):
        return self._mask == 0

    def refine(self, new_level):
        if new_level < self._level:
            raise ValueError(
                f"refine target {new_level} below level {self._level}")
        config.check_level(new_level)
        if new_level == self._level:
            return self
        return DyadicSet.from_indicator(new_level, self.indicator(new_level))

    def coarsest(self):
        """The same point set at the lowest level that represents it."""
        current = self
        while current._level > 0:
            bits = _int_to_bits(current._mask, 1 << current._level)
            pairs = bits.reshape(-1, 2)
            if not np.all(pairs[:, 0] == pairs[:, 1]):
                break
            current = DyadicSet.from_indicator(current._level - 1, pairs[:, 0])
        return current

    def same_points(self, other):
        a, b = _aligned(self, other)
        return a._mask == b._mask

    def issubset(self, other):
        a, b = _aligned(self, other)
        return a._mask & ~b._mask == 0

    def __and__(self, other):
        return intersect(self, other)

    def __or__(self, other):
        return union(self, other)

    def __sub__(self, other):
        return difference(self, other)

    def __invert__(self):
        return complement(self)

    def __eq__(self, other):
        if not isinstance(other, DyadicSet):
            return NotImplemented
        return self._level == other._level and self._mask == other._mask

    def __hash__(self):
        return hash((self._level, self._mask))

    def __repr__(self):
        return f"DyadicSet({self.to_text()!r})"


def dyadic_interval(j, i):
    """The interval ``[(i-1) 2^-j, i 2^-j)`` (1-based ``i``)."""
    return DyadicSet.atom(j, i - 1)


def common_level(*levels):
    return max(levels) if levels else 0


def _aligned(s, t):
    level = max(s.level, t.level)
    return s.refine(level), t.refine(level)


def measure(s):
    return s.measure()


def refine(s, new_level):
    return s.refine(new_level)


def intersect(s, t):
    a, b = _aligned(s, t)
    return DyadicSet(a.level, a.mask & b.mask)


def union(s, t):
    a, b = _aligned(s, t)
    return DyadicSet(a.level, a.mask | b.mask)


def difference(s, t):
    a, b = _aligned(s, t)
    return DyadicSet(a.level, a.mask & ~b.mask)


def complement(s):
    return DyadicSet(s.level, ((1 << (1 << s.level)) - 1) ^ s.mask)


def subsets_of(b, level=None, *, limit=None):
    """Yield every nonempty dyadic subset of ``b`` at ``level``.

    Subsets are produced by increasing atom count, then lexicographically
    by atom index. There are ``2**m - 1`` of them where ``m`` is the atom
    count of ``b`` at ``level``; ``limit`` (default: the configured
    ``max_subsets``) guards against runaway enumeration.
    """
    level = b.level if level is None else level
    base = b.refine(level)
    atoms = [int(i) for i in base.atoms()]
    limit = config.max_subsets() if limit is None else limit
    total = (1 << len(atoms)) - 1
    if total > limit:
        raise OverflowError(
            f"{total} subsets of {b.to_text()} at level {level} exceed "
            f"limit {limit}")
    for r in range(1, len(atoms) + 1):
        for combo in combinations(atoms, r):
            mask = 0
            for i in combo:
                mask |= 1 << i
            yield DyadicSet(level, mask)


class DyadicPartition:
    """Pairwise-disjoint dyadic blocks covering [0, 1).

    ``blocks`` are the regular blocks ``A_1 .. A_p``; ``exceptional`` is the
    optional small block ``A_0``. All blocks are stored at one level.
    """

    __slots__ = ("_blocks", "_exceptional", "_level")

    def __init__(self, blocks, exceptional=None):
        blocks = list(blocks)
        pieces = blocks + ([exceptional] if exceptional is not None else [])
        if not pieces:
            raise ValueError("a partition needs at least one block")
        level = max(p.level for p in pieces)
        blocks = tuple(b.refine(level) for b in blocks)
        if exceptional is not None:
            exceptional = exceptional.refine(level)
        seen = 0
        for p in blocks + ((exceptional,) if exceptional is not None else ()):
            if seen & p.mask:
                raise ValueError("partition blocks overlap")
            seen |= p.mask
        if seen != (1 << (1 << level)) - 1:
            raise ValueError("partition blocks do not cover [0, 1)")
        object.__setattr__(self, "_blocks", blocks)
        object.__setattr__(self, "_exceptional", exceptional)
        object.__setattr__(self, "_level", level)

    def __setattr__(self, name, value):
        raise AttributeError("DyadicPartition is immutable")

    @property
    def blocks(self):
        return self._blocks

    @property
    def exceptional(self):
        return self._exceptional

    @property
    def level(self):
        return self._level

    def all_blocks(self):
        if self._exceptional is None:
            return self._blocks
        return (self._exceptional,) + self._blocks

    @classmethod
    def atoms(cls, level):
        return cls([DyadicSet.atom(level, i) for i in range(1 << level)])

    @classmethod
    def trivial(cls):
        return cls([DyadicSet.full(0)])

    @classmethod
    def from_labels(cls, level, labels, exceptional_label=None):
        """Group atoms by label; ``exceptional_label`` marks ``A_0``."""
        labels = np.asarray(labels)
        if labels.shape != (1 << level,):
            raise ValueError("labels length must be 2**level")
        blocks = []
        exceptional = None
        for lab in dict.fromkeys(labels.tolist()):
            block = DyadicSet.from_indicator(level, labels == lab)
            if exceptional_label is not None and lab == exceptional_label:
                exceptional = block
            else:
                blocks.append(block)
        if exceptional is None and exceptional_label is not None:
            exceptional = DyadicSet.empty(level)
        return cls(blocks, exceptional)

    def labels(self, level=None):
        """Block index per atom at ``level``; ``-1`` marks ``A_0``."""
        level = self._level if level is None else level
        out = np.full(1 << level, -1, dtype=np.int64)
        for i, b in enumerate(self._blocks):
            out[b.indicator(level)] = i
        return out

    def refine(self, level):
        return DyadicPartition([b.refine(level) for b in self._blocks],
                               None if self._exceptional is None
                               else self._exceptional.refine(level))

    def to_json(self):
        return {
            "blocks": [b.to_text() for b in self._blocks],
            "exceptional": (None if self._exceptional is None
                            else self._exceptional.to_text()),
        }

    @classmethod
    def from_json(cls, data):
        exc = data.get("exceptional")
        return cls([DyadicSet.parse(t) for t in data["blocks"]],
                   None if exc is None else DyadicSet.parse(exc))

    def __len__(self):
        return len(self._blocks)

    def __repr__(self):
        return f"DyadicPartition(level={self._level}, blocks={len(self)})"
