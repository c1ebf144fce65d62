"""Brute-force reference implementations used as test oracles.

They work atom by atom on dense arrays and share no code with the library
beyond reading a step function's level, coordinates and data.
"""

from itertools import combinations, product

import numpy as np


def _norm(v, kind):
    v = np.asarray(v, dtype=float)
    if kind == "l1":
        return float(np.abs(v).sum(axis=-1)) if v.ndim == 1 else \
            np.abs(v).sum(axis=-1)
    if kind == "l2":
        return np.sqrt((v * v).sum(axis=-1))
    return np.abs(v).max(axis=-1, initial=0.0)


def norm(v, kind):
    return _norm(v, kind.value)


def pettis_by_atoms(f):
    """max over sign patterns of the atoms of ||sum s_i mu v_i||.

    The atom values are not merged, so this is independent of the block
    reduction used by the library. Feasible up to 2^16 patterns.
    """
    x = f.data * 2.0 ** -f.level
    n = x.shape[0]
    if x.shape[1] == 0:
        return 0.0
    if n > 17:
        raise ValueError("too many atoms for brute force")
    signs = np.array(list(product([1.0, -1.0], repeat=n - 1)))
    signs = np.hstack([np.ones((signs.shape[0], 1)), signs]) if n > 1 \
        else np.ones((1, 1))
    totals = signs @ x
    return float(np.max(_norm(totals, f.kind.value)))


def bocce_by_loop(f, level, atoms):
    """(1/|A|) sum over atoms of ||f(atom) - mean||, with A given as atom
    indices at ``level`` >= f.level."""
    if not atoms:
        return 0.0
    shift = level - f.level
    rows = [f.data[i >> shift] for i in atoms]
    if f.data.shape[1] == 0:
        return 0.0
    mean = sum(rows) / len(rows)
    return float(sum(_norm(r - mean, f.kind.value) for r in rows) / len(rows))


def all_masks(n):
    return range(1, 1 << n)


def small_mean_brute(values, eps):
    """Whether every nonempty B has a nonempty A inside with mean < eps,
    by explicit enumeration of (B, A) pairs. Use with <= 8 atoms."""
    n = len(values)
    for b in all_masks(n):
        atoms = [i for i in range(n) if b >> i & 1]
        ok = False
        for r in range(1, len(atoms) + 1):
            for a in combinations(atoms, r):
                if sum(values[i] for i in a) / r < eps:
                    ok = True
                    break
            if ok:
                break
        if not ok:
            return False
    return True


def small_mean_min_atom(values, eps):
    """Same property, enumerating every B and using that the smallest mean
    over subsets of B is its smallest atom value."""
    values = np.asarray(values, dtype=float)
    n = values.size
    masks = np.arange(1, 1 << n)
    bits = (masks[:, None] >> np.arange(n)[None, :]) & 1
    mins = np.where(bits == 1, values[None, :], np.inf).min(axis=1)
    return bool(np.all(mins < eps))
