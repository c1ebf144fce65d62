"""Pure NumPy implementations of the hot kernels.

Contracts are shared with the compiled ``_ckernels`` module; see
``_backend`` for selection. Kind codes: 0 = l1, 1 = l2, 2 = l-infinity.

Sign patterns are numbered so that pattern ``p`` gives row ``i >= 1`` a
negative sign iff bit ``m - 1 - i`` of ``p`` is set; row 0 is always
positive. Increasing ``p`` is therefore lexicographic order on
``(s_1, ..., s_{m-1})`` with ``+`` before ``-``.
"""

import numpy as np

_CHUNK_ELEMS = 1 << 22


def _row_norms(a, kind):
    if a.shape[-1] == 0:
        return np.zeros(a.shape[:-1])
    if kind == 0:
        return np.abs(a).sum(axis=-1)
    if kind == 1:
        return np.sqrt(np.square(a).sum(axis=-1))
    return np.abs(a).max(axis=-1)


def _signs(start, stop, width):
    p = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    bits = (p[:, None] >> shifts[None, :]) & 1
    return 1.0 - 2.0 * bits


def sign_pattern_norms(weighted, kind):
    """Norm of ``sum_i s_i weighted[i]`` for every sign pattern with s_0 = +1."""
    w = np.ascontiguousarray(weighted, dtype=np.float64)
    m, d = w.shape
    if m == 0:
        return np.zeros(1)
    n_pat = 1 << (m - 1)
    out = np.empty(n_pat)
    step = max(1, _CHUNK_ELEMS // max(d * max(m, 1), 1))
    for start in range(0, n_pat, step):
        stop = min(start + step, n_pat)
        signs = _signs(start, stop, m - 1)
        sums = w[0][None, :] + signs @ w[1:]
        out[start:stop] = _row_norms(sums, kind)
    return out


def dual_vertex_values(values, weights):
    """``sum_i weights[i] |<y, values[i]>|`` for every y in {-1, +1}^D, y_0 = +1."""
    v = np.ascontiguousarray(values, dtype=np.float64)
    mu = np.ascontiguousarray(weights, dtype=np.float64)
    m, d = v.shape
    if d == 0:
        return np.zeros(1)
    n_pat = 1 << (d - 1)
    out = np.empty(n_pat)
    step = max(1, _CHUNK_ELEMS // max(d * max(m, 1), 1))
    for start in range(0, n_pat, step):
        stop = min(start + step, n_pat)
        ys = np.concatenate(
            [np.ones((stop - start, 1)), _signs(start, stop, d - 1)], axis=1)
        out[start:stop] = np.abs(ys @ v.T) @ mu
    return out


def bocce_osc_masks(x, w, cell, masks, kind):
    """Bocce oscillation of a step function over many unions of cells.

    ``x[a]`` is the value on atom ``a`` with weight (measure) ``w[a]``;
    ``cell[a]`` is the local cell index of the atom, or ``-1`` when the atom
    lies outside every candidate set. Bit ``c`` of ``masks[s]`` selects cell
    ``c`` for set ``s``. Returns zero for sets of zero weight.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    cell = np.asarray(cell, dtype=np.int64)
    masks = np.asarray(masks, dtype=np.uint64)
    keep = cell >= 0
    x, w, cell = x[keep], w[keep], cell[keep]
    n, d = x.shape
    out = np.zeros(masks.shape[0])
    if n == 0 or masks.shape[0] == 0:
        return out
    shifts = cell.astype(np.uint64)
    step = max(1, _CHUNK_ELEMS // max(n * max(d, 1), 1))
    for start in range(0, masks.shape[0], step):
        chunk = masks[start:start + step]
        member = ((chunk[:, None] >> shifts[None, :]) & np.uint64(1)).astype(
            np.float64)
        mw = member * w[None, :]
        total = mw.sum(axis=1)
        safe = np.where(total > 0, total, 1.0)
        means = (mw @ x) / safe[:, None]
        dev = _row_norms(x[None, :, :] - means[:, None, :], kind)
        osc = (mw * dev).sum(axis=1) / safe
        out[start:start + chunk.shape[0]] = np.where(total > 0, osc, 0.0)
    return out
