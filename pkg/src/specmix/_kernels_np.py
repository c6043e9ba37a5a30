"""Pure numpy sampling and tally-key kernels.

Fallback used when the compiled extension is unavailable.  Both backends
implement the same contract: the counter scheme documented in rng.py and
inverse-CDF search on caller-provided cumulative arrays, producing
bit-identical output.
"""
from __future__ import annotations

import numpy as np

from .rng import COUNTER_MULT, GOLD, MASK, STREAM_MULT, _mix64_array, mix64, to_unit

_U64 = np.uint64


def sample_groups(seed, n_groups, group_size, cum_weights, cum_components, start=0):
    """Draw category codes for n_groups groups.

    Parameters
    ----------
    seed : int
        Subsystem seed (already tag-derived by the caller).
    cum_weights : (m,) float64
        Cumulative mixture weights.
    cum_components : (m, d) float64
        Cumulative category masses per component, rows nondecreasing.
    start : int
        Index of the first group; group g uses stream ``start + g`` so a
        dataset may be produced in blocks without changing the result.

    Returns
    -------
    (n_groups, group_size) uint8 array of 0-based category codes.
    """
    cum_weights = np.asarray(cum_weights, dtype=np.float64)
    cum_components = np.asarray(cum_components, dtype=np.float64)
    n_comp, d = cum_components.shape
    streams = np.arange(start, start + n_groups, dtype=np.uint64)
    seed_mixed = _U64(mix64((int(seed) + GOLD) & MASK))
    bases = _mix64_array(seed_mixed ^ (streams * _U64(STREAM_MULT)))

    u = to_unit(_mix64_array(bases))  # counter 0: component pick
    comp = np.searchsorted(cum_weights, u, side="right")
    np.minimum(comp, n_comp - 1, out=comp)

    out = np.empty((n_groups, group_size), dtype=np.uint8)
    for j in range(group_size):
        w = _mix64_array(bases ^ _U64(((j + 1) * COUNTER_MULT) & MASK))
        u = to_unit(w)
        cats = np.empty(n_groups, dtype=np.int64)
        for c in range(n_comp):
            mask = comp == c
            if mask.any():
                cats[mask] = np.searchsorted(cum_components[c], u[mask], side="right")
        np.minimum(cats, d - 1, out=cats)
        out[:, j] = cats
    return out


def group_keys(groups, d):
    """Encode each group's category tally as one base-(k+1) integer.

    Each draw of category c contributes (k+1)**c, so a group with tally
    (c_0, .., c_{d-1}) maps to sum c_j (k+1)**j; no carries occur because
    every c_j <= k.  The caller guarantees (k+1)**d fits in int64.
    """
    groups = np.asarray(groups)
    n, k = groups.shape
    pows = (k + 1) ** np.arange(d, dtype=np.int64)
    keys = np.zeros(n, dtype=np.int64)
    for j in range(k):
        keys += pows[groups[:, j].astype(np.int64)]
    return keys
