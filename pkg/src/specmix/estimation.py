"""Empirical symmetrized moment tensors from grouped data.

The order-r estimator is the plain average, over groups and over all
ordered r-tuples of distinct within-group positions, of the outer
product of the selected one-hot draws (optionally rescaled coordinate-
wise by a diagonal map).  Its expectation is sum_i w_i (B p_i)^{(x) r}.

Two evaluation paths produce bit-identical tensors: a direct sum over
position tuples, and a tally path that reads off, for each per-group
category tally, how many ordered tuples hit each multi-index (a product
of falling factorials).  The tally path costs O(#distinct tallies x d^r)
and is the only practical one at 10^7 groups.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .model import DiagonalMap
from .sampling import GroupedDataset, GroupTallyHistogram, num_compositions, tally
from .tensors import outer_power, unfold

# Auto-dispatch: tallying wins once groups outnumber possible tallies by
# this factor (the histogram is then dense and amortized).
TALLY_FACTOR = 10


@dataclass(frozen=True)
class MomentEstimate:
    """Symmetric order-r moment tensor plus provenance.

    transform is the diagonal map applied to each draw (None means
    identity); with identity transform the entries are nonnegative and
    sum to 1 up to float division.
    """

    tensor: np.ndarray
    order: int
    n_groups: int
    transform: DiagonalMap | None = None

    @property
    def dim(self) -> int:
        return self.tensor.shape[0]

    def to_json(self) -> str:
        diag = None if self.transform is None else self.transform.diag.tolist()
        return json.dumps(
            {
                "order": self.order,
                "dim": self.dim,
                "n_groups": self.n_groups,
                "transform": diag,
                "entries": self.tensor.ravel().tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "MomentEstimate":
        obj = json.loads(text)
        order, dim = int(obj["order"]), int(obj["dim"])
        tensor = np.array(obj["entries"], dtype=np.float64).reshape((dim,) * order)
        transform = None if obj["transform"] is None else DiagonalMap(np.array(obj["transform"]))
        return cls(tensor, order, int(obj["n_groups"]), transform)


def _scale_by_diag(tensor: np.ndarray, diag: np.ndarray, r: int) -> np.ndarray:
    return tensor * outer_power(diag, r)


def _raw_counts(ds: GroupedDataset, r: int) -> np.ndarray:
    """Sum over groups and ordered distinct-position r-tuples of one-hot
    outer products; integer-valued, accumulated exactly in float64."""
    d, k = ds.d, ds.group_size
    groups = ds.groups.astype(np.int64)
    place = d ** np.arange(r - 1, -1, -1, dtype=np.int64)
    counts = np.zeros(d**r)
    for pos in itertools.permutations(range(k), r):
        flat = groups[:, pos] @ place
        counts += np.bincount(flat, minlength=d**r)
    return counts.reshape((d,) * r)


def _tally_counts(h: GroupTallyHistogram, r: int) -> np.ndarray:
    """Tally-path equivalent of _raw_counts.

    A group with tally a contributes prod_c falling(a_c, b_c) ordered
    tuples at every multi-index whose own tally is b; falling factorials
    are read from a small precomputed table.
    """
    d, k = h.d, h.group_size
    ff = np.zeros((k + 1, r + 1), dtype=np.int64)
    for a in range(k + 1):
        for b in range(min(a, r) + 1):
            ff[a, b] = math.perm(a, b)
    idx = np.indices((d,) * r).reshape(r, -1)
    index_tally = np.stack([(idx == c).sum(axis=0) for c in range(d)], axis=1)
    counts = np.zeros(d**r)
    for key, n in h.counts.items():
        a = np.array(key, dtype=np.int64)
        per_index = ff[a[None, :], index_tally].prod(axis=1)
        counts += float(n) * per_index
    return counts.reshape((d,) * r)


def empirical_sym_moment(
    data: GroupedDataset | GroupTallyHistogram,
    r: int,
    b: DiagonalMap | None = None,
    method: str = "auto",
) -> MomentEstimate:
    """Order-r symmetrized moment estimate from a dataset or histogram.

    method: "auto" tallies large datasets first, "raw" forces the
    position-tuple sum, "tally" forces histogram evaluation.  All paths
    agree bit-for-bit because both sum the same integers.
    """
    if isinstance(data, GroupTallyHistogram):
        return moment_from_tally(data, r, b)
    k, n = data.group_size, data.n_groups
    if not 1 <= r <= k:
        raise ValueError(f"moment order {r} not in [1, {k}]")
    if method == "auto":
        method = "tally" if n > TALLY_FACTOR * num_compositions(k, data.d) else "raw"
    if method == "tally":
        return moment_from_tally(tally(data), r, b)
    if method != "raw":
        raise ValueError(f"unknown method {method!r}")
    tensor = _raw_counts(data, r) / (n * math.perm(k, r))
    if b is not None:
        tensor = _scale_by_diag(tensor, b.diag, r)
    return MomentEstimate(tensor, r, n, b)


def moment_from_tally(
    h: GroupTallyHistogram, r: int, b: DiagonalMap | None = None
) -> MomentEstimate:
    """Order-r moment from a tally histogram; identical to the raw path."""
    k, n = h.group_size, h.n_groups
    if not 1 <= r <= k:
        raise ValueError(f"moment order {r} not in [1, {k}]")
    tensor = _tally_counts(h, r) / (n * math.perm(k, r))
    if b is not None:
        tensor = _scale_by_diag(tensor, b.diag, r)
    return MomentEstimate(tensor, r, n, b)


def build_c_hat(
    data: GroupedDataset | GroupTallyHistogram | MomentEstimate | np.ndarray,
    m: int,
    b: DiagonalMap,
) -> np.ndarray:
    """Second-moment operator of the transformed (m-1)-fold draws.

    The order-(2m-2) moment under b, unfolded at split m-1 to a
    d^{m-1} x d^{m-1} matrix and symmetrized; its expectation is the
    Gram-weighted sum of (B p_i)^{(x)(m-1)} projectors, the operator the
    whitening step inverts.  A precomputed moment (estimate or tensor,
    already transformed) is accepted for population work.
    """
    if m < 1:
        raise ValueError(f"component count must be >= 1, got {m}")
    if m == 1:
        return np.ones((1, 1))
    tensor = _resolve_moment(data, 2 * m - 2, b)
    mat = unfold(tensor, m - 1)
    return 0.5 * (mat + mat.T)


def build_e_hat(data: GroupedDataset | GroupTallyHistogram, m: int) -> MomentEstimate:
    """Order-(m-1) moment in the original space, for the weight solve."""
    if m < 2:
        raise ValueError(f"component count must be >= 2, got {m}")
    return empirical_sym_moment(data, m - 1, None)


def _resolve_moment(data, r: int, b: DiagonalMap | None) -> np.ndarray:
    if isinstance(data, MomentEstimate):
        if data.order != r:
            raise ValueError(f"expected an order-{r} moment, got order {data.order}")
        return data.tensor
    if isinstance(data, np.ndarray):
        if data.ndim != r:
            raise ValueError(f"expected an order-{r} tensor, got order {data.ndim}")
        return data
    return empirical_sym_moment(data, r, b).tensor
