"""Mixture pairs witnessing sharpness of moment identifiability bounds.

Given t distinct mixing levels eps_i in [0, 1] and two distinct base
measures gamma, gamma', the blends mu_i = eps_i gamma + (1 - eps_i)
gamma' admit a signed dependence alpha with sum_i alpha_i mu_i^{(x) r}
= 0 for every r <= t - 2.  Splitting the alpha_i by sign and
renormalizing each side produces two different mixtures whose grouped-
sample laws agree at all orders up to t - 2 and differ at t - 1:

* t = 2m   gives two order-m mixtures agreeing at order 2m - 2, so
  2m - 2 draws per group cannot identify an order-m mixture;
* t = 2m+1 gives mixtures of orders m and m + 1 agreeing at order
  2m - 1, so 2m - 1 draws cannot pin down the number of components.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .model import MixtureSpec, make_mixture, population_moment, probability_vector

NULL_SPACE_TOL = 1e-10


class MomentComparison(NamedTuple):
    max_abs_diff: float
    equal: bool


@dataclass(frozen=True)
class CounterexamplePair:
    """Two distinct mixtures with matching moments up to eq_order = t - 2."""

    p: MixtureSpec
    p_prime: MixtureSpec
    t: int
    eq_order: int
    epsilons: np.ndarray
    alphas: np.ndarray

    def to_json(self) -> str:
        eq = verify_moment_equality(self.p, self.p_prime, self.eq_order)
        ineq = verify_moment_equality(self.p, self.p_prime, self.eq_order + 1)
        return json.dumps(
            {
                "t": self.t,
                "eq_order": self.eq_order,
                "epsilons": self.epsilons.tolist(),
                "alphas": self.alphas.tolist(),
                "p": json.loads(self.p.to_json()),
                "p_prime": json.loads(self.p_prime.to_json()),
                "verification": {
                    "max_diff_at_eq_order": eq.max_abs_diff,
                    "max_diff_above_eq_order": ineq.max_abs_diff,
                },
            }
        )


def dependence_coefficients(epsilons: Sequence[float]) -> np.ndarray:
    """Signed coefficients alpha with sum_i alpha_i mu_i^{(x)(t-2)} = 0.

    The blends mu_i live in a 2-dim space, so their (t-2)-fold powers
    have t-1 independent symmetric coordinates: column i of the
    (t-1) x t matrix M holds the binomial profile C(t-2, j) eps_i^j
    (1-eps_i)^{t-2-j}.  Distinct eps make the null space of M exactly
    one-dimensional; alpha is its unit-norm basis vector, sign-fixed so
    the last entry is positive.
    """
    eps = np.asarray(epsilons, dtype=np.float64)
    t = eps.size
    if t < 3:
        raise ValueError(f"need at least 3 mixing levels, got {t}")
    if np.unique(eps).size != t:
        raise ValueError("mixing levels must be distinct")
    j = np.arange(t - 1)
    coeff = np.array([math.comb(t - 2, int(v)) for v in j], dtype=np.float64)
    mat = coeff[:, None] * eps[None, :] ** j[:, None] * (1.0 - eps[None, :]) ** (t - 2 - j)[:, None]
    # Pad to square so the count of small singular values equals the null
    # space dimension (expected: exactly one, the padding's own zero).
    padded = np.vstack([mat, np.zeros((1, t))])
    _, sing, vt = np.linalg.svd(padded)
    small = sing < NULL_SPACE_TOL * sing[0]
    if small.sum() != 1:
        raise ValueError(
            f"null space dimension {int(small.sum())} != 1; mixing levels degenerate"
        )
    alpha = vt[-1]
    if np.abs(alpha).min() < NULL_SPACE_TOL:
        raise ValueError("dependence vector has a vanishing entry")
    if alpha[-1] < 0.0:
        alpha = -alpha
    return alpha


def build_pair(
    m: int,
    t: int,
    base: tuple[Sequence[float], Sequence[float]] | None = None,
    epsilons: Sequence[float] | None = None,
) -> CounterexamplePair:
    """Construct the sign-split pair for t = 2m or t = 2m + 1 levels.

    The side with the fewer levels becomes the first mixture (m
    components in both regimes); for t = 2m the tie goes to the side
    containing the smallest level.  Side weights are the |alpha_i|
    renormalized to sum 1.  Default levels are evenly spaced on [0, 1];
    default bases are the two coordinate measures on d = 2.
    """
    if t not in (2 * m, 2 * m + 1):
        raise ValueError(f"t must be 2m or 2m+1 for m={m}, got {t}")
    if base is None:
        gamma, gamma_prime = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    else:
        gamma = probability_vector(base[0])
        gamma_prime = probability_vector(base[1])
        if gamma.size != gamma_prime.size:
            raise ValueError("base measures must share a dimension")
    if np.abs(gamma - gamma_prime).max() <= 1e-12:
        raise ValueError("base measures must be distinct")
    if epsilons is None:
        eps = np.arange(t) / (t - 1.0)
    else:
        eps = np.sort(np.asarray(epsilons, dtype=np.float64))
        if eps.size != t:
            raise ValueError(f"expected {t} mixing levels, got {eps.size}")
        if eps[0] < 0.0 or eps[-1] > 1.0:
            raise ValueError("mixing levels must lie in [0, 1]")

    alpha = dependence_coefficients(eps)
    neg = np.nonzero(alpha < 0.0)[0]
    pos = np.nonzero(alpha > 0.0)[0]
    if min(neg.size, pos.size) != t // 2:
        raise ValueError(
            f"sign split {neg.size}/{pos.size} is unbalanced; choose other mixing levels"
        )
    # First mixture takes the smaller sign class (smallest level on ties),
    # with a global flip so that class carries the negative coefficients.
    if neg.size != pos.size:
        first = neg if neg.size < pos.size else pos
    else:
        first = neg if 0 in neg else pos
    if alpha[first[0]] > 0.0:
        alpha = -alpha
        neg, pos = pos, neg
    second = pos

    components = eps[:, None] * gamma[None, :] + (1.0 - eps[:, None]) * gamma_prime[None, :]

    def side(indices: np.ndarray) -> MixtureSpec:
        w = np.abs(alpha[indices])
        return make_mixture(w / w.sum(), components[indices])

    pair = CounterexamplePair(
        side(first), side(second), t, t - 2, np.ascontiguousarray(eps), alpha
    )
    check = verify_moment_equality(pair.p, pair.p_prime, pair.eq_order, tol=1e-8)
    if not check.equal:
        raise ValueError(
            f"construction failed: order-{pair.eq_order} moments differ by {check.max_abs_diff:.3g}"
        )
    return pair


def verify_moment_equality(
    p: MixtureSpec, p_prime: MixtureSpec, n: int, tol: float = 1e-9
) -> MomentComparison:
    """Max absolute entrywise gap between order-n population moments."""
    if p.d != p_prime.d:
        raise ValueError(f"dimension mismatch: {p.d} vs {p_prime.d}")
    if n < 1:
        raise ValueError(f"order must be >= 1, got {n}")
    diff = population_moment(p, n) - population_moment(p_prime, n)
    gap = float(np.abs(diff).max())
    return MomentComparison(gap, gap <= tol)
