"""Spectral recovery of mixture components and weights from grouped data.

Pipeline for a target component count m:

1. Rescale coordinates by B = diag(1/sqrt(y)) for a reference measure y
   chosen so the rescaled components have distinct Euclidean norms.
2. Whiten: from the order-(2m-2) moment form C, build W = C^{-1/2} on
   its top-m eigenspace; W maps the weighted component powers to an
   orthonormal family.
3. Apply I (x) W (x) W to the order-(2m-1) moment and flatten to a
   d^m x d^{m-1} matrix T; the top m eigenvectors of T T^T are, up to
   sign, the rescaled components tensored with their whitened powers.
4. Contract each eigenvector (folded to a d x d^{m-1} map) against a
   probe vector, undo B, fix sign, clip stray negatives, normalize.
5. Fit weights by least squares against the order-(m-1) moment in the
   original coordinates, then map the solution onto the simplex.

A 4-samples-per-group variant for linearly independent components and a
rank-based estimator of the number of components are included.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import rng
from .estimation import MomentEstimate, build_c_hat, build_e_hat, empirical_sym_moment
from .model import (
    DiagonalMap,
    DominatingMeasure,
    MixtureSpec,
    b_map,
    check_distinct_norms,
    dominating_measure,
    population_moment,
    random_dominating_measure,
)
from .sampling import GroupedDataset, GroupTallyHistogram, num_compositions, tally
from .tensors import blockwise_apply, numerical_rank, outer_power, sym_eig, psd_sqrt_pinv, unfold

PROBE_NORM_TOL = 1e-10
MAX_PROBE_RETRIES = 16


class RecoveryError(RuntimeError):
    """A pipeline stage failed; the message names the stage."""


@dataclass(frozen=True)
class RecoveryConfig:
    """Algorithm choices for recover_full.

    dominating is a DominatingMeasure, None (identity rescaling), or a
    descriptor string: "none", "uniform", "sqgauss:<sigma>", or
    "fixed:<comma-separated values>"; random schemes are resolved from
    the run seed.  probe selects how folded eigenvectors are contracted
    to single vectors: "gaussian" (seeded random probe with retries) or
    "singular" (top left singular vector).
    """

    m: int
    dominating: DominatingMeasure | str | None = None
    probe: str = "gaussian"
    clip_negatives: bool = True
    eig_floor: float = 1e-8
    weight_solver: str = "clip-renormalize"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.probe not in ("gaussian", "singular"):
            raise ValueError(f"unknown probe {self.probe!r}")
        if self.weight_solver not in ("clip-renormalize", "simplex-projection"):
            raise ValueError(f"unknown weight solver {self.weight_solver!r}")

    def echo(self) -> dict:
        dom = self.dominating
        if isinstance(dom, DominatingMeasure):
            dom = {"y": dom.y.tolist()}
        return {
            "m": self.m,
            "dominating": dom,
            "probe": self.probe,
            "clip_negatives": self.clip_negatives,
            "eig_floor": self.eig_floor,
            "weight_solver": self.weight_solver,
        }


@dataclass(frozen=True)
class RecoveryResult:
    """Recovered components (rows), weights, and per-stage diagnostics."""

    components: np.ndarray
    weights: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.components.shape[0]

    def to_json(self) -> str:
        return json.dumps(
            {
                "components": self.components.tolist(),
                "weights": self.weights.tolist(),
                "diagnostics": self.diagnostics,
            }
        )


class WeightSolution(NamedTuple):
    weights: np.ndarray
    residual: float
    gram_condition: float


def resolve_dominating(
    spec: DominatingMeasure | str | None, d: int, seed: int
) -> DominatingMeasure | None:
    """Turn a descriptor into a concrete measure (None means identity)."""
    if spec is None or isinstance(spec, DominatingMeasure):
        return spec
    if spec == "none":
        return None
    if spec == "uniform":
        return random_dominating_measure(d, "uniform", seed)
    if spec.startswith("sqgauss:"):
        return random_dominating_measure(d, "sqgauss", seed, sigma=float(spec.split(":", 1)[1]))
    if spec.startswith("fixed:"):
        values = [float(v) for v in spec.split(":", 1)[1].split(",")]
        return dominating_measure(values)
    raise ValueError(f"unknown dominating-measure descriptor {spec!r}")


def whiten(c_hat: np.ndarray, m: int, eig_floor: float = 1e-8) -> np.ndarray:
    """Inverse square root of the moment form on its top-m eigenspace."""
    return psd_sqrt_pinv(c_hat, m, eig_floor)


def build_t_hat(q_hat: MomentEstimate | np.ndarray, w: np.ndarray) -> np.ndarray:
    """Flatten (I (x) W (x) W) q_hat to a d^m x d^{m-1} matrix.

    Rows index the leading m tensor axes, columns the trailing m-1; the
    population version of T T^T has the scaled rescaled components as
    its top m eigenvectors.
    """
    q = q_hat.tensor if isinstance(q_hat, MomentEstimate) else np.asarray(q_hat, dtype=np.float64)
    if q.ndim % 2 != 1:
        raise ValueError(f"expected an odd-order tensor, got order {q.ndim}")
    m = (q.ndim + 1) // 2
    d = q.shape[0]
    if m == 1:
        return q.reshape(d, 1)
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (d ** (m - 1), d ** (m - 1)):
        raise ValueError(f"whitener shape {w.shape} does not match d={d}, m={m}")
    a = blockwise_apply(q, [(1, None), (m - 1, w), (m - 1, w)])
    return a.reshape(d**m, d ** (m - 1))


def _contract_eigenvector(
    vec: np.ndarray, d: int, probe: str, probe_seed: int, stream: int
) -> np.ndarray:
    """Fold an eigenvector of the PSD operator to a d x (cols) map and
    contract it to a single d-vector."""
    mat = vec.reshape(d, -1)
    if probe == "singular":
        u_left, _, _ = np.linalg.svd(mat, full_matrices=False)
        return u_left[:, 0]
    cols = mat.shape[1]
    for attempt in range(MAX_PROBE_RETRIES):
        g = rng.normals(probe_seed, stream, cols, start=attempt * cols)
        u = mat @ g
        if np.linalg.norm(u) >= PROBE_NORM_TOL:
            return u
    raise RecoveryError(
        f"probe contraction stayed below {PROBE_NORM_TOL:g} after "
        f"{MAX_PROBE_RETRIES} attempts (degenerate eigenvector)"
    )


def _finalize_components(
    eigenvectors: np.ndarray,
    d: int,
    b: DiagonalMap | None,
    probe: str,
    seed: int,
    clip_negatives: bool,
) -> np.ndarray:
    probe_seed = rng.derive_seed(seed, rng.TAG_PROBE)
    binv = None if b is None else b.inverse()
    rows = []
    for i in range(eigenvectors.shape[1]):
        u = _contract_eigenvector(eigenvectors[:, i], d, probe, probe_seed, i)
        if binv is not None:
            u = binv.apply(u)
        if u.sum() < 0.0:
            u = -u
        if clip_negatives:
            u = np.maximum(u, 0.0)
        total = u.sum()
        if total <= 0.0:
            raise RecoveryError(f"component {i} vanished after sign correction and clipping")
        rows.append(u / total)
    return np.vstack(rows)


def extract_components(
    t_hat: np.ndarray,
    m: int,
    b: DiagonalMap | None,
    probe: str = "gaussian",
    seed: int = 0,
) -> np.ndarray:
    """Top-m eigenvectors of T T^T, contracted down to component rows.

    Output is invariant to eigenvector sign flips: the probe contraction
    carries any flip into an overall scalar, and the sign-then-normalize
    step removes it.
    """
    t_hat = np.asarray(t_hat, dtype=np.float64)
    d = int(round(t_hat.shape[0] ** (1.0 / m))) if m > 1 else t_hat.shape[0]
    if d**m != t_hat.shape[0]:
        raise ValueError(f"t_hat row count {t_hat.shape[0]} is not a perfect m-th power")
    dec = sym_eig(t_hat @ t_hat.T)
    return _finalize_components(dec.eigenvectors[:, :m], d, b, probe, seed, True)


def recover_weights(
    e_hat: MomentEstimate | np.ndarray,
    components: Sequence[np.ndarray] | np.ndarray,
    solver: str = "clip-renormalize",
) -> WeightSolution:
    """Least-squares mixture weights against the order-r moment.

    Solves the Gram system of the component r-fold powers (pseudo-
    inverse if nearly singular, with the condition number reported),
    then maps the raw solution onto the simplex per the chosen solver.
    The residual is the Frobenius misfit of the returned weights.
    """
    e = e_hat.tensor if isinstance(e_hat, MomentEstimate) else np.asarray(e_hat, dtype=np.float64)
    comp = np.atleast_2d(np.asarray(components, dtype=np.float64))
    m = comp.shape[0]
    r = e.ndim
    if m == 1:
        weights = np.array([1.0])
        return WeightSolution(weights, _weight_residual(e, comp, weights, r), 1.0)
    gram = (comp @ comp.T) ** r
    rhs = np.array([float(np.tensordot(e, outer_power(p, r), axes=r)) for p in comp])
    cond = float(np.linalg.cond(gram))
    alpha, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
    if solver == "clip-renormalize":
        weights = np.maximum(alpha, 0.0)
        total = weights.sum()
        if total <= 0.0:
            raise RecoveryError("weight solve produced no positive mass")
        weights /= total
    elif solver == "simplex-projection":
        weights = _project_simplex(alpha)
    else:
        raise ValueError(f"unknown weight solver {solver!r}")
    return WeightSolution(weights, _weight_residual(e, comp, weights, r), cond)


def _weight_residual(e: np.ndarray, comp: np.ndarray, weights: np.ndarray, r: int) -> float:
    fit = np.zeros_like(e)
    for w_i, p in zip(weights, comp):
        fit += w_i * outer_power(p, r)
    return float(np.linalg.norm((e - fit).ravel()))


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u + (1.0 - css) / idx > 0.0)[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _population_moment_b(mix: MixtureSpec, r: int, b: DiagonalMap | None) -> np.ndarray:
    t = population_moment(mix, r)
    if b is not None:
        t = t * outer_power(b.diag, r)
    return t


def _prepare_data(data, min_group_size: int):
    """Tally large raw datasets once so later moment passes reuse it."""
    if isinstance(data, GroupedDataset):
        if data.group_size < min_group_size:
            raise ValueError(f"group size {data.group_size} < required {min_group_size}")
        if data.n_groups > 10 * num_compositions(data.group_size, data.d):
            return tally(data)
        return data
    if isinstance(data, GroupTallyHistogram):
        if data.group_size < min_group_size:
            raise ValueError(f"group size {data.group_size} < required {min_group_size}")
        return data
    raise TypeError(f"unsupported data type {type(data).__name__}")


def recover_full(
    data: GroupedDataset | GroupTallyHistogram | MixtureSpec,
    config: RecoveryConfig,
    seed: int = 0,
) -> RecoveryResult:
    """Run the full pipeline; deterministic given the seed.

    Passing a MixtureSpec substitutes exact population moments for the
    empirical estimators (useful for validation); otherwise the data
    must have groups of at least 2m-1 draws.
    """
    m = config.m
    population = isinstance(data, MixtureSpec)
    stage = "setup"
    try:
        if population:
            d = data.d
        else:
            data = _prepare_data(data, max(2 * m - 1, 1))
            d = data.d
        xi = resolve_dominating(config.dominating, d, seed)
        b = None if xi is None else b_map(xi)

        if m == 1:
            stage = "mean"
            mean = (
                population_moment(data, 1)
                if population
                else empirical_sym_moment(data, 1).tensor
            )
            comps = np.atleast_2d(np.maximum(mean, 0.0))
            comps /= comps.sum()
            return RecoveryResult(
                comps,
                np.array([1.0]),
                {
                    "tt_eigenvalues": [float(np.dot(mean, mean))],
                    "whitening_spectrum": [1.0],
                    "weight_residual": 0.0,
                    "gram_condition": 1.0,
                    "seed": seed,
                    "config": config.echo(),
                },
            )

        stage = "dominating-measure check"
        if population and xi is not None:
            sep = check_distinct_norms(data, xi)
            if not sep.distinct:
                raise RecoveryError(
                    f"rescaled component norms separate by only {sep.min_gap:.3g}"
                )

        stage = "second-moment form"
        if population:
            c_hat = build_c_hat(_population_moment_b(data, 2 * m - 2, b), m, b)
        else:
            c_hat = build_c_hat(data, m, b)
        whitening_spectrum = sym_eig(c_hat).eigenvalues

        stage = "whitening"
        w = whiten(c_hat, m, config.eig_floor)

        stage = "odd-moment operator"
        q = (
            _population_moment_b(data, 2 * m - 1, b)
            if population
            else empirical_sym_moment(data, 2 * m - 1, b).tensor
        )
        t_hat = build_t_hat(q, w)

        stage = "component extraction"
        dec = sym_eig(t_hat @ t_hat.T)
        comps = _finalize_components(
            dec.eigenvectors[:, :m], d, b, config.probe, seed, config.clip_negatives
        )

        stage = "weight estimation"
        e = (
            population_moment(data, m - 1)
            if population
            else build_e_hat(data, m).tensor
        )
        weights, residual, cond = recover_weights(e, comps, config.weight_solver)
    except RecoveryError:
        raise
    except Exception as exc:
        raise RecoveryError(f"stage {stage!r} failed: {exc}") from exc

    return RecoveryResult(
        comps,
        weights,
        {
            "tt_eigenvalues": dec.eigenvalues.tolist(),
            "whitening_spectrum": whitening_spectrum.tolist(),
            "weight_residual": residual,
            "gram_condition": cond,
            "seed": seed,
            "config": config.echo(),
        },
    )


def li_recover_4(
    data: GroupedDataset | GroupTallyHistogram | MixtureSpec,
    m: int,
    probe: str = "gaussian",
    seed: int = 0,
    force: bool = False,
) -> RecoveryResult:
    """Recovery from 4 draws per group for linearly independent components.

    Works in the original coordinates (no rescaling): C is the order-2
    moment, W = C^{-1/2} on its top-m eigenspace, and I (x) W (x) I (x) W
    applied to the order-4 moment is flattened at split 2 into a PSD
    d^2 x d^2 operator whose top m eigenvectors factor as p_i (x) W p_i.
    Requires pairwise distinct component norms; in population mode this
    is checked and violations raise unless force=True.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    population = isinstance(data, MixtureSpec)
    stage = "setup"
    try:
        if population:
            d = data.d
            if not force and m > 1:
                sep = check_distinct_norms(data, dominating_measure(np.ones(d)))
                if not sep.distinct:
                    raise RecoveryError(
                        f"component norms separate by only {sep.min_gap:.3g}; "
                        "pass force=True to proceed anyway"
                    )
        else:
            data = _prepare_data(data, 4 if m > 1 else 1)
            d = data.d

        if m == 1:
            stage = "mean"
            mean = (
                population_moment(data, 1)
                if population
                else empirical_sym_moment(data, 1).tensor
            )
            comps = np.atleast_2d(np.maximum(mean, 0.0))
            comps /= comps.sum()
            return RecoveryResult(
                comps,
                np.array([1.0]),
                {"tt_eigenvalues": [], "whitening_spectrum": [], "seed": seed},
            )

        stage = "second-moment form"
        m2 = population_moment(data, 2) if population else empirical_sym_moment(data, 2).tensor
        c = 0.5 * (unfold(m2, 1) + unfold(m2, 1).T)
        whitening_spectrum = sym_eig(c).eigenvalues

        stage = "whitening"
        w = psd_sqrt_pinv(c, m)

        stage = "fourth-moment operator"
        m4 = population_moment(data, 4) if population else empirical_sym_moment(data, 4).tensor
        a = blockwise_apply(m4, [(1, None), (1, w), (1, None), (1, w)])
        s = a.reshape(d**2, d**2)
        s = 0.5 * (s + s.T)

        stage = "component extraction"
        dec = sym_eig(s)
        comps = _finalize_components(dec.eigenvectors[:, :m], d, None, probe, seed, True)

        stage = "weight estimation"
        r = min(m - 1, 2)
        e = (
            population_moment(data, r)
            if population
            else empirical_sym_moment(data, r).tensor
        )
        weights, residual, cond = recover_weights(e, comps)
    except RecoveryError:
        raise
    except Exception as exc:
        raise RecoveryError(f"stage {stage!r} failed: {exc}") from exc

    return RecoveryResult(
        comps,
        weights,
        {
            "tt_eigenvalues": dec.eigenvalues.tolist(),
            "whitening_spectrum": whitening_spectrum.tolist(),
            "weight_residual": residual,
            "gram_condition": cond,
            "seed": seed,
        },
    )


def estimate_num_components(
    data: GroupedDataset | GroupTallyHistogram | MixtureSpec,
    n: int,
    max_m: int | None = None,
    rel_tol: float = 1e-8,
) -> int:
    """Numerical rank of the order-2n moment unfolded at split n.

    For population input this equals the number of components once the
    n-fold powers of the components are linearly independent (n at least
    the span codimension); smaller n reports the span dimension instead.
    """
    if n < 1:
        raise ValueError(f"power must be >= 1, got {n}")
    if isinstance(data, MixtureSpec):
        t = population_moment(data, 2 * n)
    else:
        t = empirical_sym_moment(data, 2 * n).tensor
    rank = numerical_rank(unfold(t, n), rel_tol)
    return rank if max_m is None else min(rank, max_m)
