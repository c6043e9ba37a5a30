"""Evaluation metrics, random baseline, and the replicated experiment harness.

Component estimates are unordered, so accuracy is the matched L1 error:
the best average L1 distance over pairings of estimated to true
components.  The harness draws data, runs the recovery pipeline, and
aggregates matched errors over replicates, with per-replicate seeds
derived from one master seed so whole reports are reproducible.
"""
from __future__ import annotations

import csv
import itertools
import json
import time
from dataclasses import dataclass, field, replace
from typing import IO, NamedTuple, Sequence

import numpy as np

from . import rng
from .model import DominatingMeasure, MixtureSpec, make_mixture
from .recovery import (
    RecoveryConfig,
    RecoveryError,
    recover_full,
    resolve_dominating,
)
from .sampling import draw_groups

MAX_MATCH_SIZE = 8


def matched_l1_error(truth: Sequence[np.ndarray] | np.ndarray, est: Sequence[np.ndarray] | np.ndarray) -> float:
    """Min over pairings of the average L1 distance between components.

    Exhaustive over all m! pairings; m is capped at 8, far past the desk
    scale, because the factorial search is the point of simplicity here.
    """
    truth = np.atleast_2d(np.asarray(truth, dtype=np.float64))
    est = np.atleast_2d(np.asarray(est, dtype=np.float64))
    if truth.shape != est.shape:
        raise ValueError(f"shape mismatch: truth {truth.shape} vs estimate {est.shape}")
    m = truth.shape[0]
    if m > MAX_MATCH_SIZE:
        raise ValueError(f"exhaustive matching supports at most {MAX_MATCH_SIZE} components")
    cost = np.abs(truth[:, None, :] - est[None, :, :]).sum(axis=2)
    best = min(
        sum(cost[i, perm[i]] for i in range(m))
        for perm in itertools.permutations(range(m))
    )
    return float(best) / m


class BaselineReport(NamedTuple):
    mean: float
    variance: float
    errors: np.ndarray


def random_baseline(
    d: int, m: int, trials: int, seed: int, truth: Sequence[np.ndarray] | np.ndarray
) -> BaselineReport:
    """Matched L1 error of guessing m simplex-uniform components.

    Each trial draws m vectors uniformly from the probability simplex
    (normalized iid exponentials) and scores them against the truth;
    reports mean and plain variance across trials.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    truth = np.atleast_2d(np.asarray(truth, dtype=np.float64))
    if truth.shape != (m, d):
        raise ValueError(f"truth shape {truth.shape} does not match m={m}, d={d}")
    base_seed = rng.derive_seed(seed, rng.TAG_BASELINE)
    errors = np.empty(trials)
    for trial in range(trials):
        draws = rng.exponentials(base_seed, trial, m * d).reshape(m, d)
        guess = draws / draws.sum(axis=1, keepdims=True)
        errors[trial] = matched_l1_error(truth, guess)
    return BaselineReport(float(errors.mean()), float(errors.var()), errors)


@dataclass(frozen=True)
class ExperimentConfig:
    """One row of the accuracy table: data scale plus recovery choices."""

    mixture: MixtureSpec
    group_size: int
    n_groups: int
    reps: int
    dominating: DominatingMeasure | str | None
    recovery: RecoveryConfig
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        obj = json.loads(text)
        mix = obj["mixture"]
        rec = dict(obj.get("recovery", {}))
        if "m" not in rec:
            raise ValueError('config needs recovery.m (e.g. "recovery": {"m": 3})')
        return cls(
            mixture=make_mixture(mix["weights"], mix["components"]),
            group_size=int(obj["group_size"]),
            n_groups=int(obj["n_groups"]),
            reps=int(obj["reps"]),
            dominating=obj.get("dominating", "none"),
            recovery=RecoveryConfig(**rec),
            seed=int(obj.get("seed", 0)),
            out=obj.get("out"),
        )


@dataclass(frozen=True)
class ExperimentReport:
    """Per-rep matched errors and aggregates; failed reps carry None."""

    scheme: str
    n_groups: int
    group_size: int
    seed: int
    errors: list
    seconds: list
    failures: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    @property
    def mean(self) -> float:
        ok = [e for e in self.errors if e is not None]
        return float(np.mean(ok)) if ok else float("nan")

    @property
    def variance(self) -> float:
        ok = [e for e in self.errors if e is not None]
        return float(np.var(ok)) if ok else float("nan")

    @property
    def excluded(self) -> int:
        return len(self.failures)

    def to_json(self) -> str:
        return json.dumps(
            {
                "scheme": self.scheme,
                "n_groups": self.n_groups,
                "group_size": self.group_size,
                "seed": self.seed,
                "errors": self.errors,
                "seconds": self.seconds,
                "failures": self.failures,
                "mean": self.mean,
                "variance": self.variance,
                "excluded": self.excluded,
                "wall_clock": self.wall_clock,
                "config": self.config,
            },
            indent=2,
        )

    def write_csv(self, fh: IO[str]) -> None:
        writer = csv.writer(fh)
        writer.writerow(["scheme", "n_groups", "rep", "error", "seconds"])
        for rep, (err, sec) in enumerate(zip(self.errors, self.seconds)):
            writer.writerow(
                [self.scheme, self.n_groups, rep, "nan" if err is None else repr(err), repr(sec)]
            )

    def write(self, path: str) -> None:
        with open(path, "w") as fh:
            if path.endswith(".csv"):
                self.write_csv(fh)
            else:
                fh.write(self.to_json() + "\n")


def _scheme_name(dominating: DominatingMeasure | str | None) -> str:
    if dominating is None:
        return "none"
    if isinstance(dominating, DominatingMeasure):
        return "fixed:" + ",".join(repr(v) for v in dominating.y)
    return dominating


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Draw, recover, and score cfg.reps independent replicates.

    Replicate i runs entirely from seed cfg.seed + i: dataset, any
    random reference measure, and probe draws.  Failed replicates are
    recorded with their stage message and excluded from the mean and
    variance; everything else about the report is deterministic.
    """
    errors: list = []
    seconds: list = []
    failures: list = []
    t_start = time.perf_counter()
    for rep in range(cfg.reps):
        rep_seed = cfg.seed + rep
        t_rep = time.perf_counter()
        try:
            xi = resolve_dominating(cfg.dominating, cfg.mixture.d, rep_seed)
            data = draw_groups(cfg.mixture, cfg.group_size, cfg.n_groups, rep_seed)
            result = recover_full(data, replace(cfg.recovery, dominating=xi), seed=rep_seed)
            err = matched_l1_error(cfg.mixture.components, result.components)
            errors.append(err)
        except (RecoveryError, ValueError) as exc:
            errors.append(None)
            failures.append({"rep": rep, "tag": str(exc)})
        seconds.append(time.perf_counter() - t_rep)
    report = ExperimentReport(
        scheme=_scheme_name(cfg.dominating),
        n_groups=cfg.n_groups,
        group_size=cfg.group_size,
        seed=cfg.seed,
        errors=errors,
        seconds=seconds,
        failures=failures,
        config={
            "mixture": json.loads(cfg.mixture.to_json()),
            "reps": cfg.reps,
            "recovery": replace(cfg.recovery, dominating=None).echo() | {"dominating": _scheme_name(cfg.dominating)},
        },
        wall_clock=time.perf_counter() - t_start,
    )
    if cfg.out:
        report.write(cfg.out)
    return report
