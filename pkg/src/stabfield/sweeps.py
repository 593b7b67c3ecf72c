"""Monte Carlo sweeps of the reconstruction error under noise.

One repetition draws angles lambda_a ~ U[0, pi], tilts the promise axes by
``eps``, evaluates the closed-form differences, applies depolarizing
noise ``q``, samples M rounds per vertex and reconstructs.  The error at
vertex a is |cos(lambda_a) - clip(beta_a)|.

Repetition j of every sweep point uses the j-th child of
``SeedSequence(seed)``, so all points (and all axes) see the same field
ensemble and sampling streams.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .channel import FieldConfig, apply_depolarizing, delta_p_general
from .errors import EmptyCandidateSet
from .graphs import Axis, Graph
from .reconstruct import reconstruct_fields, reconstruction_error
from .simulator import make_rng, perturb_axes, sample_syndromes

REFERENCE = {"q": 0.01, "eps": 0.01, "M": 10_000}
SWEEP_PARAMS = ("q", "eps", "M")
EXACT_REAL_TOL = 1e-9
SAMPLED_REAL_TOL = np.pi / 8


@dataclass
class RepetitionOutcome:
    errors: np.ndarray
    failed: bool


def _fallback_beta(exc: EmptyCandidateSet) -> np.ndarray:
    # no real candidate: take the lowest-residual complex one and keep Re(e^v)
    cands = exc.result.candidates
    best = min(cands, key=lambda c: (c.residual, c.c))
    return np.exp(best.v).real


def run_repetition(g: Graph, axis, q: float, eps: float, M: Optional[int], seed, clamp: Optional[float] = None) -> RepetitionOutcome:
    """One draw of the ensemble.  ``M=None`` skips sampling and reconstructs from the exact differences."""
    axis = Axis.parse(axis)
    rng = make_rng(seed)
    lambdas = rng.uniform(0.0, np.pi, size=g.n)
    cfg = perturb_axes(FieldConfig.aligned(lambdas, axis), axis, eps, rng)
    dp = apply_depolarizing(delta_p_general(cfg, g), q)
    if M is None:
        rates = dp
        delta = clamp if clamp is not None else 1e-300
        tol = EXACT_REAL_TOL
    else:
        rates = sample_syndromes(dp, M, rng).delta_r
        delta = clamp if clamp is not None else 1.0 / (2 * M)
        tol = SAMPLED_REAL_TOL
    failed = False
    try:
        res = reconstruct_fields(g, axis, rates, tol=tol, clamp=delta, strict=False)
        beta = res.beta
        failed = res.rule != "min-residual"
    except EmptyCandidateSet as exc:
        beta = _fallback_beta(exc)
        failed = True
    # errors are measured against the true angle; the sign flip applied by
    # FieldConfig leaves cos(lambda) unchanged
    return RepetitionOutcome(reconstruction_error(lambdas, beta), failed)


@dataclass
class SweepPoint:
    param: str
    value: float
    mean_error: np.ndarray
    std_error: np.ndarray
    n_failed: int
    reps: int


@dataclass
class SweepResult:
    graph: Graph
    axis: Axis
    param: str
    points: list = field(default_factory=list)
    seed: int = 0
    reps: int = 0
    fixed: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param", "vertex", "mean_error", "std_error", "n_failed"])
        for p in self.points:
            for a in range(self.graph.n):
                w.writerow([repr(p.value), a + 1, repr(float(p.mean_error[a])), repr(float(p.std_error[a])), p.n_failed])
        return buf.getvalue()

    def metadata(self) -> dict:
        return {
            "graph": self.graph.to_dict(),
            "axis": self.axis.value,
            "swept": self.param,
            "values": [p.value for p in self.points],
            "fixed": self.fixed,
            "reps": self.reps,
            "seed": self.seed,
            "lambda_ensemble": "uniform[0, pi] per vertex and repetition",
            "seed_rule": "repetition j uses SeedSequence(seed).spawn(reps)[j] at every sweep point",
            "clamp": "|dR| < 1/(2M) replaced by sign(dR)/(2M)",
            "n_failed": {repr(p.value): p.n_failed for p in self.points},
        }

    def mean_over(self, value) -> np.ndarray:
        for p in self.points:
            if p.value == value:
                return p.mean_error
        raise KeyError(value)


def _run_chunk(args):
    g, axis, q, eps, M, seeds, clamp = args
    return [run_repetition(g, axis, q, eps, M, s, clamp) for s in seeds]


def run_point(g: Graph, axis, q: float, eps: float, M: int, reps: int, seed: int, clamp=None, workers: int = 1) -> tuple:
    """Errors (reps x n) and failure count for one parameter setting."""
    seeds = np.random.SeedSequence(seed).spawn(reps)
    if workers > 1 and reps > 1:
        chunks = [seeds[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_chunk, [(g, axis, q, eps, M, c, clamp) for c in chunks]))
        # restore repetition order
        outcomes = [None] * reps
        for i, part in enumerate(parts):
            for k, o in enumerate(part):
                outcomes[i + k * workers] = o
    else:
        outcomes = _run_chunk((g, axis, q, eps, M, seeds, clamp))
    errors = np.array([o.errors for o in outcomes])
    return errors, sum(o.failed for o in outcomes)


def run_sweep(
    g: Graph,
    axis,
    param: str,
    values: Sequence,
    reps: int = 10_000,
    seed: int = 0,
    q: float = REFERENCE["q"],
    eps: float = REFERENCE["eps"],
    M: int = REFERENCE["M"],
    clamp: Optional[float] = None,
    workers: int = 1,
) -> SweepResult:
    """Sweep one of q, eps, M with the other two held fixed."""
    if param not in SWEEP_PARAMS:
        raise ValueError(f"sweep parameter must be one of {SWEEP_PARAMS}")
    if reps < 1:
        raise ValueError("reps must be positive")
    axis = Axis.parse(axis)
    fixed = {"q": q, "eps": eps, "M": M}
    out = SweepResult(g, axis, param, seed=seed, reps=reps, fixed={k: v for k, v in fixed.items() if k != param})
    for value in values:
        setting = dict(fixed)
        if param == "M":
            setting[param] = None if value is None else int(value)
        else:
            setting[param] = float(value)
        errors, failed = run_point(g, axis, setting["q"], setting["eps"], setting["M"], reps, seed, clamp, workers)
        std = errors.std(axis=0, ddof=1) if reps > 1 else np.zeros(g.n)
        out.points.append(SweepPoint(param, setting[param], errors.mean(axis=0), std, int(failed), reps))
    return out


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])
