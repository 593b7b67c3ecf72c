"""Promise-free field estimation from several logical Pauli bases.

Each basis gives one rate difference per vertex.  With l bases there are
l*n equations for the 3n unknowns (lambda_a, theta_a, phi_a), found by
least squares: multi-start Nelder-Mead followed by a short
trust-region polish of the winner.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize
from scipy.spatial.transform import Rotation

from .channel import FieldConfig, LogicalBasis, _check_config, _require_no_isolated, delta_p_rotated
from .graphs import Graph
from .simulator import make_rng, sample_syndromes, statevector_delta_p


@dataclass(frozen=True)
class MultiBasisDataset:
    """Measured rate differences: row i belongs to ``bases[i]``, column a - 1 to vertex a."""

    bases: tuple
    measured: np.ndarray
    M: Optional[int] = None

    def __post_init__(self):
        bases = tuple(self.bases)
        meas = np.array(self.measured, dtype=float, ndmin=2)
        if not bases:
            raise ValueError("at least one basis is required")
        if meas.shape[0] != len(bases):
            raise ValueError("one row of measurements per basis is required")
        if np.any(np.abs(meas) > 1.0):
            raise ValueError("rate differences must lie in [-1, 1]")
        meas.setflags(write=False)
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "measured", meas)

    @property
    def n_bases(self) -> int:
        return len(self.bases)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["basis", "vertex", "r", "s", "t", "M", "delta_r"])
        for i, (b, row) in enumerate(zip(self.bases, self.measured)):
            enc = [" ".join(repr(float(x)) for x in v) for v in (b.r, b.s, b.t)]
            for a, dr in enumerate(row, start=1):
                w.writerow([i, a, *enc, "" if self.M is None else self.M, repr(float(dr))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "MultiBasisDataset":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty measurement table")
        n_bases = max(int(r["basis"]) for r in rows) + 1
        n = max(int(r["vertex"]) for r in rows)
        meas = np.full((n_bases, n), np.nan)
        bases = [None] * n_bases
        for r in rows:
            i, a = int(r["basis"]), int(r["vertex"])
            meas[i, a - 1] = float(r["delta_r"])
            vec = lambda key: [float(x) for x in r[key].split()]
            bases[i] = LogicalBasis(vec("r"), vec("s"), vec("t"))
        if np.isnan(meas).any():
            raise ValueError("measurement table has missing (basis, vertex) entries")
        ms = {r["M"] for r in rows}
        M = int(ms.pop()) if len(ms) == 1 and "" not in ms else None
        return cls(tuple(bases), meas, M)


def random_basis(seed=None) -> LogicalBasis:
    """Haar-random rotation of the standard (X, Y, Z) triple."""
    rot = Rotation.random(random_state=make_rng(seed))
    return LogicalBasis.from_matrix(rot.as_matrix())


def _neighbor_table(g: Graph) -> np.ndarray:
    # padded with index n, which points at a constant 1.0 column
    d = max(g.max_degree, 1)
    table = np.full((g.n, d), g.n, dtype=np.intp)
    for a in g.vertices:
        nb = sorted(g.neighbors(a))
        table[a - 1, :len(nb)] = [b - 1 for b in nb]
    return table


def _model(lambdas, axes, table, rs, ts) -> np.ndarray:
    """Rate differences for all bases at once, shape (l, n)."""
    beta = np.cos(lambdas)
    pr = (axes @ rs.T).T ** 2
    pt = (axes @ ts.T).T ** 2
    own = pr + beta * (1.0 - pr)
    neigh = pt + beta * (1.0 - pt)
    neigh = np.concatenate([neigh, np.ones((neigh.shape[0], 1))], axis=1)
    return own * np.prod(neigh[:, table], axis=2)


def _stack(data: MultiBasisDataset):
    return np.array([b.r for b in data.bases]), np.array([b.t for b in data.bases])


def cost(cfg: FieldConfig, g: Graph, data: MultiBasisDataset) -> float:
    """Sum over bases and vertices of squared model-minus-measured differences."""
    _check_config(cfg, g)
    if data.measured.shape[1] != g.n:
        raise ValueError("dataset and graph differ in size")
    pred = np.array([delta_p_rotated(cfg, g, b) for b in data.bases])
    return float(np.sum((pred - data.measured) ** 2))


def _axes_from_angles(theta, phi) -> np.ndarray:
    st = np.sin(theta)
    return np.column_stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)])


def _unpack(x, n):
    p = np.asarray(x).reshape(n, 3)
    return p[:, 0], _axes_from_angles(p[:, 1], p[:, 2])


def canonical_config(lambdas, axes) -> FieldConfig:
    """Cost-equivalent representative with lambda in [0, pi] and n_y >= 0.

    The cost sees only cos(lambda) and squared projections of the axis, so
    lambda -> -lambda and n -> -n are separately invisible to it.
    """
    lam = np.abs(np.angle(np.exp(1j * np.asarray(lambdas, dtype=float))))
    axes = np.array(axes, dtype=float)
    axes[axes[:, 1] < 0] *= -1
    return FieldConfig.from_unnormalized(lam, axes)


@dataclass
class FieldEstimate:
    config: FieldConfig
    cost_value: float
    iterations: int
    converged: bool
    restart_costs: list = field(default_factory=list)
    best_restart: int = 0

    def to_dict(self) -> dict:
        d = self.config.to_dict()
        d.update({
            "cost": self.cost_value,
            "iterations": self.iterations,
            "converged": self.converged,
            "best_restart": self.best_restart,
            "restart_costs": [float(c) for c in self.restart_costs],
        })
        return d


@dataclass(frozen=True)
class MinimizerSettings:
    restarts: int = 20
    maxiter: int = 4000
    xatol: float = 1e-8
    fatol: float = 1e-14
    polish: bool = True


def estimate_fields(g: Graph, data: MultiBasisDataset, settings: MinimizerSettings = MinimizerSettings(), seed=0) -> FieldEstimate:
    """Least-squares fit of (lambda, axis) per vertex; deterministic for a fixed seed.

    ``converged`` is true when the winning local search met its tolerance
    within the iteration budget.  Fewer than three bases leave the system
    underdetermined and trigger a warning.
    """
    _require_no_isolated(g)
    if data.measured.shape[1] != g.n:
        raise ValueError("dataset and graph differ in size")
    if data.n_bases < 3:
        warnings.warn(f"{data.n_bases} bases give {data.n_bases * g.n} equations for {3 * g.n} unknowns; the fit is underdetermined", stacklevel=2)
    n = g.n
    table = _neighbor_table(g)
    rs, ts = _stack(data)
    target = np.asarray(data.measured)

    def residuals(x):
        lam, axes = _unpack(x, n)
        return (_model(lam, axes, table, rs, ts) - target).ravel()

    def f(x):
        r = residuals(x)
        return float(r @ r)

    rng = make_rng(seed)
    best = None
    costs = []
    for k in range(settings.restarts):
        x0 = np.column_stack([
            rng.uniform(0.0, np.pi, n),
            np.arccos(rng.uniform(-1.0, 1.0, n)),
            rng.uniform(0.0, np.pi, n),
        ]).ravel()
        res = minimize(f, x0, method="Nelder-Mead",
                       options={"maxiter": settings.maxiter * n, "xatol": settings.xatol, "fatol": settings.fatol, "adaptive": True})
        costs.append(float(res.fun))
        if best is None or res.fun < best[0].fun:
            best = (res, k)
    res, k = best
    x, iterations, converged = res.x, int(res.nit), bool(res.success)
    if settings.polish:
        ls = least_squares(residuals, x, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200 * 3 * n)
        if 2 * ls.cost <= res.fun:
            x = ls.x
            iterations += int(ls.nfev)
            converged = converged or bool(ls.success)
    lam, axes = _unpack(x, n)
    cfg = canonical_config(lam, axes)
    final = cost(cfg, g, data)
    return FieldEstimate(cfg, final, iterations, converged, costs, k)


def simulate_dataset(cfg: FieldConfig, g: Graph, bases: Sequence[LogicalBasis], M: Optional[int] = None, seed=None, generator: str = "closed-form") -> MultiBasisDataset:
    """Rate differences for ``bases``; exact when ``M`` is None, binomially sampled otherwise.

    ``generator="statevector"`` takes the probabilities from the dense
    simulator instead of the product formula.
    """
    if generator == "closed-form":
        exact = np.array([delta_p_rotated(cfg, g, b) for b in bases])
    elif generator == "statevector":
        exact = np.array([statevector_delta_p(g, cfg, basis=b) for b in bases])
    else:
        raise ValueError("generator must be 'closed-form' or 'statevector'")
    if M is None:
        return MultiBasisDataset(tuple(bases), exact, None)
    rng = make_rng(seed)
    rows = [sample_syndromes(row, M, rng).delta_r for row in exact]
    return MultiBasisDataset(tuple(bases), np.array(rows), M)


def arrows(cfg: FieldConfig) -> np.ndarray:
    """beta * n per vertex with each axis flipped into the n_z >= 0 hemisphere.

    On the equator the sign of n_y decides, then n_x.
    """
    axes = np.array(cfg.axes)
    key = axes[:, ::-1]
    lead = key[np.arange(len(key)), np.argmax(key != 0, axis=1)]
    axes[lead < 0] *= -1
    return cfg.betas[:, None] * axes


def gauge_distance(a: FieldConfig, b: FieldConfig) -> float:
    """Squared Euclidean distance between the arrow representations of two configurations."""
    return float(np.sum((arrows(a) - arrows(b)) ** 2))


def axis_angle_error(a: FieldConfig, b: FieldConfig) -> np.ndarray:
    """Per-vertex angle between axes, modulo n -> -n."""
    dots = np.abs(np.sum(a.axes * b.axes, axis=1))
    return np.arccos(np.clip(dots, 0.0, 1.0))


def vertex_distances(a: FieldConfig, b: FieldConfig) -> np.ndarray:
    """Per-vertex squared distance between arrow tips."""
    return np.sum((arrows(a) - arrows(b)) ** 2, axis=1)


def repeat_estimation(truth: FieldConfig, g: Graph, bases: Sequence[LogicalBasis], M: int, reps: int,
                      seed: int = 0, settings: MinimizerSettings = MinimizerSettings()) -> tuple:
    """Fit ``reps`` independently sampled datasets for fixed fields and bases.

    Repetition j uses ``SeedSequence(seed).spawn(reps)[j]`` for both the
    sampling and the restarts.  Returns the estimates and a (reps, n) array
    of per-vertex squared arrow distances to ``truth``.
    """
    estimates = []
    for ss in np.random.SeedSequence(seed).spawn(reps):
        rng = np.random.default_rng(ss)
        data = simulate_dataset(truth, g, bases, M=M, seed=rng)
        estimates.append(estimate_fields(g, data, settings, seed=rng))
    dist = np.array([vertex_distances(e.config, truth) for e in estimates])
    return estimates, dist
