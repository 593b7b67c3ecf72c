"""Local stray-field configurations and closed-form correlator statistics.

A field at vertex a is the rotation exp(-i lambda_a n_a . S / 2).  The
probability difference of a correlator, p(kappa_a = 0) - p(kappa_a = 1),
depends on the fields only through beta = cos(lambda) and the squared
projections of each axis onto the logical X (vertex a) and logical Z
(neighbours) directions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .graphs import Axis, Graph, promise_neighbors

UNIT_TOL = 1e-12

_AXIS_VECTORS = {
    Axis.X: np.array([1.0, 0.0, 0.0]),
    Axis.Y: np.array([0.0, 1.0, 0.0]),
    Axis.Z: np.array([0.0, 0.0, 1.0]),
}


def axis_vector(axis) -> np.ndarray:
    return _AXIS_VECTORS[Axis.parse(axis)].copy()


@dataclass(frozen=True)
class FieldConfig:
    """Per-vertex rotation angles and unit rotation axes.

    Row ``a - 1`` of ``axes`` belongs to vertex ``a``.  On construction each
    axis with n_y < 0 is flipped together with its angle, which leaves the
    rotation unchanged.
    """

    lambdas: np.ndarray
    axes: np.ndarray

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float).reshape(-1)
        axes = np.array(self.axes, dtype=float).reshape(-1, 3)
        if lam.shape[0] != axes.shape[0]:
            raise ValueError("one axis per angle is required")
        norms = np.linalg.norm(axes, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise ValueError("rotation axes must be unit vectors")
        flip = axes[:, 1] < 0
        lam[flip] = -lam[flip]
        axes[flip] = -axes[flip]
        lam.setflags(write=False)
        axes.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "axes", axes)

    @property
    def n(self) -> int:
        return self.lambdas.shape[0]

    @property
    def betas(self) -> np.ndarray:
        return np.cos(self.lambdas)

    @classmethod
    def aligned(cls, lambdas: Sequence[float], axis) -> "FieldConfig":
        lambdas = np.asarray(lambdas, dtype=float)
        return cls(lambdas, np.tile(axis_vector(axis), (lambdas.shape[0], 1)))

    @classmethod
    def from_unnormalized(cls, lambdas, axes) -> "FieldConfig":
        axes = np.asarray(axes, dtype=float).reshape(-1, 3)
        return cls(lambdas, axes / np.linalg.norm(axes, axis=1, keepdims=True))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, lambda_range=(0.0, np.pi)) -> "FieldConfig":
        """Angles uniform in ``lambda_range`` and axes uniform on the sphere."""
        lam = rng.uniform(*lambda_range, size=n)
        return cls.from_unnormalized(lam, rng.standard_normal((n, 3)))

    def to_dict(self) -> dict:
        return {"fields": [{"lambda": float(l), "n": [float(x) for x in v]} for l, v in zip(self.lambdas, self.axes)]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "FieldConfig":
        fields = data["fields"]
        return cls.from_unnormalized([f["lambda"] for f in fields], [f["n"] for f in fields])


@dataclass(frozen=True)
class LogicalBasis:
    """Right-handed orthonormal triple (r, s, t) standing in for (X, Y, Z)."""

    r: np.ndarray
    s: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        vecs = [np.array(v, dtype=float).reshape(3) for v in (self.r, self.s, self.t)]
        m = np.column_stack(vecs)
        if np.max(np.abs(m.T @ m - np.eye(3))) > UNIT_TOL:
            raise ValueError("basis vectors must be orthonormal")
        if np.max(np.abs(np.cross(vecs[0], vecs[1]) - vecs[2])) > UNIT_TOL:
            raise ValueError("basis must be right-handed (r x s = t)")
        for name, v in zip("rst", vecs):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def standard(cls) -> "LogicalBasis":
        return cls(*np.eye(3))

    @classmethod
    def from_matrix(cls, m) -> "LogicalBasis":
        """Basis from the columns of a rotation matrix."""
        m = np.asarray(m, dtype=float)
        return cls(m[:, 0], m[:, 1], m[:, 2])

    def as_matrix(self) -> np.ndarray:
        return np.column_stack([self.r, self.s, self.t])

    def to_list(self) -> list:
        return [self.r.tolist(), self.s.tolist(), self.t.tolist()]


def _require_no_isolated(g: Graph):
    isolated = g.isolated_vertices()
    if isolated:
        raise ValueError(f"graph has isolated vertices {isolated}; correlator statistics need every vertex to have a neighbour")


def _check_config(cfg: FieldConfig, g: Graph):
    if cfg.n != g.n:
        raise ValueError(f"field config has {cfg.n} vertices, graph has {g.n}")


def _factor(proj_sq, betas):
    return proj_sq + betas * (1.0 - proj_sq)


def _delta_p_from_factors(g: Graph, own, neigh, a):
    if a is None:
        out = own.copy()
        for u, v in g.edges:
            out[u - 1] *= neigh[v - 1]
            out[v - 1] *= neigh[u - 1]
        return out
    value = own[a - 1]
    for b in sorted(g.neighbors(a)):
        value *= neigh[b - 1]
    return float(value)


def delta_p_rotated(cfg: FieldConfig, g: Graph, basis: LogicalBasis, a: Optional[int] = None):
    """Probability difference of the correlator (r.S)_a prod_b (t.S)_b.

    Returns a scalar for vertex ``a`` or, with ``a=None``, the vector over
    all vertices.
    """
    _check_config(cfg, g)
    _require_no_isolated(g)
    betas = cfg.betas
    own = _factor((cfg.axes @ basis.r) ** 2, betas)
    neigh = _factor((cfg.axes @ basis.t) ** 2, betas)
    if a is not None:
        g._check_vertex(a)
    return _delta_p_from_factors(g, own, neigh, a)


def delta_p_general(cfg: FieldConfig, g: Graph, a: Optional[int] = None):
    """Probability difference of the standard correlator X_a prod_b Z_b."""
    _check_config(cfg, g)
    _require_no_isolated(g)
    betas = cfg.betas
    own = _factor(cfg.axes[:, 0] ** 2, betas)
    neigh = _factor(cfg.axes[:, 2] ** 2, betas)
    if a is not None:
        g._check_vertex(a)
    return _delta_p_from_factors(g, own, neigh, a)


def delta_p_promise(axis, betas, g: Graph, a: Optional[int] = None):
    """Aligned-field probability difference: the product of cosines over the promise neighbourhood."""
    _require_no_isolated(g)
    betas = np.asarray(betas, dtype=float)
    if betas.shape != (g.n,):
        raise ValueError(f"expected {g.n} cosines")
    if np.any(np.abs(betas) > 1.0):
        raise ValueError("cosines must lie in [-1, 1]")
    if a is None:
        return np.array([delta_p_promise(axis, betas, g, b) for b in g.vertices])
    return float(np.prod([betas[b - 1] for b in sorted(promise_neighbors(g, axis, a))]))


def apply_depolarizing(dp, q: float) -> np.ndarray:
    """Uniform depolarizing noise of strength q rescales every difference by (1 - q)."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"depolarizing strength must lie in [0, 1], got {q}")
    return (1.0 - q) * np.asarray(dp, dtype=float)
