"""Inverse solver for the promise settings.

Measured rate differences are mapped to logarithms on the cylinder C/2*pi*i,
the integer system ``A_s v = w`` is brought to Hermite normal form with
unimodular row operations, and every branch of the back substitution is
enumerated.  Candidates are then filtered to real and to physical ones
(cosines inside [-1, 1]) and exponentiated back to cosines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateRate, EmptyCandidateSet, SingularSystem
from .graphs import Axis, Graph, promise_matrix

TWO_PI = 2.0 * math.pi


def _wrap_2pi(x):
    y = np.mod(x, TWO_PI)
    # float mod can land on 2*pi for tiny negative input
    return np.where(y >= TWO_PI, 0.0, y)


def _wrap_pi(x):
    """Map angles to (-pi, pi]."""
    return -_wrap_2pi(-np.asarray(x) + math.pi) + math.pi


@dataclass(frozen=True)
class RiemannComplex:
    """Complex number with the imaginary part taken modulo 2*pi, stored in [0, 2*pi)."""

    re: float
    im: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "re", float(self.re))
        object.__setattr__(self, "im", float(_wrap_2pi(self.im)))

    @classmethod
    def from_complex(cls, z: complex) -> "RiemannComplex":
        return cls(z.real, z.imag)

    def __complex__(self):
        return complex(self.re, self.im)

    def isclose(self, other: "RiemannComplex", tol: float = 1e-9) -> bool:
        return abs(self.re - other.re) <= tol and abs(float(_wrap_pi(self.im - other.im))) <= tol


def riemann_log(x: float) -> RiemannComplex:
    """Logarithm of a nonzero real: (ln|x|, 0) for x > 0 and (ln|x|, pi) for x < 0."""
    if x == 0:
        raise DegenerateRate("logarithm of a zero rate difference")
    return RiemannComplex(math.log(abs(x)), 0.0 if x > 0 else math.pi)


def riemann_div(z: RiemannComplex, m: int) -> list:
    """All |m| quotients z/m + 2*pi*i*k/m, k = 0..|m|-1."""
    m = int(m)
    if m == 0:
        raise ValueError("division by zero on the Riemann surface")
    base = complex(z) / m
    return [RiemannComplex.from_complex(base + 1j * TWO_PI * k / m) for k in range(abs(m))]


# --- Hermite normal form --------------------------------------------------

@dataclass(frozen=True)
class HnfDecomposition:
    """``P_inv @ A_s == Q`` with ``Q`` upper triangular and ``P_inv`` unimodular.

    Both matrices are numpy object arrays of Python ints.  ``mu`` counts the
    even nonzero diagonal entries of ``Q``.
    """

    A: np.ndarray
    Q: np.ndarray
    P_inv: np.ndarray

    @property
    def diagonal(self) -> list:
        return [int(self.Q[i, i]) for i in range(self.Q.shape[0])]

    @property
    def singular(self) -> bool:
        return any(d == 0 for d in self.diagonal)

    @property
    def mu(self) -> int:
        return sum(1 for d in self.diagonal if d != 0 and d % 2 == 0)

    @property
    def abs_det(self) -> int:
        return math.prod(abs(d) for d in self.diagonal)


def _as_object_matrix(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        if int(v) != v:
            raise ValueError("matrix entries must be integers")
        out[idx] = int(v)
    return out


def hermite_decompose(a_s) -> HnfDecomposition:
    """Row-reduce an integer matrix using sign flips, swaps and integer row additions.

    In each column the nonzero entry of smallest magnitude is used as pivot
    and the remaining entries are reduced modulo it until only the pivot is
    left.  Entries above a pivot are reduced into [0, pivot).  Singular input
    yields an echelon form with zeros on the diagonal.
    """
    a = _as_object_matrix(a_s)
    n = a.shape[0]
    q = a.copy()
    p_inv = _as_object_matrix(np.eye(n, dtype=np.int64))

    r = 0
    for j in range(n):
        if r == n:
            break
        pivot_found = False
        while True:
            rows = [i for i in range(r, n) if q[i, j] != 0]
            if not rows:
                break
            pivot_found = True
            p = min(rows, key=lambda i: (abs(q[i, j]), i))
            if p != r:
                q[[r, p]] = q[[p, r]]
                p_inv[[r, p]] = p_inv[[p, r]]
            if q[r, j] < 0:
                q[r] = -q[r]
                p_inv[r] = -p_inv[r]
            clean = True
            for i in range(r + 1, n):
                if q[i, j] != 0:
                    f = q[i, j] // q[r, j]
                    q[i] = q[i] - f * q[r]
                    p_inv[i] = p_inv[i] - f * p_inv[r]
                    clean = clean and q[i, j] == 0
            if clean:
                break
        if not pivot_found:
            continue
        for i in range(r):
            f = q[i, j] // q[r, j]
            if f:
                q[i] = q[i] - f * q[r]
                p_inv[i] = p_inv[i] - f * p_inv[r]
        r += 1
    return HnfDecomposition(A=a, Q=q, P_inv=p_inv)


# --- candidate enumeration -----------------------------------------------

@dataclass
class Candidate:
    """One complex solution of ``A_s v = w`` on C/2*pi*i.

    ``c`` holds the branch index chosen at each back-substitution step
    (row order).  ``v`` is the raw solution; ``v_snapped`` is filled in by
    :func:`filter_real`.
    """

    c: tuple
    v: np.ndarray
    v_snapped: Optional[np.ndarray] = None
    real: bool = False
    physical: bool = False
    residual: float = float("nan")

    @property
    def beta(self) -> Optional[np.ndarray]:
        """Cosines for a real candidate, ``None`` otherwise."""
        if self.v_snapped is None:
            return None
        sign = np.where(np.isclose(self.v_snapped.imag, math.pi), -1.0, 1.0)
        return sign * np.exp(self.v_snapped.real)


def _as_complex_vector(w) -> np.ndarray:
    return np.array([complex(z) for z in w], dtype=complex)


def enumerate_solutions(dec: HnfDecomposition, w: Sequence) -> list:
    """All ``prod |Q_ll|`` solutions of ``Q v = P_inv w`` by branch-wise back substitution."""
    if dec.singular:
        raise SingularSystem("promise matrix is singular; solutions are not isolated")
    w = _as_complex_vector(w)
    n = len(w)
    q = dec.Q
    w_prime = np.array([sum(int(dec.P_inv[i, k]) * w[k] for k in range(n)) for i in range(n)], dtype=complex)

    out = []

    def backsub(l, v, c):
        if l < 0:
            out.append(Candidate(c=tuple(c), v=v.copy()))
            return
        rhs = w_prime[l] - sum(int(q[l, j]) * v[j] for j in range(l + 1, n))
        for k, root in enumerate(riemann_div(RiemannComplex.from_complex(rhs), int(q[l, l]))):
            v[l] = complex(root)
            c[l] = k
            backsub(l - 1, v, c)
        v[l] = 0

    backsub(n - 1, np.zeros(n, dtype=complex), [0] * n)
    out.sort(key=lambda cand: cand.c)
    return out


def filter_real(cands: list, tol: float = 1e-9) -> list:
    """Keep candidates whose imaginary parts all sit within ``tol`` of 0 or pi; snap them."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    kept = []
    for cand in cands:
        im = _wrap_2pi(cand.v.imag)
        dist0 = np.abs(_wrap_pi(im))
        dist_pi = np.abs(_wrap_pi(im - math.pi))
        if np.all(np.minimum(dist0, dist_pi) <= tol):
            snapped_im = np.where(dist0 <= dist_pi, 0.0, math.pi)
            cand.v_snapped = cand.v.real + 1j * snapped_im
            cand.real = True
            kept.append(cand)
    return kept


def filter_physical(cands: list, atol: float = 1e-12) -> list:
    """Keep real candidates whose cosines lie in [-1, 1], i.e. Re(v) <= 0."""
    kept = []
    for cand in cands:
        if cand.real and np.all(cand.v.real <= atol):
            cand.physical = True
            kept.append(cand)
    return kept


def _residual(a_s, v, w) -> float:
    diff = np.asarray(a_s, dtype=float) @ v - w
    return float(np.linalg.norm(diff.real + 1j * _wrap_pi(diff.imag)))


@dataclass
class ReconstructionResult:
    """Every complex candidate plus the filter outcome for each.

    ``chosen`` indexes into ``candidates``; ``rule`` says how it was picked
    (``"min-residual"`` among physical candidates, or ``"real-fallback"``
    when no physical candidate survived and strict mode was off).
    """

    axis: Axis
    det_abs: int
    mu: int
    delta_r: np.ndarray
    candidates: list = field(default_factory=list)
    chosen: Optional[int] = None
    rule: Optional[str] = None

    @property
    def complex_candidates(self) -> list:
        return self.candidates

    @property
    def real_candidates(self) -> list:
        return [c for c in self.candidates if c.real]

    @property
    def physical_candidates(self) -> list:
        return [c for c in self.candidates if c.physical]

    @property
    def beta(self) -> Optional[np.ndarray]:
        """Cosine estimate of the chosen candidate."""
        if self.chosen is None:
            return None
        return self.candidates[self.chosen].beta

    def to_dict(self) -> dict:
        rows = []
        for cand in self.candidates:
            beta = cand.beta
            rows.append({
                "c": list(cand.c),
                "v_re": cand.v.real.tolist(),
                "v_im": _wrap_2pi(cand.v.imag).tolist(),
                "beta": None if beta is None else beta.tolist(),
                "real": cand.real,
                "physical": cand.physical,
                "residual": cand.residual,
            })
        return {
            "axis": self.axis.value,
            "det": self.det_abs,
            "mu": self.mu,
            "candidates": rows,
            "chosen": self.chosen,
            "rule": self.rule,
        }


def clamp_rates(dr, delta: float) -> np.ndarray:
    """Replace |dr| < delta by +-delta, keeping the sign (zero maps to +delta)."""
    dr = np.asarray(dr, dtype=float).copy()
    small = np.abs(dr) < delta
    dr[small] = np.where(dr[small] < 0, -delta, delta)
    return dr


def _pick(cands: list) -> Candidate:
    best = min(c.residual for c in cands)
    ties = [c for c in cands if c.residual <= best + 1e-9]
    return min(ties, key=lambda c: c.c)


def reconstruct_fields(
    g: Graph,
    axis,
    dr,
    tol: float = 1e-9,
    clamp: Optional[float] = None,
    strict: bool = True,
) -> ReconstructionResult:
    """Recover cosines ``beta_a`` from rate differences under an aligned-field promise.

    Raises :class:`SingularSystem` for a singular promise matrix and
    :class:`DegenerateRate` for a zero rate (unless ``clamp`` is given).
    With ``strict=True`` an empty physical set raises
    :class:`EmptyCandidateSet`; otherwise the lowest-residual real
    candidate is chosen and tagged ``"real-fallback"``.
    """
    axis = Axis.parse(axis)
    dr = np.asarray(dr, dtype=float)
    if dr.shape != (g.n,):
        raise ValueError(f"expected {g.n} rate differences, got shape {dr.shape}")
    if clamp is not None:
        dr = clamp_rates(dr, clamp)
    if np.any(dr == 0):
        zeros = [int(i) + 1 for i in np.flatnonzero(dr == 0)]
        raise DegenerateRate(f"zero rate difference at vertices {zeros}")

    a_s = promise_matrix(g, axis)
    dec = hermite_decompose(a_s)
    if dec.singular:
        raise SingularSystem(f"{axis.value}-field promise matrix is singular for this graph")

    w = [riemann_log(x) for x in dr]
    w_vec = _as_complex_vector(w)
    cands = enumerate_solutions(dec, w)
    real = filter_real(cands, tol)
    physical = filter_physical(real)
    for cand in cands:
        v = cand.v_snapped if cand.v_snapped is not None else cand.v
        cand.residual = _residual(a_s, v, w_vec)

    result = ReconstructionResult(axis=axis, det_abs=dec.abs_det, mu=dec.mu, delta_r=dr, candidates=cands)
    if physical:
        result.chosen = cands.index(_pick(physical))
        result.rule = "min-residual"
    elif real and not strict:
        result.chosen = cands.index(_pick(real))
        result.rule = "real-fallback"
    else:
        raise EmptyCandidateSet("no physical candidate survived filtering", result=result)
    return result


def reconstruction_error(true_lambda, beta_est):
    """Per-vertex error |cos(lambda) - clip(beta, -1, 1)|."""
    return np.abs(np.cos(true_lambda) - np.clip(beta_est, -1.0, 1.0))
