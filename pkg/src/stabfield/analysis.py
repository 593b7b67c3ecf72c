"""Error-propagation diagnostics for the log-linear reconstruction.

Covers the binomial moments of measured rate differences, how their
covariance is pushed through A_s^-1, condition-number bounds, the
depolarizing sensitivity vector A_s^-1 1, and an a-priori bound on the
reconstructed log-fields when the promise axes are slightly misaligned.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateRate, NumericalError, SingularSystem
from .spectra import exact_determinant

PSD_TOL = 1e-9
RESILIENT_TOL = 1e-9
LAMBERT_TOL = 1e-12
INV_E = math.exp(-1.0)


def rate_moments(dp: float, M: int) -> tuple:
    """Mean and variance of the rate difference estimated from M rounds."""
    if M < 1:
        raise ValueError("M must be positive")
    if not -1.0 <= dp <= 1.0:
        raise ValueError("dp must lie in [-1, 1]")
    return float(dp), (1.0 - dp * dp) / M


def log_variance(dp: float, M: int) -> float:
    """Approximate variance of ln(dR), using the first power of |E[dR]| in the denominator."""
    if dp == 0:
        raise DegenerateRate("the logarithm of a zero rate difference is undefined")
    _, var = rate_moments(dp, M)
    return var / abs(dp)


def _nonsingular(a_s) -> np.ndarray:
    a = np.asarray(a_s)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("promise matrix must be square")
    if np.issubdtype(a.dtype, np.integer):
        if exact_determinant(a) == 0:
            raise SingularSystem("promise matrix is singular")
    elif abs(np.linalg.det(a)) < 1e-12:
        raise SingularSystem("matrix is numerically singular")
    return a.astype(float)


def _check_covariance(sigma) -> np.ndarray:
    s = np.asarray(sigma, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError("covariance must be a square matrix")
    if np.max(np.abs(s - s.T), initial=0.0) > PSD_TOL:
        raise ValueError("covariance must be symmetric")
    if s.size and np.min(np.linalg.eigvalsh(s)) < -PSD_TOL:
        raise ValueError("covariance must be positive semidefinite")
    return s


def propagate_covariance(a_s, sigma) -> np.ndarray:
    """Covariance of A_s^-1 w given Cov(w) = sigma."""
    a = _nonsingular(a_s)
    s = _check_covariance(sigma)
    if s.shape != a.shape:
        raise ValueError("covariance and promise matrix differ in size")
    ainv = np.linalg.inv(a)
    out = ainv @ s @ ainv.T
    return (out + out.T) / 2


def _norm_order(norm):
    if norm in (1, 2):
        return norm
    if norm in ("inf", np.inf, float("inf")):
        return np.inf
    raise ValueError(f"norm must be 1, 2 or 'inf', got {norm!r}")


def condition_number(a_s, norm="inf") -> float:
    a = _nonsingular(a_s)
    order = _norm_order(norm)
    return float(np.linalg.norm(a, order) * np.linalg.norm(np.linalg.inv(a), order))


def condition_bound(a_s, dw_rel: float, norm="inf") -> float:
    """Upper bound on ||dv|| / ||v|| for a relative right-hand-side error ``dw_rel``."""
    if dw_rel < 0:
        raise ValueError("relative perturbation must be non-negative")
    return condition_number(a_s, norm) * dw_rel


def uncertainty_volume(sigma) -> float:
    """sqrt(det sigma)."""
    s = np.asarray(sigma, dtype=float)
    det = float(np.linalg.det(s))
    if det < 0:
        scale = float(np.prod(np.maximum(np.abs(np.diag(s)), 1e-300)))
        if -det > PSD_TOL * max(scale, 1.0):
            raise NumericalError(f"covariance determinant is negative ({det})")
        det = 0.0
    return math.sqrt(det)


def depolarizing_sensitivity(a_s) -> np.ndarray:
    """A_s^-1 (1, ..., 1): how a uniform log-offset in the rates moves each reconstructed log-field."""
    a = _nonsingular(a_s)
    return np.linalg.solve(a, np.ones(a.shape[0]))


def resilient_vertices(a_s, tol: float = RESILIENT_TOL) -> list:
    """Vertices (1-based) whose reconstruction ignores uniform depolarizing noise."""
    s = depolarizing_sensitivity(a_s)
    return [int(i) + 1 for i in np.flatnonzero(np.abs(s) < tol)]


# --- Lambert W -------------------------------------------------------------

def _lambert_guess(z: float, branch: int) -> float:
    if z < -0.3:
        p = math.sqrt(max(2.0 * (math.e * z + 1.0), 0.0))
        return -1.0 + p - p * p / 3.0 if branch == 0 else -1.0 - p - p * p / 3.0
    if branch == 0:
        if z < 3.0:
            return math.log1p(z) if z > -0.3 else z
        lz = math.log(z)
        return lz - math.log(lz)
    lz = math.log(-z)
    return lz - math.log(-lz)


def lambert_w(z: float, branch: int = 0, tol: float = LAMBERT_TOL, maxiter: int = 100) -> float:
    """Real Lambert W, the solution of w e^w = z, by Halley iteration.

    Branch 0 is defined for z >= -1/e and branch -1 for -1/e <= z < 0.
    Raises ``NumericalError`` if the residual |w e^w - z| does not drop
    below ``tol``.
    """
    z = float(z)
    if branch not in (0, -1):
        raise ValueError("branch must be 0 or -1")
    if math.isnan(z) or z < -INV_E - 1e-15:
        raise ValueError(f"Lambert W has no real value at {z}")
    if branch == -1 and z >= 0:
        raise ValueError("the lower real branch requires -1/e <= z < 0")
    if z == 0.0:
        return 0.0
    if abs(z + INV_E) <= 1e-15:
        return -1.0
    w = _lambert_guess(z, branch)
    for _ in range(maxiter):
        ew = math.exp(w)
        f = w * ew - z
        if f == 0.0:
            break
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= 1e-16 * (1.0 + abs(w)):
            break
    resid = abs(w * math.exp(w) - z)
    if resid >= tol * max(1.0, abs(z)):
        raise NumericalError(f"Lambert W did not converge at z={z} (residual {resid:.3g})")
    return w


# --- misalignment bound ------------------------------------------------------

@dataclass(frozen=True)
class PerturbationBoundInput:
    r: float
    R: float
    epsilon: float
    d: int
    ainv_norm: float
    dw_norm: float

    def __post_init__(self):
        if not 0 < self.r <= self.R:
            raise ValueError("bounds must satisfy 0 < r <= R")
        if min(self.epsilon, self.ainv_norm, self.dw_norm) < 0 or self.d < 0:
            raise ValueError("epsilon, degree and norms must be non-negative")


@dataclass(frozen=True)
class PerturbationBound:
    r0: float
    R0: float
    C: float
    applicable: bool
    lambert_argument: Optional[float]
    condition_ok: bool
    R_inf: Optional[float]
    R_inf_lower_branch: Optional[float]

    @property
    def branch_ambiguous(self) -> bool:
        return self.R_inf_lower_branch is not None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["branch_ambiguous"] = self.branch_ambiguous
        return d


def perturbation_bound(inp: PerturbationBoundInput) -> PerturbationBound:
    """Bound on ||v||_inf after iterating the misalignment correction to convergence.

    r0 and R0 widen [r, R] by ||A_s^-1|| ||dw||; the growth constant is
    C = ||A_s^-1|| 2 eps (d + 1) / r0.  The bound sequence
    R_{j+1} = R0 (1 + C e^{R_j}) has a finite limit iff
    C R0 e^{R0} < 1/e, and then R_inf = R0 - W0(-C R0 e^{R0}).  When the
    argument is strictly negative the lower branch W_{-1} also gives a real
    root, reported as ``R_inf_lower_branch``.
    """
    shift = inp.ainv_norm * inp.dw_norm
    r0 = inp.r - shift
    R0 = inp.R + shift
    if r0 <= 0:
        return PerturbationBound(r0, R0, math.inf, False, None, False, None, None)
    C = inp.ainv_norm / r0 * 2.0 * inp.epsilon * (inp.d + 1)
    try:
        z = -C * R0 * math.exp(R0)
    except OverflowError:
        z = -math.inf
    ok = z > -INV_E
    if not ok:
        return PerturbationBound(r0, R0, C, True, z, False, None, None)
    R_inf = R0 - lambert_w(z, 0)
    lower = R0 - lambert_w(z, -1) if z < 0 else None
    return PerturbationBound(r0, R0, C, True, z, True, R_inf, lower)


def bound_fixpoint(R0, C, tol: float = 1e-15, maxiter: int = 1_000_000):
    """Iterate R_{j+1} = R0 (1 + C e^{R_j}) from R0; works elementwise on arrays.

    Returns the final iterates and a boolean mask of entries whose last step
    fell below ``tol``.
    """
    R0b, Cb = np.broadcast_arrays(np.atleast_1d(np.asarray(R0, dtype=float)), np.atleast_1d(np.asarray(C, dtype=float)))
    shape = np.broadcast(np.asarray(R0), np.asarray(C)).shape
    x = R0b.astype(float).copy()
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(maxiter):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        with np.errstate(over="ignore", invalid="ignore"):
            nxt = R0b.flat[idx] * (1.0 + Cb.flat[idx] * np.exp(x.flat[idx]))
        step = np.abs(nxt - x.flat[idx])
        x.flat[idx] = nxt
        done.flat[idx[(step <= tol * np.maximum(1.0, np.abs(nxt))) | ~np.isfinite(nxt)]] = True
    converged = done & np.isfinite(x)
    return x.reshape(shape), converged.reshape(shape)
