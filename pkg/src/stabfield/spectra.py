"""Determinants, eigenvalues and solvability of promise matrices.

Closed forms cover linear chains, hypercubic lattices with mixed boundary
conditions and the two GHZ graph representations.  Arbitrary graphs are
handled exactly with fraction-free elimination and the Hermite form.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .graphs import Axis, Graph, adjacency_matrix, lattice, promise_matrix
from .reconstruct import hermite_decompose

ZERO_EIGENVALUE_TOL = 1e-9


def exact_determinant(a) -> int:
    """Integer determinant by Bareiss fraction-free elimination."""
    m = np.array([[int(x) for x in row] for row in np.asarray(a)], dtype=object)
    n = m.shape[0]
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k, k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i, k] != 0), None)
            if swap is None:
                return 0
            m[[k, swap]] = m[[swap, k]]
            sign = -sign
        piv = m[k, k]
        m[k + 1:, k + 1:] = (m[k + 1:, k + 1:] * piv - np.outer(m[k + 1:, k], m[k, k + 1:])) // prev
        m[k + 1:, k] = 0
        prev = piv
    return sign * int(m[n - 1, n - 1])


def _check_kind(kind):
    if kind not in ("open", "closed"):
        raise ValueError(f"chain kind must be 'open' or 'closed', got {kind!r}")


def chain_determinant(kind: str, axis, m: int) -> int:
    """Closed-form det(A_s) for an open or closed linear chain of m vertices."""
    _check_kind(kind)
    axis = Axis.parse(axis)
    if m < 1:
        raise ValueError("chain length must be positive")
    if axis is Axis.Z:
        return 1
    if kind == "open":
        if axis is Axis.X:
            if m % 2 == 1:
                return 0
            return 1 if m % 4 == 0 else -1
        r = m % 6
        if r in (2, 5):
            return 0
        return 1 if r in (0, 1) else -1
    if axis is Axis.X:
        if m == 1:
            return 0
        if m == 2:
            return -1
        if m % 2 == 1:
            return 2
        return 0 if m % 4 == 0 else -4
    if m == 1:
        return 1
    if m == 2:
        return 0
    r = m % 6
    if r in (0, 3):
        return 0
    # product of 1 + 2cos(2 pi k / m); the sign is + for m = 1, 5 mod 6
    return -3 if r in (2, 4) else 3


def ghz_determinant(representation: str, axis, n: int) -> int:
    """Closed-form det(A_s) for the complete-graph and star-graph GHZ representations."""
    axis = Axis.parse(axis)
    if n < 1:
        raise ValueError("GHZ size must be positive")
    if axis is Axis.Z:
        return 1
    if representation == "complete":
        if axis is Axis.X:
            return (-1) ** (n - 1) * (n - 1)
        return 1 if n == 1 else 0
    if representation == "star":
        if axis is Axis.X:
            return -1 if n == 2 else 0
        return 2 - n
    raise ValueError(f"representation must be 'complete' or 'star', got {representation!r}")


def tilde_cos(m: int, theta):
    """Cosine modified for rings too short to carry distinct neighbours."""
    if m < 1:
        raise ValueError("size must be positive")
    if m == 1:
        return np.zeros_like(np.asarray(theta, dtype=float))
    if m == 2:
        return -np.cos(theta) / 2
    return np.cos(theta)


def _dimension_spectrum(m: int, closed: bool) -> np.ndarray:
    k = np.arange(1, m + 1)
    if closed:
        return 2 * tilde_cos(m, 2 * np.pi * k / m)
    return 2 * np.cos(np.pi * k / (m + 1))


def lattice_eigenvalues(sizes: Sequence[int], closed_count: int, axis=Axis.X) -> np.ndarray:
    """All eigenvalues of A_s for a lattice whose first ``closed_count`` dimensions are closed.

    Returned sorted ascending.  Axis Y shifts every eigenvalue by one and
    axis Z gives the spectrum of the identity.
    """
    axis = Axis.parse(axis)
    sizes = [int(m) for m in sizes]
    if any(m < 1 for m in sizes):
        raise ValueError("sizes must be positive")
    if not 0 <= closed_count <= len(sizes):
        raise ValueError("closed_count must lie between 0 and the number of dimensions")
    total = math.prod(sizes)
    if axis is Axis.Z:
        return np.ones(total)
    per_dim = [_dimension_spectrum(m, r < closed_count) for r, m in enumerate(sizes)]
    grid = np.zeros(1)
    for spec in per_dim:
        grid = (grid[:, None] + spec[None, :]).ravel()
    if axis is Axis.Y:
        grid = grid + 1.0
    return np.sort(grid)


def has_duplicate_neighborhoods(g: Graph) -> bool:
    """True when two vertices share the same neighbour set (then A is singular)."""
    rows = {tuple(row) for row in adjacency_matrix(g)}
    return len(rows) < g.n


@dataclass(frozen=True)
class SolvabilityReport:
    axis: Axis
    determinant: int
    rank_defect: int
    predicted_complex_solutions: int
    has_duplicate_neighborhoods: bool
    even_diag_count_mu: int
    predicted_real_solutions: Optional[int]

    @property
    def singular(self) -> bool:
        return self.determinant == 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["axis"] = self.axis.value
        return d


def solvability_report(g: Graph, axis) -> SolvabilityReport:
    axis = Axis.parse(axis)
    a_s = promise_matrix(g, axis)
    det = exact_determinant(a_s)
    dec = hermite_decompose(a_s)
    rank = sum(1 for i in range(g.n) if any(x != 0 for x in dec.Q[i]))
    mu = dec.mu
    return SolvabilityReport(
        axis=axis,
        determinant=det,
        rank_defect=g.n - rank,
        predicted_complex_solutions=abs(det),
        has_duplicate_neighborhoods=has_duplicate_neighborhoods(g),
        even_diag_count_mu=mu,
        predicted_real_solutions=None if det == 0 else 2 ** mu,
    )


# --- singularity atlas for square lattices --------------------------------

FIG0_GEOMETRIES = ("planar", "cylinder", "torus")


def fig0_panel_name(axis, geometry: str) -> str:
    return f"{Axis.parse(axis).value}_{geometry}"


def lattice_is_singular(m1: int, m2: int, axis, geometry: str) -> bool:
    """Closed-form singularity test for an m1 x m2 lattice.

    In the cylinder the m1 rows are open and the m2 columns closed.
    """
    if geometry == "planar":
        eig = lattice_eigenvalues([m1, m2], 0, axis)
    elif geometry == "cylinder":
        eig = lattice_eigenvalues([m2, m1], 1, axis)
    elif geometry == "torus":
        eig = lattice_eigenvalues([m1, m2], 2, axis)
    else:
        raise ValueError(f"unknown geometry {geometry!r}")
    return bool(np.any(np.abs(eig) < ZERO_EIGENVALUE_TOL))


def lattice_graph(m1: int, m2: int, geometry: str) -> Graph:
    flags = {"planar": [False, False], "cylinder": [False, True], "torus": [True, True]}[geometry]
    return lattice([m1, m2], flags)


def fig0_grid(max_size: int = 20) -> list:
    """Rows (m1, m2, panel, singular) for the six X/Y x geometry panels."""
    rows = []
    for axis in (Axis.X, Axis.Y):
        for geometry in FIG0_GEOMETRIES:
            panel = fig0_panel_name(axis, geometry)
            for m1, m2 in itertools.product(range(1, max_size + 1), repeat=2):
                rows.append((m1, m2, panel, int(lattice_is_singular(m1, m2, axis, geometry))))
    return rows
