"""Syndrome sampling and a dense state-vector reference simulator.

Random numbers come from numpy's PCG64 generator (``np.random.default_rng``)
seeded with a 64-bit integer.  Independent streams for repetitions are
derived with ``np.random.SeedSequence(seed).spawn``.
"""

from __future__ import annotations

import csv
import itertools
import io
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .channel import FieldConfig, LogicalBasis, _check_config, _require_no_isolated, axis_vector
from .graphs import Axis, Graph

MAX_QUBITS = 12

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

Seed = Union[int, np.random.Generator, np.random.SeedSequence, None]


def make_rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_seeds(seed: int, count: int) -> list:
    """Child seed sequences for ``count`` independent repetitions."""
    return np.random.SeedSequence(seed).spawn(count)


@dataclass(frozen=True)
class SyndromeStats:
    """Outcome tallies of the correlator measurements, one entry per vertex."""

    M: int
    count0: np.ndarray
    count1: np.ndarray

    def __post_init__(self):
        c0 = np.asarray(self.count0, dtype=np.int64)
        c1 = np.asarray(self.count1, dtype=np.int64)
        if self.M < 1:
            raise ValueError("M must be positive")
        if c0.shape != c1.shape or np.any(c0 + c1 != self.M) or np.any(c0 < 0) or np.any(c1 < 0):
            raise ValueError("counts must be non-negative and add up to M")
        object.__setattr__(self, "count0", c0)
        object.__setattr__(self, "count1", c1)

    @property
    def delta_r(self) -> np.ndarray:
        return (self.count0 - self.count1) / self.M

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex", "M", "count0", "count1", "delta_r"])
        for a, (c0, c1, dr) in enumerate(zip(self.count0, self.count1, self.delta_r), start=1):
            w.writerow([a, self.M, int(c0), int(c1), repr(float(dr))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SyndromeStats":
        rows = sorted(csv.DictReader(io.StringIO(text)), key=lambda r: int(r["vertex"]))
        if not rows:
            raise ValueError("empty syndrome table")
        ms = {int(r["M"]) for r in rows}
        if len(ms) != 1:
            raise ValueError("all vertices must share the same number of rounds")
        if [int(r["vertex"]) for r in rows] != list(range(1, len(rows) + 1)):
            raise ValueError("vertices must be numbered 1..n without gaps")
        return cls(ms.pop(), [int(r["count0"]) for r in rows], [int(r["count1"]) for r in rows])


def sample_syndromes(dp, M: int, seed: Seed = None) -> SyndromeStats:
    """Draw per-vertex outcome counts independently: count0 ~ Binomial(M, (1 + dp) / 2)."""
    if M < 1:
        raise ValueError("M must be positive")
    dp = np.asarray(dp, dtype=float)
    p0 = np.clip((1.0 + dp) / 2.0, 0.0, 1.0)
    count0 = make_rng(seed).binomial(M, p0)
    return SyndromeStats(M, count0, M - count0)


# --- dense state-vector reference ---------------------------------------

def _check_size(g: Graph, max_qubits: int):
    if g.n > max_qubits:
        raise ValueError(f"{g.n} qubits exceeds the state-vector cap of {max_qubits}")


def _bits(n: int) -> np.ndarray:
    idx = np.arange(2 ** n)
    return np.array([(idx >> (n - a)) & 1 for a in range(1, n + 1)])


def graph_state(g: Graph, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Controlled-Z along every edge applied to |+>^n; vertex 1 is the most significant qubit."""
    _check_size(g, max_qubits)
    bits = _bits(g.n)
    parity = np.zeros(2 ** g.n, dtype=np.int64)
    for u, v in g.edges:
        parity ^= bits[u - 1] & bits[v - 1]
    return (1.0 - 2.0 * parity) / np.sqrt(2.0 ** g.n) + 0j


def apply_local(psi: np.ndarray, ops: dict, n: int) -> np.ndarray:
    """Apply single-qubit matrices ``{vertex: 2x2}`` to a state vector."""
    t = psi.reshape((2,) * n)
    for a, op in ops.items():
        t = np.moveaxis(np.tensordot(op, t, axes=(1, a - 1)), 0, a - 1)
    return t.reshape(-1)


def rotation_unitary(lam: float, axis) -> np.ndarray:
    """exp(-i lam n.S / 2)."""
    axis = np.asarray(axis, dtype=float)
    gen = sum(c * p for c, p in zip(axis, PAULIS))
    return np.cos(lam / 2) * PAULI_I - 1j * np.sin(lam / 2) * gen


def _direction_pauli(vec) -> np.ndarray:
    return sum(c * p for c, p in zip(np.asarray(vec, dtype=float), PAULIS))


def correlator_ops(g: Graph, a: int, basis: Optional[LogicalBasis] = None) -> dict:
    basis = basis or LogicalBasis.standard()
    ops = {a: _direction_pauli(basis.r)}
    for b in g.neighbors(a):
        ops[b] = _direction_pauli(basis.t)
    return ops


def stabilizer_state(g: Graph, basis: LogicalBasis, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Joint +1 eigenvector of the relabelled correlators, found by projection."""
    _check_size(g, max_qubits)
    rng = np.random.default_rng(0)
    phi = rng.standard_normal(2 ** g.n) + 1j * rng.standard_normal(2 ** g.n)
    for a in g.vertices:
        phi = 0.5 * (phi + apply_local(phi, correlator_ops(g, a, basis), g.n))
    return phi / np.linalg.norm(phi)


def noisy_state(g: Graph, cfg: FieldConfig, basis: Optional[LogicalBasis] = None, max_qubits: int = MAX_QUBITS):
    _check_config(cfg, g)
    psi = graph_state(g, max_qubits) if basis is None else stabilizer_state(g, basis, max_qubits)
    fields = {a: rotation_unitary(cfg.lambdas[a - 1], cfg.axes[a - 1]) for a in g.vertices}
    return apply_local(psi, fields, g.n)


def expectation(psi: np.ndarray, ops: dict, n: int) -> float:
    return float(np.real(np.vdot(psi, apply_local(psi, ops, n))))


def statevector_delta_p(
    g: Graph,
    cfg: FieldConfig,
    a: Optional[int] = None,
    basis: Optional[LogicalBasis] = None,
    max_qubits: int = MAX_QUBITS,
):
    """<K_a> on the field-rotated stabilizer state, by brute force.

    Without ``basis`` the state is the graph state built from controlled-Z
    gates and K_a = X_a prod Z_b.  With a basis, K_a = (r.S)_a prod (t.S)_b
    and the state is its common +1 eigenvector.
    """
    _check_size(g, max_qubits)
    _require_no_isolated(g)
    psi = noisy_state(g, cfg, basis, max_qubits)
    if a is None:
        return np.array([expectation(psi, correlator_ops(g, b, basis), g.n) for b in g.vertices])
    g._check_vertex(a)
    return expectation(psi, correlator_ops(g, a, basis), g.n)


def _walsh_hadamard(f: np.ndarray, n: int) -> np.ndarray:
    h = np.array([[1.0, 1.0], [1.0, -1.0]])
    return apply_local(f, {a: h for a in range(1, n + 1)}, n)


def syndrome_distribution(g: Graph, cfg: FieldConfig, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Probabilities of every joint syndrome string, indexed like computational basis states.

    The correlator eigenbasis is {prod Z^kappa |G>}, so the amplitudes are a
    Walsh-Hadamard transform of conj(G(x)) psi(x).
    """
    _check_size(g, max_qubits)
    _require_no_isolated(g)
    psi = noisy_state(g, cfg, None, max_qubits)
    amps = _walsh_hadamard(np.conj(graph_state(g, max_qubits)) * psi, g.n)
    probs = np.abs(amps) ** 2
    return probs / probs.sum()


def sample_joint_syndromes(g: Graph, cfg: FieldConfig, M: int, seed: Seed = None, max_qubits: int = MAX_QUBITS) -> SyndromeStats:
    """Sample full syndrome strings from the exact joint distribution, re-preparing each round."""
    if M < 1:
        raise ValueError("M must be positive")
    probs = syndrome_distribution(g, cfg, max_qubits)
    counts = make_rng(seed).multinomial(M, probs)
    count1 = _bits(g.n) @ counts
    return SyndromeStats(M, M - count1, count1)


def perturb_axes(cfg: FieldConfig, axis, epsilon: float, seed: Seed = None) -> FieldConfig:
    """Tilt every axis away from ``axis`` by a random transverse component.

    The squared transverse magnitude is uniform in [0, 2 epsilon] (capped at
    1), so its mean is epsilon; the transverse direction is uniform.  Angles
    are kept.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    rng = make_rng(seed)
    n = cfg.n
    main = axis_vector(axis)
    e1, e2 = (axis_vector(ax) for ax in Axis if ax is not Axis.parse(axis))
    s = rng.uniform(0.0, min(2.0 * epsilon, 1.0), size=n)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
    axes = (
        np.sqrt(1.0 - s)[:, None] * main
        + (np.sqrt(s) * np.cos(phi))[:, None] * e1
        + (np.sqrt(s) * np.sin(phi))[:, None] * e2
    )
    return FieldConfig.from_unnormalized(cfg.lambdas, axes)


# Pauli types produced at each site by conjugating the field through K_a:
# the measured vertex sees Y/Z components, its neighbours X/Y components.
_OWN_TYPES_GENERIC = frozenset("YZ")
_NEIGHBOR_TYPES_GENERIC = frozenset("XY")


def stabilizer_cross_terms(g: Graph, a: int, own_types=_OWN_TYPES_GENERIC, neighbor_types=_NEIGHBOR_TYPES_GENERIC) -> list:
    """Stabilizer elements that contribute beyond the product formula for vertex ``a``.

    Each element is a product of correlators K_c over a nonempty set
    C within the closed neighbourhood of ``a``; it is returned as that set
    when its Pauli string is supported on the neighbourhood and uses only
    the allowed letter at each site.  An empty list means the closed-form
    probability difference of vertex ``a`` is exact for every field.
    """
    g._check_vertex(a)
    hood = sorted(g.neighbors(a, closed=True))
    found = []
    for size in range(1, len(hood) + 1):
        for subset in itertools.combinations(hood, size):
            c = set(subset)
            ok = True
            for v in g.vertices:
                x = v in c
                z = len(g.neighbors(v) & c) % 2 == 1
                letter = {(False, False): "I", (True, False): "X", (False, True): "Z", (True, True): "Y"}[(x, z)]
                if letter == "I":
                    continue
                allowed = own_types if v == a else neighbor_types if v in hood else ()
                if letter not in allowed:
                    ok = False
                    break
            if ok:
                found.append(tuple(sorted(c)))
    return found


def closed_form_is_exact(g: Graph) -> bool:
    """True when the product formula for every vertex has no stabilizer cross terms."""
    return not any(stabilizer_cross_terms(g, a) for a in g.vertices)
