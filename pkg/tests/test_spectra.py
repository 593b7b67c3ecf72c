import numpy as np
import pytest

from stabfield.graphs import Axis, closed_chain, generate, ghz_complete, ghz_star, lattice, open_chain, promise_matrix
from stabfield.reconstruct import hermite_decompose
from stabfield.spectra import (
    chain_determinant,
    exact_determinant,
    fig0_grid,
    ghz_determinant,
    has_duplicate_neighborhoods,
    lattice_eigenvalues,
    lattice_is_singular,
    solvability_report,
    tilde_cos,
)


def test_exact_determinant_small():
    assert exact_determinant([[2]]) == 2
    assert exact_determinant([[0, 1], [1, 0]]) == -1
    assert exact_determinant([[1, 2], [2, 4]]) == 0
    assert exact_determinant(np.zeros((0, 0))) == 1


def test_exact_determinant_matches_numpy():
    rng = np.random.default_rng(3)
    for _ in range(30):
        a = rng.integers(-3, 4, size=(6, 6))
        assert exact_determinant(a) == round(np.linalg.det(a))


def test_chain_determinant_examples():
    assert chain_determinant("open", "x", 6) == -1
    assert chain_determinant("closed", "x", 2) == -1
    # the sign for m = 5 follows from the eigenvalue product 3 * prod(1 + 2cos(2 pi k / 5))
    assert chain_determinant("closed", "y", 5) == 3
    assert chain_determinant("closed", "y", 4) == -3


@pytest.mark.parametrize("kind", ["open", "closed"])
@pytest.mark.parametrize("axis", ["x", "y", "z"])
def test_chain_determinant_against_exact(kind, axis):
    make = open_chain if kind == "open" else closed_chain
    for m in range(1, 41):
        assert chain_determinant(kind, axis, m) == exact_determinant(promise_matrix(make(m), axis)), m


def test_chain_determinant_rejects():
    with pytest.raises(ValueError):
        chain_determinant("loop", "x", 3)
    with pytest.raises(ValueError):
        chain_determinant("open", "x", 0)


def test_ghz_determinant_examples():
    assert ghz_determinant("complete", "x", 4) == -3
    assert ghz_determinant("star", "y", 6) == -4
    assert ghz_determinant("star", "x", 2) == -1


@pytest.mark.parametrize("rep, make", [("complete", ghz_complete), ("star", ghz_star)])
def test_ghz_determinant_against_exact(rep, make):
    for n in range(1, 31):
        for axis in "xyz":
            assert ghz_determinant(rep, axis, n) == exact_determinant(promise_matrix(make(n), axis))


def test_tilde_cos():
    assert tilde_cos(1, 1.234) == 0
    assert tilde_cos(2, 0.0) == -0.5
    assert tilde_cos(5, 0.0) == 1.0


def test_lattice_eigenvalue_examples():
    np.testing.assert_allclose(lattice_eigenvalues([3], 0), [-np.sqrt(2), 0, np.sqrt(2)], atol=1e-12)
    np.testing.assert_allclose(lattice_eigenvalues([2, 2], 0), [-2, 0, 0, 2], atol=1e-12)
    np.testing.assert_allclose(lattice_eigenvalues([2], 1), np.linalg.eigvalsh([[0, 1], [1, 0]]), atol=1e-12)
    np.testing.assert_allclose(lattice_eigenvalues([4, 3], 1, "z"), np.ones(12))


@pytest.mark.parametrize("sizes, closed", [([5], 1), ([1], 1), ([4, 3], 0), ([4, 3], 1), ([2, 5], 2), ([3, 3, 2], 2)])
def test_lattice_eigenvalues_dense(sizes, closed):
    flags = [r < closed for r in range(len(sizes))]
    g = lattice(sizes, flags)
    for axis in "xy":
        dense = np.sort(np.linalg.eigvalsh(promise_matrix(g, axis).astype(float)))
        np.testing.assert_allclose(lattice_eigenvalues(sizes, closed, axis), dense, atol=1e-9)


def test_y_spectrum_is_shifted_x():
    np.testing.assert_allclose(lattice_eigenvalues([4, 6], 1, "y"), lattice_eigenvalues([4, 6], 1, "x") + 1)


def test_solvability_examples():
    r = solvability_report(open_chain(4), "x")
    assert (r.determinant, r.rank_defect) == (1, 0)
    r = solvability_report(open_chain(5), "x")
    assert r.determinant == 0 and r.rank_defect >= 1 and r.predicted_real_solutions is None
    r = solvability_report(closed_chain(3), "x")
    assert (r.determinant, r.even_diag_count_mu, r.predicted_real_solutions) == (2, 1, 2)


def test_solvability_invariants():
    for spec in ["open_chain:7", "closed_chain:6", "ghz_star:5", "lattice:3x3", "steane5plus1"]:
        g = generate(spec)
        for axis in "xyz":
            r = solvability_report(g, axis)
            assert (r.determinant == 0) == (r.rank_defect > 0)
            assert r.predicted_complex_solutions == abs(r.determinant)
            rank = np.linalg.matrix_rank(promise_matrix(g, axis))
            assert r.rank_defect == g.n - rank


def test_hnf_diagonal_product_is_det():
    for spec in ["closed_chain:6", "closed_chain:7", "ghz_complete:5", "lattice:3x3:closed"]:
        a = promise_matrix(generate(spec), "x")
        dec = hermite_decompose(a)
        assert abs(exact_determinant(a)) == int(np.prod([abs(int(d)) for d in dec.diagonal]))


def test_duplicate_neighborhoods():
    assert has_duplicate_neighborhoods(ghz_star(4))
    assert not has_duplicate_neighborhoods(open_chain(4))
    assert solvability_report(ghz_star(4), "x").determinant == 0


def test_fig0_shape_and_known_cells():
    rows = fig0_grid(20)
    assert len(rows) == 6 * 400
    panels = {r[2] for r in rows}
    assert panels == {"x_planar", "x_cylinder", "x_torus", "y_planar", "y_cylinder", "y_torus"}
    cell = {(m1, m2, p): s for m1, m2, p, s in rows}
    # 1 x m open lattice is an open chain: singular for odd m (X)
    assert cell[(1, 5, "x_planar")] == 1 and cell[(1, 4, "x_planar")] == 0
    # Y open chain: singular for m = 2 mod 3
    assert cell[(1, 2, "y_planar")] == 1 and cell[(1, 3, "y_planar")] == 0


def test_cylinder_orientation():
    # rows open, columns closed
    for m1, m2 in [(3, 4), (4, 3), (2, 6), (5, 3)]:
        g = lattice([m1, m2], [False, True])
        dense = np.linalg.eigvalsh(promise_matrix(g, "x").astype(float))
        assert lattice_is_singular(m1, m2, Axis.X, "cylinder") == bool(np.any(np.abs(dense) < 1e-9))
