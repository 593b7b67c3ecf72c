import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stabfield.channel import (
    FieldConfig,
    LogicalBasis,
    apply_depolarizing,
    delta_p_general,
    delta_p_promise,
    delta_p_rotated,
)
from stabfield.graphs import Graph, build_graph, closed_chain, generate, open_chain
from stabfield.simulator import statevector_delta_p


def random_cfg(n, seed):
    return FieldConfig.random(n, np.random.default_rng(seed))


def test_field_config_canonical_form():
    cfg = FieldConfig([0.3, 0.4], [[0, -1, 0], [1, 0, 0]])
    assert cfg.axes[0].tolist() == [0, 1, 0]
    assert cfg.lambdas.tolist() == [-0.3, 0.4]
    with pytest.raises(ValueError):
        FieldConfig([0.3], [[1, 1, 0]])
    with pytest.raises(ValueError):
        cfg.lambdas[0] = 1.0


def test_field_config_json_round_trip():
    cfg = random_cfg(4, 1)
    back = FieldConfig.from_dict(json.loads(cfg.to_json()))
    np.testing.assert_allclose(back.lambdas, cfg.lambdas)
    np.testing.assert_allclose(back.axes, cfg.axes)


def test_logical_basis_validation():
    LogicalBasis([0, 1, 0], [0, 0, 1], [1, 0, 0])
    with pytest.raises(ValueError):
        LogicalBasis([1, 0, 0], [0, 0, 1], [0, 1, 0])  # left-handed
    with pytest.raises(ValueError):
        LogicalBasis([1, 0, 0], [1, 0, 0], [0, 0, 1])


def test_zero_angles_give_one():
    g = generate("lattice:2x3")
    cfg = FieldConfig(np.zeros(6), random_cfg(6, 2).axes)
    np.testing.assert_array_equal(delta_p_general(cfg, g), np.ones(6))


def test_z_aligned_gives_beta():
    g = generate("steane5plus1")
    lam = np.linspace(0.1, 3.0, 6)
    np.testing.assert_allclose(delta_p_general(FieldConfig.aligned(lam, "z"), g), np.cos(lam), atol=1e-15)


def test_promise_examples():
    b = np.array([0.9, 0.8, 0.7])
    assert delta_p_promise("x", b, open_chain(3), 2) == pytest.approx(0.9 * 0.7)
    assert delta_p_promise("y", [0.5] * 3, closed_chain(3), 1) == pytest.approx(1 / 8)
    assert delta_p_promise("z", np.full(4, np.cos(np.pi / 3)), open_chain(4), 3) == pytest.approx(0.5)


def test_promise_rejects():
    with pytest.raises(ValueError):
        delta_p_promise("x", [1.2, 0.5], open_chain(2))
    with pytest.raises(ValueError):
        delta_p_promise("x", [0.5, 0.5], Graph(2, ()))


@pytest.mark.parametrize("axis", ["x", "y", "z"])
@pytest.mark.parametrize("spec", ["open_chain:4", "closed_chain:5", "ghz_star:4", "lattice:3x3"])
def test_promise_equals_aligned_general(axis, spec):
    g = generate(spec)
    lam = np.random.default_rng(4).uniform(0, np.pi, g.n)
    cfg = FieldConfig.aligned(lam, axis)
    np.testing.assert_allclose(delta_p_promise(axis, np.cos(lam), g), delta_p_general(cfg, g), atol=1e-15)


def test_rotated_standard_equals_general():
    g = generate("ghz_complete:4")
    cfg = random_cfg(4, 5)
    assert np.array_equal(delta_p_rotated(cfg, g, LogicalBasis.standard()), delta_p_general(cfg, g))


def test_rotated_cyclic_basis_maps_x_field_to_z_case():
    g = open_chain(4)
    lam = np.array([0.3, 1.1, 2.0, 2.9])
    cyc = LogicalBasis([0, 1, 0], [0, 0, 1], [1, 0, 0])
    # with t = x the neighbour factors drop out and only the own angle is left
    cfg = FieldConfig.aligned(lam, "x")
    np.testing.assert_allclose(delta_p_rotated(cfg, g, cyc), delta_p_promise("z", np.cos(lam), g), atol=1e-15)


def test_rotated_single_field_matches_oracle():
    # one non-trivial field: no stabilizer cross terms can appear
    g = closed_chain(3)
    rng = np.random.default_rng(8)
    for _ in range(10):
        basis = LogicalBasis.from_matrix(np.linalg.qr(rng.standard_normal((3, 3)))[0] * [1, 1, 1])
        if np.linalg.det(basis.as_matrix()) < 0:
            continue
        lam = np.zeros(3)
        lam[rng.integers(3)] = rng.uniform(0, np.pi)
        cfg = FieldConfig(lam, random_cfg(3, int(rng.integers(1 << 30))).axes)
        np.testing.assert_allclose(delta_p_rotated(cfg, g, basis), statevector_delta_p(g, cfg, basis=basis), atol=1e-12)


def test_rotated_index_is_neighbour():
    # a field on vertex 1 only moves K_2 through the t-projection of n_1
    g = open_chain(2)
    basis = LogicalBasis.from_matrix(np.array([[0.0, 0.6, 0.8], [0.0, -0.8, 0.6], [1.0, 0.0, 0.0]]).T @ np.eye(3))
    cfg = FieldConfig([1.0, 0.0], [[1, 0, 0], [0, 0, 1]])
    t_dot = basis.t @ cfg.axes[0]
    expected = t_dot**2 + np.cos(1.0) * (1 - t_dot**2)
    assert delta_p_rotated(cfg, g, basis, 2) == pytest.approx(expected)
    assert statevector_delta_p(g, cfg, 2, basis) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_general_in_range_and_sign_invariant(seed):
    g = generate("lattice:2x3")
    cfg = random_cfg(6, seed)
    dp = delta_p_general(cfg, g)
    assert np.all(np.abs(dp) <= 1 + 1e-15)
    flipped = FieldConfig(-cfg.lambdas, cfg.axes)
    np.testing.assert_allclose(delta_p_general(flipped, g), dp, atol=1e-15)
    axes = cfg.axes * [-1, 1, -1]
    np.testing.assert_allclose(delta_p_general(FieldConfig(cfg.lambdas, axes), g), dp, atol=1e-15)


def test_isolated_vertices_rejected():
    g = build_graph(3, [(1, 2)])
    with pytest.raises(ValueError):
        delta_p_general(random_cfg(3, 0), g)


def test_config_size_mismatch():
    with pytest.raises(ValueError):
        delta_p_general(random_cfg(3, 0), open_chain(4))


def test_depolarizing():
    dp = np.array([0.8, -0.3])
    np.testing.assert_array_equal(apply_depolarizing(dp, 0), dp)
    np.testing.assert_array_equal(apply_depolarizing(dp, 1), [0, 0])
    assert apply_depolarizing(0.8, 0.01) == pytest.approx(0.792)
    with pytest.raises(ValueError):
        apply_depolarizing(dp, 1.5)
