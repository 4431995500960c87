import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slcones.geometry import (as_triple, holomorphic_volume, kaehler_form, metric,
                              sl_plane_residual)

E1, E2, E3 = np.eye(3, dtype=complex)


def test_metric_examples():
    assert metric(E1, E1) == 1.0
    assert metric(E1, 1j * E1) == 0.0
    assert metric([1, 1j, 0], [1, 1j, 0]) == 2.0


def test_kaehler_examples():
    assert kaehler_form(E1, 1j * E1) == -1.0
    assert kaehler_form(E1, E2) == 0.0


def test_volume_examples():
    assert holomorphic_volume(E1, E2, E3) == 1.0
    assert holomorphic_volume(E2, E1, E3) == -1.0
    u = np.array([1 + 2j, -0.5j, 3.0])
    assert holomorphic_volume(u, u, E3) == 0.0


def test_volume_matches_determinant():
    rng = np.random.default_rng(3)
    M = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert abs(holomorphic_volume(M[:, 0], M[:, 1], M[:, 2]) - np.linalg.det(M)) < 1e-12


def test_sl_plane_examples():
    assert sl_plane_residual(E1, E2, E3).max() == 0.0
    assert sl_plane_residual(E1, 1j * E1, E2).omega_rs == 1.0


def test_rotated_real_plane_is_lagrangian_but_not_special():
    # e^{i phi} R^3 is Lagrangian; Omega picks up e^{3 i phi}
    ph = np.exp(1j * np.pi / 6)
    res = sl_plane_residual(ph * E1, ph * E2, ph * E3)
    assert max(res.omega_rs, res.omega_rt, res.omega_st) < 1e-15
    assert abs(res.im_omega - 1.0) < 1e-15


def test_as_triple_rejects_bad_shapes():
    with pytest.raises(ValueError):
        as_triple([1, 2])
    with pytest.raises(ValueError):
        as_triple([1, np.nan, 0])


def _special_unitary(seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    return Q / np.linalg.det(Q) ** (1 / 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_su3_preserves_omega_and_volume(seed):
    U = _special_unitary(seed)
    rng = np.random.default_rng(seed + 1)
    u, v, w = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert abs(kaehler_form(U @ u, U @ v) - kaehler_form(u, v)) < 1e-12
    assert abs(holomorphic_volume(U @ u, U @ v, U @ w) - holomorphic_volume(u, v, w)) < 1e-11


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False), min_size=3, max_size=3))
def test_kaehler_antisymmetric(u):
    assert abs(kaehler_form(u, u)) < 1e-12
