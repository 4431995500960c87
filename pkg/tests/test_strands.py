import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from slcones import kernels
from slcones.cone2 import derive_params
from slcones.errors import ConstraintViolationError, FiniteEscapeError, InvalidLevelError
from slcones.strands import (StrandCoefficients, StrandState, initial_state, integrate_strand,
                             phase_integral, second_derivative_v, strand_derivative)


def test_derivative_examples():
    dy, dv = strand_derivative(StrandCoefficients.of((1, -1, 0)), StrandState([1, 1, 1], 0.0))
    assert np.allclose(dy, [1, -1, 0]) and dv == 2.0
    dy, _ = strand_derivative(StrandCoefficients.of((0.3, 0.2, -0.5)),
                              StrandState([1 + 1j, 2, 0], 0.0))
    assert dy[0] == 0 and dy[1] == 0


def test_initial_state_examples():
    c = StrandCoefficients.of((1, -1, 0))
    assert np.allclose(initial_state(c, 0.0).y, [1, 1, 1])
    s = initial_state(c, -1.0)
    assert np.allclose(s.y, [1, 1, -1j])
    assert strand_derivative(c, s)[1] == pytest.approx(0.0, abs=1e-15)
    s = initial_state(c, 0.5)
    assert abs(np.prod(s.y).imag - 0.5) < 1e-15 and np.allclose(np.abs(s.y), 1)
    with pytest.raises(InvalidLevelError):
        initial_state(c, 1.01)


def test_unit_level_is_uniform_rotation():
    beta = np.array(derive_params(0.7, 0, 0).beta)
    coeffs = StrandCoefficients.of(beta)
    init = initial_state(coeffs, -1.0)
    traj = integrate_strand(coeffs, init, (0.0, 10.0), tol=1e-12)
    s = np.linspace(0, 10, 101)
    exact = init.y * np.exp(1j * np.outer(s, beta))
    assert np.max(np.abs(traj(s)[0] - exact)) < 1e-8
    assert np.max(np.abs(traj(s)[1])) < 1e-10


def test_zero_level_stays_real():
    coeffs = derive_params(1.0, 0, 0).beta_coeffs
    traj = integrate_strand(coeffs, initial_state(coeffs, 0.0), (0.0, 20.0), tol=1e-12)
    y, _ = traj(np.linspace(0, 20, 300))
    assert np.max(np.abs(y.imag)) == 0.0


def test_against_scipy_solve_ivp():
    coeffs = derive_params(1.3, 0.2, 0.0).beta_coeffs
    init = initial_state(coeffs, 0.35)

    def rhs(_, x):
        st_ = StrandState.from_real(x)
        dy, dv = strand_derivative(coeffs, st_)
        return np.concatenate([dy.real, dy.imag, [dv]])

    ref = solve_ivp(rhs, (0, 15), init.to_real(), method="DOP853", rtol=1e-13, atol=1e-13,
                    dense_output=True)
    traj = integrate_strand(coeffs, init, (0, 15), tol=1e-12)
    s = np.linspace(0, 15, 97)
    assert np.max(np.abs(traj.real_state(s) - ref.sol(s).T)) < 1e-9


def test_backward_and_forward_join():
    coeffs = derive_params(0.5, 0.1, 0.0).beta_coeffs
    init = initial_state(coeffs, -0.4)
    both = integrate_strand(coeffs, init, (-5.0, 5.0), tol=1e-12)
    fwd = integrate_strand(coeffs, init, (0.0, 5.0), tol=1e-12)
    s = np.linspace(0, 5, 31)
    assert np.max(np.abs(both(s)[0] - fwd(s)[0])) < 1e-10
    assert np.max(both.conservation_residual(np.linspace(-5, 5, 51))) < 1e-10


def test_finite_escape_for_positive_coefficients():
    coeffs = StrandCoefficients.of((1.0, 1.0, 1.0))
    with pytest.raises(FiniteEscapeError) as info:
        integrate_strand(coeffs, initial_state(coeffs, 0.0), (0.0, 5.0))
    assert 0.0 < info.value.escape_at < 5.0


def test_second_derivative_matches_finite_difference():
    coeffs = derive_params(1.0, 0, 0).beta_coeffs
    traj = integrate_strand(coeffs, initial_state(coeffs, 0.3), (0.0, 4.0), tol=1e-13)
    h = 1e-4
    s0 = 1.7
    fd = (traj(s0 + h)[1] - 2 * traj(s0)[1] + traj(s0 - h)[1]) / h ** 2
    assert abs(fd - second_derivative_v(coeffs, traj(s0)[0])) < 1e-6


def test_phase_integral_examples():
    p = derive_params(0.9, 0, 0)
    coeffs = p.beta_coeffs
    traj = integrate_strand(coeffs, initial_state(coeffs, 0.0), (0, 5))
    assert phase_integral(coeffs, 0.0, traj, 1, 3.0) == 0.0
    traj = integrate_strand(coeffs, initial_state(coeffs, -1.0), (0, 5), tol=1e-12)
    for j in range(3):
        assert abs(phase_integral(coeffs, -1.0, traj, j, 4.0) - p.beta[j] * 4.0) < 1e-10


def test_phase_integral_matches_unwrapped_argument():
    coeffs = derive_params(1.2, 0, 0).beta_coeffs
    B = 0.45
    traj = integrate_strand(coeffs, initial_state(coeffs, B), (0, 8), tol=1e-12)
    s = np.linspace(0, 8, 4001)
    arg = np.unwrap(np.angle(traj(s)[0]), axis=0)
    for j in range(3):
        assert abs(phase_integral(coeffs, B, traj, j, 8.0) - (arg[-1, j] - arg[0, j])) < 1e-8


def test_phase_integral_pole_raises():
    # v from (1, -1, 0) reaches 1, so 1 - 2v changes sign along it
    wide = StrandCoefficients.of((1.0, -1.0, 0.0))
    traj = integrate_strand(wide, initial_state(wide, 0.0), (0, 3), tol=1e-12)
    with pytest.raises(ConstraintViolationError):
        phase_integral(StrandCoefficients.of((2.0, -2.0, 0.0)), 0.1, traj, 1, 3.0)


def test_csv_export(tmp_path):
    coeffs = derive_params(1.0, 0, 0).beta_coeffs
    traj = integrate_strand(coeffs, initial_state(coeffs, 0.2), (0, 2))
    text = traj.to_csv(tmp_path / "t.csv", samples=[0.0, 1.0])
    assert text.splitlines()[0].startswith("s,re_y1")
    assert (tmp_path / "t.csv").read_text() == text


@settings(max_examples=15, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(-0.95, 0.95))
def test_invariants_hold_along_orbits(theta, B):
    coeffs = derive_params(theta, 0, 0).beta_coeffs
    traj = integrate_strand(coeffs, initial_state(coeffs, B), (0, 20), tol=1e-10)
    s = np.linspace(0, 20, 201)
    assert np.max(traj.conservation_residual(s)) < 1e-8
    assert np.max(traj.constraint_residual(s)) < 1e-8


def test_backends_agree_and_fallback_selectable():
    coeffs = derive_params(0.6, 0, 0).beta_coeffs
    init = initial_state(coeffs, 0.3)
    a = integrate_strand(coeffs, init, (0, 6), tol=1e-11, backend="python")
    s = np.linspace(0, 6, 41)
    if kernels.BACKEND == "cython":
        b = integrate_strand(coeffs, init, (0, 6), tol=1e-11, backend="cython")
        assert np.max(np.abs(a(s)[0] - b(s)[0])) < 1e-13
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
