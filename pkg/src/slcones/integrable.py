"""Integrable-systems structure of the two-variable cones.

Everything here is evaluated pointwise from the strand values
``(y, v)`` at ``s`` and ``(z, w)`` at ``t``.  Derivatives that enter the
formulas (``v', v'', w', w''``) come from the strand equations.  The
finite-difference checks evaluate the stencil through local Taylor jets
of the strands, so their error is pure discretization error.

Conventions: ``f = a + b v + c w``, ``xi = r e^{i theta}`` with the
principal argument, the special coordinate is ``z' = xi^{1/3} (s + i t)``
and ``d/dz' = (d/ds - i d/dt) / (2 xi^{1/3})``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cone2 import ConeParams, ConeStrands
from .errors import IsotropicError, SingularDensityError

SUPERCONFORMAL = "superconformal"
ISOTROPIC = "isotropic"
_INV_SQRT3 = 1.0 / math.sqrt(3.0)
ZETA = np.exp(2j * np.pi / 3.0)
UPSILON = np.diag([1.0, ZETA ** -1, ZETA ** -2])


def matrix_norm(M) -> float:
    """Max absolute entry."""
    return float(np.max(np.abs(M)))


def commutator(X, Y):
    return X @ Y - Y @ X


def kappa(A):
    """The involution A -> -(A with rows/columns permuted and transposed)."""
    A = np.asarray(A)
    return -np.array([[A[0, 0], A[2, 0], A[1, 0]],
                      [A[0, 2], A[2, 2], A[1, 2]],
                      [A[0, 1], A[2, 1], A[1, 1]]])


# ---------------------------------------------------------------- pointwise values

@dataclass
class PointValues:
    """Strand data at one (s, t) point together with derived scalars."""

    y: np.ndarray
    v: float
    z: np.ndarray
    w: float
    vp: float
    vpp: float
    wp: float
    wpp: float
    f: float


def _pairs(y):
    return np.array([y[1] * y[2], y[2] * y[0], y[0] * y[1]])


def point_values(params: ConeParams, strands: ConeStrands, s: float, t: float) -> PointValues:
    y, v = strands.y(float(s))
    z, w = strands.z(float(t))
    y = np.asarray(y).reshape(3)
    z = np.asarray(z).reshape(3)
    beta = np.asarray(params.beta)
    gamma = np.asarray(params.gamma)
    vp = 2.0 * float(np.prod(y).real)
    wp = 2.0 * float(np.prod(z).real)
    vpp = 2.0 * float(np.sum(beta * np.abs(_pairs(y)) ** 2))
    wpp = 2.0 * float(np.sum(gamma * np.abs(_pairs(z)) ** 2))
    f = params.a + params.b * float(v) + params.c * float(w)
    return PointValues(y, float(v), z, float(w), vp, vpp, wp, wpp, f)


def _require_density(pv: PointValues):
    if not pv.f > 0.0:
        raise SingularDensityError(f"a + b v + c w = {pv.f:.3e} is not positive")


def _local(strands: ConeStrands, s: float, t: float, order: int = 20) -> ConeStrands:
    """Strands replaced by their Taylor jets about (s, t)."""
    return ConeStrands(strands.y.jet(s, order), strands.z.jet(t, order))


# ---------------------------------------------------------------- harmonic sequence

@dataclass(frozen=True)
class HarmonicTriple:
    phi_m1: np.ndarray
    phi_0: np.ndarray
    phi_1: np.ndarray


def _pq(params: ConeParams, pv: PointValues):
    beta = np.asarray(params.beta)
    gamma = np.asarray(params.gamma)
    P = beta * np.conj(_pairs(pv.y)) * pv.z
    Qt = gamma * pv.y * np.conj(_pairs(pv.z))
    return P, Qt


def harmonic_from_values(params: ConeParams, pv: PointValues) -> HarmonicTriple:
    _require_density(pv)
    P, Qt = _pq(params, pv)
    k = 0.5 * _INV_SQRT3
    return HarmonicTriple(phi_m1=-k * (P + 1j * Qt) / pv.f,
                          phi_0=_INV_SQRT3 * pv.y * pv.z,
                          phi_1=k * (P - 1j * Qt))


def harmonic_triple(params: ConeParams, strands: ConeStrands, s: float, t: float) -> HarmonicTriple:
    """(phi_{-1}, phi_0, phi_1) of the harmonic sequence at (s, t)."""
    return harmonic_from_values(params, point_values(params, strands, s, t))


def harmonic_identities(params, strands, s, t) -> dict:
    """Orthogonality and norm defects of the harmonic triple.

    The norms |phi_{-1}|^2 = 1/f and |phi_1|^2 = f are checked relative to f.
    """
    pv = point_values(params, strands, s, t)
    h = harmonic_from_values(params, pv)
    herm = lambda u, v: complex(np.sum(u * np.conj(v)))  # noqa: E731
    n = lambda u: float(np.sum(np.abs(u) ** 2))  # noqa: E731
    return {
        "orth_0_1": abs(herm(h.phi_0, h.phi_1)),
        "orth_m1_0": abs(herm(h.phi_m1, h.phi_0)),
        "norm_m1": abs(pv.f * n(h.phi_m1) - 1.0),
        "norm_0": abs(n(h.phi_0) - 1.0),
        "norm_1": abs(n(h.phi_1) / pv.f - 1.0),
        "product": abs(n(h.phi_m1) * n(h.phi_1) - 1.0),
    }


def special_frame_det(params: ConeParams, strands: ConeStrands, s: float, t: float) -> complex:
    """det(phi_0', phi_1', phi_2') in the special coordinate; should equal 1."""
    xi, _ = xi_and_classify(params)
    if xi == 0:
        raise IsotropicError("special coordinate needs xi != 0")
    h = harmonic_triple(params, strands, s, t)
    c13 = xi_root(xi)
    p0 = -1j * h.phi_0
    p1 = -1j * h.phi_1 / c13
    p2 = -1j * c13 * h.phi_m1  # phi'_2 = phi'_{-1}
    return complex(np.linalg.det(np.column_stack([p0, p1, p2])))


def xi_and_classify(params: ConeParams):
    """xi = c C + i b B and the resulting type of the harmonic map."""
    xi = complex(params.c * params.C, params.b * params.B)
    return xi, (ISOTROPIC if xi == 0 else SUPERCONFORMAL)


def xi_root(xi: complex) -> complex:
    """Principal cube root r^{1/3} e^{i theta/3}, theta in (-pi, pi]."""
    return abs(xi) ** (1.0 / 3.0) * np.exp(1j * np.angle(xi) / 3.0)


def _dz(fs_p, fs_m, ft_p, ft_m, h):
    """d/dz = (d/ds - i d/dt)/2 by central differences."""
    return 0.5 * ((fs_p - fs_m) - 1j * (ft_p - ft_m)) / (2.0 * h)


def return_map_residual(params: ConeParams, strands: ConeStrands, points, h: float = 1e-4,
                        xi: complex | None = None) -> float:
    """max |phi_2 - xi phi_{-1}| with phi_2 = d phi_1/dz - d(log|phi_1|^2)/dz phi_1.

    ``xi`` defaults to the value of :func:`xi_and_classify`; the derivative
    in ``z = s + i t`` is taken by central differences with step ``h``.
    """
    if xi is None:
        xi, _ = xi_and_classify(params)
    worst = 0.0
    for s0, t0 in points:
        loc = _local(strands, s0, t0)

        def phi1(s, t):
            return harmonic_triple(params, loc, s, t).phi_1

        vals = [phi1(s0 + h, t0), phi1(s0 - h, t0), phi1(s0, t0 + h), phi1(s0, t0 - h)]
        logs = [math.log(float(np.sum(np.abs(p) ** 2))) for p in vals]
        trip = harmonic_triple(params, loc, s0, t0)
        dphi = _dz(*vals, h)
        dlog = _dz(*logs, h)
        phi2 = dphi - dlog * trip.phi_1
        worst = max(worst, float(np.max(np.abs(phi2 - xi * trip.phi_m1))))
    return worst


# ---------------------------------------------------------------- Toda / Tzitzeica

def toda_solution(params: ConeParams, strands: ConeStrands, s: float, t: float):
    """(chi_0, chi_1, chi_2) = (1, |xi|^{-2/3} f, |xi|^{2/3} / f)."""
    xi, kind = xi_and_classify(params)
    if kind == ISOTROPIC:
        raise IsotropicError("Toda solution needs xi != 0")
    pv = point_values(params, strands, s, t)
    _require_density(pv)
    r23 = abs(xi) ** (2.0 / 3.0)
    return 1.0, pv.f / r23, r23 / pv.f


def _laplacian(fn, s0, t0, h):
    """5-point Laplacian of ``fn``, which must vanish at (s0, t0)."""
    return (fn(s0 + h, t0) + fn(s0 - h, t0) + fn(s0, t0 + h) + fn(s0, t0 - h)) / (h * h)


def _log_density_increment(params: ConeParams, loc: ConeStrands, s0: float, t0: float):
    """(s, t) -> log(f(s, t) / f(s0, t0)) without cancellation.

    The increment b (v - v0) + c (w - w0) is formed before the logarithm,
    which keeps the stencil noise near machine precision even when f is
    (nearly) constant.
    """
    _, v0 = loc.y(s0)
    _, w0 = loc.z(t0)
    f0 = params.a + params.b * float(v0) + params.c * float(w0)
    if not f0 > 0.0:
        raise SingularDensityError(f"a + b v + c w = {f0:.3e} is not positive")

    def inc(s, t):
        _, v = loc.y(s)
        _, w = loc.z(t)
        d = params.b * (float(v) - float(v0)) + params.c * (float(w) - float(w0))
        if not f0 + d > 0.0:
            raise SingularDensityError("a + b v + c w is not positive on the stencil")
        return math.log1p(d / f0)
    return inc


def toda_residual(params: ConeParams, strands: ConeStrands, points, h: float = 1e-3) -> float:
    """max over points and k of the Toda equation defect, 5-point Laplacian.

    Uses log chi_0 = 0 and log chi_{1,2} = +-(log f) + const.
    """
    xi, _ = xi_and_classify(params)
    scale = 1.0 / (4.0 * abs(xi) ** (2.0 / 3.0))
    worst = 0.0
    for s0, t0 in points:
        loc = _local(strands, s0, t0)
        chi = toda_solution(params, loc, s0, t0)
        lap = scale * _laplacian(_log_density_increment(params, loc, s0, t0), s0, t0, h)
        for k, sign in ((0, 0.0), (1, 1.0), (2, -1.0)):
            rhs = chi[(k + 1) % 3] / chi[k] - chi[k] / chi[(k - 1) % 3]
            worst = max(worst, abs(sign * lap - rhs))
    return worst


def tzitzeica_residual(params: ConeParams, strands: ConeStrands, points, h: float = 1e-3) -> float:
    """max |(1/(4|xi|^{2/3})) Lap F - (e^{-2F} - e^F)| with F = log f - (2/3) log|xi|."""
    xi, kind = xi_and_classify(params)
    if kind == ISOTROPIC:
        raise IsotropicError("Tzitzeica solution needs xi != 0")
    shift = (2.0 / 3.0) * math.log(abs(xi))
    scale = 1.0 / (4.0 * abs(xi) ** (2.0 / 3.0))
    worst = 0.0
    for s0, t0 in points:
        loc = _local(strands, s0, t0)
        pv = point_values(params, loc, s0, t0)
        _require_density(pv)
        F0 = math.log(pv.f) - shift
        lap = scale * _laplacian(_log_density_increment(params, loc, s0, t0), s0, t0, h)
        worst = max(worst, abs(lap - (math.exp(-2.0 * F0) - math.exp(F0))))
    return worst


# ---------------------------------------------------------------- connection

@dataclass(frozen=True)
class ConnectionCoeffs:
    """alpha_1', alpha_0' (dz' part) and alpha_{-1}'', alpha_0'' (dz-bar' part)."""

    a1p: np.ndarray
    a0p: np.ndarray
    am1pp: np.ndarray
    a0pp: np.ndarray

    def alpha(self, lam: complex):
        """(A', A'') with alpha_lambda = A' dz' + A'' dz-bar'."""
        return self.a1p * lam + self.a0p, self.am1pp / lam + self.a0pp


def _dz_prime_factor(xi: complex) -> complex:
    return 1.0 / (2.0 * xi_root(xi))


def connection_from_values(params: ConeParams, pv: PointValues) -> ConnectionCoeffs:
    _require_density(pv)
    xi, kind = xi_and_classify(params)
    if kind == ISOTROPIC:
        raise IsotropicError("connection needs xi != 0")
    r = abs(xi)
    f = pv.f
    k = _dz_prime_factor(xi)
    dlf = k * (params.b * pv.vp - 1j * params.c * pv.wp) / f
    sf = math.sqrt(f)
    c = r ** (-1.0 / 3.0)
    a1p = c * np.array([[0, 0, sf], [sf, 0, 0], [0, r / f, 0]], dtype=complex)
    a0p = 0.5 * np.diag([0.0, dlf, -dlf])
    am1pp = -c * np.array([[0, sf, 0], [0, 0, r / f], [sf, 0, 0]], dtype=complex)
    a0pp = 0.5 * np.diag([0.0, -np.conj(dlf), np.conj(dlf)])
    return ConnectionCoeffs(a1p, a0p, am1pp, a0pp)


def connection_coeffs(params: ConeParams, strands: ConeStrands, s: float, t: float) -> ConnectionCoeffs:
    return connection_from_values(params, point_values(params, strands, s, t))


def flatness_residual(params: ConeParams, strands: ConeStrands, points, lam: complex = 1.0,
                      h: float = 1e-3) -> float:
    """max | dA''/dz' - dA'/dz-bar' + [A', A''] | by central differences."""
    xi, _ = xi_and_classify(params)
    k = _dz_prime_factor(xi)
    worst = 0.0
    for s0, t0 in points:
        loc = _local(strands, s0, t0)

        def parts(s, t):
            return connection_coeffs(params, loc, s, t).alpha(lam)
        sp, sm, tp, tm = parts(s0 + h, t0), parts(s0 - h, t0), parts(s0, t0 + h), parts(s0, t0 - h)
        d_s = [(sp[i] - sm[i]) / (2 * h) for i in range(2)]
        d_t = [(tp[i] - tm[i]) / (2 * h) for i in range(2)]
        Ap, App = parts(s0, t0)
        dz_App = k * (d_s[1] - 1j * d_t[1])
        dzb_Ap = np.conj(k) * (d_s[0] + 1j * d_t[0])
        worst = max(worst, matrix_norm(dz_App - dzb_Ap + commutator(Ap, App)))
    return worst


# ---------------------------------------------------------------- Killing field

@dataclass(frozen=True)
class KillingField:
    """Laurent coefficients tau_{-2..2} of the degree-2 polynomial Killing field."""

    tau: dict
    theta_branch: float
    f: float
    g: complex
    h: float

    def __call__(self, lam: complex):
        return sum(self.tau[n] * lam ** n for n in range(-2, 3))


def killing_from_values(params: ConeParams, pv: PointValues) -> KillingField:
    _require_density(pv)
    xi, kind = xi_and_classify(params)
    if kind == ISOTROPIC:
        raise IsotropicError("Killing field needs xi != 0")
    r = abs(xi)
    th = float(np.angle(xi))
    f = pv.f
    sf = math.sqrt(f)
    g = (-params.b * pv.vp + 1j * params.c * pv.wp) / (2.0 * sf)
    hh = (-params.b * pv.vpp + params.c * pv.wpp) / (12.0 * f)
    e = lambda n: np.exp(1j * n * th / 3.0)  # noqa: E731
    gb = np.conj(g)
    tau = {
        2: 1j * e(2) * np.array([[0, r / sf, 0], [0, 0, f], [r / sf, 0, 0]], dtype=complex),
        1: 1j * e(1) * np.array([[0, 0, g], [-g, 0, 0], [0, 0, 0]], dtype=complex),
        0: 1j * np.diag([2 * hh, -hh, -hh]).astype(complex),
        -1: 1j * e(-1) * np.array([[0, -gb, 0], [0, 0, 0], [gb, 0, 0]], dtype=complex),
        -2: 1j * e(-2) * np.array([[0, 0, r / sf], [r / sf, 0, 0], [0, f, 0]], dtype=complex),
    }
    return KillingField(tau, th, f, complex(g), float(hh))


def killing_field(params: ConeParams, strands: ConeStrands, s: float, t: float) -> KillingField:
    return killing_from_values(params, point_values(params, strands, s, t))


def killing_residual(params: ConeParams, strands: ConeStrands, points, h: float = 1e-3) -> float:
    """max over points and n of both Killing-equation defects (central differences)."""
    xi, _ = xi_and_classify(params)
    k = _dz_prime_factor(xi)
    Z = np.zeros((3, 3), dtype=complex)
    worst = 0.0
    for s0, t0 in points:
        loc = _local(strands, s0, t0)
        pv0 = point_values(params, loc, s0, t0)
        T = killing_from_values(params, pv0).tau
        con = connection_from_values(params, pv0)
        stencil = [killing_field(params, loc, s, t).tau
                   for s, t in ((s0 + h, t0), (s0 - h, t0), (s0, t0 + h), (s0, t0 - h))]
        for n in range(-2, 3):
            ds = (stencil[0][n] - stencil[1][n]) / (2 * h)
            dt = (stencil[2][n] - stencil[3][n]) / (2 * h)
            dz = k * (ds - 1j * dt)
            dzb = np.conj(k) * (ds + 1j * dt)
            e1 = dz - (commutator(T[n], con.a0p) + commutator(T.get(n - 1, Z), con.a1p))
            e2 = dzb - (commutator(T[n], con.a0pp) + commutator(T.get(n + 1, Z), con.am1pp))
            worst = max(worst, matrix_norm(e1), matrix_norm(e2))
    return worst


def unit_circle_samples(n: int = 8, offset: float = 0.3):
    return [np.exp(1j * (offset + 2 * np.pi * k / n)) for k in range(n)]


def reality_residual(kf: KillingField, lambdas=None) -> float:
    """max |tau(lam) + tau(lam)^dagger| over unit-circle ``lambdas``."""
    lambdas = lambdas if lambdas is not None else unit_circle_samples()
    return max(matrix_norm(kf(l) + kf(l).conj().T) for l in lambdas)


def equivariance_residual(field, lambdas=None, zeta: complex = ZETA,
                          upsilon=UPSILON) -> float:
    """max |X(zeta lam) - Upsilon X(lam) Upsilon^{-1}| for a lambda-dependent matrix X."""
    lambdas = lambdas if lambdas is not None else unit_circle_samples() + [0.7 * np.exp(1.1j)]
    ui = np.linalg.inv(upsilon)
    return max(matrix_norm(field(zeta * l) - upsilon @ field(l) @ ui) for l in lambdas)


def kappa_residual(kf: KillingField, lambdas=None) -> float:
    """max |kappa(tau(lam)) + tau(-lam)|."""
    lambdas = lambdas if lambdas is not None else unit_circle_samples() + [0.7 * np.exp(1.1j)]
    return max(matrix_norm(kappa(kf(l)) + kf(-l)) for l in lambdas)


# ---------------------------------------------------------------- finite type

@dataclass
class FiniteTypeReport:
    eta: dict
    defect_top: float      # |eta_7 - alpha_1'|
    defect_next: float     # |eta_6 - 2 alpha_0'|
    defect_top_neg: float  # |eta_7 + alpha_1'|
    defect_next_neg: float  # |eta_6 + 2 alpha_0'|
    eta8_norm: float
    degree: int

    @property
    def degree_mod_3(self) -> int:
        return self.degree % 3

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("defect_top", "defect_next", "defect_top_neg",
                                               "defect_next_neg", "eta8_norm", "degree")}


def finite_type_certificate(params: ConeParams, strands: ConeStrands, point) -> FiniteTypeReport:
    """Laurent coefficients of eta = (xi^{-4/3} lam^3 - conj(xi)^{-4/3} lam^{-3}) tau^2."""
    s, t = point
    pv = point_values(params, strands, s, t)
    kf = killing_from_values(params, pv)
    con = connection_from_values(params, pv)
    xi, _ = xi_and_classify(params)
    root = xi_root(xi)
    lead = root ** -4
    tail = np.conj(root) ** -4
    sq = {}
    for i in range(-2, 3):
        for j in range(-2, 3):
            sq[i + j] = sq.get(i + j, 0) + kf.tau[i] @ kf.tau[j]
    eta = {}
    for n, M in sq.items():
        eta[n + 3] = eta.get(n + 3, 0) + lead * M
        eta[n - 3] = eta.get(n - 3, 0) - tail * M
    tol = 1e-12 * max(matrix_norm(M) for M in eta.values())
    degree = max(n for n, M in eta.items() if matrix_norm(M) > tol)
    zero = np.zeros((3, 3))
    return FiniteTypeReport(
        eta=eta,
        defect_top=matrix_norm(eta[7] - con.a1p),
        defect_next=matrix_norm(eta[6] - 2.0 * con.a0p),
        defect_top_neg=matrix_norm(eta[7] + con.a1p),
        defect_next_neg=matrix_norm(eta[6] + 2.0 * con.a0p),
        eta8_norm=matrix_norm(eta.get(8, zero)),
        degree=degree,
    )
