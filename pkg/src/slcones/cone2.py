"""Two-variable family of special Lagrangian cones in C^3.

A cone is ``Phi(r, s, t) = r (y_j(s) z_j(t))_j / sqrt(3)`` where ``y`` is a
strand with coefficients ``beta`` and level ``B`` and ``z`` a strand with
coefficients ``gamma`` and level ``C``.  In the normalized family both
vectors are unit, zero-sum and mutually orthogonal, parametrized by an
angle ``theta``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import geometry
from .elliptic import potential_closed_form
from .errors import DegenerateLatticeError, InvalidLevelError
from .io_utils import write_json
from .strands import (DEFAULT_TOL, StrandCoefficients, Trajectory, initial_state,
                      integrate_strand)

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)
_INV_SQRT3 = 1.0 / SQRT3


@dataclass(frozen=True)
class ConeParams:
    """Normalized cone data.  Build with :func:`derive_params`."""

    theta: float
    B: float
    C: float
    beta: tuple
    gamma: tuple
    a: float
    b: float
    c: float
    xi: complex

    @property
    def beta_coeffs(self) -> StrandCoefficients:
        return StrandCoefficients.of(self.beta, zero_sum=abs(sum(self.beta)) < 1e-12)

    @property
    def gamma_coeffs(self) -> StrandCoefficients:
        return StrandCoefficients.of(self.gamma, zero_sum=abs(sum(self.gamma)) < 1e-12)

    def identity_residuals(self) -> dict:
        """Defects of the algebraic identities the normalized family satisfies."""
        beta = np.array(self.beta)
        gamma = np.array(self.gamma)
        return {
            "beta_norm": abs(beta @ beta - 1.0),
            "gamma_norm": abs(gamma @ gamma - 1.0),
            "beta_sum": abs(beta.sum()),
            "gamma_sum": abs(gamma.sum()),
            "beta_dot_gamma": abs(beta @ gamma),
            "a_minus_sixth": abs(self.a - 1.0 / 6.0),
            "b2_plus_c2_minus_a3": abs(self.b ** 2 + self.c ** 2 - self.a ** 3),
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["xi"] = complex(self.xi)
        return d


def beta_gamma(theta: float):
    """The orthonormal zero-sum pair (beta, gamma) at angle ``theta``."""
    ct, st = math.cos(theta), math.sin(theta)
    beta = (ct / SQRT2 - st / SQRT6, -ct / SQRT2 - st / SQRT6, 2.0 * st / SQRT6)
    gamma = (-ct / SQRT6 - st / SQRT2, -ct / SQRT6 + st / SQRT2, 2.0 * ct / SQRT6)
    return beta, gamma


def derive_params(theta: float, B: float, C: float) -> ConeParams:
    """Build :class:`ConeParams` for angle ``theta`` and levels ``B``, ``C``."""
    for name, lev in (("B", B), ("C", C)):
        if not math.isfinite(lev) or abs(lev) > 1.0:
            raise InvalidLevelError(f"level {name} = {lev} is outside [-1, 1]")
    theta = float(theta) % (2.0 * math.pi)
    beta, gamma = beta_gamma(theta)
    a = sum(x * x for x in beta) / 6.0
    b = -0.5 * beta[0] * beta[1] * beta[2]
    c = -0.5 * gamma[0] * gamma[1] * gamma[2]
    xi = complex(c * C, b * B)
    return ConeParams(theta, float(B), float(C), beta, gamma, a, b, c, xi)


# ---------------------------------------------------------------- strands

@dataclass
class ConeStrands:
    """The integrated y and z strands of a cone."""

    y: Trajectory
    z: Trajectory

    @property
    def s_span(self):
        return self.y.span

    @property
    def t_span(self):
        return self.z.span


def build_strands(params: ConeParams, s_span=(0.0, 10.0), t_span=(0.0, 10.0),
                  tol: float = DEFAULT_TOL, backend=None) -> ConeStrands:
    """Integrate both strands of ``params`` from the canonical initial data."""
    cb = params.beta_coeffs
    cg = params.gamma_coeffs
    y = integrate_strand(cb, initial_state(cb, params.B), s_span, tol=tol, backend=backend)
    z = integrate_strand(cg, initial_state(cg, params.C), t_span, tol=tol, backend=backend)
    return ConeStrands(y, z)


def natural_periods(params: ConeParams):
    """Periods (S, T) of v and w, or None for a constant potential."""
    out = []
    for coeffs, level in ((params.beta_coeffs, params.B), (params.gamma_coeffs, params.C)):
        form = potential_closed_form(coeffs, level)
        out.append(None if form.constant else form.period)
    return tuple(out)


# ---------------------------------------------------------------- immersion

@dataclass(frozen=True)
class TangentFrame:
    """Value of Phi and its three coordinate derivatives (arrays of shape (..., 3))."""

    phi: np.ndarray
    d_r: np.ndarray
    d_s: np.ndarray
    d_t: np.ndarray


def immersion(params: ConeParams, strands: ConeStrands, r, s, t):
    """Phi(r, s, t); arguments broadcast against each other."""
    r, s, t = np.broadcast_arrays(np.asarray(r, float), np.asarray(s, float), np.asarray(t, float))
    y, _ = strands.y(s)
    z, _ = strands.z(t)
    return _INV_SQRT3 * r[..., None] * y * z


def _pairs_conj(y):
    return np.conj(np.stack([y[..., 1] * y[..., 2], y[..., 2] * y[..., 0],
                             y[..., 0] * y[..., 1]], axis=-1))


def tangent_frame(params: ConeParams, strands: ConeStrands, r, s, t) -> TangentFrame:
    """Phi together with dPhi/dr, dPhi/ds and dPhi/dt from the strand equations."""
    r, s, t = np.broadcast_arrays(np.asarray(r, float), np.asarray(s, float), np.asarray(t, float))
    y, _ = strands.y(s)
    z, _ = strands.z(t)
    beta = np.asarray(params.beta)
    gamma = np.asarray(params.gamma)
    d_r = _INV_SQRT3 * y * z
    rr = r[..., None]
    return TangentFrame(
        phi=rr * d_r,
        d_r=d_r,
        d_s=_INV_SQRT3 * rr * beta * _pairs_conj(y) * z,
        d_t=_INV_SQRT3 * rr * gamma * y * _pairs_conj(z),
    )


# ---------------------------------------------------------------- verification

@dataclass
class GridSpec:
    """Sample grid: r values times a uniform (s, t) box."""

    r_values: tuple = (0.5, 1.0, 2.0)
    s_range: tuple = (0.0, 10.0)
    t_range: tuple = (0.0, 10.0)
    n_s: int = 20
    n_t: int = 20

    def arrays(self):
        s = np.linspace(self.s_range[0], self.s_range[1], self.n_s)
        t = np.linspace(self.t_range[0], self.t_range[1], self.n_t)
        R, S, T = np.meshgrid(np.asarray(self.r_values, float), s, t, indexing="ij")
        return R, S, T


def period_box_grid(params: ConeParams, n: int = 20, r_values=(0.5, 1.0, 2.0),
                    fallback: float = 10.0) -> GridSpec:
    """Uniform grid over one period box, or ``[0, fallback]`` when aperiodic."""
    S, T = natural_periods(params)
    return GridSpec(tuple(r_values), (0.0, S or fallback), (0.0, T or fallback), n, n)


@dataclass
class SlReport:
    """Maximal special Lagrangian defects over a grid."""

    dimension: int
    params: dict
    grid: dict
    residuals: dict
    tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = bool(all(v < self.tol for v in self.residuals.values()))

    @property
    def worst(self) -> float:
        return max(self.residuals.values())

    def to_dict(self) -> dict:
        return {"kind": "sl_report", "dimension": self.dimension, "params": self.params,
                "grid": self.grid, "residuals": self.residuals, "tol": self.tol,
                "passed": self.passed}

    def write(self, path) -> None:
        write_json(path, self.to_dict())


def frame_residuals(d_r, d_s, d_t, phi=None, r=None) -> dict:
    """Max-abs defects shared by the two- and three-variable verifications."""
    res = {
        "omega_rs": np.max(np.abs(geometry.kaehler_form(d_r, d_s))),
        "omega_rt": np.max(np.abs(geometry.kaehler_form(d_r, d_t))),
        "omega_st": np.max(np.abs(geometry.kaehler_form(d_s, d_t))),
        "im_omega": np.max(np.abs(np.imag(geometry.holomorphic_volume(d_r, d_s, d_t)))),
        "g_rs": np.max(np.abs(geometry.metric(d_r, d_s))),
        "g_rt": np.max(np.abs(geometry.metric(d_r, d_t))),
        "g_st": np.max(np.abs(geometry.metric(d_s, d_t))),
    }
    if phi is not None and r is not None:
        res["norm_defect"] = np.max(np.abs(np.sum(np.abs(phi) ** 2, axis=-1) - r ** 2))
    return {k: float(v) for k, v in res.items()}


def verify_sl(params: ConeParams, grid: GridSpec | None = None, tol: float = 1e-9,
              strands: ConeStrands | None = None, integ_tol: float = 1e-12,
              backend=None) -> SlReport:
    """Check that Phi is special Lagrangian, cone-shaped and conformal on a grid."""
    grid = grid or period_box_grid(params)
    if strands is None:
        strands = build_strands(params, grid.s_range, grid.t_range, tol=integ_tol,
                                backend=backend)
    R, S, T = grid.arrays()
    fr = tangent_frame(params, strands, R, S, T)
    res = frame_residuals(fr.d_r, fr.d_s, fr.d_t, fr.phi, R)
    ns = np.sum(np.abs(fr.d_s) ** 2, axis=-1)
    nt = np.sum(np.abs(fr.d_t) ** 2, axis=-1)
    _, v = strands.y(S)
    _, w = strands.z(T)
    f = params.a + params.b * v + params.c * w
    res["conformality"] = float(np.max(np.abs(ns - nt)))
    res["conformal_factor"] = float(np.max(np.abs(ns - 2.0 * R ** 2 * f)))
    return SlReport(2, params.to_dict(), asdict(grid), res, tol)


# ---------------------------------------------------------------- classification

CASE_A = "U1_invariant_a"
CASE_B = "evolving_quadrics_b"
CASE_C = "reduced_c"
GENERIC = "generic"


def classify_case(params: ConeParams, eps: float = 1e-12) -> str:
    """Special-case label; constant potential beats real strands beats a zero coefficient."""
    if abs(abs(params.B) - 1.0) <= eps or abs(abs(params.C) - 1.0) <= eps:
        return CASE_A
    if abs(params.B) <= eps or abs(params.C) <= eps:
        return CASE_B
    if min(abs(x) for x in params.beta + params.gamma) <= eps:
        return CASE_C
    return GENERIC


# ---------------------------------------------------------------- area

def adaptive_simpson(fn, a: float, b: float, tol: float = 1e-10, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature of a scalar function on [a, b]."""
    if a == b:
        return 0.0
    fa, fb = fn(a), fn(b)
    m = 0.5 * (a + b)
    fm = fn(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = fn(lm), fn(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        diff = left + right - est
        if depth >= max_depth or abs(diff) <= 15.0 * eps:
            total += left + right + diff / 15.0
        else:
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
    return total


def _potential_integral(coeffs, level, period):
    form = potential_closed_form(coeffs, level)
    if form.constant:
        return 0.0
    return adaptive_simpson(lambda x: float(form(x)), 0.0, period, tol=1e-11)


def lattice_determinant(lattice) -> int:
    a = np.asarray(lattice)
    if a.shape != (2, 2):
        raise ValueError("lattice must be a 2x2 matrix")
    return int(round(abs(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])))


def area(params: ConeParams, S: float, T: float, lattice) -> float:
    """Area of the torus link: 2N (a S T + b T int_0^S v + c S int_0^T w)."""
    N = lattice_determinant(lattice)
    if N == 0:
        raise DegenerateLatticeError("lattice has zero determinant")
    iv = _potential_integral(params.beta_coeffs, params.B, S)
    iw = _potential_integral(params.gamma_coeffs, params.C, T)
    return 2.0 * N * (params.a * S * T + params.b * T * iv + params.c * S * iw)


def area_by_quadrature(params: ConeParams, strands: ConeStrands, gen1, gen2,
                       nodes: int = 96) -> float:
    """Integrate the area form 2 (a + b v + c w) over the parallelogram (gen1, gen2).

    Tensor Gauss-Legendre on the parallelogram, with v and w read from the
    integrated strands.  Independent of the closed-form potential.
    ``nodes`` is a count per direction or a pair of counts.
    """
    n1, n2 = (nodes, nodes) if np.ndim(nodes) == 0 else (int(nodes[0]), int(nodes[1]))
    x1, w1 = np.polynomial.legendre.leggauss(n1)
    x2, w2 = np.polynomial.legendre.leggauss(n2)
    x1, w1, x2, w2 = 0.5 * (x1 + 1.0), 0.5 * w1, 0.5 * (x2 + 1.0), 0.5 * w2
    g1 = np.asarray(gen1, float)
    g2 = np.asarray(gen2, float)
    U, V = np.meshgrid(x1, x2, indexing="ij")
    s = U * g1[0] + V * g2[0]
    t = U * g1[1] + V * g2[1]
    _, v = strands.y(s)
    _, w = strands.z(t)
    dens = 2.0 * (params.a + params.b * v + params.c * w)
    jac = abs(g1[0] * g2[1] - g1[1] * g2[0])
    return float(jac * np.einsum("i,j,ij->", w1, w2, dens))
