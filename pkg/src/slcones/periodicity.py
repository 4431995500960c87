"""Strand periods, rotation phases and the search for torus solutions.

A nonconstant strand has a periodic potential ``v`` with period ``S`` and
``y_j(s + S) = exp(i eta_j) y_j(s)``.  The cone link is a torus when the
translations ``(sigma, tau)`` fixing ``Phi(1, s, t)`` form a rank-2
lattice.  For nonconstant ``v`` and ``w`` that means every ``eta_j`` and
``zeta_j`` is a rational multiple of pi.  When ``v`` is constant the
s-translations form a continuous group and one rationality condition on
the z-phases is enough.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq, fsolve

from .cone2 import (GENERIC, ConeParams, area, area_by_quadrature, build_strands, classify_case,
                    derive_params)
from .elliptic import EllipticForm, potential_closed_form
from .errors import ConstantPotentialError, ConstraintViolationError, DegenerateLatticeError
from .io_utils import SCHEMA_VERSION, atomic_write_text, to_jsonable
from .strands import StrandCoefficients, initial_state, integrate_strand

WORKERS_ENV = "SLCONES_WORKERS"
TOUCH_EPS = 1e-9


# ---------------------------------------------------------------- periods and phases

def strand_period(coeffs: StrandCoefficients, B: float) -> float:
    """Period of the potential from the complete elliptic integral, 2K / omega.

    Raises
    ------
    ConstantPotentialError
        If |B| = 1, where the potential is constant.
    """
    form = potential_closed_form(coeffs, B)
    if form.constant:
        raise ConstantPotentialError("|B| = 1: the potential is constant and has no period")
    return form.period


def event_period(coeffs: StrandCoefficients, B: float, tol: float = 1e-12) -> float:
    """Period by integrating the strand and locating the next upward zero of v.

    The canonical initial state has ``v(0) = 0`` and ``v'(0) > 0``; the
    first later time with the same property closes one period.
    """
    guess = strand_period(coeffs, B)
    traj = integrate_strand(coeffs, initial_state(coeffs, B), (0.0, 1.3 * guess), tol=tol)
    grid = np.linspace(0.5 * guess, 1.3 * guess, 801)
    _, v = traj(grid)
    for k in range(len(grid) - 1):
        if v[k] < 0.0 <= v[k + 1]:
            return brentq(lambda s: float(traj(s)[1]), grid[k], grid[k + 1], xtol=1e-15,
                          rtol=4 * np.finfo(float).eps)
    raise ConstraintViolationError("no upward crossing of v = 0 within 1.3 periods")


def _touching(form: EllipticForm, c) -> np.ndarray:
    """Components whose modulus |y_j|^2 = c_j v + 1 vanishes at a turning point."""
    lo, hi = form.turning_points
    return np.array([cj != 0.0 and min(abs(cj * lo + 1.0), abs(cj * hi + 1.0)) < TOUCH_EPS
                     for cj in c])


def reciprocal_integrals(form: EllipticForm, rtol: float = 1e-14, max_points: int = 2 ** 22):
    """int_0^S ds / (c_j v + 1) for j = 1, 2, 3 over one period.

    The integrand is periodic and analytic in the elliptic argument, so
    the trapezoid rule converges geometrically; the node count is doubled
    until successive values agree to ``rtol``.
    """
    c = form.coeffs.c
    span = 2.0 * form.K
    n = 64
    prev = None
    while True:
        u = span * np.arange(n) / n
        v = form.v_of_u(u)
        vals = span / n * np.sum(1.0 / (c[:, None] * v[None, :] + 1.0), axis=1) / form.omega
        if prev is not None and np.all(np.abs(vals - prev) <= rtol * np.abs(vals)):
            return vals
        if n >= max_points:
            return vals
        prev = vals
        n *= 2


def rotation_phases(coeffs: StrandCoefficients, B: float, S: float | None = None) -> np.ndarray:
    """Rotation phases eta_j with y_j(s + S) = exp(i eta_j) y_j(s).

    For |B| < 1, ``eta_j = -c_j B int_0^S ds / (c_j v + 1)`` over the
    potential period (``S`` is ignored).  For |B| = 1 the potential is
    constant, ``S`` must be supplied and ``eta_j = -c_j B S``.

    At B = 0 the strands are real and the components whose modulus
    vanishes at a turning point change sign once per period; the phase
    of such a component is ``-pi sign(c_j)``, the limit as B -> 0+.
    """
    form = potential_closed_form(coeffs, B)
    c = coeffs.c
    if form.constant:
        if S is None:
            raise ConstantPotentialError("constant potential: supply the translation S")
        return -c * float(B) * float(S)
    if B == 0.0:
        return np.where(_touching(form, c), -math.pi * np.sign(c), 0.0)
    vals = reciprocal_integrals(form)
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
        raise ConstraintViolationError("c_j v + 1 vanishes on the orbit")
    return -c * float(B) * vals


def monodromy_defect(coeffs: StrandCoefficients, B: float, eta, S: float,
                     s0_values=(0.0, 0.37, 1.9), tol: float = 1e-12) -> float:
    """max_j,s0 |y_j(s0 + S) - exp(i eta_j) y_j(s0)| from an integrated strand."""
    s0_values = np.asarray(s0_values, float)
    traj = integrate_strand(coeffs, initial_state(coeffs, B),
                            (0.0, float(s0_values.max() + S)), tol=tol)
    y0, _ = traj(s0_values)
    y1, _ = traj(s0_values + S)
    return float(np.max(np.abs(y1 - np.exp(1j * np.asarray(eta)) * y0)))


# ---------------------------------------------------------------- rationality

def rationalize(x: float, max_den: int, tol: float):
    """Closest fraction p/q with q <= max_den, if it lies within ``tol`` of x."""
    if max_den < 1:
        raise ValueError("max_den must be at least 1")
    if not math.isfinite(x):
        return None
    frac = Fraction(x).limit_denominator(max_den)
    if abs(x - frac) < tol:
        return frac.numerator, frac.denominator
    return None


def torus_multiple(fractions) -> int:
    """Least n > 0 with n * (p/q) even for every fraction (phases in units of pi)."""
    n = 1
    for p, q in fractions:
        fr = Fraction(p, q)
        step = fr.denominator * (2 if fr.numerator % 2 else 1)
        n = n * step // math.gcd(n, step)
    return n


@dataclass
class PeriodData:
    """Period and rotation phases of one strand, with rational data when found."""

    S: float | None
    eta: tuple
    rational_approx: tuple | None = None
    torus_multiple: int | None = None

    def to_dict(self) -> dict:
        return to_jsonable(asdict(self))


def period_data(coeffs: StrandCoefficients, B: float, max_den: int = 40, tol: float = 1e-7,
                S: float | None = None) -> PeriodData:
    form = potential_closed_form(coeffs, B)
    period = S if form.constant else form.period
    eta = rotation_phases(coeffs, B, period)
    fracs = [rationalize(e / math.pi, max_den, tol) for e in eta]
    if any(f is None for f in fracs):
        return PeriodData(period, tuple(float(e) for e in eta))
    return PeriodData(period, tuple(float(e) for e in eta), tuple(fracs), torus_multiple(fracs))


# ---------------------------------------------------------------- lattices

@dataclass
class TorusLattice:
    """Period lattice of (s, t) -> Phi(1, s, t).

    ``lattice`` holds integer coefficients a_ij in units of (S, T), so the
    generators are (a_11 S, a_12 T) and (a_21 S + shear, a_22 T).  The
    real offset ``shear`` is nonzero only when v is constant.
    ``generators`` are the two vectors in (s, t).
    """

    lattice: tuple
    N: int
    generators: tuple
    shear: float = 0.0

    def to_dict(self) -> dict:
        return to_jsonable(asdict(self))


def _even(x: Fraction) -> bool:
    return x.denominator == 1 and x.numerator % 2 == 0


def lattice_from_phases(py: PeriodData, pz: PeriodData) -> TorusLattice:
    """Hermite basis of {(k, l) : k eta_j + l zeta_j in 2 pi Z} for rational phases."""
    if py.rational_approx is None or pz.rational_approx is None:
        raise DegenerateLatticeError("phases are not rational multiples of pi")
    a = [Fraction(p, q) for p, q in py.rational_approx]
    b = [Fraction(p, q) for p, q in pz.rational_approx]
    ny = py.torus_multiple
    nz = pz.torus_multiple
    for l in range(1, nz + 1):
        hits = [k for k in range(ny) if all(_even(k * x + l * y) for x, y in zip(a, b))]
        if hits:
            k0 = hits[0]
            break
    lat = ((ny, 0), (k0, l))
    gens = ((ny * py.S, 0.0), (k0 * py.S, l * pz.S))
    return TorusLattice(lat, ny * l, gens)


def _integer_direction(beta, max_den: int = 40, tol: float = 1e-9):
    """Write beta = kappa * n with n a primitive integer vector, or return None."""
    beta = np.asarray(beta, float)
    ref = int(np.argmax(np.abs(beta)))
    fracs = []
    for x in beta / beta[ref]:
        f = rationalize(float(x), max_den, tol)
        if f is None:
            return None
        fracs.append(Fraction(*f))
    den = 1
    for f in fracs:
        den = den * f.denominator // math.gcd(den, f.denominator)
    n = np.array([int(f * den) for f in fracs])
    g = math.gcd(*[int(abs(x)) for x in n])
    n = n // g
    kappa = float(beta[ref] / n[ref])
    if kappa < 0:
        n, kappa = -n, -kappa
    return n, kappa


def _ext_gcd(a: int, b: int):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


@dataclass(frozen=True)
class ConstantStrandFrame:
    """Integer data for a strand with constant potential: beta = kappa n."""

    n: tuple
    kappa: float
    w: tuple
    g: int

    @property
    def period(self) -> float:
        """Smallest s > 0 with beta_j s in 2 pi Z for all j."""
        return 2.0 * math.pi / self.kappa

    def phase_ratio(self, zeta) -> float:
        """w . zeta / (2 pi g); double periodicity holds iff this is rational."""
        return float(np.dot(self.w, zeta)) / (2.0 * math.pi * self.g)


def constant_strand_frame(beta, max_den: int = 40) -> ConstantStrandFrame:
    """Check that beta is relatively rational and build the integer frame."""
    found = _integer_direction(beta, max_den)
    if found is None:
        raise DegenerateLatticeError("beta is not relatively rational")
    n, kappa = found
    w = np.cross(n, np.ones(3, dtype=int))
    g = math.gcd(int(w[0] - w[2]), int(w[1] - w[2]))
    return ConstantStrandFrame(tuple(int(x) for x in n), kappa, tuple(int(x) for x in w), g)


def constant_case_lattice(frame: ConstantStrandFrame, zeta, T: float, frac) -> TorusLattice:
    """Lattice when v is constant and w.zeta / (2 pi g) = p/q.

    Generators (S_y, 0) and (sigma_0, q T) where S_y is the y-period and
    sigma_0 solves kappa sigma_0 n + q zeta in 2 pi Z^3.
    """
    p, q = frac
    n = np.asarray(frame.n)
    u = q * np.asarray(zeta, float) / (2.0 * math.pi)
    # integer m in the zero-sum lattice with w.m / g = p
    d1 = (frame.w[0] - frame.w[2]) // frame.g
    d2 = (frame.w[1] - frame.w[2]) // frame.g
    _, x, y = _ext_gcd(d1, d2)
    m = p * (x * np.array([1, 0, -1]) + y * np.array([0, 1, -1]))
    sigma = 2.0 * math.pi * float(np.dot(m - u, n)) / (frame.kappa * float(np.dot(n, n)))
    S_y = frame.period
    sigma = sigma % S_y
    return TorusLattice(((1, 0), (0, q)), q, ((S_y, 0.0), (sigma, q * T)), shear=sigma)


# ---------------------------------------------------------------- verification and assembly

def lattice_defect(params: ConeParams, lattice: TorusLattice, points=None, tol: float = 1e-12) -> float:
    """max |Phi(s + sigma, t + tau) - Phi(s, t)| over both generators and sample points."""
    points = np.asarray(points if points is not None else [(0.0, 0.0), (0.6, 1.1), (1.7, 0.3)])
    gens = np.asarray(lattice.generators)
    s_hi = float(points[:, 0].max() + np.abs(gens[:, 0]).max())
    t_hi = float(points[:, 1].max() + np.abs(gens[:, 1]).max())
    strands = build_strands(params, (0.0, s_hi), (0.0, t_hi), tol=tol)
    worst = 0.0
    for s, t in points:
        y0, _ = strands.y(s)
        z0, _ = strands.z(t)
        for ds, dt in gens:
            y1, _ = strands.y(s + ds)
            z1, _ = strands.z(t + dt)
            worst = max(worst, float(np.max(np.abs(y1 * z1 - y0 * z0))))
    return worst


@dataclass
class TorusRecord:
    case: str
    params: dict
    y_periods: PeriodData
    z_periods: PeriodData
    lattice: TorusLattice
    area: float
    area_quadrature: float | None = None
    verification: float | None = None
    rational: tuple | None = None
    sweep_index: int | None = None

    @property
    def max_den(self) -> int:
        dens = [q for pd in (self.y_periods, self.z_periods) if pd.rational_approx
                for _, q in pd.rational_approx]
        if self.rational:
            dens.append(self.rational[1])
        return max(dens) if dens else 1

    @property
    def area_relative_defect(self) -> float | None:
        if self.area_quadrature is None:
            return None
        return abs(self.area - self.area_quadrature) / abs(self.area)

    def to_dict(self) -> dict:
        out = {"schema_version": SCHEMA_VERSION, "kind": "torus_candidate", "case": self.case,
               "params": self.params, "y_periods": self.y_periods.to_dict(),
               "z_periods": self.z_periods.to_dict(), "lattice": self.lattice.to_dict(),
               "N": self.lattice.N, "torus_multiple": self.lattice.lattice[1][1],
               "area": self.area, "area_quadrature": self.area_quadrature,
               "area_relative_defect": self.area_relative_defect,
               "verification": self.verification, "rational": self.rational,
               "max_den": self.max_den, "sweep_index": self.sweep_index}
        return to_jsonable(out)


def _quadrature_nodes(lattice: TorusLattice, S, T, per_period: int = 40):
    counts = []
    for ds, dt in lattice.generators:
        spans = (abs(ds) / S if S else 0.0) + (abs(dt) / T if T else 0.0)
        counts.append(max(24, int(math.ceil(per_period * max(spans, 1.0)))))
    return counts


def assemble_torus(params: ConeParams, py: PeriodData, pz: PeriodData, lattice: TorusLattice,
                   case: str = "generic", quadrature: bool = True, verify: bool = True,
                   rational=None, sweep_index=None) -> TorusRecord:
    """Area from the closed form, plus the quadrature and lattice cross-checks."""
    A = area(params, py.S, pz.S, lattice.lattice)
    rec = TorusRecord(case, params.to_dict(), py, pz, lattice, A, rational=rational,
                      sweep_index=sweep_index)
    if quadrature or verify:
        gens = np.asarray(lattice.generators)
        s_hi = float(np.abs(gens[:, 0]).sum()) + 1.0
        t_hi = float(np.abs(gens[:, 1]).sum()) + 1.0
        strands = build_strands(params, (0.0, s_hi), (0.0, t_hi), tol=1e-12)
        if quadrature:
            rec.area_quadrature = area_by_quadrature(
                params, strands, gens[0], gens[1], nodes=_quadrature_nodes(lattice, py.S, pz.S))
    if verify:
        rec.verification = lattice_defect(params, lattice)
    return rec


# ---------------------------------------------------------------- sweeps

def _worker_count(workers):
    if workers is not None:
        return max(1, int(workers))
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _map(fn, items, workers):
    """Ordered map; deterministic regardless of the worker count."""
    items = list(items)
    n = _worker_count(workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * n))))


def _z_phases(theta: float, C: float) -> np.ndarray:
    p = derive_params(theta, 0.0, C)
    return rotation_phases(p.gamma_coeffs, C)


def _case_a_value(args):
    theta, C, w, g = args
    return float(np.dot(w, _z_phases(theta, C))) / (2.0 * math.pi * g)


def _case_c_value(args):
    theta, C = args
    return float(_z_phases(theta, C)[0]) / math.pi


def _case_b_values(args):
    theta, C = args
    z = _z_phases(theta, C)
    return float(z[0]) / math.pi, float(z[1]) / math.pi


def _crossings(grid, values, max_den, skip_jump=0.5):
    """Fractions p/q (q <= max_den) strictly crossed between adjacent sweep values.

    Intervals with an endpoint at level zero are skipped: the phase jumps
    there and the integrand is singular.
    """
    out = []
    for i in range(len(grid) - 1):
        if grid[i] == 0.0 or grid[i + 1] == 0.0 or grid[i] * grid[i + 1] < 0.0:
            continue
        x0, x1 = values[i], values[i + 1]
        if not (math.isfinite(x0) and math.isfinite(x1)) or abs(x1 - x0) > skip_jump:
            continue
        lo, hi = min(x0, x1), max(x0, x1)
        seen = set()
        for q in range(1, max_den + 1):
            for p in range(math.floor(lo * q) + 1, math.ceil(hi * q)):
                if math.gcd(p, q) == 1 and (p, q) not in seen and lo < p / q < hi:
                    seen.add((p, q))
                    out.append((i, p, q))
    return out


def _sweep(lo, hi, step):
    n = int(round((hi - lo) / step))
    return np.linspace(lo, hi, n + 1)


def torus_search(case: str, fixed: dict | None = None, sweep: dict | None = None,
                 max_den: int = 40, tol: float = 1e-7, verify: bool = True,
                 limit: int | None = None, workers: int | None = None,
                 skip_before: int = -1) -> list:
    """Search for parameters giving doubly-periodic cones.

    Parameters
    ----------
    case : {"a", "b", "c", "generic"}
        ``a``: |B| = 1 with relatively rational beta, sweep C.
        ``b``: B = 0, 2-D sweep over (theta, C).
        ``c``: theta = 0 with fixed |B| < 1, sweep C.
        ``generic``: 3-D sweep over (theta, B, C), all phases must rationalize.
    fixed : dict
        Fixed parameters (``theta``, ``B``) for the case.
    sweep : dict
        ``{name: (lo, hi, step)}`` ranges.
    max_den, tol
        Rationalization limits.
    limit : int, optional
        Keep only the ``limit`` candidates with the smallest denominators.
    skip_before : int
        Ignore sweep intervals with index <= this value (used for resume).

    Returns
    -------
    list of TorusRecord, sorted by max denominator then sweep index.
    """
    return [finish_candidate(r, verify) for r in find_candidates(
        case, fixed, sweep, max_den, tol, limit, workers, skip_before)]


def find_candidates(case: str, fixed: dict | None = None, sweep: dict | None = None,
                    max_den: int = 40, tol: float = 1e-7, limit: int | None = None,
                    workers: int | None = None, skip_before: int = -1) -> list:
    """Sweep and refine only; returns lightweight candidate dicts (see :func:`torus_search`)."""
    fixed = dict(fixed or {})
    sweep = dict(sweep or {})
    searches = {"a": lambda: _search_a(fixed, sweep, max_den, workers, skip_before),
                "b": lambda: _search_b(fixed, sweep, max_den, tol, workers, skip_before),
                "c": lambda: _search_c(fixed, sweep, max_den, tol, workers, skip_before),
                "generic": lambda: _search_generic(fixed, sweep, max_den, tol, workers,
                                                   skip_before)}
    if case not in searches:
        raise ValueError(f"unknown case {case!r}")
    recs = searches[case]()
    recs.sort(key=lambda r: (r["max_den"], r["sweep_index"], r["key"]))
    return recs[:limit] if limit is not None else recs


def candidate_key(cand) -> str:
    """Stable identifier of a candidate, used to skip finished records on resume."""
    p = cand["params"] if isinstance(cand["params"], dict) else cand["params"].to_dict()
    return f'{cand["case"]}:{p["theta"]:.12f}:{p["B"]:.12f}:{p["C"]:.12f}'


def finish_candidate(r, verify: bool = True) -> TorusRecord:
    """Assemble the torus record: area, quadrature cross-check and lattice verification."""
    return assemble_torus(r["params"], r["py"], r["pz"], r["lattice"], case=r["case"],
                          quadrature=verify, verify=verify, rational=r.get("rational"),
                          sweep_index=r["sweep_index"])


def _search_a(fixed, sweep, max_den, workers, skip_before):
    theta = float(fixed.get("theta", 0.0))
    B = float(fixed.get("B", -1.0))
    if abs(B) != 1.0:
        raise ValueError("case a needs |B| = 1")
    lo, hi, step = sweep.get("C", (-0.9, 0.9, 1e-3))
    base = derive_params(theta, B, 0.0)
    frame = constant_strand_frame(base.beta, max_den)
    grid = _sweep(lo, hi, step)
    vals = _map(_case_a_value, [(theta, float(C), frame.w, frame.g) for C in grid], workers)
    out = []
    for i, p, q in _crossings(grid, vals, max_den):
        if i <= skip_before:
            continue
        target = p / q
        C = brentq(lambda c: _case_a_value((theta, c, frame.w, frame.g)) - target,
                   grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
        params = derive_params(theta, B, C)
        zeta = rotation_phases(params.gamma_coeffs, C)
        T = strand_period(params.gamma_coeffs, C)
        lat = constant_case_lattice(frame, zeta, T, (p, q))
        py = PeriodData(frame.period, tuple(float(x) for x in
                                            rotation_phases(params.beta_coeffs, B, frame.period)))
        pz = PeriodData(T, tuple(float(x) for x in zeta))
        out.append({"case": "a", "params": params, "py": py, "pz": pz, "lattice": lat,
                    "rational": (p, q), "max_den": q, "sweep_index": i, "key": (C,)})
    return out


def _rational_record(case, params, i, max_den, tol, key, rational=None):
    py = period_data(params.beta_coeffs, params.B, max_den, tol)
    pz = period_data(params.gamma_coeffs, params.C, max_den, tol)
    if py.rational_approx is None or pz.rational_approx is None:
        return None
    lat = lattice_from_phases(py, pz)
    dens = [q for pd in (py, pz) for _, q in pd.rational_approx]
    return {"case": case, "params": params, "py": py, "pz": pz, "lattice": lat,
            "rational": rational, "max_den": max(dens), "sweep_index": i, "key": key}


def _search_c(fixed, sweep, max_den, tol, workers, skip_before):
    theta = float(fixed.get("theta", 0.0))
    B = float(fixed.get("B", 0.5))
    if abs(B) >= 1.0:
        raise ValueError("case c needs |B| < 1")
    lo, hi, step = sweep.get("C", (-0.9, 0.9, 1e-3))
    grid = _sweep(lo, hi, step)
    vals = _map(_case_c_value, [(theta, float(C)) for C in grid], workers)
    out = []
    for i, p, q in _crossings(grid, vals, max_den):
        if i <= skip_before:
            continue
        target = p / q
        C = brentq(lambda c: _case_c_value((theta, c)) - target, grid[i], grid[i + 1],
                   xtol=1e-15, rtol=4 * np.finfo(float).eps)
        rec = _rational_record("c", derive_params(theta, B, C), i, max_den, tol, (C,), (p, q))
        if rec is not None:
            out.append(rec)
    return out


def _search_b(fixed, sweep, max_den, tol, workers, skip_before, seed_den: int = 12):
    B = float(fixed.get("B", 0.0))
    if B != 0.0:
        raise ValueError("case b needs B = 0")
    t_grid = _sweep(*sweep.get("theta", (0.15, 0.45, 0.05)))
    c_grid = _sweep(*sweep.get("C", (0.2, 0.8, 0.05)))
    pts = [(float(th), float(C)) for th in t_grid for C in c_grid]
    vals = np.array(_map(_case_b_values, pts, workers)).reshape(len(t_grid), len(c_grid), 2)
    nc = len(c_grid)
    found = {}
    for i in range(len(t_grid) - 1):
        for j in range(nc - 1):
            idx = i * (nc - 1) + j
            if idx <= skip_before:
                continue
            cell = vals[i:i + 2, j:j + 2].reshape(-1, 2)
            lo, hi = cell.min(axis=0), cell.max(axis=0)
            if np.any(hi - lo > 0.5):
                continue
            for q in range(1, min(seed_den, max_den) + 1):
                p1s = range(math.floor(lo[0] * q) + 1, math.ceil(hi[0] * q))
                p2s = range(math.floor(lo[1] * q) + 1, math.ceil(hi[1] * q))
                for p1 in p1s:
                    for p2 in p2s:
                        target = np.array([p1 / q, p2 / q])
                        guess = _cell_guess(vals, t_grid, c_grid, i, j, target)
                        if guess is None:
                            continue
                        sol = _newton_b(target, guess, t_grid[i:i + 2], c_grid[j:j + 2])
                        if sol is None:
                            continue
                        key = (round(sol[0], 9), round(sol[1], 9))
                        if key in found:
                            continue
                        params = derive_params(sol[0], 0.0, sol[1])
                        rec = _rational_record("b", params, idx, max_den, tol, key,
                                               (int(target[0] * q + 0.5 * np.sign(p1)), q))
                        if rec is not None:
                            found[key] = rec
    return list(found.values())


def _cell_guess(vals, t_grid, c_grid, i, j, target, margin: float = 0.25):
    """Linear prediction of the root from the cell corners, or None if it falls outside."""
    dt = t_grid[i + 1] - t_grid[i]
    dc = c_grid[j + 1] - c_grid[j]
    J = np.column_stack([(vals[i + 1, j] - vals[i, j]) / dt, (vals[i, j + 1] - vals[i, j]) / dc])
    try:
        step = np.linalg.solve(J, target - vals[i, j])
    except np.linalg.LinAlgError:
        return None
    if not (-margin * dt <= step[0] <= (1 + margin) * dt
            and -margin * dc <= step[1] <= (1 + margin) * dc):
        return None
    return np.array([t_grid[i], c_grid[j]]) + step


def _newton_b(target, x0, t_box, c_box):
    def F(x):
        if not abs(x[1]) < 1.0:
            return np.full(2, 1e3)
        return np.array(_case_b_values((x[0], x[1]))) - target
    sol, info, ier, _ = fsolve(F, x0, full_output=True, xtol=1e-14)
    if ier != 1 or np.max(np.abs(F(sol))) > 1e-12:
        return None
    pad_t = t_box[1] - t_box[0]
    pad_c = c_box[1] - c_box[0]
    if not (t_box[0] - pad_t <= sol[0] <= t_box[1] + pad_t
            and c_box[0] - pad_c <= sol[1] <= c_box[1] + pad_c):
        return None
    if abs(sol[1]) >= 1.0:
        return None
    return float(sol[0]), float(sol[1])


def _generic_point(args):
    theta, B, C, max_den, tol = args
    params = derive_params(theta, B, C)
    if classify_case(params) != GENERIC:
        return None
    try:
        py = period_data(params.beta_coeffs, B, max_den, tol)
        pz = period_data(params.gamma_coeffs, C, max_den, tol)
    except (ConstantPotentialError, ConstraintViolationError):
        return None
    if py.rational_approx is None or pz.rational_approx is None:
        return None
    return theta, B, C


def _search_generic(fixed, sweep, max_den, tol, workers, skip_before):
    t_grid = _sweep(*sweep.get("theta", (0.1, 1.0, 0.1)))
    b_grid = _sweep(*sweep.get("B", (-0.8, 0.8, 0.1)))
    c_grid = _sweep(*sweep.get("C", (-0.8, 0.8, 0.1)))
    pts = [(float(t), float(b), float(c), max_den, tol)
           for t in t_grid for b in b_grid for c in c_grid]
    hits = _map(_generic_point, pts, workers)
    out = []
    for idx, hit in enumerate(hits):
        if hit is None or idx <= skip_before:
            continue
        rec = _rational_record("generic", derive_params(*hit), idx, max_den, tol, hit)
        if rec is not None:
            out.append(rec)
    return out


# ---------------------------------------------------------------- catalogs

def read_catalog(path) -> list:
    """Records of a line-delimited JSON catalog; a truncated last line is dropped."""
    if not os.path.exists(path):
        return []
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError:
                break
    return out


def write_catalog(path, records) -> None:
    text = "".join(json.dumps(to_jsonable(r), sort_keys=True) + "\n" for r in records)
    atomic_write_text(path, text)


def catalog_summary_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["case", "theta", "B", "C", "max_den", "N", "area", "area_relative_defect",
                "verification"])
    for r in records:
        p = r["params"]
        w.writerow([r["case"], p["theta"], p["B"], p["C"], r["max_den"], r["N"], r["area"],
                    r["area_relative_defect"], r["verification"]])
    return buf.getvalue()
