"""Three-variable family of special Lagrangian 3-folds in C^3.

``Phi(r, s, t) = (x_j(r) y_j(s) z_j(t))_j`` with three strands whose
coefficient vectors ``alpha, beta, gamma`` are orthonormal and satisfy
``sum_j alpha_j beta_j gamma_j = 0``.  Given ``alpha`` the pair
``(beta, gamma)`` is fixed up to sign and exchange: they are the null
directions of a trace-free quadratic form restricted to ``alpha``'s
orthogonal complement.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .cone2 import SlReport, frame_residuals
from .errors import (CannotNormalizeError, DegenerateAlphaError, FiniteEscapeError,
                     IntervalError)
from .strands import (StrandCoefficients, StrandState, Trajectory, initial_state,
                      integrate_strand)

DEGENERACY_EPS = 1e-8


@dataclass(frozen=True)
class TripleParams:
    """Coefficient vectors and conserved levels of a three-strand 3-fold."""

    alpha: tuple
    beta: tuple
    gamma: tuple
    A: float
    B: float
    C: float

    def relation_residuals(self) -> dict:
        al, be, ga = (np.asarray(v, float) for v in (self.alpha, self.beta, self.gamma))
        return {
            "alpha_beta": abs(al @ be),
            "alpha_gamma": abs(al @ ga),
            "beta_gamma": abs(be @ ga),
            "triple": abs(np.sum(al * be * ga)),
        }

    def coeffs(self):
        return tuple(StrandCoefficients.of(v) for v in (self.alpha, self.beta, self.gamma))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class QuadricForm:
    """The trace-free symmetric matrix whose null cone on alpha-perp holds beta, gamma."""

    matrix: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def __call__(self, x) -> float:
        x = np.asarray(x, float)
        return 0.5 * float(x @ self.matrix @ x)


def quadric_form(alpha) -> QuadricForm:
    a1, a2, a3 = (float(x) for x in alpha)
    p = a3 * (a2 - a1)
    q = a2 * (a1 - a3)
    r = a1 * (a3 - a2)
    return QuadricForm(np.array([[0.0, p, q], [p, 0.0, r], [q, r, 0.0]]))


def expected_quadric_det(alpha) -> float:
    a1, a2, a3 = (float(x) for x in alpha)
    return 2.0 * a1 * a2 * a3 * (a1 - a3) * (a2 - a1) * (a3 - a2)


def _canonical_vector(v):
    v = np.asarray(v, float)
    k = int(np.argmax(np.abs(v)))  # first index of largest magnitude
    return v if v[k] > 0 else -v


def canonical_pair(beta, gamma):
    """Sign-fix each vector (largest-magnitude entry positive), then sort lexicographically."""
    b = _canonical_vector(beta)
    g = _canonical_vector(gamma)
    if tuple(g) < tuple(b):
        b, g = g, b
    return b, g


def _perp_basis(alpha):
    order = np.argsort(np.abs(alpha), kind="stable")  # least aligned axes first
    basis = []
    for idx in order[:2]:
        e = np.zeros(3)
        e[idx] = 1.0
        e -= (e @ alpha) * alpha
        for u in basis:
            e -= (e @ u) * u
        basis.append(e / np.linalg.norm(e))
    return basis


def solve_bg_from_alpha(alpha):
    """Return the canonical pair (beta, gamma) determined by the unit vector ``alpha``."""
    alpha = np.asarray(alpha, float)
    if alpha.shape != (3,) or not np.all(np.isfinite(alpha)):
        raise DegenerateAlphaError("alpha must be a finite 3-vector")
    alpha = alpha / np.linalg.norm(alpha)
    gaps = [abs(alpha[i] - alpha[j]) for i, j in ((0, 1), (1, 2), (0, 2))]
    if min(abs(alpha)) < DEGENERACY_EPS or min(gaps) < DEGENERACY_EPS:
        raise DegenerateAlphaError(f"alpha = {alpha.tolist()} has a zero or repeated component")
    M = quadric_form(alpha).matrix
    u1, u2 = _perp_basis(alpha)
    p = u1 @ M @ u1
    q = u1 @ M @ u2
    # restricted form [[p, q], [q, -p]]; eigen-directions at angle phi
    phi = 0.5 * math.atan2(q, p)
    up = math.cos(phi) * u1 + math.sin(phi) * u2
    um = -math.sin(phi) * u1 + math.cos(phi) * u2
    beta = (up + um) / math.sqrt(2.0)
    gamma = (up - um) / math.sqrt(2.0)
    return canonical_pair(beta, gamma)


# ---------------------------------------------------------------- signs

@dataclass(frozen=True)
class TransformLog:
    """Role permutation and sign flips applied by :func:`normalize_signs`."""

    permutation: tuple
    flips: tuple
    reached: bool

    @property
    def is_identity(self) -> bool:
        return self.permutation == (0, 1, 2) and self.flips == (1, 1, 1)


def _pattern_ok(al, be, ga) -> bool:
    return (np.all(al > 0) and np.sum(be > 0) == 2 and np.sum(ga > 0) == 2)


def normalize_signs(alpha, beta, gamma):
    """Permute roles and flip signs into the pattern (+++), (two +), (two +).

    Searches the 48 elements (role permutations times sign flips) and
    prefers the identity permutation and the fewest flips.
    """
    vecs = [np.asarray(v, float) for v in (alpha, beta, gamma)]
    if any(np.any(v == 0.0) for v in vecs):
        raise CannotNormalizeError("every component must be nonzero")
    candidates = []
    for perm in itertools.permutations(range(3)):
        for flips in itertools.product((1, -1), repeat=3):
            moved = [flips[k] * vecs[perm[k]] for k in range(3)]
            if _pattern_ok(*moved):
                cost = (perm != (0, 1, 2), flips.count(-1), perm, tuple(-f for f in flips))
                candidates.append((cost, perm, flips, moved))
    if not candidates:
        return (*vecs, TransformLog((0, 1, 2), (1, 1, 1), False))
    candidates.sort(key=lambda c: c[0])
    _, perm, flips, moved = candidates[0]
    return (*moved, TransformLog(tuple(perm), tuple(flips), True))


def random_admissible(rng: np.random.Generator, level_bound: float = 0.9) -> TripleParams:
    """Random sign-normalized parameters with positive, well-separated alpha."""
    while True:
        al = rng.uniform(0.15, 1.0, 3)
        al /= np.linalg.norm(al)
        gaps = [abs(al[i] - al[j]) for i, j in ((0, 1), (1, 2), (0, 2))]
        if min(gaps) < 0.05:
            continue
        be, ga = solve_bg_from_alpha(al)
        if min(np.min(np.abs(be)), np.min(np.abs(ga))) < 0.05:
            continue
        al, be, ga, _ = normalize_signs(al, be, ga)
        A, B, C = rng.uniform(-level_bound, level_bound, 3)
        return TripleParams(tuple(al), tuple(be), tuple(ga), float(A), float(B), float(C))


# ---------------------------------------------------------------- intervals

def maximal_interval(coeffs: StrandCoefficients, initial: StrandState,
                     horizon: float = 200.0, tol: float = 1e-12):
    """Existence interval of a strand through ``initial``.

    Zero-sum strands exist for all parameters.  Otherwise both directions
    are integrated up to ``horizon`` with blow-up detection; an end that
    reaches the horizon is reported as infinite.
    """
    if abs(float(coeffs.c.sum())) < 1e-12:
        return (-math.inf, math.inf)
    ends = []
    for direction in (-1.0, 1.0):
        span = sorted((initial.s, initial.s + direction * horizon))
        try:
            integrate_strand(coeffs, initial, span, tol=tol)
            ends.append(direction * math.inf)
        except FiniteEscapeError as err:
            ends.append(err.escape_at)
    return (ends[0], ends[1])


# ---------------------------------------------------------------- immersion

@dataclass
class TripleStrands:
    x: Trajectory
    y: Trajectory
    z: Trajectory
    interval: tuple = (-math.inf, math.inf)


def build_triple_strands(params: TripleParams, r_span, s_span=(0.0, 5.0), t_span=(0.0, 5.0),
                         tol: float = 1e-12, interval=None) -> TripleStrands:
    ca, cb, cg = params.coeffs()
    x = integrate_strand(ca, initial_state(ca, params.A), r_span, tol=tol)
    y = integrate_strand(cb, initial_state(cb, params.B), s_span, tol=tol)
    z = integrate_strand(cg, initial_state(cg, params.C), t_span, tol=tol)
    return TripleStrands(x, y, z, interval or (-math.inf, math.inf))


def _pairs_conj(y):
    return np.conj(np.stack([y[..., 1] * y[..., 2], y[..., 2] * y[..., 0],
                             y[..., 0] * y[..., 1]], axis=-1))


def immersion3(params: TripleParams, strands: TripleStrands, r, s, t):
    """Phi(r, s, t) = (x_j(r) y_j(s) z_j(t))."""
    r, s, t = np.broadcast_arrays(np.asarray(r, float), np.asarray(s, float), np.asarray(t, float))
    lo, hi = strands.interval
    if np.any(r <= lo) or np.any(r >= hi):
        raise IntervalError(f"r outside the existence interval ({lo}, {hi})")
    x, _ = strands.x(r)
    y, _ = strands.y(s)
    z, _ = strands.z(t)
    return x * y * z


def tangent_frame3(params: TripleParams, strands: TripleStrands, r, s, t):
    """(Phi, dPhi/dr, dPhi/ds, dPhi/dt) from the strand equations."""
    r, s, t = np.broadcast_arrays(np.asarray(r, float), np.asarray(s, float), np.asarray(t, float))
    x, _ = strands.x(r)
    y, _ = strands.y(s)
    z, _ = strands.z(t)
    al, be, ga = (np.asarray(v, float) for v in (params.alpha, params.beta, params.gamma))
    return (x * y * z,
            al * _pairs_conj(x) * y * z,
            x * be * _pairs_conj(y) * z,
            x * y * ga * _pairs_conj(z))


@dataclass
class GridSpec3:
    r_range: tuple
    s_range: tuple = (0.0, 5.0)
    t_range: tuple = (0.0, 5.0)
    n: int = 8

    def arrays(self):
        axes = [np.linspace(lo, hi, self.n) for lo, hi in (self.r_range, self.s_range, self.t_range)]
        return np.meshgrid(*axes, indexing="ij")


def default_r_range(interval, reach: float = 1.0, shrink: float = 0.8):
    lo, hi = interval
    return (shrink * max(lo, -reach), shrink * min(hi, reach))


def verify_sl3(params: TripleParams, grid: GridSpec3 | None = None, tol: float = 1e-9,
               integ_tol: float = 1e-12, strands: TripleStrands | None = None) -> SlReport:
    """Check the special Lagrangian conditions of the 3-fold on a 3-D grid.

    No conformality check: the three tangents are orthogonal but in
    general of different lengths.
    """
    if grid is None or strands is None:
        ca = params.coeffs()[0]
        interval = maximal_interval(ca, initial_state(ca, params.A))
        if grid is None:
            grid = GridSpec3(default_r_range(interval))
        if strands is None:
            strands = build_triple_strands(params, grid.r_range, grid.s_range, grid.t_range,
                                           tol=integ_tol, interval=interval)
    R, S, T = grid.arrays()
    phi, d_r, d_s, d_t = tangent_frame3(params, strands, R, S, T)
    res = frame_residuals(d_r, d_s, d_t)
    grid_info = asdict(grid)
    grid_info["interval"] = list(strands.interval)
    return SlReport(3, params.to_dict(), grid_info, res, tol)
