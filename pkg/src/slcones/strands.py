"""Strand ODEs: dy_j/ds = c_j conj(y_k y_l), dv/ds = 2 Re(y1 y2 y3).

A *strand* is one of the commuting ODE systems out of which the cones and
3-folds are assembled.  Along a solution ``Im(y1 y2 y3)`` is a conserved
level ``B`` and ``|y_j|^2 - c_j v`` is constant, normalized here to 1.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _spi

from . import _tableau as tb
from . import kernels
from .errors import (ConstraintViolationError, CoverageError, FiniteEscapeError,
                     InvalidLevelError)
from .io_utils import atomic_write_text

DEFAULT_TOL = 1e-10
DEFAULT_CEILING = 1e6
_MAX_STEPS = 2_000_000


@dataclass(frozen=True)
class StrandCoefficients:
    """Coefficient triple (c1, c2, c3) of a strand."""

    c1: float
    c2: float
    c3: float
    zero_sum: bool = False

    def __post_init__(self):
        c = (float(self.c1), float(self.c2), float(self.c3))
        if not all(math.isfinite(x) for x in c):
            raise ValueError("strand coefficients must be finite")
        if c == (0.0, 0.0, 0.0):
            raise ValueError("strand coefficients must not all vanish")
        if self.zero_sum and abs(sum(c)) >= 1e-12:
            raise ValueError(f"coefficients {c} declared zero-sum but sum to {sum(c):.3e}")

    @classmethod
    def of(cls, c, zero_sum=None):
        c = [float(x) for x in c]
        if zero_sum is None:
            zero_sum = abs(sum(c)) < 1e-12
        return cls(c[0], c[1], c[2], zero_sum)

    @property
    def c(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3], dtype=float)

    def q_poly(self, v):
        """Q(v) = prod_j (c_j v + 1)."""
        v = np.asarray(v, dtype=float)
        return (self.c1 * v + 1.0) * (self.c2 * v + 1.0) * (self.c3 * v + 1.0)


@dataclass(frozen=True)
class StrandState:
    """A point (y, v) of a strand at parameter ``s``."""

    y: np.ndarray
    v: float
    s: float = 0.0

    def __post_init__(self):
        y = np.asarray(self.y, dtype=complex).reshape(3)
        if not np.all(np.isfinite(y)) or not math.isfinite(self.v):
            raise ValueError("non-finite strand state")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "v", float(self.v))
        object.__setattr__(self, "s", float(self.s))

    def to_real(self) -> np.ndarray:
        return np.concatenate([self.y.real, self.y.imag, [self.v]])

    @classmethod
    def from_real(cls, x, s=0.0):
        x = np.asarray(x, dtype=float)
        return cls(x[0:3] + 1j * x[3:6], x[6], s)

    @property
    def level(self) -> float:
        return float(np.prod(self.y).imag)


def strand_derivative(coeffs: StrandCoefficients, state: StrandState):
    """Return ``(dy/ds, dv/ds)`` at ``state``."""
    y = state.y
    c = coeffs.c
    dy = c * np.conj(np.array([y[1] * y[2], y[2] * y[0], y[0] * y[1]]))
    dv = 2.0 * float(np.prod(y).real)
    return dy, dv


def second_derivative_v(coeffs: StrandCoefficients, y) -> np.ndarray:
    """d^2v/ds^2 = 2 sum_j c_j |y_k y_l|^2, evaluated from ``y`` (..., 3)."""
    y = np.asarray(y, dtype=complex)
    pairs = np.stack([y[..., 1] * y[..., 2], y[..., 2] * y[..., 0], y[..., 0] * y[..., 1]], axis=-1)
    return 2.0 * np.sum(coeffs.c * np.abs(pairs) ** 2, axis=-1)


def initial_state(coeffs: StrandCoefficients, B: float, s0: float = 0.0,
                  phase_offsets=(0.0, 0.0, 0.0)) -> StrandState:
    """Canonical initial point with v = 0 and ``Im(y1 y2 y3) = B``.

    The phases are (0, 0, arcsin B), which puts ``Re(y1 y2 y3)`` on the
    nonnegative branch.  ``phase_offsets`` rotates the three phases; the
    offsets must sum to a multiple of 2 pi so the level is unchanged.
    """
    B = float(B)
    if not math.isfinite(B) or abs(B) > 1.0:
        raise InvalidLevelError(f"conserved level {B} is outside [-1, 1]")
    off = np.asarray(phase_offsets, dtype=float)
    wrap = math.remainder(float(off.sum()), 2 * math.pi)
    if abs(wrap) > 1e-12:
        raise ValueError("phase offsets must sum to a multiple of 2*pi")
    delta = np.array([0.0, 0.0, math.asin(B)]) + off
    return StrandState(np.exp(1j * delta), 0.0, s0)


@dataclass
class StrandJet:
    """Taylor expansion of a strand about ``s0``.

    The coefficients follow from the Cauchy-product recursion of the
    quadratic ODE, so evaluation near ``s0`` is exact to rounding.  Used
    for finite-difference stencils, where interpolation error would be
    amplified by 1/h^2.
    """

    s0: float
    Y: np.ndarray  # (order + 1, 3) complex
    V: np.ndarray  # (order + 1,) real

    @classmethod
    def build(cls, coeffs: StrandCoefficients, state: StrandState, order: int = 20):
        c = coeffs.c
        Y = np.zeros((order + 1, 3), dtype=complex)
        V = np.zeros(order + 1)
        Y[0] = state.y
        V[0] = state.v
        for n in range(order):
            # Cauchy products of the first n+1 coefficients
            p23 = np.dot(Y[n::-1, 1], Y[: n + 1, 2])
            p31 = np.dot(Y[n::-1, 2], Y[: n + 1, 0])
            p12 = np.dot(Y[n::-1, 0], Y[: n + 1, 1])
            Y[n + 1] = c * np.conj(np.array([p23, p31, p12])) / (n + 1)
            # (y1 y2 y3)[n] = sum_k y1[k] (y2 y3)[n-k]
            y23 = np.array([np.dot(Y[k::-1, 1], Y[: k + 1, 2]) for k in range(n + 1)])
            triple = np.dot(Y[: n + 1, 0], y23[::-1])
            V[n + 1] = 2.0 * triple.real / (n + 1)
        return cls(float(state.s), Y, V)

    def __call__(self, s):
        d = np.asarray(s, dtype=float) - self.s0
        powers = d[..., None] ** np.arange(self.V.shape[0])
        y = powers @ self.Y
        v = powers @ self.V
        return y, v


class Trajectory:
    """Dense-output solution of one strand over ``[lo, hi]``.

    Calling the trajectory with an array of parameters returns ``(y, v)``
    with ``y`` of shape ``s.shape + (3,)``.
    """

    def __init__(self, coeffs, level, seg_lo, seg_hi, t_old, h, y_old, F,
                 initial: StrandState):
        self.coeffs = coeffs
        self.level = float(level)
        self._lo = seg_lo
        self._hi = seg_hi
        self._t_old = t_old
        self._h = h
        self._y_old = y_old
        self._F = F
        self.initial = initial

    @property
    def span(self):
        return float(self._lo[0]), float(self._hi[-1])

    @property
    def n_steps(self):
        return len(self._lo)

    def covers(self, s) -> bool:
        s = np.asarray(s, dtype=float)
        lo, hi = self.span
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        return bool(np.all((s >= lo - slack) & (s <= hi + slack)))

    def real_state(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if not self.covers(s):
            lo, hi = self.span
            raise CoverageError(f"parameter outside integrated span [{lo}, {hi}]")
        flat = s.reshape(-1)
        if len(self._lo) == 0:
            out = np.broadcast_to(self.initial.to_real(), (flat.size, 7)).copy()
            return out.reshape(s.shape + (7,))
        idx = np.searchsorted(self._hi, flat, side="left")
        idx = np.clip(idx, 0, len(self._lo) - 1)
        x = (flat - self._t_old[idx]) / self._h[idx]
        F = self._F[idx]
        acc = np.zeros((flat.size, 7))
        xc = x[:, None]
        for i, row in enumerate(range(6, -1, -1)):
            acc += F[:, row, :]
            if i % 2 == 0:
                acc *= xc
            else:
                acc *= 1.0 - xc
        acc += self._y_old[idx]
        return acc.reshape(s.shape + (7,))

    def __call__(self, s):
        x = self.real_state(s)
        return x[..., 0:3] + 1j * x[..., 3:6], x[..., 6]

    def state(self, s: float) -> StrandState:
        y, v = self(float(s))
        return StrandState(y, float(v), float(s))

    def jet(self, s: float, order: int = 20) -> StrandJet:
        return StrandJet.build(self.coeffs, self.state(s), order)

    def derivative(self, s):
        """Exact right-hand side (dy/ds, dv/ds) evaluated on the trajectory."""
        y, _ = self(s)
        c = self.coeffs.c
        pairs = np.stack([y[..., 1] * y[..., 2], y[..., 2] * y[..., 0], y[..., 0] * y[..., 1]], axis=-1)
        return c * np.conj(pairs), 2.0 * np.real(np.prod(y, axis=-1))

    def constraint_residual(self, s) -> np.ndarray:
        """max_j | |y_j|^2 - c_j v - 1 | at each parameter."""
        y, v = self(s)
        r = np.abs(y) ** 2 - (self.coeffs.c * v[..., None] + 1.0)
        return np.max(np.abs(r), axis=-1)

    def conservation_residual(self, s) -> np.ndarray:
        y, _ = self(s)
        return np.abs(np.prod(y, axis=-1).imag - self.level)

    def sample(self, n: int = 200) -> np.ndarray:
        lo, hi = self.span
        return np.linspace(lo, hi, n)

    def to_csv(self, path=None, samples=None) -> str:
        """Write (or return) a CSV table of the trajectory."""
        s = self.sample() if samples is None else np.asarray(samples, dtype=float)
        y, v = self(s)
        res = self.conservation_residual(s)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "re_y1", "im_y1", "re_y2", "im_y2", "re_y3", "im_y3", "v",
                    "conservation_residual"])
        for k in range(s.size):
            w.writerow([repr(float(s[k]))]
                       + [repr(float(x)) for j in range(3) for x in (y[k, j].real, y[k, j].imag)]
                       + [repr(float(v[k])), repr(float(res[k]))])
        text = buf.getvalue()
        if path is not None:
            atomic_write_text(path, text)
        return text


@dataclass
class _Piece:
    ts: np.ndarray
    ys: np.ndarray
    F: np.ndarray
    status: int = 0
    escape: float | None = field(default=None)


def _run(coeffs, x0, t0, t1, tol, ceiling, max_step, backend):
    ts, ys, F, status = kernels.integrate(coeffs.c1, coeffs.c2, coeffs.c3, x0, t0, t1,
                                          tol, tol, ceiling, max_step, _MAX_STEPS,
                                          backend=backend)
    if status in (tb.MAX_STEPS, tb.STEP_TOO_SMALL):
        raise RuntimeError(f"strand integration stalled at s = {ts[-1]:.12g} (status {status})")
    return _Piece(ts, ys, F, status)


def _assemble(coeffs, level, initial, back: _Piece | None, fwd: _Piece | None):
    parts_lo, parts_hi, parts_t, parts_h, parts_y, parts_F = [], [], [], [], [], []
    if back is not None and len(back.F):
        ts, ys, F = back.ts, back.ys, back.F
        # steps run from ts[k] down to ts[k+1]; reverse so segments ascend
        parts_lo.append(ts[1:][::-1])
        parts_hi.append(ts[:-1][::-1])
        parts_t.append(ts[:-1][::-1])
        parts_h.append((ts[1:] - ts[:-1])[::-1])
        parts_y.append(ys[:-1][::-1])
        parts_F.append(F[::-1])
    if fwd is not None and len(fwd.F):
        ts, ys, F = fwd.ts, fwd.ys, fwd.F
        parts_lo.append(ts[:-1])
        parts_hi.append(ts[1:])
        parts_t.append(ts[:-1])
        parts_h.append(ts[1:] - ts[:-1])
        parts_y.append(ys[:-1])
        parts_F.append(F)
    if parts_lo:
        cat = np.concatenate
        return Trajectory(coeffs, level, cat(parts_lo), cat(parts_hi), cat(parts_t),
                          cat(parts_h), cat(parts_y), cat(parts_F), initial)
    return _PointTrajectory(coeffs, level, initial)


class _PointTrajectory(Trajectory):
    """Degenerate trajectory covering only its initial point."""

    def __init__(self, coeffs, level, initial):
        s = np.array([initial.s])
        super().__init__(coeffs, level, s, s, s, np.ones(1), initial.to_real()[None, :],
                         np.zeros((1, 7, 7)), initial)


def _tail_length(coeffs: StrandCoefficients, level: float, v_c: float, sign: float) -> float:
    """Parameter length for v to run from ``v_c`` to infinity (in direction ``sign``).

    Uses (dv/ds)^2 = 4 (Q(v) - B^2) beyond the last computed point.
    """
    # v = v_c + sign * L (1/x^2 - 1) maps x in (0, 1] onto the tail and
    # makes the integrand bounded, since sqrt(Q) grows like |v|^(3/2).
    L = max(abs(v_c), 1.0)

    def integrand(x):
        v = v_c + sign * L * (1.0 / (x * x) - 1.0)
        p = float(coeffs.q_poly(v)) - level * level
        return L / (x ** 3 * math.sqrt(p)) if p > 0 else 0.0
    val, _ = _spi.quad(integrand, 0.0, 1.0, epsabs=1e-15, epsrel=1e-11, limit=200)
    return val


def _locate_escape(coeffs, level, piece: _Piece, ceiling, direction):
    """Refine the blow-up point of an escaped piece.

    The ceiling crossing inside the last step is bisected to 1e-12 on the
    dense interpolant; the remaining distance to infinity comes from the
    potential's quadrature.
    """
    ts, ys, F = piece.ts, piece.ys, piece.F
    k = len(F) - 1
    t_old, h, y_old, Fk = ts[k], ts[k + 1] - ts[k], ys[k], F[k]

    def dense(t):
        x = (t - t_old) / h
        acc = np.zeros(7)
        for i, row in enumerate(range(6, -1, -1)):
            acc += Fk[row]
            acc *= x if i % 2 == 0 else (1.0 - x)
        return acc + y_old

    def over(t):
        z = dense(t)
        return np.max(z[0:3] ** 2 + z[3:6] ** 2) > ceiling * ceiling

    a, b = ts[k], ts[k + 1]
    while abs(b - a) > 1e-12 * max(1.0, abs(a)):
        mid = 0.5 * (a + b)
        if over(mid):
            b = mid
        else:
            a = mid
    z = dense(b)
    v_c = z[6]
    dv = 2.0 * np.real(np.prod(z[0:3] + 1j * z[3:6]))
    sign = 1.0 if dv * direction > 0 else -1.0
    try:
        tail = _tail_length(coeffs, level, v_c, sign)
    except (ValueError, ZeroDivisionError):
        tail = 0.0
    return b + direction * tail


def integrate_strand(coeffs: StrandCoefficients, initial: StrandState, span,
                     tol: float = DEFAULT_TOL, ceiling: float = DEFAULT_CEILING,
                     max_step: float = np.inf, backend: str | None = None) -> Trajectory:
    """Integrate a strand from ``initial`` over ``span = (lo, hi)``.

    The initial parameter may lie anywhere in the span; the two directions
    are integrated separately and joined.  Raises ``FiniteEscapeError`` if
    some ``|y_j|`` exceeds ``ceiling``.
    """
    lo, hi = (float(span[0]), float(span[1]))
    if not tol > 0:
        raise ValueError("tol must be positive")
    if lo > hi:
        raise ValueError("span must satisfy lo <= hi")
    s0 = initial.s
    if not (lo <= s0 <= hi):
        lo, hi = min(lo, s0), max(hi, s0)
    level = initial.level
    x0 = initial.to_real()
    fwd = _run(coeffs, x0, s0, hi, tol, ceiling, max_step, backend) if hi > s0 else None
    back = _run(coeffs, x0, s0, lo, tol, ceiling, max_step, backend) if lo < s0 else None
    traj = _assemble(coeffs, level, initial, back, fwd)
    for piece, direction in ((fwd, 1.0), (back, -1.0)):
        if piece is not None and piece.status == tb.ESCAPED:
            where = _locate_escape(coeffs, level, piece, ceiling, direction)
            raise FiniteEscapeError(where, traj)
    return traj


def phase_integral(coeffs: StrandCoefficients, B: float, trajectory: Trajectory, j: int,
                   s: float, s0: float = 0.0) -> float:
    """delta_j(s) - delta_j(s0) = -c_j B * int_{s0}^{s} dsigma / (c_j v + 1).

    ``j`` is zero-based.
    """
    cj = float(coeffs.c[j])
    B = float(B)
    if B == 0.0 or cj == 0.0 or s == s0:
        return 0.0
    probe = np.linspace(min(s0, s), max(s0, s), 257)
    _, vp = trajectory(probe)
    if np.min(cj * vp + 1.0) <= 0.0:
        raise ConstraintViolationError(f"c_{j + 1} v + 1 vanishes on [{s0}, {s}]")

    def integrand(x):
        _, v = trajectory(x)
        return 1.0 / (cj * float(v) + 1.0)

    val, _ = _spi.quad(integrand, s0, s, epsabs=1e-13, epsrel=1e-13, limit=500)
    return -cj * B * val
