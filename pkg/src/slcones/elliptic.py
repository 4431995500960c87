"""Jacobi elliptic functions and the closed-form strand potential.

For zero-sum coefficients the potential obeys ``(v')^2 = 4 (Q(v) - B^2)``
with ``Q(v) = prod (c_j v + 1) = 1 + e2 v^2 + e3 v^3``.  Between two simple
roots of ``Q - B^2`` the solution is ``v = anchor + sign * Delta * sn^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ellipkinc

from .errors import DomainError, InvalidLevelError
from .strands import StrandCoefficients

_AGM_TOL = 2.0 ** -52


def _agm_sequence(m: float):
    """Arithmetic-geometric mean ladder (a_n, c_n) starting from (1, sqrt(1-m))."""
    a, b, c = 1.0, math.sqrt(1.0 - m), math.sqrt(m)
    As, Cs = [a], [c]
    while abs(c) > _AGM_TOL * a and len(As) < 64:
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        As.append(a)
        Cs.append(c)
    return As, Cs


def ellipk(m: float) -> float:
    """Complete elliptic integral of the first kind K(m) = pi / (2 AGM(1, sqrt(1-m)))."""
    if not 0.0 <= m < 1.0:
        if m == 1.0:
            return math.inf
        raise DomainError(f"parameter m = {m} outside [0, 1]")
    As, _ = _agm_sequence(m)
    return math.pi / (2.0 * As[-1])


def jacobi_elliptic(u, m: float):
    """Return ``(sn, cn, dn)`` of ``u`` with parameter ``m`` in [0, 1].

    Uses the descending Landen (AGM) scheme: build the AGM ladder, set
    phi_N = 2^N a_N u and descend with
    phi_{n-1} = (phi_n + arcsin(c_n sin(phi_n) / a_n)) / 2.
    Accepts scalars or arrays for ``u``.
    """
    m = float(m)
    if not (0.0 <= m <= 1.0) or math.isnan(m):
        raise DomainError(f"parameter m = {m} outside [0, 1]")
    u_arr = np.asarray(u, dtype=float)
    if m == 0.0:
        out = (np.sin(u_arr), np.cos(u_arr), np.ones_like(u_arr))
    elif m == 1.0:
        sech = 1.0 / np.cosh(u_arr)
        out = (np.tanh(u_arr), sech, sech)
    else:
        As, Cs = _agm_sequence(m)
        n = len(As) - 1
        phi = (2.0 ** n) * As[-1] * u_arr
        prev = phi
        for k in range(n, 0, -1):
            prev = phi
            phi = 0.5 * (phi + np.arcsin(Cs[k] * np.sin(phi) / As[k]))
        sn = np.sin(phi)
        cn = np.cos(phi)
        if m <= 0.9:
            dn = np.sqrt(1.0 - m * sn * sn)
        else:
            dn = cn / np.cos(prev - phi)
        out = (sn, cn, dn)
    if np.ndim(u) == 0:
        return tuple(float(x) for x in out)
    return out


def _cubic_real_roots(a3, a2, a0):
    """Real roots of a3 x^3 + a2 x^2 + a0 (no linear term; three real roots assumed).

    The trigonometric formula gives the largest-magnitude root to full
    relative accuracy.  The other two come from Vieta's relations, which
    stays accurate when a3 is tiny and one root runs off to infinity.
    """
    a = a2 / a3
    c = a0 / a3
    q = a * a / 9.0
    r = (2.0 * a ** 3 + 27.0 * c) / 54.0
    if q <= 0.0:
        x = -a / 3.0
        return [x, x, x]
    ratio = max(-1.0, min(1.0, r / q ** 1.5))
    th = math.acos(ratio)
    sq = -2.0 * math.sqrt(q)
    trig = [sq * math.cos((th + 2.0 * math.pi * k) / 3.0) - a / 3.0 for k in (0, 1, -1)]
    big = max(trig, key=abs)
    # remaining pair: product = -c / big, and the pairwise-sum relation
    # (zero linear coefficient) gives sum = -product / big
    prod = -c / big
    tot = -prod / big
    disc = max(tot * tot - 4.0 * prod, 0.0)
    half = 0.5 * (tot + math.copysign(math.sqrt(disc), tot))
    other = prod / half if half != 0.0 else 0.0
    return [big, half, other]


def _polish(coefs, x):
    """One Newton step on the polynomial with highest-first ``coefs``."""
    p = np.polyval(coefs, x)
    dp = np.polyval(np.polyder(coefs), x)
    return x - p / dp if dp != 0.0 else x


@dataclass(frozen=True)
class EllipticForm:
    """Closed-form potential ``v(s) = anchor + branch_sign * delta * sn^2(omega s + u0 | m)``.

    ``branch_sign = +1`` means v oscillates upward from the lower root
    ``anchor``; ``-1`` means it hangs downward from the upper root.  The
    quadratic degeneration uses ``m = 0``.  For |B| = 1 the form is
    ``constant`` and ``v`` is identically zero.
    """

    roots: tuple
    modulus_m: float
    half_period: float
    branch_sign: int
    omega: float
    u0: float
    anchor: float
    delta: float
    level: float
    coeffs: StrandCoefficients
    constant: bool = False

    @property
    def period(self) -> float:
        return 2.0 * self.half_period

    @property
    def K(self) -> float:
        return ellipk(self.modulus_m)

    @property
    def turning_points(self):
        lo = self.anchor if self.branch_sign > 0 else self.anchor - self.delta
        return lo, lo + self.delta

    def v_of_u(self, u):
        """Potential as a function of the elliptic argument u = omega s + u0."""
        sn, _, _ = jacobi_elliptic(u, self.modulus_m)
        return self.anchor + self.branch_sign * self.delta * np.asarray(sn) ** 2

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.constant:
            return np.zeros_like(s)
        return self.v_of_u(self.omega * s + self.u0)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        if self.constant:
            return np.zeros_like(s)
        sn, cn, dn = jacobi_elliptic(self.omega * s + self.u0, self.modulus_m)
        return 2.0 * self.branch_sign * self.delta * self.omega * sn * cn * dn

    def ode_residual(self, s):
        """| (v')^2 - 4 (Q(v) - B^2) | along the closed form."""
        v = self(s)
        dv = self.derivative(s)
        return np.abs(dv ** 2 - 4.0 * (self.coeffs.q_poly(v) - self.level ** 2))


def potential_closed_form(coeffs: StrandCoefficients, B: float) -> EllipticForm:
    """Closed-form solution of the potential with v(0) = 0 and v'(0) >= 0."""
    B = float(B)
    if abs(B) > 1.0:
        raise InvalidLevelError(f"conserved level {B} is outside [-1, 1]")
    c = coeffs.c
    if abs(c.sum()) > 1e-12 * max(1.0, np.abs(c).max()):
        raise DomainError("closed form requires zero-sum coefficients")
    e2 = c[0] * c[1] + c[1] * c[2] + c[2] * c[0]
    e3 = c[0] * c[1] * c[2]
    p0 = 1.0 - B * B

    if p0 == 0.0:
        third = -e2 / e3 if e3 != 0.0 else math.inf
        return EllipticForm(roots=tuple(sorted((0.0, 0.0, third))), modulus_m=0.0,
                            half_period=math.inf, branch_sign=1, omega=0.0, u0=0.0,
                            anchor=0.0, delta=0.0, level=B, coeffs=coeffs, constant=True)

    scale = float(np.abs(c).max()) ** 3
    if np.any(c == 0.0) or abs(e3) <= 1e-15 * scale:
        # Q is quadratic: v = R sin(2 sqrt(-e2) s) = -R + 2R sin^2(sqrt(-e2) s + pi/4)
        if e2 >= 0.0:
            raise DomainError("quadratic potential without an oscillating branch")
        R = math.sqrt(p0 / -e2)
        omega = math.sqrt(-e2)
        return EllipticForm(roots=(-R, R), modulus_m=0.0, half_period=math.pi / (2.0 * omega),
                            branch_sign=1, omega=omega, u0=math.pi / 4.0, anchor=-R,
                            delta=2.0 * R, level=B, coeffs=coeffs)

    poly = np.array([e3, e2, 0.0, p0])
    roots = sorted(_polish(poly, x) for x in _cubic_real_roots(e3, e2, p0))
    r0, r1, r2 = roots
    if e3 > 0.0:
        # Q - B^2 >= 0 on [r0, r1], which contains v = 0
        delta = r1 - r0
        m = delta / (r2 - r0)
        omega = math.sqrt(e3 * (r2 - r0))
        frac = min(1.0, max(0.0, -r0 / delta))
        u0 = float(ellipkinc(math.asin(math.sqrt(frac)), m))
        anchor, sign = r0, 1
    else:
        delta = r2 - r1
        m = delta / (r2 - r0)
        omega = math.sqrt(-e3 * (r2 - r0))
        frac = min(1.0, max(0.0, r2 / delta))
        u0 = -float(ellipkinc(math.asin(math.sqrt(frac)), m))
        anchor, sign = r2, -1
    half = ellipk(m) / omega
    return EllipticForm(roots=tuple(roots), modulus_m=m, half_period=half, branch_sign=sign,
                        omega=omega, u0=u0, anchor=anchor, delta=delta, level=B, coeffs=coeffs)
