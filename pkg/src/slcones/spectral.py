"""Spectral data of the degree-2 Killing field.

The characteristic polynomial of ``tau(lambda)`` is
``mu^3 + D mu + i (E + xi^2 lambda^6 + conj(xi)^2 lambda^-6)`` with
constants ``D, E``.  Replacing ``lambda^3`` by ``lambda`` gives the
genus-4 curve sampled by :func:`curve_samples`.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .cone2 import ConeParams, ConeStrands
from .errors import ConstancyViolationError
from .integrable import (KillingField, killing_field, matrix_norm, point_values,
                         unit_circle_samples, xi_and_classify, killing_from_values)
from .io_utils import atomic_write_text, write_json

SPREAD_LIMIT = 1e-6


@dataclass
class SpectralConstants:
    """D and E sampled pointwise, their means, and the closed-form comparison."""

    D_samples: list
    E_samples: list
    D_closed: float
    E_closed: float

    @property
    def D(self) -> float:
        return float(np.mean(self.D_samples))

    @property
    def E(self) -> float:
        return float(np.mean(self.E_samples))

    @property
    def D_spread(self) -> float:
        return float(np.ptp(self.D_samples))

    @property
    def E_spread(self) -> float:
        return float(np.ptp(self.E_samples))

    @property
    def D_defect(self) -> float:
        return abs(self.D - self.D_closed)

    @property
    def E_defect(self) -> float:
        return abs(self.E - self.E_closed)

    @property
    def E_defect_negated(self) -> float:
        """Defect against the closed form with the opposite overall sign."""
        return abs(self.E + self.E_closed)

    def to_dict(self) -> dict:
        return {"D": self.D, "E": self.E, "D_closed": self.D_closed, "E_closed": self.E_closed,
                "D_spread": self.D_spread, "E_spread": self.E_spread,
                "D_defect": self.D_defect, "E_defect": self.E_defect,
                "E_defect_negated": self.E_defect_negated}


def closed_form_constants(params: ConeParams):
    """(D, E) = (a^2 + 2(b^2 + c^2)/a, 2(b^2 (1 - B^2) - c^2 (1 - C^2)))."""
    a, b, c = params.a, params.b, params.c
    D = a * a + 2.0 * (b * b + c * c) / a
    E = 2.0 * (b * b * (1.0 - params.B ** 2) - c * c * (1.0 - params.C ** 2))
    return D, E


def pointwise_constants(kf: KillingField, xi: complex):
    """D and E from f, g, h at one point."""
    f, g, h = kf.f, kf.g, kf.h
    r2 = abs(xi) ** 2
    g2 = abs(g) ** 2
    D = f * f + 2.0 * r2 / f + 2.0 * g2 + 3.0 * h * h
    E = (-f * g * g - f * np.conj(g) ** 2 - 2.0 * f * f * h + 2.0 * r2 * h / f
         + 2.0 * g2 * h + 2.0 * h ** 3)
    return float(D), float(np.real(E))


def spectral_constants(params: ConeParams, strands: ConeStrands, sample_points) -> SpectralConstants:
    """Evaluate D, E at every sample point and compare with the closed form.

    Raises
    ------
    ConstancyViolationError
        If either constant varies by more than ``SPREAD_LIMIT``.
    """
    xi, _ = xi_and_classify(params)
    Ds, Es = [], []
    for s, t in sample_points:
        D, E = pointwise_constants(killing_field(params, strands, s, t), xi)
        Ds.append(D)
        Es.append(E)
    out = SpectralConstants(Ds, Es, *closed_form_constants(params))
    if max(out.D_spread, out.E_spread) > SPREAD_LIMIT:
        raise ConstancyViolationError(
            f"D spread {out.D_spread:.2e}, E spread {out.E_spread:.2e} over sample points")
    return out


def _constant_term(D, E, xi, lam, power):
    return 1j * (E + xi ** 2 * lam ** power + np.conj(xi) ** 2 * lam ** (-power))


def char_poly_coefficients(M):
    """(c2, c1, c0) with det(mu I - M) = mu^3 + c2 mu^2 + c1 mu + c0."""
    tr = np.trace(M)
    tr2 = np.trace(M @ M)
    return -tr, 0.5 * (tr * tr - tr2), -np.linalg.det(M)


def char_poly_check(killing: KillingField, D: float, E: float, xi: complex, lam: complex) -> float:
    """Max coefficient defect of det(mu I - tau(lam)) against (0, D, iE + i xi^2 lam^6 + ...)."""
    c2, c1, c0 = char_poly_coefficients(killing(lam))
    return max(abs(c2), abs(c1 - D), abs(c0 - _constant_term(D, E, xi, lam, 6)))


def cubic_identity_residual(killing: KillingField, D: float, E: float, xi: complex,
                            lam: complex) -> float:
    """Max entry of tau^3 + D tau + i (xi^2 lam^6 + E + conj(xi)^2 lam^-6) I."""
    T = killing(lam)
    return matrix_norm(T @ T @ T + D * T + _constant_term(D, E, xi, lam, 6) * np.eye(3))


def eigenvalue_drift(params: ConeParams, strands: ConeStrands, p, q, lam: complex) -> float:
    """Multiset distance between eigenvalues of tau(lam) at two points."""
    e1 = np.linalg.eigvals(killing_field(params, strands, *p)(lam))
    e2 = np.linalg.eigvals(killing_field(params, strands, *q)(lam))
    return multiset_distance(e1, e2)


# ---------------------------------------------------------------- curve sampling

def cubic_roots(p: complex, q: complex):
    """Roots of mu^3 + p mu + q by Cardano's formula with one Newton polish each."""
    p = complex(p)
    q = complex(q)
    disc = np.sqrt((0.5 * q) ** 2 + (p / 3.0) ** 3 + 0j)
    cands = (-0.5 * q + disc, -0.5 * q - disc)
    big = max(cands, key=abs)
    if big == 0:
        roots = np.zeros(3, dtype=complex)
    else:
        u = big ** (1.0 / 3.0)
        roots = np.array([u * w - p / (3.0 * u * w)
                          for w in (1.0, np.exp(2j * np.pi / 3), np.exp(-2j * np.pi / 3))])
    dp = 3.0 * roots ** 2 + p
    safe = np.abs(dp) > 1e-300
    roots[safe] -= (roots[safe] ** 3 + p * roots[safe] + q) / dp[safe]
    return roots


def multiset_distance(a, b) -> float:
    """Largest gap after optimally matching two root multisets."""
    a = np.asarray(a)
    b = np.asarray(b)
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


@dataclass
class CurveSample:
    lam: complex
    mu_roots: np.ndarray
    residual: float = 0.0


def _curve_roots(D, E, xi, lam, power):
    return cubic_roots(D, _constant_term(D, E, xi, lam, power))


def curve_samples(D: float, E: float, xi: complex, lambda_grid, power: int = 2) -> list:
    """Three mu-roots per lambda of mu^3 + D mu + iE + i xi^2 lam^power + i conj(xi)^2 lam^-power.

    ``power = 2`` is the genus-4 curve; ``power = 6`` the curve in the
    original spectral parameter.
    """
    out = []
    for lam in lambda_grid:
        lam = complex(lam)
        if lam == 0:
            raise ValueError("lambda must be nonzero")
        mu = _curve_roots(D, E, xi, lam, power)
        c0 = _constant_term(D, E, xi, lam, power)
        res = float(np.max(np.abs(mu ** 3 + D * mu + c0)))
        out.append(CurveSample(lam, mu, res))
    return out


def default_lambda_grid(n_circle: int = 512, n_rays: int = 4, radii=(0.5, 0.8, 1.25, 2.0)):
    """``n_circle`` points on |lambda| = 1 plus ``n_rays`` radial rays."""
    circle = np.exp(2j * np.pi * (np.arange(n_circle) + 0.5) / n_circle)
    rays = [r * np.exp(2j * np.pi * (k + 0.25) / n_rays) for k in range(n_rays) for r in radii]
    return np.concatenate([circle, np.asarray(rays, dtype=complex)])


@dataclass
class InvolutionReport:
    rho: float
    sigma: float
    back_substitution: float
    samples: int

    def to_dict(self) -> dict:
        return {"rho": self.rho, "sigma": self.sigma,
                "back_substitution": self.back_substitution, "samples": self.samples}


def involution_checks(D: float, E: float, xi: complex, samples, power: int = 2) -> InvolutionReport:
    """rho: (lam, mu) -> (-lam, mu); sigma: (lam, mu) -> (1/conj(lam), -conj(mu))."""
    rho = sigma = 0.0
    for smp in samples:
        lam = smp.lam
        rho = max(rho, multiset_distance(smp.mu_roots, _curve_roots(D, E, xi, -lam, power)))
        image = _curve_roots(D, E, xi, 1.0 / np.conj(lam), power)
        sigma = max(sigma, multiset_distance(-np.conj(smp.mu_roots), image))
    back = max((s.residual for s in samples), default=0.0)
    return InvolutionReport(rho, sigma, back, len(samples))


def curve_to_csv(samples) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["lambda_re", "lambda_im", "mu1_re", "mu1_im", "mu2_re", "mu2_im",
                "mu3_re", "mu3_im"])
    for s in samples:
        row = [repr(s.lam.real), repr(s.lam.imag)]
        for m in s.mu_roots:
            row += [repr(float(m.real)), repr(float(m.imag))]
        w.writerow(row)
    return buf.getvalue()


def export_curve(samples, csv_path, json_path, D, E, xi, report: InvolutionReport):
    atomic_write_text(csv_path, curve_to_csv(samples))
    write_json(json_path, {"kind": "spectral_curve", "D": D, "E": E, "xi": complex(xi),
                           "involutions": report.to_dict()})
