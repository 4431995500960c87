"""One-call diagnostic report of the integrable structure of a cone.

Each block holds the measured values, the threshold and a pass flag.
Blocks check the identities exactly as stated; where a stated identity
fails but a closely related form holds, the related value is reported in
the same block under a ``*_variant`` key and does not affect the flag.
"""

from __future__ import annotations

import numpy as np

from . import integrable as ig
from . import spectral as sp
from .cone2 import ConeParams, build_strands, natural_periods

THRESHOLDS = {
    "return_map": 1e-6,
    "special_frame_det": 1e-9,
    "toda": 1e-6,
    "tzitzeica": 1e-6,
    "flatness": 1e-5,
    "killing": 1e-5,
    "killing_algebra": 1e-12,
    "spectral": 1e-9,
    "finite_type": 1e-9,
    "curve": 1e-9,
    "harmonic": 1e-9,
}


def sample_points(params: ConeParams, n: int = 10, seed: int = 0):
    """Deterministic sample points inside one period box."""
    S, T = natural_periods(params)
    S = S or 2.0 * np.pi
    T = T or 2.0 * np.pi
    rng = np.random.default_rng(seed)
    return [(float(a), float(b)) for a, b in zip(rng.uniform(0.05 * S, 0.95 * S, n),
                                                 rng.uniform(0.05 * T, 0.95 * T, n))]


def _block(threshold, checked: dict, **extra):
    vals = {k: float(v) for k, v in checked.items()}
    out = {"threshold": threshold, "values": vals,
           "passed": bool(all(v < threshold for v in vals.values()))}
    out.update(extra)
    return out


def diagnose(params: ConeParams, n_points: int = 10, h: float = 1e-3, h_return: float = 1e-4,
             seed: int = 0, n_lambda: int = 8, curve_samples: int = 512):
    """Run every identity check and return ``(report, curve)``.

    ``curve`` is the list of spectral-curve samples (empty when isotropic).
    """
    pts = sample_points(params, n_points, seed)
    S, T = natural_periods(params)
    span_s = (0.0, (S or 2.0 * np.pi) + 1.0)
    span_t = (0.0, (T or 2.0 * np.pi) + 1.0)
    strands = build_strands(params, span_s, span_t, tol=1e-12)
    xi, kind = ig.xi_and_classify(params)
    rep = {"kind": "diagnostics", "params": params.to_dict(), "xi": xi,
           "classification": kind, "sample_points": pts, "blocks": {}}
    B = rep["blocks"]
    B["parameter_identities"] = _block(1e-12, params.identity_residuals())
    harm = [ig.harmonic_identities(params, strands, s, t) for s, t in pts]
    B["harmonic"] = _block(THRESHOLDS["harmonic"],
                           {k: max(d[k] for d in harm) for k in harm[0]})
    few = pts[:3]
    B["return_map"] = _block(
        THRESHOLDS["return_map"],
        {"residual": ig.return_map_residual(params, strands, few, h_return)},
        residual_conj_variant=ig.return_map_residual(params, strands, few, h_return,
                                                     xi=np.conj(xi)))
    curve = []
    if kind == ig.ISOTROPIC:
        rep["skipped"] = ["special_frame_det", "toda", "tzitzeica", "flatness", "killing",
                          "spectral", "finite_type", "curve"]
    else:
        dets = [ig.special_frame_det(params, strands, s, t) for s, t in few]
        B["special_frame_det"] = _block(
            THRESHOLDS["special_frame_det"], {"det_minus_one": max(abs(d - 1) for d in dets)},
            det_plus_one_variant=max(abs(d + 1) for d in dets))
        B["toda"] = _block(THRESHOLDS["toda"], {"residual": ig.toda_residual(params, strands, few, h)})
        B["tzitzeica"] = _block(THRESHOLDS["tzitzeica"],
                                {"residual": ig.tzitzeica_residual(params, strands, few, h)})
        B["flatness"] = _block(THRESHOLDS["flatness"], {
            "lambda_1": ig.flatness_residual(params, strands, few, 1.0, h),
            "lambda_generic": ig.flatness_residual(params, strands, few, np.exp(0.9j), h)})
        B["killing"] = _block(THRESHOLDS["killing"],
                              {"residual": ig.killing_residual(params, strands, few, h)})
        kfs = [ig.killing_field(params, strands, s, t) for s, t in few]
        cons = [ig.connection_coeffs(params, strands, s, t) for s, t in few]
        inv = ig.ZETA ** -1
        B["killing_algebra"] = _block(THRESHOLDS["killing_algebra"], {
            "reality": max(ig.reality_residual(k) for k in kfs),
            "kappa": max(ig.kappa_residual(k) for k in kfs),
            "equivariance": max(ig.equivariance_residual(k) for k in kfs),
            "connection_equivariance": max(
                ig.equivariance_residual(lambda l, c=c, i=i: c.alpha(l)[i])
                for c in cons for i in (0, 1)),
        }, equivariance_inverse_zeta_variant=max(ig.equivariance_residual(k, zeta=inv)
                                                 for k in kfs),
            connection_equivariance_inverse_zeta_variant=max(
                ig.equivariance_residual(lambda l, c=c, i=i: c.alpha(l)[i], zeta=inv)
                for c in cons for i in (0, 1)))
        sc = sp.spectral_constants(params, strands, pts)
        lams = ig.unit_circle_samples(n_lambda)
        kf = kfs[0]
        B["spectral"] = _block(THRESHOLDS["spectral"], {
            "D_spread": sc.D_spread, "E_spread": sc.E_spread,
            "D_closed_form": sc.D_defect, "E_closed_form": sc.E_defect,
            "char_poly": max(sp.char_poly_check(kf, sc.D, sc.E, xi, l) for l in lams),
            "cubic_identity": max(sp.cubic_identity_residual(kf, sc.D, sc.E, xi, l)
                                  for l in lams),
            "eigenvalue_drift": sp.eigenvalue_drift(params, strands, pts[0], pts[-1],
                                                    np.exp(0.4j)),
        }, D=sc.D, E=sc.E, D_closed=sc.D_closed, E_closed=sc.E_closed,
            E_closed_form_negated_variant=sc.E_defect_negated)
        ft = ig.finite_type_certificate(params, strands, pts[0])
        B["finite_type"] = _block(THRESHOLDS["finite_type"], {
            "eta7_minus_alpha1": ft.defect_top, "eta6_minus_2alpha0": ft.defect_next,
            "eta8": ft.eta8_norm},
            eta7_plus_alpha1_variant=ft.defect_top_neg,
            eta6_plus_2alpha0_variant=ft.defect_next_neg, degree=ft.degree)
        grid = sp.default_lambda_grid(curve_samples)
        curve = sp.curve_samples(sc.D, sc.E, xi, grid)
        inv_rep = sp.involution_checks(sc.D, sc.E, xi, curve)
        B["curve"] = _block(THRESHOLDS["curve"], {
            "rho": inv_rep.rho, "sigma": inv_rep.sigma,
            "back_substitution": inv_rep.back_substitution}, samples=inv_rep.samples)
    rep["passed"] = bool(all(b["passed"] for b in B.values()))
    rep["failed_blocks"] = [k for k, b in B.items() if not b["passed"]]
    return rep, curve
