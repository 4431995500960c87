"""Metric, Kaehler form and holomorphic volume form on C^3.

Vectors are complex arrays whose last axis has length 3.  Every function
broadcasts over leading axes.
"""

from dataclasses import dataclass

import numpy as np


def as_triple(u):
    """Return ``u`` as a complex array with a trailing axis of length 3."""
    arr = np.asarray(u, dtype=complex)
    if arr.shape[-1:] != (3,):
        raise ValueError(f"expected a trailing axis of length 3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite component in complex triple")
    return arr


def hermitian(u, v):
    """Hermitian product sum_j u_j conj(v_j)."""
    u = as_triple(u)
    v = as_triple(v)
    return np.sum(u * np.conj(v), axis=-1)


def metric(u, v):
    """Euclidean metric g(u, v) = Re sum_j u_j conj(v_j)."""
    return np.real(hermitian(u, v))


def kaehler_form(u, v):
    """Kaehler form omega(u, v) = Im sum_j u_j conj(v_j)."""
    return np.imag(hermitian(u, v))


def holomorphic_volume(u, v, w):
    """Omega(u, v, w) = det of the matrix with columns u, v, w."""
    u = as_triple(u)
    v = as_triple(v)
    w = as_triple(w)
    return (u[..., 0] * (v[..., 1] * w[..., 2] - v[..., 2] * w[..., 1])
            - v[..., 0] * (u[..., 1] * w[..., 2] - u[..., 2] * w[..., 1])
            + w[..., 0] * (u[..., 1] * v[..., 2] - u[..., 2] * v[..., 1]))


@dataclass(frozen=True)
class SlResidual:
    """Absolute values of the special Lagrangian defects of a tangent frame."""

    omega_rs: float
    omega_rt: float
    omega_st: float
    im_omega: float
    gram_defect: float = 0.0

    def max(self):
        return max(self.omega_rs, self.omega_rt, self.omega_st, self.im_omega)


def sl_plane_residual(u, v, w):
    """SL defects of the real 3-plane spanned by ``u, v, w``.

    ``gram_defect`` is the largest off-diagonal metric entry, which is zero
    for an orthogonal frame but not required for the SL test.
    """
    gram = max(float(np.max(np.abs(metric(u, v)))),
               float(np.max(np.abs(metric(u, w)))),
               float(np.max(np.abs(metric(v, w)))))
    return SlResidual(
        omega_rs=float(np.max(np.abs(kaehler_form(u, v)))),
        omega_rt=float(np.max(np.abs(kaehler_form(u, w)))),
        omega_st=float(np.max(np.abs(kaehler_form(v, w)))),
        im_omega=float(np.max(np.abs(np.imag(holomorphic_volume(u, v, w))))),
        gram_defect=gram,
    )
