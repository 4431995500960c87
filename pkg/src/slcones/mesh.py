"""Point-cloud and mesh export of cone samples as OBJ or PLY.

Points of the cone live in C^3 = R^6; a projection picks three real
coordinates named ``re1, re2, re3, im1, im2, im3``.
"""

from __future__ import annotations

import numpy as np

from .cone2 import ConeParams, ConeStrands, build_strands, immersion
from .io_utils import SCHEMA_VERSION, atomic_write_text

AXES = {"re1": (0, "re"), "re2": (1, "re"), "re3": (2, "re"),
        "im1": (0, "im"), "im2": (1, "im"), "im3": (2, "im")}
DEFAULT_PROJECTION = "re1,re2,re3"


def parse_projection(spec: str):
    names = [x.strip().lower() for x in spec.split(",")]
    if len(names) != 3 or any(n not in AXES for n in names):
        raise ValueError(f"projection {spec!r} must name three of {sorted(AXES)}")
    return names


def project(points, spec: str = DEFAULT_PROJECTION) -> np.ndarray:
    """Real (n, 3) array from complex (n, 3) points."""
    pts = np.asarray(points).reshape(-1, 3)
    cols = []
    for name in parse_projection(spec):
        j, part = AXES[name]
        cols.append(pts[:, j].real if part == "re" else pts[:, j].imag)
    return np.column_stack(cols)


def grid_faces(n_s: int, n_t: int) -> np.ndarray:
    """Triangles (zero-based) of a row-major n_s x n_t vertex grid."""
    i, j = np.meshgrid(np.arange(n_s - 1), np.arange(n_t - 1), indexing="ij")
    a = (i * n_t + j).ravel()
    b = a + n_t
    return np.concatenate([np.column_stack([a, b, a + 1]),
                           np.column_stack([a + 1, b, b + 1])])


def sample_surface(params: ConeParams, n_s: int = 64, n_t: int = 64, s_range=None,
                   t_range=None, r: float = 1.0, strands: ConeStrands | None = None):
    """Complex samples Phi(r, s, t) on an n_s x n_t grid, row-major in s."""
    if s_range is None or t_range is None:
        from .cone2 import natural_periods
        S, T = natural_periods(params)
        s_range = s_range or (0.0, S or 2.0 * np.pi)
        t_range = t_range or (0.0, T or 2.0 * np.pi)
    if strands is None:
        strands = build_strands(params, s_range, t_range)
    s = np.linspace(*s_range, n_s)
    t = np.linspace(*t_range, n_t)
    Sg, Tg = np.meshgrid(s, t, indexing="ij")
    return immersion(params, strands, r, Sg, Tg).reshape(-1, 3), strands


def obj_text(vertices, faces=None, comment: str = "") -> str:
    lines = [f"# schema_version {SCHEMA_VERSION}"]
    if comment:
        lines.append(f"# {comment}")
    lines += [f"v {x:.12g} {y:.12g} {z:.12g}" for x, y, z in vertices]
    if faces is not None:
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in faces]
    return "\n".join(lines) + "\n"


def ply_text(vertices, faces=None, comment: str = "") -> str:
    faces = [] if faces is None else faces
    head = ["ply", "format ascii 1.0", f"comment schema_version {SCHEMA_VERSION}"]
    if comment:
        head.append(f"comment {comment}")
    head += [f"element vertex {len(vertices)}", "property double x", "property double y",
             "property double z", f"element face {len(faces)}",
             "property list uchar int vertex_indices", "end_header"]
    body = [f"{x:.12g} {y:.12g} {z:.12g}" for x, y, z in vertices]
    body += [f"3 {a} {b} {c}" for a, b, c in faces]
    return "\n".join(head + body) + "\n"


def write_mesh(path, vertices, faces=None, fmt: str | None = None, comment: str = "") -> None:
    fmt = (fmt or str(path).rsplit(".", 1)[-1]).lower()
    if fmt == "obj":
        atomic_write_text(path, obj_text(vertices, faces, comment))
    elif fmt == "ply":
        atomic_write_text(path, ply_text(vertices, faces, comment))
    else:
        raise ValueError(f"unknown mesh format {fmt!r}")


def quadric_residuals(params: ConeParams, strands: ConeStrands, s, t, r: float = 1.0,
                      min_modulus: float = 1e-3):
    """Membership defects for the real case B = C = 0.

    Returns ``(literal, moving)``: ``literal`` is
    ``max |sum_j gamma_j x_j^2|`` over samples on the row t = t[0], and
    ``moving`` is ``max |sum_j gamma_j (x_j / z_j(t))^2| / r^2`` over all
    samples, the fixed-t quadric in the Lagrangian 3-plane diag(z(t)) R^3.
    Samples with some |z_j(t)| below ``min_modulus`` are skipped.
    """
    gamma = np.asarray(params.gamma)
    s = np.asarray(s, float)
    t = np.asarray(t, float)
    Sg, Tg = np.meshgrid(s, t, indexing="ij")
    x = immersion(params, strands, r, Sg, Tg).real
    literal = float(np.max(np.abs(np.sum(gamma * x[:, 0] ** 2, axis=-1))))
    z, _ = strands.z(t)
    z = z.real
    keep = np.min(np.abs(z), axis=-1) >= min_modulus
    scaled = x[:, keep] / z[keep][None, :, :]
    moving = float(np.max(np.abs(np.sum(gamma * scaled ** 2, axis=-1)))) / r ** 2
    return literal, moving
