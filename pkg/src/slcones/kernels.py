"""Backend selection for the strand integrator kernel.

The compiled ``_dop853`` extension is used when it imports; otherwise the
pure-Python ``_dop853_py`` module takes over.  Setting the environment
variable ``SLCONES_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _dop853_py

BACKEND = "python"
_impl = _dop853_py

if os.environ.get("SLCONES_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _dop853 as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        _impl = _compiled
        BACKEND = "cython"


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython", "python" or None)."""
    if name is None:
        return _impl
    if name == "python":
        return _dop853_py
    if name == "cython":
        from . import _dop853
        return _dop853
    raise ValueError(f"unknown backend {name!r}")


def integrate(c1, c2, c3, y0, t0, t1, rtol, atol, ceiling, max_step, max_steps,
              backend=None):
    """Run the selected DOP853 kernel; returns ``(ts, ys, F, status)``."""
    impl = get_backend(backend)
    return impl.integrate(float(c1), float(c2), float(c3), [float(x) for x in y0],
                          float(t0), float(t1), float(rtol), float(atol),
                          float(ceiling), float(max_step), int(max_steps))
