# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled DOP853 integrator for the strand system.

Same algorithm, tableau and step-size controller as ``_dop853_py``; only
the arithmetic runs on C doubles.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, pow, nextafter, INFINITY

from . import _tableau as tb

cnp.import_array()

DEF NDIM = 7
DEF NS = 12
DEF NSX = 16

cdef double _A[NSX][NSX]
cdef double _B[NS]
cdef double _C[NSX]
cdef double _E3[NS + 1]
cdef double _E5[NS + 1]
cdef double _D[4][NSX]


cdef void _load_tableau():
    cdef int i, j
    A = tb.A
    D = tb.D
    for i in range(NSX):
        for j in range(NSX):
            _A[i][j] = A[i, j]
        _C[i] = tb.C[i]
    for i in range(NS):
        _B[i] = tb.B[i]
    for i in range(NS + 1):
        _E3[i] = tb.E3[i]
        _E5[i] = tb.E5[i]
    for i in range(4):
        for j in range(NSX):
            _D[i][j] = D[i, j]


_load_tableau()


cdef inline void _rhs(double c1, double c2, double c3, const double* y, double* out) noexcept nogil:
    cdef double p1 = y[0], p2 = y[1], p3 = y[2]
    cdef double q1 = y[3], q2 = y[4], q3 = y[5]
    cdef double a1 = p2 * p3 - q2 * q3
    cdef double b1 = p2 * q3 + q2 * p3
    cdef double a2 = p3 * p1 - q3 * q1
    cdef double b2 = p3 * q1 + q3 * p1
    cdef double a3 = p1 * p2 - q1 * q2
    cdef double b3 = p1 * q2 + q1 * p2
    out[0] = c1 * a1
    out[1] = c2 * a2
    out[2] = c3 * a3
    out[3] = -c1 * b1
    out[4] = -c2 * b2
    out[5] = -c3 * b3
    out[6] = 2.0 * (p1 * a1 - q1 * b1)


cdef double _rms_scaled(const double* x, const double* scale) noexcept nogil:
    cdef double acc = 0.0, r
    cdef int i
    for i in range(NDIM):
        r = x[i] / scale[i]
        acc += r * r
    return sqrt(acc / NDIM)


cdef double _initial_step(double c1, double c2, double c3, const double* y0,
                          const double* f0, double direction, double span,
                          double rtol, double atol) noexcept nogil:
    cdef double scale[NDIM]
    cdef double y1[NDIM]
    cdef double f1[NDIM]
    cdef double df[NDIM]
    cdef double d0, d1, d2, h0, h1, m
    cdef int i
    for i in range(NDIM):
        scale[i] = atol + fabs(y0[i]) * rtol
    d0 = _rms_scaled(y0, scale)
    d1 = _rms_scaled(f0, scale)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    for i in range(NDIM):
        y1[i] = y0[i] + h0 * direction * f0[i]
    _rhs(c1, c2, c3, y1, f1)
    for i in range(NDIM):
        df[i] = f1[i] - f0[i]
    d2 = _rms_scaled(df, scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = h0 * 1e-3
        if h1 < 1e-6:
            h1 = 1e-6
    else:
        m = d1 if d1 > d2 else d2
        h1 = pow(0.01 / m, 1.0 / 8.0)
    m = 100.0 * h0
    if h1 < m:
        m = h1
    if span < m:
        m = span
    return m


def integrate(double c1, double c2, double c3, y0, double t0, double t1,
              double rtol, double atol, double ceiling, double max_step,
              long max_steps):
    """Integrate from ``t0`` to ``t1``; see ``_dop853_py.integrate``."""
    cdef double y[NDIM]
    cdef double y_new[NDIM]
    cdef double ytmp[NDIM]
    cdef double f[NDIM]
    cdef double f_new[NDIM]
    cdef double scale[NDIM]
    cdef double K[NSX][NDIM]
    cdef double t = t0, t_new, h, h_abs, direction, span, min_step
    cdef double err, e5, e3, s5, s3, factor = 1.0, ar, dy, big, mag, ym
    cdef int i, s, r, row, status = tb.DONE
    cdef long nsteps = 0, cap
    cdef bint rejected

    for i in range(NDIM):
        y[i] = y0[i]
    direction = 1.0 if t1 >= t0 else -1.0
    span = fabs(t1 - t0)

    cap = 256
    ts_buf = np.empty(cap + 1, dtype=np.float64)
    ys_buf = np.empty((cap + 1, NDIM), dtype=np.float64)
    F_buf = np.empty((cap, 7, NDIM), dtype=np.float64)
    cdef double[::1] tsv = ts_buf
    cdef double[:, ::1] ysv = ys_buf
    cdef double[:, :, ::1] Fv = F_buf
    tsv[0] = t
    for i in range(NDIM):
        ysv[0, i] = y[i]
    if span == 0.0:
        return ts_buf[:1].copy(), ys_buf[:1].copy(), F_buf[:0].copy(), tb.DONE

    _rhs(c1, c2, c3, y, f)
    h_abs = _initial_step(c1, c2, c3, y, f, direction, span, rtol, atol)
    if h_abs > max_step:
        h_abs = max_step

    while direction * (t1 - t) > 0.0:
        if nsteps >= max_steps:
            status = tb.MAX_STEPS
            break
        min_step = 10.0 * fabs(nextafter(t, direction * INFINITY) - t)
        if h_abs > max_step:
            h_abs = max_step
        if h_abs < min_step:
            status = tb.STEP_TOO_SMALL
            break

        rejected = False
        while True:
            h = h_abs * direction
            t_new = t + h
            if direction * (t_new - t1) > 0.0:
                t_new = t1
            h = t_new - t
            h_abs = fabs(h)

            for i in range(NDIM):
                K[0][i] = f[i]
            for s in range(1, NS):
                for i in range(NDIM):
                    ytmp[i] = y[i]
                for r in range(s):
                    ar = _A[s][r] * h
                    if ar != 0.0:
                        for i in range(NDIM):
                            ytmp[i] += ar * K[r][i]
                _rhs(c1, c2, c3, ytmp, K[s])
            for i in range(NDIM):
                y_new[i] = y[i]
            for s in range(NS):
                ar = _B[s] * h
                for i in range(NDIM):
                    y_new[i] += ar * K[s][i]
            _rhs(c1, c2, c3, y_new, f_new)
            for i in range(NDIM):
                K[NS][i] = f_new[i]

            e5 = 0.0
            e3 = 0.0
            for i in range(NDIM):
                ym = fabs(y[i])
                if fabs(y_new[i]) > ym:
                    ym = fabs(y_new[i])
                scale[i] = atol + rtol * ym
                s5 = 0.0
                s3 = 0.0
                for s in range(NS + 1):
                    s5 += K[s][i] * _E5[s]
                    s3 += K[s][i] * _E3[s]
                s5 /= scale[i]
                s3 /= scale[i]
                e5 += s5 * s5
                e3 += s3 * s3
            if e5 == 0.0 and e3 == 0.0:
                err = 0.0
            else:
                err = h_abs * e5 / sqrt((e5 + 0.01 * e3) * NDIM)

            if err < 1.0:
                if err == 0.0:
                    factor = tb.MAX_FACTOR
                else:
                    factor = tb.SAFETY * pow(err, tb.ERROR_EXPONENT)
                    if factor > tb.MAX_FACTOR:
                        factor = tb.MAX_FACTOR
                if rejected and factor > 1.0:
                    factor = 1.0
                break
            factor = tb.SAFETY * pow(err, tb.ERROR_EXPONENT)
            if factor < tb.MIN_FACTOR:
                factor = tb.MIN_FACTOR
            h_abs *= factor
            rejected = True
            if h_abs < min_step:
                status = tb.STEP_TOO_SMALL
                break
        if status == tb.STEP_TOO_SMALL:
            break

        for s in range(NS + 1, NSX):
            for i in range(NDIM):
                ytmp[i] = y[i]
            for r in range(s):
                ar = _A[s][r] * h
                if ar != 0.0:
                    for i in range(NDIM):
                        ytmp[i] += ar * K[r][i]
            _rhs(c1, c2, c3, ytmp, K[s])

        if nsteps + 1 > cap:
            cap *= 2
            ts_buf = np.resize(ts_buf, cap + 1)
            ys_buf = np.resize(ys_buf, (cap + 1, NDIM))
            F_buf = np.resize(F_buf, (cap, 7, NDIM))
            tsv = ts_buf
            ysv = ys_buf
            Fv = F_buf

        for i in range(NDIM):
            dy = y_new[i] - y[i]
            Fv[nsteps, 0, i] = dy
            Fv[nsteps, 1, i] = h * f[i] - dy
            Fv[nsteps, 2, i] = 2.0 * dy - h * (f_new[i] + f[i])
        for row in range(4):
            for i in range(NDIM):
                Fv[nsteps, 3 + row, i] = 0.0
            for s in range(NSX):
                ar = _D[row][s] * h
                if ar != 0.0:
                    for i in range(NDIM):
                        Fv[nsteps, 3 + row, i] += ar * K[s][i]

        t = t_new
        for i in range(NDIM):
            y[i] = y_new[i]
            f[i] = f_new[i]
        nsteps += 1
        tsv[nsteps] = t
        for i in range(NDIM):
            ysv[nsteps, i] = y[i]
        h_abs *= factor

        big = 0.0
        for i in range(3):
            mag = y[i] * y[i] + y[i + 3] * y[i + 3]
            if mag > big:
                big = mag
        if big > ceiling * ceiling:
            status = tb.ESCAPED
            break

    return (ts_buf[:nsteps + 1].copy(), ys_buf[:nsteps + 1].copy(),
            F_buf[:nsteps].copy(), status)
