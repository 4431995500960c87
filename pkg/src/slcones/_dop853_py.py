"""Pure-Python DOP853 integrator for the strand system.

This is the fallback backend.  It mirrors ``_dop853.pyx`` line for line so
the two produce the same step sequence up to rounding.  The state is the
real 7-vector ``(Re y1, Re y2, Re y3, Im y1, Im y2, Im y3, v)``.
"""

import math

import numpy as np

from . import _tableau as tb

NDIM = 7

_A = tb.A.tolist()
_B = tb.B.tolist()
_C = tb.C.tolist()
_E3 = tb.E3.tolist()
_E5 = tb.E5.tolist()
_D = tb.D.tolist()
_NS = tb.N_STAGES
_NSX = tb.N_STAGES_EXTENDED


def rhs(c1, c2, c3, y):
    p1, p2, p3, q1, q2, q3 = y[0], y[1], y[2], y[3], y[4], y[5]
    a1 = p2 * p3 - q2 * q3
    b1 = p2 * q3 + q2 * p3
    a2 = p3 * p1 - q3 * q1
    b2 = p3 * q1 + q3 * p1
    a3 = p1 * p2 - q1 * q2
    b3 = p1 * q2 + q1 * p2
    return [c1 * a1, c2 * a2, c3 * a3,
            -c1 * b1, -c2 * b2, -c3 * b3,
            2.0 * (p1 * a1 - q1 * b1)]


def _rms_scaled(x, scale):
    acc = 0.0
    for i in range(NDIM):
        r = x[i] / scale[i]
        acc += r * r
    return math.sqrt(acc / NDIM)


def _initial_step(c1, c2, c3, t0, y0, f0, direction, span, rtol, atol):
    scale = [atol + abs(y0[i]) * rtol for i in range(NDIM)]
    d0 = _rms_scaled(y0, scale)
    d1 = _rms_scaled(f0, scale)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    y1 = [y0[i] + h0 * direction * f0[i] for i in range(NDIM)]
    f1 = rhs(c1, c2, c3, y1)
    d2 = _rms_scaled([f1[i] - f0[i] for i in range(NDIM)], scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    return min(100.0 * h0, h1, span)


def integrate(c1, c2, c3, y0, t0, t1, rtol, atol, ceiling, max_step, max_steps):
    """Integrate from ``t0`` to ``t1`` and return dense-output data.

    Returns ``(ts, ys, F, status)`` where ``F[k]`` holds the seven
    interpolation coefficient rows for step ``k``.
    """
    y = [float(x) for x in y0]
    t = float(t0)
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    ts = [t]
    ys = [list(y)]
    Fs = []
    if span == 0.0:
        return _pack(ts, ys, Fs, tb.DONE)

    f = rhs(c1, c2, c3, y)
    h_abs = min(_initial_step(c1, c2, c3, t, y, f, direction, span, rtol, atol), max_step)
    K = [[0.0] * NDIM for _ in range(_NSX)]
    status = tb.DONE
    nsteps = 0

    while direction * (t1 - t) > 0.0:
        if nsteps >= max_steps:
            status = tb.MAX_STEPS
            break
        min_step = 10.0 * abs(math.nextafter(t, direction * math.inf) - t)
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
            h_abs = abs(h)

            K[0] = f
            for s in range(1, _NS):
                a = _A[s]
                ytmp = list(y)
                for r in range(s):
                    ar = a[r] * h
                    if ar != 0.0:
                        Kr = K[r]
                        for i in range(NDIM):
                            ytmp[i] += ar * Kr[i]
                K[s] = rhs(c1, c2, c3, ytmp)
            y_new = list(y)
            for s in range(_NS):
                bs = _B[s] * h
                Ks = K[s]
                for i in range(NDIM):
                    y_new[i] += bs * Ks[i]
            f_new = rhs(c1, c2, c3, y_new)
            K[_NS] = f_new

            scale = [atol + rtol * max(abs(y[i]), abs(y_new[i])) for i in range(NDIM)]
            e5 = 0.0
            e3 = 0.0
            for i in range(NDIM):
                s5 = 0.0
                s3 = 0.0
                for s in range(_NS + 1):
                    s5 += K[s][i] * _E5[s]
                    s3 += K[s][i] * _E3[s]
                s5 /= scale[i]
                s3 /= scale[i]
                e5 += s5 * s5
                e3 += s3 * s3
            if e5 == 0.0 and e3 == 0.0:
                err = 0.0
            else:
                err = h_abs * e5 / math.sqrt((e5 + 0.01 * e3) * NDIM)

            if err < 1.0:
                if err == 0.0:
                    factor = tb.MAX_FACTOR
                else:
                    factor = min(tb.MAX_FACTOR, tb.SAFETY * err ** tb.ERROR_EXPONENT)
                if rejected:
                    factor = min(1.0, factor)
                break
            h_abs *= max(tb.MIN_FACTOR, tb.SAFETY * err ** tb.ERROR_EXPONENT)
            rejected = True
            if h_abs < min_step:
                status = tb.STEP_TOO_SMALL
                break
        if status == tb.STEP_TOO_SMALL:
            break

        # extra stages for the 7th-order interpolant
        for s in range(_NS + 1, _NSX):
            a = _A[s]
            ytmp = list(y)
            for r in range(s):
                ar = a[r] * h
                if ar != 0.0:
                    Kr = K[r]
                    for i in range(NDIM):
                        ytmp[i] += ar * Kr[i]
            K[s] = rhs(c1, c2, c3, ytmp)
        F = [[0.0] * NDIM for _ in range(7)]
        for i in range(NDIM):
            dy = y_new[i] - y[i]
            F[0][i] = dy
            F[1][i] = h * f[i] - dy
            F[2][i] = 2.0 * dy - h * (f_new[i] + f[i])
        for row in range(4):
            d = _D[row]
            Frow = F[3 + row]
            for s in range(_NSX):
                ds = d[s] * h
                if ds != 0.0:
                    Ks = K[s]
                    for i in range(NDIM):
                        Frow[i] += ds * Ks[i]
        Fs.append(F)

        t = t_new
        y = y_new
        f = f_new
        ts.append(t)
        ys.append(list(y))
        nsteps += 1
        h_abs *= factor

        big = 0.0
        for j in range(3):
            m = y[j] * y[j] + y[j + 3] * y[j + 3]
            if m > big:
                big = m
        if big > ceiling * ceiling:
            status = tb.ESCAPED
            break

    return _pack(ts, ys, Fs, status)


def _pack(ts, ys, Fs, status):
    F = np.array(Fs, dtype=float).reshape(len(Fs), 7, NDIM)
    return np.array(ts, dtype=float), np.array(ys, dtype=float), F, int(status)
