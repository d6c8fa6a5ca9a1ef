"""Dormand-Prince 5(4) integrator for small complex systems."""

from __future__ import annotations

import numpy as np

from .errors import StepSizeUnderflow

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


def integrate(f, t0, t1, y0, rtol, *, h0=None, max_steps=2_000_000, h_min_rel=1e-14):
    """Integrate y' = f(t, y) from t0 to t1 (either direction).

    The error of each step is measured in the max-norm relative to
    max(1, |y|_max).  Returns (y, accepted_steps, accumulated_error).
    """
    y = np.array(y0, dtype=complex)
    t = float(t0)
    span = float(t1) - t
    if span == 0.0:
        return y, 0, 0.0
    direction = 1.0 if span > 0 else -1.0
    h = abs(span) / 16.0 if h0 is None else abs(h0)
    h = min(h, abs(span))
    k1 = f(t, y)
    steps = 0
    err_total = 0.0
    h_floor = h_min_rel * max(abs(t0), abs(t1), abs(span))
    while direction * (t1 - t) > 0:
        if steps >= max_steps:
            raise StepSizeUnderflow(f"step budget exhausted at t = {t:.6g}", location=t)
        h = min(h, abs(t1 - t))
        hs = direction * h
        k = [k1]
        for i in range(1, 7):
            yi = y + hs * sum(a * kj for a, kj in zip(_A[i], k))
            k.append(f(t + _C[i] * hs, yi))
        y_new = y + hs * sum(b * kj for b, kj in zip(_B5, k) if b)
        err_vec = hs * sum(e * kj for e, kj in zip(_E, k) if e)
        scale = max(1.0, float(np.abs(y).max()), float(np.abs(y_new).max()))
        err = float(np.abs(err_vec).max()) / scale
        if err <= rtol:
            t = t + hs if abs(t1 - (t + hs)) > 1e-15 * abs(span) else float(t1)
            y = y_new
            k1 = k[6]
            steps += 1
            err_total += err * scale
        fac = 0.9 * (rtol / err) ** 0.2 if err > 0 else 5.0
        h = h * min(5.0, max(0.2, fac))
        if h < h_floor:
            raise StepSizeUnderflow(f"step size underflow at t = {t:.6g}", location=t)
    return y, steps, err_total
