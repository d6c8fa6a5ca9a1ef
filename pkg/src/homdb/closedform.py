"""Closed forms of (A, B) through Kummer's M and 0F1.

With kappa^2 = det P, sigma = 2 p kappa3 - psi kappa1 and
alpha = sigma/(2 i kappa) + p:

    A = e^{i kappa z} [ M(alpha, 2p+1, w)/2 + M(alpha+1, 2p+1, w)/2
                        - kappa3/(2p+1) z M(alpha+1, 2p+2, w) ]
    B = e^{i kappa z} kappa1/(2p+1) z M(alpha+1, 2p+2, w),   w = -2 i kappa z

and for det P = 0

    A = 0F1(2p+1, -sigma z) - kappa3/(2p+1) z 0F1(2p+2, -sigma z)
    B = kappa1/(2p+1) z 0F1(2p+2, -sigma z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .recurrence import ParamPair, coefficients_for_radius, eval_series
from .specfun import DEFAULT_TOL, Tolerance, hyp0f1, kummer_m

DEGENERATE_DET = 1e-12


def det_is_degenerate(params: ParamPair) -> bool:
    """det P vanishes up to cancellation relative to its two products (scale-free)."""
    k1, k2, k3 = params.kappa1, params.kappa2, params.kappa3
    return abs(params.det) <= DEGENERATE_DET * (abs(k1 * k2) + k3 * k3)


@dataclass(frozen=True)
class ClosedFormParams:
    base: ParamPair
    sigma: float
    kappa: complex
    alpha: complex | None

    @property
    def degenerate(self) -> bool:
        return self.alpha is None


def closed_form_params(params: ParamPair, *, kappa_sign: int = 1, force_regular: bool = False) -> ClosedFormParams:
    """Derived constants; ``kappa_sign=-1`` selects the other square root."""
    det = params.det
    sigma = params.sigma
    if det_is_degenerate(params) and not force_regular:
        return ClosedFormParams(params, sigma, 0j, None)
    kappa = complex(math.sqrt(det)) if det >= 0 else 1j * math.sqrt(-det)
    if kappa == 0:
        raise PreconditionError("kappa = 0 has no regular closed form")
    kappa *= kappa_sign
    alpha = sigma / (2j * kappa) + params.p
    return ClosedFormParams(params, sigma, kappa, alpha)


def _as_array(z):
    scalar = np.ndim(z) == 0
    return scalar, np.atleast_1d(np.asarray(z, dtype=complex))


def _out(x, scalar):
    return complex(x.reshape(-1)[0]) if scalar else x


def eval_closed(cfp: ClosedFormParams, z, tol: Tolerance = DEFAULT_TOL):
    """(A(z), B(z)) from the closed form; arrays of z are evaluated in one pass."""
    scalar, z = _as_array(z)
    pp = cfp.base
    p, k1, k3 = pp.p, pp.kappa1, pp.kappa3
    b1 = 2.0 * p + 1.0
    if cfp.degenerate:
        x = -cfp.sigma * z
        f0 = hyp0f1(np.full(z.shape, b1), x, tol)
        f1 = hyp0f1(np.full(z.shape, b1 + 1.0), x, tol)
        A = f0 - (k3 / b1) * z * f1
        B = (k1 / b1) * z * f1
        return _out(A, scalar), _out(B, scalar)
    kappa, alpha = cfp.kappa, cfp.alpha
    w = -2j * kappa * z
    n = z.size
    aa = np.concatenate([np.full(n, alpha), np.full(n, alpha + 1.0), np.full(n, alpha + 1.0)])
    bb = np.concatenate([np.full(n, b1), np.full(n, b1), np.full(n, b1 + 1.0)])
    mm = kummer_m(aa, bb, np.concatenate([w, w, w]), tol)
    m0, m1, m2 = mm[:n], mm[n : 2 * n], mm[2 * n :]
    ph = np.exp(1j * kappa * z)
    A = ph * (0.5 * m0 + 0.5 * m1 - (k3 / b1) * z * m2)
    B = ph * (k1 / b1) * z * m2
    return _out(A, scalar), _out(B, scalar)


def branch_discrepancy(params: ParamPair, z, tol: Tolerance = DEFAULT_TOL) -> float:
    """Largest difference between the regular and degenerate formulas at z.

    Meaningful near det P = 0, where both branches are valid approximations.
    """
    _, z = _as_array(z)
    reg = closed_form_params(params, force_regular=True)
    deg = ClosedFormParams(params, params.sigma, 0j, None)
    a1, b1 = eval_closed(reg, z, tol)
    a0, b0 = eval_closed(deg, z, tol)
    return float(np.max(np.maximum(np.abs(a1 - a0), np.abs(b1 - b0))))


def eval_fg_form(cfp: ClosedFormParams, z, tol: Tolerance = DEFAULT_TOL):
    """(A, B) through F = e^{i k z} M(alpha+1, 2p+1, w) and G = e^{i k z} M(alpha, 2p+1, w).

    Valid for the kappa3 = 0 shape with kappa1 = 2p+1:
    A = (F + G)/2 and B = i(2p+1)/(2 kappa) (F - G).
    """
    if cfp.degenerate:
        raise PreconditionError("the F/G form needs det P != 0")
    pp = cfp.base
    b1 = 2.0 * pp.p + 1.0
    if abs(pp.kappa3) > 1e-12 * max(1.0, pp.norm) or abs(pp.kappa1 - b1) > 1e-12 * max(1.0, b1):
        raise PreconditionError("the F/G form needs kappa3 = 0 and kappa1 = 2p+1")
    F, G = fg_functions(cfp, z, tol)
    A = 0.5 * (F + G)
    B = (1j * b1 / (2.0 * cfp.kappa)) * (F - G)
    return A, B


def fg_functions(cfp: ClosedFormParams, z, tol: Tolerance = DEFAULT_TOL):
    scalar, z = _as_array(z)
    b1 = 2.0 * cfp.base.p + 1.0
    w = -2j * cfp.kappa * z
    n = z.size
    aa = np.concatenate([np.full(n, cfp.alpha + 1.0), np.full(n, cfp.alpha)])
    mm = kummer_m(aa, np.full(2 * n, b1), np.concatenate([w, w]), tol)
    ph = np.exp(1j * cfp.kappa * z)
    return _out(ph * mm[:n], scalar), _out(ph * mm[n:], scalar)


def fg_kernel(cfp: ClosedFormParams, z, w, tol: Tolerance = DEFAULT_TOL) -> complex:
    """Kernel i(2p+1)/(2 kappa) (F(z) G(w*) - G(z) F(w*)) / (z - w*)."""
    z = complex(z)
    ws = complex(w).conjugate()
    F, G = fg_functions(cfp, np.array([z, ws]), tol)
    b1 = 2.0 * cfp.base.p + 1.0
    return (1j * b1 / (2.0 * cfp.kappa)) * (F[0] * G[1] - G[0] * F[1]) / (z - ws)


def series_values(params: ParamPair, z, tol: float = 1e-15):
    """(A, B) from the coefficient recurrence with N chosen for max |z|."""
    scalar, z = _as_array(z)
    radius = float(np.max(np.abs(z))) if z.size else 0.0
    cs = coefficients_for_radius(params, max(radius, 1.0))
    sv = eval_series(cs, z, tol)
    return _out(sv.A, scalar), _out(sv.B, scalar)


def crosscheck(params: ParamPair, z, tol: Tolerance = DEFAULT_TOL) -> float:
    """max(|A_s - A_c|, |B_s - B_c|) / (1 + |A| + |B|) over the given points."""
    _, z = _as_array(z)
    As, Bs = series_values(params, z)
    Ac, Bc = eval_closed(closed_form_params(params), z, tol)
    scale = 1.0 + np.abs(Ac) + np.abs(Bc)
    r = np.maximum(np.abs(As - Ac), np.abs(Bs - Bc)) / scale
    return float(np.max(r))


__all__ = [
    "ClosedFormParams",
    "closed_form_params",
    "eval_closed",
    "eval_fg_form",
    "fg_functions",
    "fg_kernel",
    "branch_discrepancy",
    "series_values",
    "crosscheck",
]

