"""Canonical system d/da W(a) J = z W(a) H(a) for H = H_{P,psi}.

Integration runs in u = log a, where the power growth of H becomes linear.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ._ode import integrate
from .errors import ConvergenceError, PreconditionError, StepSizeUnderflow
from .hamiltonian import J, _lower_left, h_entries, require_class
from .quadrature import adaptive_gl
from .recurrence import ParamPair
from .spaces import EntirePair, xi_hat


@dataclass(frozen=True)
class TransferResult:
    matrix: np.ndarray
    step_count: int
    est_error: float


@dataclass(frozen=True)
class GridSpec:
    points: tuple
    quad_tol: float = 1e-12

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size and (np.any(pts <= 0) or np.any(np.diff(pts) <= 0)):
            raise PreconditionError("grid points must be positive and strictly increasing")


def h_entries_array(params: ParamPair, a):
    """(h11, h22, h12) of H(a) for an array of a > 0."""
    a = np.asarray(a, dtype=float)
    p, psi = params.p, params.psi
    la = np.log(a)
    if p == 0.0:
        d11 = np.ones_like(a)
        d22 = d11
        d21 = psi * la
    else:
        d11 = a**p
        d22 = 1.0 / d11
        x = p * la
        with np.errstate(invalid="ignore", divide="ignore"):
            d21 = np.where(np.abs(x) < 1e-8, psi * la * (1.0 + x * x / 6.0), psi * np.sinh(x) / p)
    k1, k2, k3 = params.kappa1, params.kappa2, params.kappa3
    h11 = d11 * d11 * k1
    h12 = d11 * (d21 * k1 + d22 * k3)
    h22 = d21 * d21 * k1 + 2.0 * d21 * d22 * k3 + d22 * d22 * k2
    return h11, h22, h12


def _rhs(params: ParamPair, z: complex):
    p, psi = params.p, params.psi
    k1, k2, k3 = params.kappa1, params.kappa2, params.kappa3

    def f(u, y):
        a = math.exp(u)
        if p == 0.0:
            d11 = d22 = 1.0
            d21 = psi * u
        else:
            d11 = math.exp(p * u)
            d22 = 1.0 / d11
            d21 = _lower_left(p, psi, a)
        h11 = d11 * d11 * k1
        h12 = d11 * (d21 * k1 + d22 * k3)
        h22 = d21 * d21 * k1 + 2.0 * d21 * d22 * k3 + d22 * d22 * k2
        c = -z * a
        w11, w12, w21, w22 = y
        return np.array(
            [
                c * (w11 * h12 + w12 * h22),
                -c * (w11 * h11 + w12 * h12),
                c * (w21 * h12 + w22 * h22),
                -c * (w21 * h11 + w22 * h12),
            ]
        )

    return f


def transfer_matrix(params: ParamPair, t0: float, t1: float, z, tol: float = 1e-10) -> TransferResult:
    """W(t0, t1, z): solution of d/ds W J = z W H(s) with W(t0) = I, evaluated at s = t1."""
    if not (t0 > 0 and t1 > 0 and math.isfinite(t0) and math.isfinite(t1)):
        raise PreconditionError("transfer_matrix needs 0 < t0, t1 < inf")
    z = complex(z)
    if z == 0 or t0 == t1:
        return TransferResult(np.eye(2, dtype=complex), 0, 0.0)
    y0 = np.array([1, 0, 0, 1], dtype=complex)
    y, steps, err = integrate(_rhs(params, z), math.log(t0), math.log(t1), y0, tol / 10.0)
    W = y.reshape(2, 2)
    det_err = abs(np.linalg.det(W) - 1.0)
    return TransferResult(W, steps, max(err, det_err))


def solution_family(params: ParamPair, a, z, pair: EntirePair | None = None):
    """(A(a, z), B(a, z)) = (a^p A(az), a^p B(az)) D(a)^{-1}; broadcasts over a and z."""
    a = np.asarray(a, dtype=float)
    z = np.asarray(z, dtype=complex)
    if np.any(a <= 0):
        raise PreconditionError("solution_family needs a > 0")
    scalar = a.ndim == 0 and z.ndim == 0
    a, z = np.broadcast_arrays(a, z)
    if pair is None:
        pair = xi_hat(params)
    A, B = pair.ab((a * z).reshape(-1))
    A = A.reshape(a.shape)
    B = B.reshape(a.shape)
    p, psi = params.p, params.psi
    if p == 0.0:
        Aa = A - psi * np.log(a) * B
        Ba = B
    else:
        a2p = a ** (2.0 * p)
        # psi (1 - a^{2p}) / (2p) written to stay accurate for small p log a
        x = p * np.log(a)
        with np.errstate(invalid="ignore"):
            g = np.where(np.abs(x) < 1e-8, -psi * np.log(a) * (1.0 + x), -psi * np.expm1(2.0 * x) / (2.0 * p))
        Aa = A + g * B
        Ba = a2p * B
    if scalar:
        return complex(Aa), complex(Ba)
    return Aa, Ba


def integral_residual(params: ParamPair, a: float, b: float, z, quad: GridSpec | float = 1e-12,
                      pair: EntirePair | None = None) -> float:
    """Normalized residual of (A(b),B(b))J - (A(a),B(a))J = z int_a^b (A(c),B(c)) H(c) dc.

    ``quad`` is a quadrature tolerance or a GridSpec whose interior points
    become fixed panel breaks.  The residual is divided by
    1 + |(A(a),B(a))| + |(A(b),B(b))|.
    """
    if not 0 < a < b:
        raise PreconditionError("integral_residual needs 0 < a < b")
    if isinstance(quad, GridSpec):
        quad_tol = quad.quad_tol
        breaks = [float(t) for t in quad.points if a < t < b]
    else:
        quad_tol = float(quad)
        breaks = []
    z = complex(z)
    if pair is None:
        pair = xi_hat(params)
    Aa, Ba = solution_family(params, a, z, pair)
    Ab, Bb = solution_family(params, b, z, pair)
    lhs = np.array([Ab, Bb]) @ J - np.array([Aa, Ba]) @ J

    def integrand(u):
        c = np.exp(u)
        A, B = solution_family(params, c, z, pair)
        h11, h22, h12 = h_entries_array(params, c)
        return np.stack([(A * h11 + B * h12) * c, (A * h12 + B * h22) * c], axis=-1)

    floor = 1e-15 * (1 + abs(Aa) + abs(Ba) + abs(Ab) + abs(Bb))
    edges = [a, *breaks, b]
    val = sum(
        adaptive_gl(integrand, math.log(lo), math.log(hi), quad_tol, initial=4, abs_floor=floor)[0]
        for lo, hi in zip(edges[:-1], edges[1:])
    )
    rhs = z * val
    scale = 1.0 + math.hypot(abs(Aa), abs(Ba)) + math.hypot(abs(Ab), abs(Bb))
    return float(np.linalg.norm(lhs - rhs) / scale)


_S3 = math.sqrt(3.0)


def _generator(params: ParamPair, z: complex, a: float) -> np.ndarray:
    """-z H(a) J, so that W' = W (-z H J)."""
    h11, h22, h12 = h_entries(params, a)
    return -z * np.array([[h12, -h11], [h22, -h12]])


def _magnus_step(params: ParamPair, z: complex, a: float, h: float):
    """Fourth-order Magnus propagator over [a, a + h] and the exponent's |Re s|."""
    A1 = _generator(params, z, a + h * (0.5 - _S3 / 6.0))
    A2 = _generator(params, z, a + h * (0.5 + _S3 / 6.0))
    om = 0.5 * h * (A1 + A2) + (_S3 / 12.0) * h * h * (A1 @ A2 - A2 @ A1)
    # om is traceless, so om^2 = s^2 I
    s = cmath.sqrt(-(om[0, 0] * om[1, 1] - om[0, 1] * om[1, 0]))
    shc = cmath.sinh(s) / s if abs(s) > 1e-6 else 1.0 + s * s / 6.0
    return cmath.cosh(s) * np.eye(2) + shc * om, abs(s.real)


def propagate_magnus(params: ParamPair, z: complex, a0: float, a1: float, W: np.ndarray,
                     tol: float = 1e-10, h0: float | None = None):
    """Right-multiply W by the transfer matrix over [a0, a1] (a1 > a0), up to scale.

    The matrix is rescaled to unit max-entry after every step, so only its
    projective class (and hence any Moebius image) is meaningful.  Step size
    is controlled by step doubling.  Returns (W, steps, h_last).
    """
    a = a0
    h = h0 if h0 is not None else 0.05 * a0
    steps = 0
    while a < a1:
        h = min(h, a1 - a)
        big, growth = _magnus_step(params, z, a, h)
        if growth > 40.0:
            h *= 0.5
            continue
        m1, _ = _magnus_step(params, z, a, 0.5 * h)
        m2, _ = _magnus_step(params, z, a + 0.5 * h, 0.5 * h)
        fine = W @ m1 @ m2
        coarse = W @ big
        nrm = np.abs(fine).max()
        err = np.abs(fine - coarse).max() / nrm
        if err <= tol:
            W = fine / nrm
            a = a + h if a1 - (a + h) > 1e-15 * a1 else a1
            steps += 1
        fac = 0.9 * (tol / err) ** 0.2 if err > 0 else 4.0
        h *= min(4.0, max(0.2, fac))
        if h < 1e-14 * a:
            raise StepSizeUnderflow(f"step size underflow at a = {a:.6g}", location=a)
    return W, steps, h


def mobius(M, tau):
    return (M[0, 0] * tau + M[0, 1]) / (M[1, 0] * tau + M[1, 1])


@dataclass(frozen=True)
class WeylResult:
    value: complex
    cauchy: float
    t_end: float
    steps: int


def weyl_run(params: ParamPair, t_max: float | None, z, tol: float = 1e-8,
             *, t_cap: float = 2.0**16, ode_tol: float = 1e-10) -> WeylResult:
    """Limit of W(1, t, z) * i as t grows (Moebius action on i), via Magnus steps.

    With ``t_max`` given the integration stops there and ``cauchy`` is the
    change since t_max/2.  Without it t doubles until a change falls below
    ``tol`` (relative to max(1, |q|)) having shrunk at least 100-fold from the
    previous one, or t reaches ``t_cap``.
    """
    z = complex(z)
    if z.imag == 0:
        raise PreconditionError("weyl_coefficient needs Im z != 0")
    require_class(params, "weyl_coefficient")
    if t_max is not None and t_max < 1:
        raise PreconditionError("t_max must be >= 1")
    W = np.eye(2, dtype=complex)
    h = None
    t = 1.0
    q_prev = 1j
    steps_total = 0
    target = t_max if t_max is not None else t_cap
    nxt = min(2.0, target)
    prev_change = math.inf
    while True:
        W, steps, h = propagate_magnus(params, z, t, nxt, W, ode_tol, h)
        steps_total += steps
        t = nxt
        q = mobius(W, 1j)
        change = abs(q - q_prev)
        q_prev = q
        if t_max is not None:
            if t >= t_max:
                return WeylResult(q, change, t, steps_total)
            nxt = min(2.0 * t, t_max)
            continue
        if change <= tol * max(1.0, abs(q)) and change <= 0.01 * prev_change:
            return WeylResult(q, change, t, steps_total)
        prev_change = change
        if t >= t_cap:
            raise ConvergenceError(f"Weyl limit not reached by t = {t_cap} (last change {change:.3e})")
        nxt = min(2.0 * t, t_cap)


def weyl_coefficient(params: ParamPair, t_max: float | None, z, tol: float = 1e-8, **kw) -> complex:
    """q_H(z); see weyl_run for the stopping rule and diagnostics."""
    return weyl_run(params, t_max, z, tol, **kw).value


def q_ec(params: ParamPair, z, t_max: float | None = None, tol: float = 1e-8,
         pair: EntirePair | None = None, **kw) -> complex:
    """(A B; -B A) * (-1/q_H(z)) for the chain that starts at E = A - iB."""
    z = complex(z)
    if pair is None:
        pair = xi_hat(params)
    qh = weyl_coefficient(params, t_max, z, tol, **kw)
    A, B = pair.ab(z)
    tau = -1.0 / qh
    return (A * tau + B) / (-B * tau + A)
