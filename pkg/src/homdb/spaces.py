"""Entire pairs (A, B), reproducing kernels and sampled positivity checks.

E = A - iB generates the space; its kernel is

    K(z, w) = (B(z) A(w*) - B(w*) A(z)) / (z - w*).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .closedform import closed_form_params, eval_closed, series_values
from .errors import ConvergenceError, PreconditionError
from .quadrature import fixed_panels
from .recurrence import ParamPair

CONFLUENT_RADIUS = 1e-6
_CAUCHY_RADIUS = 0.5
_CAUCHY_NODES = 32
_CAUCHY_HALVINGS = 10
_CAUCHY_AGREE = 1e-11


@dataclass(frozen=True)
class EntirePair:
    """An evaluable pair (A, B).

    ``backend`` is "closed", "series" or "function"; ``func`` maps an array of
    points to the arrays (A, B).
    """

    func: Callable
    order_p: float
    backend: str = "function"
    params: ParamPair | None = None

    def ab(self, z):
        scalar = np.ndim(z) == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        A, B = self.func(zz.reshape(-1))
        A = np.asarray(A, dtype=complex).reshape(zz.shape)
        B = np.asarray(B, dtype=complex).reshape(zz.shape)
        if scalar:
            return complex(A[0]), complex(B[0])
        return A, B

    def A(self, z):
        return self.ab(z)[0]

    def B(self, z):
        return self.ab(z)[1]

    def E(self, z):
        A, B = self.ab(z)
        return A - 1j * B

    def __call__(self, z):
        return self.E(z)


def xi_hat(params: ParamPair, backend: str = "closed") -> EntirePair:
    """The pair generated by (P, psi) at order p."""
    if backend == "closed":
        cfp = closed_form_params(params)
        return EntirePair(lambda z: eval_closed(cfp, z), params.p, "closed", params)
    if backend == "series":
        return EntirePair(lambda z: series_values(params, z), params.p, "series", params)
    raise PreconditionError(f"unknown backend {backend!r}")


def pair_from_e(E: Callable, order_p: float) -> EntirePair:
    """Pair from a function E via A = (E + E#)/2, B = i(E - E#)/2."""

    def func(z):
        e = np.asarray(E(z), dtype=complex)
        es = np.conj(np.asarray(E(np.conj(z)), dtype=complex))
        return 0.5 * (e + es), 0.5j * (e - es)

    return EntirePair(func, order_p, "function")


def rescale(pair, a: float, p: float):
    """Weighted rescaling [a (.)_p F](z) = a^p F(a z).

    Applied to a callable it returns a callable; applied to an EntirePair it
    rescales A and B together.
    """
    if not a > 0:
        raise PreconditionError("rescale needs a > 0")
    w = a**p
    if isinstance(pair, EntirePair):
        inner = pair.func

        def func(z):
            A, B = inner(a * np.asarray(z, dtype=complex))
            return w * np.asarray(A), w * np.asarray(B)

        return EntirePair(func, pair.order_p, "function")

    return lambda z: w * pair(a * z)


def conj_sharp(F: Callable) -> Callable:
    """F#(z) = conj(F(conj z))."""
    return lambda z: np.conj(F(np.conj(z)))


def _kernel_matrix_raw(pair: EntirePair, zs, ws):
    zs = np.asarray(zs, dtype=complex)
    ws = np.asarray(ws, dtype=complex)
    wb = np.conj(ws)
    Az, Bz = pair.ab(zs)
    Aw, Bw = pair.ab(wb)
    num = Bz[:, None] * Aw[None, :] - Bw[None, :] * Az[:, None]
    den = zs[:, None] - wb[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / den, den


def _ring_mean(pair: EntirePair, z, w, r):
    th = 2.0 * np.pi * np.arange(_CAUCHY_NODES) / _CAUCHY_NODES
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            vals, _ = _kernel_matrix_raw(pair, z + r * np.exp(1j * th), np.array([w]))
    except OverflowError:
        # the pair is too large on this ring; a smaller radius is tried
        return complex(math.nan, math.nan)
    return complex(vals[:, 0].mean())


def _confluent(pair: EntirePair, z, w):
    """Kernel value by averaging K(z + r e^{it}, w) over a circle (mean value property).

    The radius shrinks from 1/2 until two successive averages agree, which
    keeps the ring inside the region where the pair is of moderate size.
    """
    r = _CAUCHY_RADIUS
    prev = _ring_mean(pair, z, w, r)
    for _ in range(_CAUCHY_HALVINGS):
        r *= 0.25
        cur = _ring_mean(pair, z, w, r)
        if cmath.isfinite(prev) and abs(cur - prev) <= _CAUCHY_AGREE * abs(cur):
            return cur
        prev = cur
    if not cmath.isfinite(prev):
        raise ConvergenceError(f"confluent kernel at z = {z} is not finite")
    return prev


def kernel_matrix(pair: EntirePair, zs, ws) -> np.ndarray:
    """Matrix [K(z_i, w_j)]."""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    ws = np.atleast_1d(np.asarray(ws, dtype=complex))
    K, den = _kernel_matrix_raw(pair, zs, ws)
    for i, j in zip(*np.nonzero(np.abs(den) < CONFLUENT_RADIUS)):
        K[i, j] = _confluent(pair, zs[i], ws[j])
    return K


def kernel(pair: EntirePair, z, w) -> complex:
    return complex(kernel_matrix(pair, [z], [w])[0, 0])


def kernel_rescale_residual(pair: EntirePair, a: float, p: float, z, w) -> float:
    """|K_{a.E}(z, w) - a^{2p+1} K_E(az, aw)|."""
    lhs = kernel(rescale(pair, a, p), z, w)
    rhs = a ** (2.0 * p + 1.0) * kernel(pair, a * z, a * w)
    return abs(lhs - rhs)


def _check_points(points, limit=64):
    pts = np.atleast_1d(np.asarray(points, dtype=complex)).reshape(-1)
    if pts.size == 0:
        raise PreconditionError("point set is empty")
    if pts.size > limit:
        raise PreconditionError(f"at most {limit} points supported")
    d = np.abs(pts[:, None] - pts[None, :]) + np.eye(pts.size)
    if np.any(d < 1e-12):
        raise PreconditionError("points must be pairwise distinct")
    return pts


def gram_matrix(pair: EntirePair, points) -> np.ndarray:
    pts = _check_points(points)
    K = kernel_matrix(pair, pts, pts)
    return 0.5 * (K + K.conj().T)


def gram_min_eig(pair: EntirePair, points) -> float:
    return float(np.linalg.eigvalsh(gram_matrix(pair, points))[0])


def defect_matrix(pair: EntirePair, p: float, a: float, points) -> np.ndarray:
    """Gram matrix of K(z, w) - a^{2p+1} K(az, aw)."""
    if not 0 < a <= 1:
        raise PreconditionError("homogeneity defect needs a in (0, 1]")
    pts = _check_points(points)
    K = kernel_matrix(pair, pts, pts)
    Ka = kernel_matrix(pair, a * pts, a * pts)
    D = K - a ** (2.0 * p + 1.0) * Ka
    return 0.5 * (D + D.conj().T)


def homogeneity_defect(pair: EntirePair, p: float, a: float, points) -> float:
    if a == 1.0:
        _check_points(points)
        return 0.0
    return float(np.linalg.eigvalsh(defect_matrix(pair, p, a, points))[0])


def hb_check(pair: EntirePair, grid, real_grid) -> bool:
    """Sampling certificate for |E(z*)| < |E(z)| on the grid and E != 0 on real_grid."""
    grid = np.atleast_1d(np.asarray(grid, dtype=complex))
    real_grid = np.atleast_1d(np.asarray(real_grid, dtype=float))
    if grid.size == 0 or real_grid.size == 0:
        raise PreconditionError("grids must be nonempty")
    if np.any(grid.imag <= 0):
        raise PreconditionError("grid must lie in the upper half-plane")
    up = np.abs(pair.E(grid))
    down = np.abs(pair.E(np.conj(grid)))
    on_axis = np.abs(pair.E(real_grid.astype(complex)))
    return bool(np.all(down < up) and on_axis.min() > 0)


@dataclass(frozen=True)
class NormResult:
    value: float
    tail: float
    window: float


def norm_via_weight(F: Callable, pair: EntirePair, tol: float = 1e-6, *, t0: float = 16.0,
                    t_max: float = 4096.0, panel: float = 0.5) -> NormResult:
    """Estimate the integral of |F(t)/E(t)|^2 over the real line.

    The window [-T, T] doubles from t0; the remaining tail is extrapolated
    from the geometric decay of the last two shell contributions and added.
    """
    def g(t):
        t = np.asarray(t, dtype=complex)
        return np.abs(np.asarray(F(t)) / pair.E(t)) ** 2

    def shell(lo, hi):
        n = max(1, int(math.ceil((hi - lo) / panel)))
        edges = np.linspace(lo, hi, n + 1)
        return float(fixed_panels(g, edges)) + float(fixed_panels(g, -edges[::-1]))

    T = t0
    n0 = max(1, int(math.ceil(2 * T / panel)))
    total = float(fixed_panels(g, np.linspace(-T, T, n0 + 1)))
    deltas = []
    prev_tail = None
    while True:
        d = shell(T, 2 * T)
        total += d
        T *= 2
        deltas.append(d)
        if total == 0.0 and d == 0.0:
            return NormResult(0.0, 0.0, T)
        if len(deltas) >= 2 and deltas[-2] > 0:
            q = min(max(deltas[-1] / deltas[-2], 0.0), 0.9)
            tail = deltas[-1] * q / (1.0 - q)
            # how well the previous extrapolation predicted what followed
            unc = tail if prev_tail is None else abs(prev_tail - deltas[-1] - tail)
            prev_tail = tail
            if unc <= tol * abs(total + tail):
                return NormResult(total + tail, unc, T)
        if T >= t_max:
            raise ConvergenceError(f"norm quadrature window reached {T} without convergence")
