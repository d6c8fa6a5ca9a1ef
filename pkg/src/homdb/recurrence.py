"""Power-series coefficients of the structure pair (A, B).

The coefficients obey

    (a_{n+1}, b_{n+1}) = (a_n, b_n) * (-1/((n+1)(2p+n+1))) P J [[2p+n+1, 0], [psi, n+1]]

with (a_0, b_0) = (1, 0).  They are computed in double-double arithmetic so
that evaluating the series at |z| ~ 10 keeps full double accuracy despite
the cancellation between terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _dd
from .errors import PoleError, PreconditionError, TruncationError

POLE_RADIUS = 1e-8
MAX_TERMS = 4096


@dataclass(frozen=True)
class ParamPair:
    """Order p, symmetric P = [[kappa1, kappa3], [kappa3, kappa2]] and shift psi."""

    p: float
    kappa1: float
    kappa2: float
    kappa3: float
    psi: float

    def __post_init__(self):
        for name in ("p", "kappa1", "kappa2", "kappa3", "psi"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise PreconditionError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        q = 2.0 * self.p + 1.0
        if q < 0.5 and abs(q - round(q)) < POLE_RADIUS:
            raise PoleError(f"p = {self.p} is within {POLE_RADIUS} of an excluded value")

    @classmethod
    def from_matrix(cls, p, P, psi):
        P = np.asarray(P, dtype=float)
        return cls(p, P[0, 0], P[1, 1], 0.5 * (P[0, 1] + P[1, 0]), psi)

    @property
    def P(self) -> np.ndarray:
        return np.array([[self.kappa1, self.kappa3], [self.kappa3, self.kappa2]])

    @property
    def det(self) -> float:
        return self.kappa1 * self.kappa2 - self.kappa3 * self.kappa3

    @property
    def sigma(self) -> float:
        return 2.0 * self.p * self.kappa3 - self.psi * self.kappa1

    @property
    def nu(self) -> float:
        return self.p - 0.5

    @property
    def norm(self) -> float:
        """Spectral norm of P."""
        return float(np.linalg.norm(self.P, 2))

    def astuple(self):
        return (self.p, self.kappa1, self.kappa2, self.kappa3, self.psi)


@dataclass(frozen=True)
class CoeffSeq:
    """Coefficients (alpha_n, beta_n), n = 0..N, of A and B.

    ``pairs`` holds the double parts; ``pairs_lo`` the double-double tails used
    by :func:`eval_series`.  ``bound_constant`` is C*||P||.
    """

    params: ParamPair
    pairs: np.ndarray
    pairs_lo: np.ndarray = field(repr=False)
    bound_constant: float
    tail_constant: float = field(repr=False)

    @property
    def N(self) -> int:
        return self.pairs.shape[0] - 1


def bound_constant_c(p: float, psi: float, n_max: int = 10000) -> float:
    """Upper bound for sup_n ||[[1, 0], [psi/(2p+n+1), (n+1)/(2p+n+1)]]||_2."""
    return _sup_step_norm(p, psi, 0, n_max)


def _sup_step_norm(p, psi, n0, n_max=10000):
    n = np.arange(n0, n0 + n_max, dtype=float)
    d = 2.0 * p + n + 1.0
    c = psi / d
    e = (n + 1.0) / d
    # spectral norm of [[1, 0], [c, e]] in closed form
    s = 1.0 + c * c + e * e
    big = np.sqrt(0.5 * (s + np.sqrt(np.maximum(s * s - 4.0 * e * e, 0.0))))
    # beyond the sampled range ||M_n|| <= 1 + ||M_n - I||_F
    n_end = n0 + n_max
    tail = 1.0 + math.hypot(psi, 2.0 * p) / abs(2.0 * p + n_end + 1.0)
    return float(max(big.max(), tail))


def solve_recurrence(params: ParamPair, N: int) -> CoeffSeq:
    if N < 1:
        raise PreconditionError("N must be positive")
    return _solve_cached(params, int(N))


@lru_cache(maxsize=256)
def _solve_cached(params: ParamPair, N: int) -> CoeffSeq:
    p, k1, k2, k3, psi = params.p, params.kappa1, params.kappa2, params.kappa3, params.psi
    hi = np.zeros((N + 1, 2))
    lo = np.zeros((N + 1, 2))
    ah, al, bh, bl = 1.0, 0.0, 0.0, 0.0
    hi[0, 0] = 1.0
    two_p = 2.0 * p
    for n in range(N):
        # v = a*k1 + b*k3 ; u = a*k3 + b*k2
        vh, vl = _dd.add(*_dd.mul_d(ah, al, k1), *_dd.mul_d(bh, bl, k3))
        uh, ul = _dd.add(*_dd.mul_d(ah, al, k3), *_dd.mul_d(bh, bl, k2))
        dh, dl = _dd.two_sum(two_p, float(n + 1))
        if abs(dh) < POLE_RADIUS:
            raise PoleError(f"|2p + {n + 1}| below exclusion radius")
        nbh, nbl = _dd.div(vh, vl, dh, dl)
        th, tl = _dd.add(*_dd.mul_d(nbh, nbl, psi), -uh, -ul)
        nah, nal = _dd.div_d(th, tl, float(n + 1))
        ah, al, bh, bl = nah, nal, nbh, nbl
        hi[n + 1] = (ah, bh)
        lo[n + 1] = (al, bl)
    norm = params.norm
    c_all = bound_constant_c(p, psi)
    c_tail = _sup_step_norm(p, psi, N)
    return CoeffSeq(params, hi, lo, c_all * norm, c_tail * norm)


def tail_bound(coeffs: CoeffSeq, r: float) -> float:
    """Rigorous bound for sum_{n>N} ||(alpha_n, beta_n)|| r^n.

    Restarting the coefficient estimate at n = N gives
    ||v_{N+k}|| <= ||v_N|| c^k N!/(N+k)! with c = sup_{n>=N} ||M_n|| ||P||, which is
    never worse than the global bound (C||P|| r)^n / n! summed over n > N.
    """
    N = coeffs.N
    r = float(r)
    if r == 0.0:
        return 0.0
    c = coeffs.tail_constant * r
    vN = float(np.hypot(*(coeffs.pairs[N] + coeffs.pairs_lo[N])))
    if c == 0.0 or vN == 0.0:
        # all later coefficients vanish
        return 0.0
    if c >= N + 2:
        return math.inf
    log_first = math.log(vN) + N * math.log(r) + math.log(c / (N + 1))
    restart = math.exp(log_first) / (1.0 - c / (N + 2))
    return restart


def global_tail_bound(coeffs: CoeffSeq, r: float) -> float:
    """The bound sum_{n>N} (C||P|| r)^n / n! in its plain form."""
    x = coeffs.bound_constant * r
    N = coeffs.N
    if x == 0.0:
        return 0.0
    if x >= N + 2:
        return math.inf
    first = math.exp((N + 1) * math.log(x) - math.lgamma(N + 2))
    return first / (1.0 - x / (N + 2))


def coefficients_for_radius(params: ParamPair, radius: float, tol: float = 1e-17) -> CoeffSeq:
    """Smallest power-of-two-ish N whose tail bound at ``radius`` is below ``tol``."""
    N = 32
    while True:
        cs = solve_recurrence(params, N)
        if tail_bound(cs, radius) <= tol:
            return cs
        if N >= MAX_TERMS:
            raise TruncationError(
                f"tail bound at |z| = {radius:.3g} exceeds {tol:.1e} with N = {MAX_TERMS}"
            )
        N = min(2 * N, MAX_TERMS)


@dataclass(frozen=True)
class SeriesValue:
    A: complex | np.ndarray
    B: complex | np.ndarray
    tail: float | np.ndarray


def eval_series(coeffs: CoeffSeq, z, tol: float | None = None) -> SeriesValue:
    """Evaluate A(z), B(z) by Horner's rule in double-double.

    ``tail`` is the certified truncation bound at each point.  With ``tol``
    given, raise TruncationError where tail > tol * max(1, |A| + |B|).
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex)).reshape(-1)
    zr, zi = z.real, z.imag
    N = coeffs.N
    hi, lo = coeffs.pairs, coeffs.pairs_lo
    zeros = np.zeros_like(zr)
    acc_a = (zeros + hi[N, 0], zeros + lo[N, 0], zeros.copy(), zeros.copy())
    acc_b = (zeros + hi[N, 1], zeros + lo[N, 1], zeros.copy(), zeros.copy())
    for n in range(N - 1, -1, -1):
        acc_a = _dd.cmul_c(acc_a, zr, zi)
        rh, rl = _dd.add(acc_a[0], acc_a[1], hi[n, 0], lo[n, 0])
        acc_a = (rh, rl, acc_a[2], acc_a[3])
        acc_b = _dd.cmul_c(acc_b, zr, zi)
        rh, rl = _dd.add(acc_b[0], acc_b[1], hi[n, 1], lo[n, 1])
        acc_b = (rh, rl, acc_b[2], acc_b[3])
    A = (acc_a[0] + acc_a[1]) + 1j * (acc_a[2] + acc_a[3])
    B = (acc_b[0] + acc_b[1]) + 1j * (acc_b[2] + acc_b[3])
    r = np.abs(z)
    tails = np.array([tail_bound(coeffs, ri) for ri in r])
    # rounding of the double-double Horner scheme
    mags = np.abs(hi[:, 0])[None, :] + np.abs(hi[:, 1])[None, :]
    powers = np.exp(np.outer(np.log(np.maximum(r, 1e-300)), np.arange(N + 1)))
    powers[:, 0] = 1.0
    tails = tails + 4.0 * (N + 1) * _dd.EPS * (mags * powers).sum(axis=1)
    if tol is not None:
        bad = tails > tol * np.maximum(1.0, np.abs(A) + np.abs(B))
        if np.any(bad):
            raise TruncationError(
                f"tail bound {tails[bad].max():.3e} exceeds tolerance at |z| = {r[bad].max():.3g}; raise N"
            )
    if scalar:
        return SeriesValue(complex(A[0]), complex(B[0]), float(tails[0]))
    return SeriesValue(A, B, tails)


def recover_params(coeffs: CoeffSeq, p: float) -> ParamPair:
    """Recover (P, psi) from alpha_1, beta_1, alpha_2, beta_2 and the order p."""
    if coeffs.N < 2:
        raise PreconditionError("need at least two coefficients")
    a1, b1 = coeffs.pairs[1] + coeffs.pairs_lo[1]
    a2, b2 = coeffs.pairs[2] + coeffs.pairs_lo[2]
    if b1 == 0.0:
        raise PreconditionError("beta_1 = 0: B vanishes and the parameters are not recoverable")
    k1 = b1 * (1.0 + 2.0 * p)
    k3 = (b2 / b1) * (2.0 + 2.0 * p) - a1 * (1.0 + 2.0 * p)
    psi = (b2 / (b1 * b1)) * (2.0 + 2.0 * p) - (a1 / b1) * 2.0 * p
    k2 = (
        -(a1 * b2 / (b1 * b1)) * 2.0 * (1.0 + 2.0 * p)
        + (a1 * a1 / b1) * (1.0 + 2.0 * p)
        + (b2 * b2 / b1**3) * (2.0 + 2.0 * p)
        - 2.0 * a2 / b1
    )
    return ParamPair(p, k1, k2, k3, psi)


def gamma_shift(params: ParamPair, gamma: float) -> ParamPair:
    """Parameters (L P L^T, psi + 2 p gamma) with L = [[1, 0], [gamma, 1]].

    The pairs are related by Xi(P, psi) = Xi(shifted) * L, i.e.
    A = A' + gamma B' and B = B'.
    """
    L = np.array([[1.0, 0.0], [gamma, 1.0]])
    Pn = L @ params.P @ L.T
    return ParamPair.from_matrix(params.p, Pn, params.psi + 2.0 * params.p * gamma)


def symmetry_sigma(params: ParamPair) -> float:
    if params.kappa1 == 0.0:
        raise PreconditionError("symmetry_sigma needs kappa1 != 0")
    return params.sigma


def b_vanishes(params: ParamPair) -> bool:
    return params.kappa1 == 0.0
