"""Complex special functions: log-gamma, Pochhammer, Kummer M, 0F1, Bessel J and I.

Taylor series are evaluated in double-double arithmetic, so the cancellation
of oscillatory sums (roughly ``exp(|z| - |Re z|)`` relative to the result)
stays far below double rounding for moderate ``|z|``.  Beyond a crossover
radius the Poincare expansion of ``M`` with optimal truncation takes over.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _dd
from .errors import ConvergenceError, PoleError, PreconditionError, SectorError

POLE_RADIUS = 1e-8
CROSSOVER = 30.0


@dataclass(frozen=True)
class Tolerance:
    rel_tol: float = 1e-16
    max_terms: int = 4000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise PreconditionError(f"rel_tol must be positive, got {self.rel_tol}")
        if int(self.max_terms) < 1:
            raise PreconditionError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_TOL = Tolerance()


def _near_nonpositive_integer(x, radius=POLE_RADIUS):
    x = complex(x)
    if x.real > 0.5:
        return False
    return abs(x - round(x.real)) < radius


def _check_b(b):
    b = np.asarray(b, dtype=float)
    bad = (b < 0.5) & (np.abs(b - np.round(b)) < POLE_RADIUS)
    if np.any(bad):
        raise PoleError(f"second parameter too close to a nonpositive integer: {b[bad].ravel()[0]}")


# ---------------------------------------------------------------------------
# gamma function

_LANCZOS_G = 7
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _log_sin_pi(z):
    """A logarithm of sin(pi z), stable for large |Im z| (branch not normalized)."""
    if abs(z.imag) < 20.0:
        return cmath.log(cmath.sin(math.pi * z))
    if z.imag > 0:
        # sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z})
        return cmath.log(0.5j) - 1j * math.pi * z + cmath.log(1.0 - cmath.exp(2j * math.pi * z))
    return cmath.log(-0.5j) + 1j * math.pi * z + cmath.log(1.0 - cmath.exp(-2j * math.pi * z))


def _log_gamma_raw(z):
    if z.real < 0.5:
        return math.log(math.pi) - _log_sin_pi(z) - _log_gamma_raw(1.0 - z)
    z = z - 1.0
    x = _LANCZOS_COEF[0]
    for k in range(1, _LANCZOS_G + 2):
        x += _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def log_gamma(z) -> complex:
    """Principal logarithm of Gamma(z): imaginary part in (-pi, pi]."""
    z = complex(z)
    if _near_nonpositive_integer(z):
        raise PoleError(f"log_gamma pole at z = {z}")
    if z.imag == 0.0:
        # real axis: the C library value, with the sign of Gamma in the imaginary part
        x = z.real
        neg = x < 0 and math.floor(x) % 2 == 1
        return complex(math.lgamma(x), math.pi if neg else 0.0)
    v = _log_gamma_raw(z)
    im = math.remainder(v.imag, 2.0 * math.pi)
    if im == -math.pi:
        im = math.pi
    return complex(v.real, im)


def gamma(z) -> complex:
    return cmath.exp(log_gamma(z))


def rgamma(z) -> complex:
    """1/Gamma(z), exactly zero at the poles."""
    z = complex(z)
    if z.real <= 0.5 and z.imag == 0.0 and z.real == round(z.real):
        return 0.0j
    if _near_nonpositive_integer(z):
        # 1/Gamma is entire: shift past the pole with 1/Gamma(z) = (z)_n / Gamma(z + n)
        n = int(math.floor(-z.real)) + 2
        return pochhammer(z, n) * cmath.exp(-log_gamma(z + n))
    return cmath.exp(-log_gamma(z))


def abs_gamma_sq_log(z) -> float:
    """log |Gamma(z)|^2, computed without forming Gamma."""
    return 2.0 * log_gamma(z).real


def pochhammer(a, n: int) -> complex:
    """Rising factorial (a)_n = a (a+1) ... (a+n-1)."""
    if n < 0:
        raise PreconditionError("pochhammer needs n >= 0")
    out = 1.0 + 0.0j if isinstance(a, complex) else 1.0
    for k in range(n):
        out *= a + k
    return out


# ---------------------------------------------------------------------------
# hypergeometric series in double-double


def _hyp_series(a, b, z, rel_tol, max_terms):
    """Sum 1F1(a; b; z) (or 0F1(; b; z) when ``a`` is None) elementwise.

    Returns (value, error_estimate).  Arrays must already be 1-d and broadcast.
    """
    size = z.shape[0]
    zr = z.real.copy()
    zi = z.imag.copy()
    az = np.abs(z)
    bb = b.astype(float)
    if a is not None:
        ar = a.real.astype(float)
        ai = a.imag.astype(float)
        amb = np.abs(a - b)
    zeros = np.zeros(size)
    term = (np.ones(size), zeros.copy(), zeros.copy(), zeros.copy())
    total = (np.ones(size), zeros.copy(), zeros.copy(), zeros.copy())
    abs_sum = np.ones(size)
    out = np.empty(size, dtype=complex)
    err = np.empty(size)
    idx = np.arange(size)
    n = 0
    while idx.size:
        if n >= max_terms:
            raise ConvergenceError(
                f"series did not converge in {max_terms} terms (|z| up to {az[idx].max():.3g})"
            )
        if a is not None:
            anh, anl = _dd.two_sum(ar, float(n))
            term = _dd.cmul(term, (anh, anl, ai, 0.0 * ai))
        term = _dd.cmul_c(term, zr, zi)
        bnh, bnl = _dd.two_sum(bb, float(n))
        dh, dl = _dd.mul_d(bnh, bnl, float(n + 1))
        term = _dd.cdiv_real(term, dh, dl)
        total = _dd.cadd(total, term)
        tmag = np.hypot(term[0], term[2])
        abs_sum = abs_sum + tmag
        k = n + 1
        bk = bb + k
        with np.errstate(divide="ignore", invalid="ignore"):
            if a is None:
                rho = np.where(bk > 0, az / (bk * (k + 1)), np.inf)
            else:
                rho = np.where(bk > 0, (1.0 + amb / bk) * az / (k + 1), np.inf)
            tail = np.where(rho < 1.0, tmag * rho / (1.0 - rho), np.inf)
        tail = np.where(tmag == 0.0, 0.0, tail)
        smag = np.hypot(total[0], total[2])
        done = (tmag == 0.0) | ((rho <= 0.5) & (tail <= np.maximum(rel_tol * smag, _dd.EPS * abs_sum)))
        n += 1
        if np.any(done):
            sel = idx[done]
            out[sel] = (total[0][done] + total[1][done]) + 1j * (total[2][done] + total[3][done])
            err[sel] = tail[done] + _dd.EPS * (n + 4) * abs_sum[done]
            keep = ~done
            idx = idx[keep]
            term = tuple(t[keep] for t in term)
            total = tuple(t[keep] for t in total)
            abs_sum = abs_sum[keep]
            zr, zi, az, bb = zr[keep], zi[keep], az[keep], bb[keep]
            if a is not None:
                ar, ai, amb = ar[keep], ai[keep], amb[keep]
    return out, err


def _asymptotic_branch_sum(c1, c2, w, limit):
    """Sum of (c1)_s (c2)_s / s! / w^s truncated near its smallest term.

    Returns (sum, error estimate).  At most ``limit`` terms are kept.
    """
    total = 1.0 + 0.0j
    term = 1.0 + 0.0j
    s = 0
    while s + 1 < limit:
        nxt = term * (c1 + s) * (c2 + s) / ((s + 1) * w)
        if nxt == 0:
            return total, 0.0
        if abs(nxt) > abs(term):
            return total, abs(term)
        total += nxt
        term = nxt
        s += 1
        if abs(term) <= 1e-17 * abs(total):
            return total, abs(term)
    return total, abs(term * (c1 + s) * (c2 + s) / ((s + 1) * w))


def _kummer_asym_scalar(a, b, z, terms=None):
    """Two-branch large-|z| expansion; returns (value, error estimate)."""
    a = complex(a)
    z = complex(z)
    limit = 10**6 if terms is None else int(terms)
    sign = 1.0 if z.imag >= 0.0 else -1.0
    logz = cmath.log(z)
    lg_b = log_gamma(b)
    value = 0.0j
    err = 0.0
    r_bma = rgamma(b - a)
    if r_bma != 0:
        # e^{+-i pi a} z^{-a} / Gamma(b-a) * sum (a)_s (a-b+1)_s / s! (-z)^{-s}
        logpref = lg_b + sign * 1j * math.pi * a - a * logz
        s1, e1 = _asymptotic_branch_sum(a, a - b + 1.0, -z, limit)
        pref = cmath.exp(logpref) * r_bma
        value += pref * s1
        err += abs(pref) * e1
    r_a = rgamma(a)
    if r_a != 0:
        logpref = lg_b + z + (a - b) * logz
        s2, e2 = _asymptotic_branch_sum(1.0 - a, b - a, z, limit)
        pref = cmath.exp(logpref) * r_a
        value += pref * s2
        err += abs(pref) * e2
    return value, err


def kummer_m_asymptotic(a, b, z, terms=1, *, crossover=CROSSOVER, sector=0.45 * math.pi):
    """Large-argument expansion of M(a, b, z).

    ``terms`` counts the terms kept in each of the two branches; the default 1
    is the leading-order value.  ``z`` must satisfy ``|z| >= crossover`` and lie
    within ``sector`` (angular distance) of the imaginary axis.
    """
    z = complex(z)
    _check_b(b)
    if abs(z) < crossover:
        raise SectorError(f"|z| = {abs(z):.3g} below crossover radius {crossover}")
    off_axis = abs(math.atan2(abs(z.real), abs(z.imag)))
    if off_axis > sector:
        raise SectorError(f"z = {z} lies {off_axis:.3f} rad from the imaginary axis (limit {sector:.3f})")
    return _kummer_asym_scalar(a, float(b), z, terms)[0]


def _scalar_out(arr, scalar):
    return complex(arr.reshape(-1)[0]) if scalar else arr


def kummer_m(a, b, z, tol: Tolerance = DEFAULT_TOL, *, crossover=CROSSOVER, return_error=False):
    """Kummer's function M(a, b, z) for complex a, z and real b.

    Arguments broadcast like numpy arrays.  For Re z < 0 the Kummer
    transformation M(a,b,z) = e^z M(b-a,b,-z) is applied first.  Arguments with
    |z| > crossover use the asymptotic expansion when its error estimate is
    small enough, otherwise the double-double series.
    """
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0 and np.ndim(z) == 0
    a_arr, b_arr, z_arr = np.broadcast_arrays(
        np.asarray(a, dtype=complex), np.asarray(b, dtype=float), np.asarray(z, dtype=complex)
    )
    shape = z_arr.shape
    a_arr = a_arr.reshape(-1)
    b_arr = b_arr.reshape(-1)
    z_arr = z_arr.reshape(-1)
    _check_b(b_arr)
    flip = z_arr.real < 0
    a_eff = np.where(flip, b_arr - a_arr, a_arr)
    z_eff = np.where(flip, -z_arr, z_arr)
    out = np.empty(z_arr.shape, dtype=complex)
    err = np.zeros(z_arr.shape)
    todo = np.ones(z_arr.shape, dtype=bool)
    big = np.abs(z_eff) > crossover
    accept = max(tol.rel_tol, 1e-13)
    for i in np.nonzero(big)[0]:
        v, e = _kummer_asym_scalar(a_eff[i], b_arr[i], z_eff[i])
        if np.isfinite(v) and e <= accept * abs(v):
            out[i], err[i] = v, e
            todo[i] = False
    if np.any(todo):
        sel = np.nonzero(todo)[0]
        v, e = _hyp_series(a_eff[sel], b_arr[sel], z_eff[sel], tol.rel_tol, tol.max_terms)
        out[sel] = v
        err[sel] = e
    with np.errstate(over="ignore"):
        pref = np.where(flip, np.exp(np.where(flip, z_arr, 0)), 1.0)
    out = out * pref
    err = err * np.abs(pref)
    out = out.reshape(shape)
    err = err.reshape(shape)
    if return_error:
        return _scalar_out(out, scalar), (float(err.reshape(-1)[0]) if scalar else err)
    return _scalar_out(out, scalar)


def hyp0f1(b, z, tol: Tolerance = DEFAULT_TOL, *, crossover=CROSSOVER, return_error=False):
    """Confluent limit function 0F1(; b; z) for real b and complex z.

    Large arguments use 0F1(b, z) = exp(-2 sqrt z) M(b - 1/2, 2b - 1, 4 sqrt z).
    """
    scalar = np.ndim(b) == 0 and np.ndim(z) == 0
    b_arr, z_arr = np.broadcast_arrays(np.asarray(b, dtype=float), np.asarray(z, dtype=complex))
    shape = z_arr.shape
    b_arr = b_arr.reshape(-1)
    z_arr = z_arr.reshape(-1)
    _check_b(b_arr)
    out = np.empty(z_arr.shape, dtype=complex)
    err = np.zeros(z_arr.shape)
    root = np.sqrt(z_arr)
    c = 2.0 * b_arr - 1.0
    via_m = (4.0 * np.abs(root) > crossover) & ~((c < 0.5) & (np.abs(c - np.round(c)) < 1e-6))
    if np.any(via_m):
        sel = np.nonzero(via_m)[0]
        v, e = kummer_m(b_arr[sel] - 0.5, c[sel], 4.0 * root[sel], tol, crossover=crossover, return_error=True)
        pref = np.exp(-2.0 * root[sel])
        out[sel] = pref * v
        err[sel] = np.abs(pref) * e
    rest = ~via_m
    if np.any(rest):
        sel = np.nonzero(rest)[0]
        v, e = _hyp_series(None, b_arr[sel], z_arr[sel], tol.rel_tol, tol.max_terms)
        out[sel] = v
        err[sel] = e
    out = out.reshape(shape)
    err = err.reshape(shape)
    if return_error:
        return _scalar_out(out, scalar), (float(err.reshape(-1)[0]) if scalar else err)
    return _scalar_out(out, scalar)


def _bessel_prefactor(nu, z):
    z = np.asarray(z, dtype=complex)
    lg = log_gamma(nu + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        pw = np.exp(nu * np.log(z / 2.0) - lg)
    if nu == 0:
        pw = np.where(z == 0, np.exp(-lg), pw)
    else:
        pw = np.where(z == 0, 0.0, pw)
    return pw


def bessel_j(nu: float, z, tol: Tolerance = DEFAULT_TOL):
    """J_nu(z) = (z/2)^nu / Gamma(nu+1) * 0F1(nu+1, -z^2/4), principal branch."""
    if not nu > -1:
        raise PreconditionError("bessel_j needs nu > -1")
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    out = _bessel_prefactor(nu, z) * hyp0f1(nu + 1.0, -(z * z) / 4.0, tol)
    return _scalar_out(np.asarray(out), scalar)


def bessel_i(nu: float, z, tol: Tolerance = DEFAULT_TOL):
    """I_nu(z) = (z/2)^nu / Gamma(nu+1) * e^{-z} M(nu+1/2, 2nu+1, 2z), principal branch."""
    if not nu > -1:
        raise PreconditionError("bessel_i needs nu > -1")
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    out = _bessel_prefactor(nu, z) * np.exp(-z) * kummer_m(nu + 0.5, 2.0 * nu + 1.0, 2.0 * z, tol)
    return _scalar_out(np.asarray(out), scalar)
