"""Spectral measures mu_+ |x|^{2p} dx (x > 0) and mu_- |x|^{2p} dx (x < 0) of homogeneous chains."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .canonical import q_ec
from .closedform import det_is_degenerate
from .errors import PreconditionError
from .hamiltonian import require_class, simeq_equiv
from .quadrature import adaptive_gl
from .recurrence import ParamPair
from .spaces import EntirePair, xi_hat
from .specfun import DEFAULT_TOL, Tolerance, kummer_m, log_gamma

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class PowerMeasure:
    mu_plus: float
    mu_minus: float
    exponent: float

    def __post_init__(self):
        for name in ("mu_plus", "mu_minus", "exponent"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise PreconditionError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.mu_plus < 0 or self.mu_minus < 0:
            raise PreconditionError("measure constants must be nonnegative")
        if self.mu_plus == 0 and self.mu_minus == 0:
            raise PreconditionError("measure constants must not both vanish")
        if not self.exponent > -1:
            raise PreconditionError("exponent must exceed -1")

    @property
    def p(self) -> float:
        return 0.5 * self.exponent

    def density(self, x):
        """d mu / dx at real x (the value at 0 is 0 for exponent > 0 and inf below)."""
        x = np.asarray(x, dtype=float)
        c = np.where(x > 0, self.mu_plus, self.mu_minus)
        with np.errstate(divide="ignore"):
            return c * np.abs(x) ** self.exponent

    def mass(self, lo: float, hi: float) -> float:
        """mu((lo, hi))."""
        if hi < lo:
            raise PreconditionError("mass needs lo <= hi")
        e = self.exponent + 1.0

        def prim(x):
            return math.copysign(abs(x) ** e / e, x) * (self.mu_plus if x > 0 else self.mu_minus)

        return prim(hi) - prim(lo)


def _log_abs_gamma(z) -> float:
    return log_gamma(z).real


def measure_of(params: ParamPair) -> PowerMeasure:
    """The constants mu_+ and mu_- of the chain generated by (P, psi)."""
    require_class(params, "measure_of")
    p, k1 = params.p, params.kappa1
    sigma = params.sigma
    det = params.det
    lg = 2.0 * _log_abs_gamma(2.0 * p + 1.0)
    if det_is_degenerate(params):
        if sigma == 0:
            raise PreconditionError("det P = 0 with sigma = 0 lies outside the parameter class")
        mu = math.exp(math.log(math.pi) + (2.0 * p + 1.0) * math.log(abs(sigma)) - math.log(k1) - lg)
        return PowerMeasure(mu, 0.0, 2.0 * p) if sigma > 0 else PowerMeasure(0.0, mu, 2.0 * p)
    kappa = math.sqrt(det)
    t = sigma / (2.0 * kappa)
    base = (2.0 * p * _LOG2 + (2.0 * p + 1.0) * math.log(kappa)
            + 2.0 * _log_abs_gamma(complex(p + 1.0, t)) - math.log(k1) - lg)
    return PowerMeasure(math.exp(base + math.pi * t), math.exp(base - math.pi * t), 2.0 * p)


def _two_sided_log_x(target: PowerMeasure):
    """log of Gamma(2p+1)^2 sqrt(mu+ mu-) / (2^{2p} |Gamma(iL/2pi + p + 1)|^2) and L = log(mu-/mu+)."""
    p = target.p
    lp, lm = math.log(target.mu_plus), math.log(target.mu_minus)
    L = lm - lp
    log_x = (2.0 * _log_abs_gamma(2.0 * p + 1.0) + 0.5 * (lp + lm) - 2.0 * p * _LOG2
             - 2.0 * _log_abs_gamma(complex(p + 1.0, L / (2.0 * math.pi))))
    return log_x, L


def _one_sided_psi(target: PowerMeasure) -> float:
    p = target.p
    mu = target.mu_plus if target.mu_plus > 0 else target.mu_minus
    mag = math.exp((math.log(mu / math.pi) + 2.0 * _log_abs_gamma(2.0 * p + 1.0)) / (2.0 * p + 1.0))
    return -mag if target.mu_plus > 0 else mag


def params_of_measure(target: PowerMeasure) -> ParamPair:
    """A pair (P, psi) in the class whose measure is ``target`` (kappa1 = 1, kappa3 = 0)."""
    p = target.p
    if target.mu_plus == 0 or target.mu_minus == 0:
        return ParamPair(p, 1.0, 0.0, 0.0, _one_sided_psi(target))
    log_x, L = _two_sided_log_x(target)
    k2 = math.exp(log_x / (p + 0.5))
    return ParamPair(p, 1.0, k2, 0.0, math.sqrt(k2) * L / math.pi)


def generator_params(target: PowerMeasure) -> ParamPair:
    """The representative with kappa1 = 2p + 1, kappa3 = 0, so that E(0) = 1 and K(0, 0) = 1."""
    p = target.p
    b = 2.0 * p + 1.0
    if target.mu_plus == 0 or target.mu_minus == 0:
        psi = b ** (-1.0 + 1.0 / b) * _one_sided_psi(target)
        return ParamPair(p, b, 0.0, 0.0, psi)
    log_x, L = _two_sided_log_x(target)
    k2 = math.exp((-1.0 + 1.0 / (p + 0.5)) * math.log(b) + log_x / (p + 0.5))
    return ParamPair(p, b, k2, 0.0, math.sqrt(k2 / b) * L / math.pi)


def build_generator(target: PowerMeasure) -> EntirePair:
    """E = A - iB with E(0) = 1 and K_E(0, 0) = 1 whose chain has measure ``target``."""
    return xi_hat(generator_params(target))


def measure_equiv(x: ParamPair, y: ParamPair) -> bool:
    """Whether (P, psi) and (P~, psi~) generate the same measure."""
    if x.p != y.p:
        raise PreconditionError("measure_equiv needs equal p")
    require_class(x, "measure_equiv")
    require_class(y, "measure_equiv")
    return simeq_equiv(x, y)


def _combination(delta: float, p: float, y, tol: Tolerance):
    y = np.atleast_1d(np.asarray(y, dtype=float))
    w = -1j * y
    b = 2.0 * p + 1.0
    n = y.size
    a = np.concatenate([np.full(n, complex(p, delta)), np.full(n, complex(p + 1, delta)),
                        np.full(n, complex(p + 1, delta))])
    bb = np.concatenate([np.full(n, b), np.full(n, b), np.full(n, b + 1.0)])
    m = kummer_m(a, bb, np.concatenate([w, w, w]), tol)
    m0, m1, m2 = m[:n], m[n:2 * n], m[2 * n:]
    return 0.5 * m0 + 0.5 * m1 - 0.5j / b * y * m2


def asymptotic_leading(delta: float, p: float, y) -> np.ndarray:
    """Gamma(2p+1) / |Gamma(i delta + p + 1)| e^{+-pi delta / 2} |y|^{-p}, sign from y."""
    y = np.asarray(y, dtype=float)
    lg = _log_abs_gamma(2.0 * p + 1.0) - _log_abs_gamma(complex(p + 1.0, delta))
    return np.exp(lg + np.sign(y) * 0.5 * math.pi * delta - p * np.log(np.abs(y)))


def asymptotic_ratio(delta: float, p: float, y, tol: Tolerance = DEFAULT_TOL):
    """|M-combination(y)| divided by its leading-order modulus; tends to 1 like O(1/|y|)."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(np.abs(y_arr) < 1):
        raise PreconditionError("asymptotic_ratio needs |y| >= 1")
    if 2.0 * p + 1.0 <= 0 and abs(2.0 * p + 1.0 - round(2.0 * p + 1.0)) < 1e-8:
        raise PreconditionError("2p + 1 must not be a nonpositive integer")
    r = np.abs(_combination(delta, p, y_arr.reshape(-1), tol)) / asymptotic_leading(delta, p, y_arr.reshape(-1))
    return float(r[0]) if y_arr.ndim == 0 else r.reshape(y_arr.shape)


def poisson_density(params: ParamPair, x: float, y: float, tol: float = 1e-8,
                    measure: PowerMeasure | None = None, pair: EntirePair | None = None,
                    t_far: float | None = None) -> float:
    """(1/pi) int y / ((t-x)^2 + y^2) |E(t)|^2 dmu(t) by quadrature.

    The Poisson peak is resolved with t = x + y tan(theta); the rest of the
    line is integrated in t up to +-t_far with a break at t = 0, and the
    remainder is bounded by the largest sampled integrand times the kernel mass.
    """
    if measure is None:
        measure = measure_of(params)
    if pair is None:
        pair = xi_hat(params)

    def g(t):
        t = np.asarray(t, dtype=float)
        return np.abs(pair.E(t.astype(complex))) ** 2 * measure.density(t)

    core = 50.0 * y
    lo, hi = x - core, x + core
    if lo < 0 < hi:
        core = 0.5 * abs(x)
        lo, hi = x - core, x + core
    th = math.atan(core / y)
    inner, _ = adaptive_gl(lambda s: g(x + y * np.tan(s)), -th, th, tol, initial=8)
    inner /= math.pi
    if t_far is None:
        t_far = max(200.0, 20.0 * abs(x))

    def outer(t):
        return g(t) * y / ((t - x) ** 2 + y * y) / math.pi

    floor = tol * abs(inner)
    pieces = []
    for a, b in ((-t_far, min(0.0, lo)), (min(0.0, lo), lo), (hi, max(0.0, hi)), (max(0.0, hi), t_far)):
        if b > a:
            n = max(1, int(math.ceil((b - a) / 2.0)))
            pieces.append(adaptive_gl(outer, a, b, tol, initial=n, abs_floor=floor)[0])
    g_far = float(np.max(g(np.linspace(0.5 * t_far, t_far, 257)) + g(-np.linspace(0.5 * t_far, t_far, 257))))
    tail = g_far * (y / (t_far - abs(x))) / math.pi
    return float(inner + sum(pieces)) + tail


def density_check(params: ParamPair, x: float, y: float, t_max: float | None = None,
                  tol: float = 1e-6):
    """(observed, predicted) = (Im q_EC(x + iy), Poisson smoothing of |E|^2 dmu at x + iy)."""
    require_class(params, "density_check")
    if x == 0:
        raise PreconditionError("density_check needs x != 0")
    if not 0 < y <= abs(x) / 10.0:
        raise PreconditionError("density_check needs 0 < y <= |x|/10")
    pair = xi_hat(params)
    observed = q_ec(params, complex(x, y), t_max, tol, pair=pair, ode_tol=max(1e-12, min(1e-8, tol / 100))).imag
    predicted = poisson_density(params, x, y, tol, pair=pair)
    return observed, predicted
