"""The Hamiltonians H(a) = D(a) P D(a)^T, parameter classes and equivalences."""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import ClassViolation, PreconditionError
from .recurrence import ParamPair

J = np.array([[0.0, -1.0], [1.0, 0.0]])

PSD_THRESHOLD = 1e-12
EQUIV_RTOL = 1e-10


class ClassTag(enum.Enum):
    IN_PP = "InPP"
    NOT_PSD = "NotPSD"
    KERNEL_CONTAINS_E1 = "KernelContainsE1"
    KERNEL_CONTAINS_PSI_VEC = "KernelContainsPsiVec"
    ZERO_PSI_SINGULAR = "ZeroPsiSingular"


class Endpoint(enum.Enum):
    ZERO = "zero"
    INFINITY = "infinity"


def _lower_left(p, psi, a):
    # psi (a^p - a^{-p}) / (2p), continuous through p = 0 where it is psi log a
    la = math.log(a)
    if p == 0.0:
        return psi * la
    x = p * la
    if abs(x) < 1e-8:
        return psi * la * (1.0 + x * x / 6.0)
    return psi * math.sinh(x) / p


def d_psi(p: float, psi: float, a: float) -> np.ndarray:
    """The unimodular matrix D(a); lower triangular for p = 0."""
    if not a > 0:
        raise PreconditionError("d_psi needs a > 0")
    if p == 0.0:
        return np.array([[1.0, 0.0], [psi * math.log(a), 1.0]])
    ap = a**p
    return np.array([[ap, 0.0], [_lower_left(p, psi, a), 1.0 / ap]])


def d_psi_inv_t(p: float, psi: float, a: float) -> np.ndarray:
    """D(a)^{-T}."""
    d = d_psi(p, psi, a)
    return np.array([[d[1, 1], -d[1, 0]], [0.0, d[0, 0]]])


def h_of(params: ParamPair, a: float) -> np.ndarray:
    d = d_psi(params.p, params.psi, a)
    h = d @ params.P @ d.T
    return 0.5 * (h + h.T)


def h_entries(params: ParamPair, a: float):
    """(h11, h22, h12) of H(a) as floats; the fast path used by integrators."""
    p, psi = params.p, params.psi
    if p == 0.0:
        d11, d22 = 1.0, 1.0
        d21 = psi * math.log(a)
    else:
        d11 = a**p
        d22 = 1.0 / d11
        d21 = _lower_left(p, psi, a)
    k1, k2, k3 = params.kappa1, params.kappa2, params.kappa3
    h11 = d11 * d11 * k1
    h12 = d11 * (d21 * k1 + d22 * k3)
    h22 = d21 * d21 * k1 + 2.0 * d21 * d22 * k3 + d22 * d22 * k2
    return h11, h22, h12


def _eig_sym(P):
    return np.linalg.eigvalsh(0.5 * (P + P.T))


def is_psd(P: np.ndarray) -> bool:
    ev = _eig_sym(np.asarray(P, dtype=float))
    scale = max(abs(ev).sum(), 1e-300)
    return bool(ev[0] >= -PSD_THRESHOLD * scale)


def _rank_deficient(P) -> bool:
    # cancellation in det relative to its two products; invariant under diagonal scaling
    k1, k3, k2 = P[0, 0], 0.5 * (P[0, 1] + P[1, 0]), P[1, 1]
    return bool(abs(k1 * k2 - k3 * k3) <= PSD_THRESHOLD * (abs(k1 * k2) + k3 * k3))


def kernel_vector(P: np.ndarray):
    """A unit vector spanning ker P for rank-one P, else None."""
    P = np.asarray(P, dtype=float)
    if not np.any(P):
        raise PreconditionError("P = 0: every direction lies in the kernel")
    if not _rank_deficient(P):
        return None
    # the kernel is orthogonal to the larger row of P
    r = P[0] if abs(P[0, 0]) >= abs(P[1, 1]) else P[1]
    r = r / np.abs(r).max()
    xi = np.array([-r[1], r[0]])
    return xi / np.linalg.norm(xi)


def _annihilates(P, v):
    v = np.asarray(v, dtype=float)
    if not np.any(v) or not np.any(P):
        return True
    xi = kernel_vector(P)
    return xi is not None and _parallel(xi, v / np.abs(v).max())


def kernel_direction(params: ParamPair, a: float):
    """Unit vector spanning ker H(a), or None when H(a) is invertible."""
    xi = kernel_vector(params.P)
    if xi is None:
        return None
    v = d_psi_inv_t(params.p, params.psi, a) @ xi
    v = v / np.linalg.norm(v)
    # fix the sign so that the first nonzero entry is positive
    k = 0 if abs(v[0]) > 1e-14 else 1
    return v if v[k] > 0 else -v


def kernel_is_constant(params: ParamPair) -> bool:
    """True when the kernel direction of H(a) does not depend on a (rank-one P)."""
    xi = kernel_vector(params.P)
    if xi is None:
        raise PreconditionError("P has trivial kernel")
    p, psi = params.p, params.psi
    if p == 0.0 and psi == 0.0:
        return True
    if _parallel(xi, (1.0, 0.0)):
        return True
    if p != 0.0 and _parallel(xi, (-psi, 2.0 * p)):
        return True
    return False


def _parallel(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return abs(u[0] * v[1] - u[1] * v[0]) <= 1e-12 * np.linalg.norm(u) * np.linalg.norm(v)


def _q_matrix(params: ParamPair):
    c = params.psi / (2.0 * params.p)
    L = np.array([[1.0, 0.0], [-c, 1.0]])
    return L @ params.P @ L.T


def _zero(x, scale):
    return abs(x) <= PSD_THRESHOLD * scale


def integrable_at(params: ParamPair, endpoint: Endpoint) -> bool:
    """Whether ||H|| is integrable near 0 or near infinity."""
    endpoint = Endpoint(endpoint)
    p = params.p
    P = params.P
    scale = max(np.abs(P).max(), 1e-300)
    if p == 0.0:
        if endpoint is Endpoint.ZERO:
            return True
        return bool(np.abs(P).max() == 0.0)
    # H(a) = L diag(a^p, a^-p) Q diag(a^p, a^-p) L^T with constant unimodular L
    Q = _q_matrix(params)
    qs = max(np.abs(Q).max(), scale)
    q11_zero = _zero(Q[0, 0], qs)
    q22_zero = _zero(Q[1, 1], qs)
    q12_zero = _zero(Q[0, 1], qs)
    if endpoint is Endpoint.ZERO:
        return bool((p > -0.5 or q11_zero) and (p < 0.5 or q22_zero))
    return bool(q12_zero and (p < -0.5 or q11_zero) and (p > 0.5 or q22_zero))


def integrability_probe(params: ParamPair, endpoint: Endpoint, shells: int = 60) -> bool:
    """Numerical Cauchy test: ratio of trace integrals over dyadic shells.

    For trace(H) ~ a^s (times logs) the shell integrals form a sequence with
    ratio about 2^{-(s+1)} toward 0 and 2^{s+1} toward infinity; the integral
    converges iff the far ratio stays below one.
    """
    from numpy.polynomial.legendre import leggauss

    x, wts = leggauss(16)
    endpoint = Endpoint(endpoint)

    def shell(k):
        # integral of tr H over [2^k, 2^{k+1}] in the variable u = log a
        lo, hi = k * math.log(2.0), (k + 1) * math.log(2.0)
        u = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        tot = 0.0
        for ui, wi in zip(u, wts):
            a = math.exp(ui)
            h11, h22, _ = h_entries(params, a)
            tot += wi * (h11 + h22) * a
        return 0.5 * (hi - lo) * tot

    ks = range(-shells, -shells + 3) if endpoint is Endpoint.ZERO else range(shells, shells + 3)
    vals = [shell(k) for k in ks]
    if vals[0] == 0.0 and vals[1] == 0.0 and vals[2] == 0.0:
        return True
    if endpoint is Endpoint.ZERO:
        ratios = [vals[0] / vals[1], vals[1] / vals[2]] if vals[1] and vals[2] else [math.inf]
    else:
        ratios = [vals[1] / vals[0], vals[2] / vals[1]] if vals[0] and vals[1] else [math.inf]
    return bool(max(ratios) < 0.999)


def in_class_pp(params: ParamPair) -> ClassTag:
    """Membership tag for the class of parameters that generate homogeneous spaces."""
    p = params.p
    if not p > -0.5:
        raise PreconditionError("the parameter class is defined for p > -1/2 only")
    P = params.P
    if not is_psd(P):
        return ClassTag.NOT_PSD
    if _annihilates(P, (1.0, 0.0)):
        return ClassTag.KERNEL_CONTAINS_E1
    if p == 0.0:
        if params.psi == 0.0 and kernel_vector(P) is not None:
            return ClassTag.ZERO_PSI_SINGULAR
        return ClassTag.IN_PP
    if _annihilates(P, (-params.psi, 2.0 * p)):
        return ClassTag.KERNEL_CONTAINS_PSI_VEC
    return ClassTag.IN_PP


def require_class(params: ParamPair, what: str = "operation"):
    tag = in_class_pp(params)
    if tag is not ClassTag.IN_PP:
        raise ClassViolation(f"{what} needs parameters in the class, got {tag.value}")


def _scale(x: ParamPair, y: ParamPair):
    return max(x.norm + abs(x.psi) + 1.0, y.norm + abs(y.psi) + 1.0)


def _close(u, v, tol):
    return abs(u - v) <= tol


def approx_equiv(x: ParamPair, y: ParamPair, rtol: float = EQUIV_RTOL) -> bool:
    """Equality of the generated spaces: kappa1, det P and the psi-relation agree."""
    if x.p != y.p:
        raise PreconditionError("approx_equiv compares parameters of the same order")
    s = _scale(x, y)
    if not _close(x.kappa1, y.kappa1, rtol * s):
        return False
    if not _close(x.det, y.det, rtol * s * s):
        return False
    k1 = x.kappa1
    lhs = x.psi - y.psi
    rhs = (2.0 * x.p / k1) * (x.kappa3 - y.kappa3)
    return _close(lhs, rhs, rtol * s * (1.0 + abs(2.0 * x.p / k1)))


def canonicalize_approx(params: ParamPair, form: str = "diagonal") -> ParamPair:
    """Representative with kappa3 = 0 (``form='diagonal'``) or psi = 0 (``form='psi_zero'``, p != 0)."""
    require_class(params, "canonicalize_approx")
    p, k1, k3 = params.p, params.kappa1, params.kappa3
    if form == "diagonal":
        if k3 == 0.0:
            return params
        return ParamPair(p, k1, params.kappa2 - k3 * k3 / k1, 0.0, params.psi - (2.0 * p / k1) * k3)
    if form == "psi_zero":
        if p == 0.0:
            raise PreconditionError("the psi = 0 representative needs p != 0")
        if params.psi == 0.0:
            return params
        nk3 = k3 - k1 * params.psi / (2.0 * p)
        return ParamPair(p, k1, (params.det + nk3 * nk3) / k1, nk3, 0.0)
    raise PreconditionError(f"unknown form {form!r}")


def rescale_params(params: ParamPair, c: float) -> ParamPair:
    """Parameters of the pair z -> (A(cz), c^{2p} B(cz))."""
    if not c > 0:
        raise PreconditionError("rescale_params needs c > 0")
    p = params.p
    d = np.array([c ** (0.5 + p), c ** (0.5 - p)])
    Pn = params.P * np.outer(d, d)
    return ParamPair.from_matrix(p, Pn, c ** (-2.0 * p) * params.psi)


def _simeq_invariants(x: ParamPair):
    e = 1.0 / (1.0 + 2.0 * x.p)
    k1 = x.kappa1
    d = k1 ** (-2.0 * e) * x.det
    lhs = k1 ** (2.0 * x.p * e) * x.psi - 2.0 * x.p * k1 ** (-e) * x.kappa3
    return d, lhs


def simeq_equiv(x: ParamPair, y: ParamPair, rtol: float = EQUIV_RTOL) -> bool:
    """Equality of the spectral measures up to rescaling the independent variable."""
    if x.p != y.p:
        raise PreconditionError("simeq_equiv compares parameters of the same order")
    require_class(x, "simeq_equiv")
    require_class(y, "simeq_equiv")
    dx, lx = _simeq_invariants(x)
    dy, ly = _simeq_invariants(y)
    s = max(abs(dx), abs(dy), abs(lx), abs(ly), 1.0)
    return _close(dx, dy, rtol * s) and _close(lx, ly, rtol * s)


def canonicalize_simeq(params: ParamPair, form: str = "diagonal") -> ParamPair:
    """Representative with kappa1 = 1 and kappa3 = 0 (or psi = 0 for ``form='psi_zero'``)."""
    require_class(params, "canonicalize_simeq")
    c = params.kappa1 ** (-1.0 / (2.0 * params.p + 1.0))
    r = params if params.kappa1 == 1.0 else rescale_params(params, c)
    r = ParamPair(r.p, 1.0, r.kappa2, r.kappa3, r.psi)
    return canonicalize_approx(r, form)
