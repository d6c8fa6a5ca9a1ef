import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from homdb.errors import PreconditionError
from homdb.hamiltonian import (
    ClassTag,
    Endpoint,
    approx_equiv,
    canonicalize_approx,
    canonicalize_simeq,
    d_psi,
    h_of,
    in_class_pp,
    integrability_probe,
    integrable_at,
    kernel_direction,
    rescale_params,
    simeq_equiv,
)
from homdb.recurrence import ParamPair
from homdb.spaces import kernel_matrix, xi_hat
from sampling import class_params

PW = ParamPair(0.0, 1.0, 1.0, 0.0, 0.0)


def approx_partner(x: ParamPair, k3: float) -> ParamPair:
    """A parameter pair with the same kappa1 and det P and the matching psi shift."""
    k1 = x.kappa1
    return ParamPair(x.p, k1, (x.det + k3 * k3) / k1, k3, x.psi - (2 * x.p / k1) * (x.kappa3 - k3))


def test_d_psi_examples():
    assert np.array_equal(d_psi(0.7, 1.3, 1.0), np.eye(2))
    assert np.allclose(d_psi(0.0, 2.0, math.e), [[1, 0], [2, 1]], rtol=0, atol=1e-15)
    assert np.allclose(d_psi(1.0, 0.0, 4.0), np.diag([4.0, 0.25]), rtol=0, atol=0)
    with pytest.raises(PreconditionError):
        d_psi(1.0, 0.0, 0.0)


@given(st.floats(-0.45, 3), st.floats(-3, 3), st.floats(0.01, 100), st.floats(0.01, 100))
def test_d_psi_group_action(p, psi, a, b):
    da, db = d_psi(p, psi, a), d_psi(p, psi, b)
    rhs = d_psi(p, psi, a * b)
    # the product cancels, so the error is relative to the factor norms
    scale = np.linalg.norm(da, 2) * np.linalg.norm(db, 2)
    assert np.abs(da @ db - rhs).max() <= 1e-12 * scale
    assert np.linalg.det(d_psi(p, psi, a)) == pytest.approx(1.0, rel=1e-12)


def test_h_of_examples():
    for a in (0.1, 1.0, 7.0):
        assert np.allclose(h_of(PW, a), np.eye(2), rtol=0, atol=0)
    x = ParamPair(0.0, 1.5, 2.0, 0.4, 0.8)
    a = 3.0
    H = h_of(x, a)
    assert H[0, 0] == pytest.approx(1.5)
    assert H[0, 1] == pytest.approx(1.5 * 0.8 * math.log(a) + 0.4, rel=1e-14)
    y = ParamPair(1.2, 1.0, 0.7, -0.2, 2.0)
    assert np.allclose(h_of(y, 1.0), y.P, rtol=0, atol=1e-16)


@given(class_params(), st.floats(-1.5, 1.5))
def test_congruence_invariance(x, log_a):
    H = h_of(x, math.exp(log_a))
    assert np.linalg.det(H) == pytest.approx(x.det, abs=1e-12 * np.abs(H).max() ** 2)
    assert np.array_equal(H, H.T)
    ev = np.linalg.eigvalsh(H)
    assert ev[0] >= -1e-10 * ev[1]
    rank_p = np.linalg.matrix_rank(x.P, tol=1e-9 * x.norm)
    rank_h = np.linalg.matrix_rank(H, tol=1e-9 * np.abs(H).max())
    assert rank_p == rank_h


def test_kernel_direction_examples():
    assert kernel_direction(ParamPair(1.0, 1.0, 1.0, 0.0, 0.5), 2.0) is None
    # ker P spanned by (1, 0) stays put
    x = ParamPair(1.0, 0.0, 1.0, 0.0, 0.5)
    for a in (0.5, 2.0, 9.0):
        assert np.allclose(kernel_direction(x, a), [1.0, 0.0])
    # ker P spanned by (1, 1) moves with a
    y = ParamPair(1.0, 1.0, 1.0, -1.0, 0.0)
    u, v = kernel_direction(y, 0.5), kernel_direction(y, 2.0)
    assert np.allclose(u, np.array([2.0, 0.5]) / math.hypot(2.0, 0.5))
    assert not np.allclose(u, v)
    with pytest.raises(PreconditionError):
        kernel_direction(ParamPair(1.0, 0.0, 0.0, 0.0, 0.0), 1.0)


@given(st.floats(-0.45, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(0.05, 20))
def test_kernel_direction_annihilates_h(p, psi, angle, a):
    v = np.array([math.cos(angle), math.sin(angle)])
    w = np.array([-v[1], v[0]])
    x = ParamPair.from_matrix(p, np.outer(w, w), psi)
    k = kernel_direction(x, a)
    H = h_of(x, a)
    assert np.linalg.norm(H @ k) <= 1e-10 * max(1.0, np.abs(H).max())


def test_integrable_at_examples():
    x = ParamPair(0.3, 1.0, 2.0, 0.5, 1.0)
    assert integrable_at(x, Endpoint.ZERO)
    assert not integrable_at(ParamPair(0.0, 1.0, 1.0, 0.0, 0.0), Endpoint.INFINITY)
    assert integrable_at(ParamPair(0.0, 0.0, 0.0, 0.0, 0.0), Endpoint.INFINITY)
    assert integrable_at(ParamPair(1.0, 1.0, 0.0, 0.0, 0.0), Endpoint.ZERO)
    assert not integrable_at(ParamPair(1.0, 0.0, 1.0, 0.0, 0.0), Endpoint.ZERO)


CASES = [
    ParamPair(0.3, 1.0, 2.0, 0.5, 1.0),
    ParamPair(1.0, 1.0, 0.0, 0.0, 0.0),
    ParamPair(1.0, 0.0, 1.0, 0.0, 0.0),
    ParamPair(0.8, 1.0, 1.0, 0.0, 0.0),
    ParamPair(-0.8, 1.0, 1.0, 0.0, 0.0),
    ParamPair(-0.8, 0.0, 1.0, 0.0, 0.0),
    ParamPair(-0.8, 1.0, 0.0, 0.0, 0.0),
    ParamPair(0.0, 1.0, 1.0, 0.0, 0.0),
    ParamPair(0.0, 0.0, 0.0, 0.0, 0.0),
    ParamPair(0.7, 1.0, 0.49, -0.7, 1.4),
]


@pytest.mark.parametrize("x", CASES)
@pytest.mark.parametrize("endpoint", [Endpoint.ZERO, Endpoint.INFINITY])
def test_integrability_probe_agrees_with_table(x, endpoint):
    assert integrability_probe(x, endpoint) == integrable_at(x, endpoint)


def test_in_class_examples():
    assert in_class_pp(ParamPair(1.0, 1.0, 1.0, 0.0, 3.0)) is ClassTag.IN_PP
    assert in_class_pp(ParamPair(0.0, 1.0, 0.0, 0.0, 0.0)) is ClassTag.ZERO_PSI_SINGULAR
    assert in_class_pp(ParamPair(1.0, 1.0, 1.0, -1.0, 2.0)) is ClassTag.IN_PP
    assert in_class_pp(ParamPair(1.0, 1.0, 1.0, 1.0, 2.0)) is ClassTag.KERNEL_CONTAINS_PSI_VEC
    assert in_class_pp(ParamPair(1.0, 0.0, 1.0, 0.0, 2.0)) is ClassTag.KERNEL_CONTAINS_E1
    assert in_class_pp(ParamPair(1.0, 1.0, -1.0, 0.0, 2.0)) is ClassTag.NOT_PSD
    # the corrected p = 0 family: rank one with psi != 0 is admitted
    assert in_class_pp(ParamPair(0.0, 1.0, 0.0, 0.0, 1.0)) is ClassTag.IN_PP
    with pytest.raises(PreconditionError):
        in_class_pp(ParamPair(-0.7, 1.0, 1.0, 0.0, 0.0))


def test_approx_equiv_examples():
    x = ParamPair(1.0, 1.0, 1.0, 0.0, 0.0)
    y = ParamPair(1.0, 1.0, 2.0, 1.0, 2.0)
    assert approx_equiv(x, x)
    assert approx_equiv(x, y)
    assert not approx_equiv(x, ParamPair(1.0, 2.0, 1.0, 0.0, 0.0))
    with pytest.raises(PreconditionError):
        approx_equiv(x, PW)


def test_canonicalize_approx_examples():
    y = ParamPair(1.0, 1.0, 2.0, 1.0, 2.0)
    c = canonicalize_approx(y)
    assert c.astuple() == pytest.approx((1.0, 1.0, 1.0, 0.0, 0.0), abs=1e-15)
    assert canonicalize_approx(c) == c
    z = canonicalize_approx(y, form="psi_zero")
    assert z.psi == 0 and approx_equiv(y, z)
    assert z.kappa3 == pytest.approx(1.0 - 1.0 * 2.0 / 2.0)


@given(class_params(), st.floats(-2, 2), st.floats(-2, 2))
def test_approx_equiv_is_an_equivalence(x, t1, t2):
    y, z = approx_partner(x, t1), approx_partner(x, t2)
    assert approx_equiv(x, x)
    assert approx_equiv(x, y) and approx_equiv(y, x)
    assert approx_equiv(y, z) and approx_equiv(x, z)


@given(class_params())
def test_canonicalize_approx_properties(x):
    c = canonicalize_approx(x)
    assert c.kappa3 == 0
    assert approx_equiv(x, c)
    assert canonicalize_approx(c) == c


@given(class_params(), st.floats(0.05, 20))
def test_rescale_is_simeq(x, c):
    y = rescale_params(x, c)
    assert y.kappa1 == pytest.approx(c ** (1 + 2 * x.p) * x.kappa1, rel=1e-13)
    assert simeq_equiv(x, y) and simeq_equiv(y, x)


def test_rescale_examples():
    x = ParamPair(0.7, 1.2, 0.4, 0.3, -1.0)
    assert rescale_params(x, 1.0).astuple() == pytest.approx(x.astuple(), rel=1e-15)
    y = rescale_params(ParamPair(0.0, 1.0, 1.0, 0.0, 1.0), 4.0)
    assert y.astuple() == pytest.approx((0.0, 4.0, 4.0, 0.0, 1.0))
    with pytest.raises(PreconditionError):
        rescale_params(x, -1.0)


@given(class_params(), st.floats(-2, 2), st.floats(0.1, 10))
def test_simeq_properties(x, t, c):
    y = approx_partner(x, t)
    assert simeq_equiv(x, y)
    z = rescale_params(y, c)
    assert simeq_equiv(x, z) and simeq_equiv(z, x)
    k = canonicalize_simeq(x)
    assert k.kappa1 == 1.0 and k.kappa3 == 0.0
    assert simeq_equiv(x, k)
    assert canonicalize_simeq(k) == k


def test_simeq_examples():
    assert canonicalize_simeq(PW) == PW
    x = ParamPair(1.0, 1.0, 1.0, 0.0, 0.0)
    assert not simeq_equiv(x, ParamPair(1.0, 1.0, 2.0, 0.0, 0.0))


def test_class_violations_raise():
    bad = ParamPair(1.0, 1.0, 1.0, 1.0, 2.0)
    for fn in (canonicalize_approx, canonicalize_simeq):
        with pytest.raises(PreconditionError):
            fn(bad)


@given(class_params(), st.floats(-2, 2))
def test_kernels_agree_under_approx(x, t):
    y = approx_partner(x, t)
    g = np.array([0.5 + 0.5j, -2.0 + 1.0j, 3.0 - 0.2j, 1.0j])
    Kx = kernel_matrix(xi_hat(x), g, g)
    Ky = kernel_matrix(xi_hat(y), g, g)
    assert np.abs(Kx - Ky).max() <= 1e-9 * max(1.0, np.abs(Kx).max())
