import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from homdb.errors import ConvergenceError, PoleError, PreconditionError, SectorError
from homdb.specfun import (
    Tolerance,
    bessel_i,
    bessel_j,
    gamma,
    hyp0f1,
    kummer_m,
    kummer_m_asymptotic,
    log_gamma,
    pochhammer,
    rgamma,
)
from oracle_values import BESSEL_I, BESSEL_J, HYP0F1, KUMMER_M, LOG_GAMMA


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


@pytest.mark.parametrize("z, expected", LOG_GAMMA)
def test_log_gamma_oracle(z, expected):
    got = log_gamma(z)
    assert abs(got.real - expected.real) <= 1e-13 * max(1.0, abs(expected.real))
    # the imaginary part is the principal value, so compare modulo 2 pi
    d = (got.imag - expected.imag) / (2 * math.pi)
    assert abs(d - round(d)) < 1e-13 * max(1.0, abs(expected.imag))
    assert -math.pi < got.imag <= math.pi


def test_log_gamma_examples():
    assert log_gamma(1) == 0
    assert abs(log_gamma(0.5) - math.log(math.sqrt(math.pi))) < 1e-15
    assert abs(math.exp(2 * log_gamma(1 + 1j).real) - math.pi / math.sinh(math.pi)) < 1e-14


@pytest.mark.parametrize("z", [0, -1, -7])
def test_log_gamma_poles(z):
    with pytest.raises(PoleError):
        log_gamma(z)
    assert rgamma(z) == 0


def test_near_pole_behaviour():
    with pytest.raises(PoleError):
        log_gamma(-3 + 1e-10)
    # the reciprocal stays finite and vanishes linearly: 1/Gamma(-3 + e) ~ -6 e
    assert rgamma(-3 + 1e-10) == pytest.approx(-6e-10, rel=1e-8)
    assert rgamma(2e-206j) == pytest.approx(2e-206j, rel=1e-12)


def test_log_gamma_sign_on_negative_axis():
    for x in (-0.5, -1.5, -2.5, -3.5):
        assert rel(cmath.exp(log_gamma(x)), math.gamma(x)) < 1e-14


def test_gamma_matches_factorial():
    for n in range(1, 15):
        assert rel(gamma(n), math.factorial(n - 1)) < 1e-13


def test_pochhammer_examples():
    assert pochhammer(3.3 - 1j, 0) == 1
    for n in range(8):
        assert pochhammer(1, n) == math.factorial(n)
    assert pochhammer(2.5, 3) == 39.375
    with pytest.raises(PreconditionError):
        pochhammer(1.0, -1)


@given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), st.integers(0, 12))
def test_pochhammer_recurrence(a, n):
    lhs = pochhammer(a, n + 1)
    rhs = pochhammer(a, n) * (a + n)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


@pytest.mark.parametrize("a, b, z, expected", KUMMER_M)
def test_kummer_m_oracle(a, b, z, expected):
    assert rel(kummer_m(a, b, z), expected) < 1e-12


def test_kummer_m_examples():
    assert kummer_m(0.3 - 2j, 1.7, 0) == 1
    z = 1 + 1j
    assert rel(kummer_m(1, 1, z), cmath.exp(z)) < 1e-15
    assert rel(kummer_m(1, 2, 0.7), math.expm1(0.7) / 0.7) < 1e-15


def test_kummer_m_vectorized_matches_scalar():
    a = np.array([0.2, 1 + 1j, -0.5j])
    z = np.array([3.0, -20j, 5 - 5j])
    vec = kummer_m(a, 1.5, z)
    for i in range(3):
        assert vec[i] == pytest.approx(kummer_m(a[i], 1.5, z[i]), rel=1e-15)


def test_kummer_m_rejects_pole_b():
    with pytest.raises(PoleError):
        kummer_m(0.5, -2.0, 1.0)
    with pytest.raises(PoleError):
        kummer_m(0.5, 1e-9, 1.0)


def test_kummer_m_term_cap():
    with pytest.raises(ConvergenceError):
        kummer_m(0.5, 1.5, 25.0, Tolerance(max_terms=10))


def test_tolerance_validation():
    with pytest.raises(PreconditionError):
        Tolerance(rel_tol=0)
    with pytest.raises(PreconditionError):
        Tolerance(max_terms=0)


@pytest.mark.parametrize("b, z, expected", HYP0F1)
def test_hyp0f1_oracle(b, z, expected):
    assert rel(hyp0f1(b, z), expected) < 1e-12


def test_hyp0f1_examples():
    assert hyp0f1(2.5, 0) == 1
    assert abs(hyp0f1(1.5, -1.0) - math.sin(2) / 2) < 1e-15
    partial = sum(1.0 / (math.factorial(n + 1) * math.factorial(n)) for n in range(30))
    assert rel(hyp0f1(2, 1), partial) < 1e-15


def test_hyp0f1_is_limit_of_kummer():
    b, z = 1.7, 2.0 - 1.0j
    target = hyp0f1(b, z)
    errs = [abs(target - kummer_m(alpha, b, z / alpha)) for alpha in (10.0, 100.0, 1000.0)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2 * abs(target)


@pytest.mark.parametrize("nu, z, expected", BESSEL_J)
def test_bessel_j_oracle(nu, z, expected):
    assert rel(bessel_j(nu, z), expected) < 1e-13


@pytest.mark.parametrize("nu, z, expected", BESSEL_I)
def test_bessel_i_oracle(nu, z, expected):
    assert rel(bessel_i(nu, z), expected) < 1e-13


def test_bessel_examples():
    assert bessel_j(0, 0) == 1
    assert abs(bessel_j(0.5, math.pi)) < 1e-15
    series = sum(0.25**n / math.factorial(n) ** 2 for n in range(30))
    assert rel(bessel_i(0, 1.0), series) < 1e-15
    with pytest.raises(PreconditionError):
        bessel_j(-1.5, 1.0)


def test_asymptotic_overlap_with_series():
    z = 30j
    assert rel(kummer_m_asymptotic(0.3 + 0.2j, 2.0, z), kummer_m(0.3 + 0.2j, 2.0, z)) < 5e-2


def test_asymptotic_a_equals_b_is_exponential():
    z = 45j
    assert rel(kummer_m_asymptotic(2.0, 2.0, z), cmath.exp(z)) < 1e-12


def test_asymptotic_modulus_on_imaginary_axis():
    v = kummer_m_asymptotic(1.0, 3.0, 100j)
    lead = gamma(3).real / gamma(2).real / 100.0
    assert abs(abs(v) - lead) < 0.05 * lead


def test_asymptotic_refuses_outside_its_domain():
    with pytest.raises(SectorError):
        kummer_m_asymptotic(0.5, 1.0, 10j)
    with pytest.raises(SectorError):
        kummer_m_asymptotic(0.5, 1.0, 100.0)


admissible_a = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)
admissible_b = st.floats(0.2, 4.0)
moderate_w = st.complex_numbers(max_magnitude=20, allow_nan=False, allow_infinity=False)


def _scale(*vals):
    return max(1.0, *(abs(v) for v in vals))


@given(admissible_a, admissible_b, moderate_w)
def test_contiguous_relation_a(a, b, w):
    t = (b * kummer_m(a, b, w), -a * kummer_m(a + 1, b + 1, w), (a - b) * kummer_m(a, b + 1, w))
    assert abs(sum(t)) <= 1e-9 * _scale(*t)


@given(admissible_a, admissible_b, moderate_w)
def test_contiguous_relation_b(a, b, w):
    t = (kummer_m(a, b + 1, w), -kummer_m(a + 1, b + 1, w), w / (b + 1) * kummer_m(a + 1, b + 2, w))
    assert abs(sum(t)) <= 1e-9 * _scale(*t)


@given(admissible_a, admissible_b, moderate_w)
def test_kummer_transformation(a, b, w):
    lhs = kummer_m(a, b, w)
    rhs = cmath.exp(w) * kummer_m(b - a, b, -w)
    assert abs(lhs - rhs) <= 1e-9 * _scale(lhs, rhs, cmath.exp(w.real))


@given(admissible_a, admissible_b, st.floats(-5, 5))
def test_derivative_relation(a, b, x):
    h = 1e-3
    fd = (kummer_m(a, b, x + h) - kummer_m(a, b, x - h)) / (2 * h)
    exact = a / b * kummer_m(a + 1, b + 1, x)
    third = abs(a * (a + 1) * (a + 2) / (b * (b + 1) * (b + 2)) * kummer_m(a + 3, b + 3, x))
    assert abs(fd - exact) <= h * h * third + 1e-9 * _scale(exact)


@given(st.floats(-0.9, 4.0), st.complex_numbers(max_magnitude=12, allow_nan=False, allow_infinity=False))
def test_bessel_correspondences(nu, z):
    # each function is checked against the other hypergeometric route
    if abs(z) < 1e-3 or (z.real <= 0 and abs(z.imag) < 1e-9):
        return
    pref = (z / 2) ** nu * cmath.exp(-log_gamma(nu + 1))
    j = bessel_j(nu, z)
    via_m = pref * cmath.exp(-1j * z) * kummer_m(nu + 0.5, 2 * nu + 1, 2j * z)
    assert abs(j - via_m) <= 1e-9 * _scale(j, via_m, abs(pref) * math.exp(abs(z.imag)))
    i = bessel_i(nu, z)
    via_0f1 = pref * hyp0f1(nu + 1, z * z / 4)
    assert abs(i - via_0f1) <= 1e-9 * _scale(i, via_0f1, abs(pref) * math.exp(abs(z.real)))
