"""Double-double arithmetic built from error-free transformations.

A value is carried as an unevaluated sum ``hi + lo`` with ``|lo| <= ulp(hi)/2``,
giving roughly 32 significant digits.  Every function works elementwise on
numpy arrays and on plain Python floats.  Complex values are 4-tuples
``(re_hi, re_lo, im_hi, im_lo)``.
"""

from __future__ import annotations

_SPLITTER = 134217729.0  # 2**27 + 1

EPS = 2.0 ** -104


def two_sum(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def quick_two_sum(a, b):
    s = a + b
    e = b - (s - a)
    return s, e


def split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


def add_d(ah, al, b):
    s, e = two_sum(ah, b)
    e = e + al
    return quick_two_sum(s, e)


def mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return quick_two_sum(p, e)


def mul_d(ah, al, b):
    p, e = two_prod(ah, b)
    e = e + al * b
    return quick_two_sum(p, e)


def div(ah, al, bh, bl):
    q1 = ah / bh
    rh, rl = mul_d(bh, bl, q1)
    sh, sl = add(ah, al, -rh, -rl)
    q2 = sh / bh
    rh, rl = mul_d(bh, bl, q2)
    sh, sl = add(sh, sl, -rh, -rl)
    q3 = sh / bh
    q1, q2 = quick_two_sum(q1, q2)
    return add_d(q1, q2, q3)


def div_d(ah, al, b):
    return div(ah, al, b, 0.0 * b)


# complex helpers -----------------------------------------------------------

def cadd(x, y):
    rh, rl = add(x[0], x[1], y[0], y[1])
    ih, il = add(x[2], x[3], y[2], y[3])
    return rh, rl, ih, il


def cmul(x, y):
    a = mul(x[0], x[1], y[0], y[1])
    b = mul(x[2], x[3], y[2], y[3])
    c = mul(x[0], x[1], y[2], y[3])
    d = mul(x[2], x[3], y[0], y[1])
    rh, rl = add(a[0], a[1], -b[0], -b[1])
    ih, il = add(c[0], c[1], d[0], d[1])
    return rh, rl, ih, il


def cmul_c(x, re, im):
    """Multiply a complex double-double by a complex double ``re + i im``."""
    a = mul_d(x[0], x[1], re)
    b = mul_d(x[2], x[3], im)
    c = mul_d(x[0], x[1], im)
    d = mul_d(x[2], x[3], re)
    rh, rl = add(a[0], a[1], -b[0], -b[1])
    ih, il = add(c[0], c[1], d[0], d[1])
    return rh, rl, ih, il


def cscale(x, sh, sl):
    """Multiply a complex double-double by a real double-double."""
    rh, rl = mul(x[0], x[1], sh, sl)
    ih, il = mul(x[2], x[3], sh, sl)
    return rh, rl, ih, il


def cdiv_real(x, sh, sl):
    rh, rl = div(x[0], x[1], sh, sl)
    ih, il = div(x[2], x[3], sh, sl)
    return rh, rl, ih, il


def to_complex(x):
    return (x[0] + x[1]) + 1j * (x[2] + x[3])
