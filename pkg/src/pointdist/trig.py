"""Fourier-mode bookkeeping shared by the field algebra and the checkers.

A trig mode is a pair ``(n, s)`` with ``n >= 0`` and ``s = 0`` for cos(n theta),
``s = 1`` for sin(n theta).  ``sin(0 theta)`` never appears.  Trig polynomials are
dicts mapping modes to exact rational weights.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb

__all__ = [
    "COS",
    "SIN",
    "normalize_mode",
    "mode_product",
    "trig_mul",
    "cos_sin_power",
    "circle_integral",
    "monomial_circle_moment",
    "polynomial_term_monomials",
]

COS, SIN = 0, 1
HALF = Fraction(1, 2)


def normalize_mode(n: int, s: int, weight: Fraction):
    """Map cos/sin of a possibly negative integer multiple to canonical form."""
    if n < 0:
        n = -n
        if s == SIN:
            weight = -weight
    if n == 0 and s == SIN:
        return None
    return (n, s), weight


@lru_cache(maxsize=None)
def mode_product(n1: int, s1: int, n2: int, s2: int) -> tuple:
    """Product of two trig modes as a tuple of ((n, s), weight)."""
    if s1 == COS and s2 == COS:
        raw = [(n1 - n2, COS, HALF), (n1 + n2, COS, HALF)]
    elif s1 == SIN and s2 == SIN:
        raw = [(n1 - n2, COS, HALF), (n1 + n2, COS, -HALF)]
    elif s1 == SIN and s2 == COS:
        raw = [(n1 + n2, SIN, HALF), (n1 - n2, SIN, HALF)]
    else:
        raw = [(n1 + n2, SIN, HALF), (n2 - n1, SIN, HALF)]
    out = {}
    for n, s, w in raw:
        norm = normalize_mode(n, s, w)
        if norm is None:
            continue
        mode, w = norm
        out[mode] = out.get(mode, Fraction(0)) + w
    return tuple((m, w) for m, w in sorted(out.items()) if w)


def trig_mul(a: dict, b: dict) -> dict:
    out = {}
    for (n1, s1), w1 in a.items():
        for (n2, s2), w2 in b.items():
            for mode, w in mode_product(n1, s1, n2, s2):
                out[mode] = out.get(mode, 0) + w1 * w2 * w
    return {m: w for m, w in out.items() if w}


@lru_cache(maxsize=None)
def _cos_sin_power(a: int, b: int) -> tuple:
    poly = {(0, COS): Fraction(1)}
    for _ in range(a):
        poly = trig_mul(poly, {(1, COS): Fraction(1)})
    for _ in range(b):
        poly = trig_mul(poly, {(1, SIN): Fraction(1)})
    return tuple(sorted(poly.items()))


def cos_sin_power(a: int, b: int) -> dict:
    """cos(theta)**a * sin(theta)**b as a trig polynomial."""
    return dict(_cos_sin_power(a, b))


def circle_integral(poly: dict):
    """Integral over [0, 2pi) divided by pi; returns a rational.

    The factor pi is left to the caller so results stay in Q[pi].
    """
    return 2 * poly.get((0, COS), 0)


@lru_cache(maxsize=None)
def monomial_circle_moment(n: int, s: int, a: int, b: int) -> Fraction:
    """(1/pi) * integral of trig(n, s) * cos^a * sin^b over a full turn."""
    prod = trig_mul({(n, s): Fraction(1)}, cos_sin_power(a, b))
    return Fraction(circle_integral(prod))


@lru_cache(maxsize=None)
def polynomial_term_monomials(k: int, n: int, s: int) -> tuple:
    """Expand r**k * trig(n theta) as a polynomial in (x, y) when it is one.

    Uses r**k cos(n theta) = (x^2+y^2)**((k-n)/2) * Re((x+iy)**n), likewise Im
    for sin.  Returns a tuple of ((a, b), weight) or raises ValueError.
    """
    if k < n or (k - n) % 2:
        raise ValueError(f"r^{k} trig({n} theta) is not a polynomial")
    m = (k - n) // 2
    # (x + i y)**n = sum_j C(n, j) x^(n-j) (i y)^j
    zpow = {}
    for j in range(n + 1):
        phase = j % 4  # i**j
        if s == COS and phase in (0, 2):
            sign = 1 if phase == 0 else -1
        elif s == SIN and phase in (1, 3):
            sign = 1 if phase == 1 else -1
        else:
            continue
        zpow[(n - j, j)] = zpow.get((n - j, j), 0) + sign * comb(n, j)
    out = {}
    for (a, b), w in zpow.items():
        for i in range(m + 1):
            key = (a + 2 * i, b + 2 * (m - i))
            out[key] = out.get(key, 0) + w * comb(m, i)
    return tuple(sorted((key, Fraction(w)) for key, w in out.items() if w))
