"""Compactly supported test functions with an exact polynomial core.

A test function is stored as ``sum_m P_m(x) D_m(r)`` where ``D_0 = chi`` is a
radial bump equal to 1 on [0, R/2] and 0 beyond R, and
``D_m = (r^-1 d/dr)^m chi``.  Because ``d_i D_m = x_i D_{m+1}`` this family is
closed under differentiation, and near O only ``P_0`` survives, so
derivatives at the origin are exact rationals.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np
import sympy as sp
from scipy.special import expit

from . import kernels
from .coef import as_fraction

__all__ = [
    "TestFunction",
    "make_w_alpha",
    "make_test_function",
    "probe_function",
    "rescale_test",
    "profile",
]


@lru_cache(maxsize=None)
def _profile_derivative_fn(m: int):
    """Numpy callable d_m(rho, h) for the unit-support profile on (1/2, 1).

    With u = 2(1 - rho), q = 1/u - 1/(1 - u) and h = expit(-q) the bump, the
    chain rule dh/drho = h (1 - h) (-q') keeps every derivative a polynomial in
    h, which stays finite where exp(q) would overflow.
    """
    rho, h = sp.symbols("rho h", positive=True)
    u = 2 * (1 - rho)
    q = 1 / u - 1 / (1 - u)
    dh = h * (1 - h) * (-sp.diff(q, rho))
    expr = h
    for _ in range(m):
        expr = (sp.diff(expr, rho) + sp.diff(expr, h) * dh) / rho
    return sp.lambdify((rho, h), expr, modules="numpy", cse=True)


def _unit_profile(m: int, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    if m == 0:
        out[rho <= 0.5] = 1.0
    inside = (rho > 0.5) & (rho < 1.0)
    if np.any(inside):
        x = rho[inside]
        u = 2.0 * (1.0 - x)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            q = 1.0 / u - 1.0 / (1.0 - u)
            hv = expit(-q)
            vals = np.asarray(_profile_derivative_fn(m)(x, hv), dtype=float)
        out[inside] = np.nan_to_num(np.broadcast_to(vals, x.shape), nan=0.0, posinf=0.0, neginf=0.0)
    return out


def profile(m: int, r, support_radius: float) -> np.ndarray:
    """``D_m(r) = (r^-1 d/dr)^m chi(r)`` for the bump of the given support."""
    R = float(support_radius)
    return R ** (-2 * m) * _unit_profile(m, np.asarray(r, dtype=float) / R)


def _poly_clean(poly: dict) -> dict:
    out = {}
    for ab, c in poly.items():
        c = c if isinstance(c, Fraction) else as_fraction(c)
        if c:
            ab = (int(ab[0]), int(ab[1]))
            out[ab] = out.get(ab, Fraction(0)) + c
    return {ab: c for ab, c in out.items() if c}


class TestFunction:
    """``sum_m P_m(x) D_m(r)`` with exact rational polynomial coefficients."""

    __test__ = False  # keep pytest from collecting this class
    __slots__ = ("support_radius", "_pieces")

    def __init__(self, pieces: dict, support_radius: float):
        self.support_radius = float(support_radius)
        if not self.support_radius > 0:
            raise ValueError("support radius must be positive")
        clean = {}
        for m, poly in pieces.items():
            poly = _poly_clean(poly)
            if poly:
                clean[int(m)] = poly
        self._pieces = clean

    @property
    def pieces(self) -> dict:
        return {m: dict(p) for m, p in self._pieces.items()}

    @property
    def core(self) -> dict:
        """Polynomial equal to the function on B_{R/2}."""
        return dict(self._pieces.get(0, {}))

    @property
    def degree(self) -> int:
        return max((a + b for poly in self._pieces.values() for (a, b) in poly), default=0)

    @property
    def max_profile_order(self) -> int:
        return max(self._pieces, default=0)

    def is_zero(self) -> bool:
        return not self._pieces

    def __eq__(self, other):
        if not isinstance(other, TestFunction):
            return NotImplemented
        return self.support_radius == other.support_radius and self._pieces == other._pieces

    def __hash__(self):
        return hash((self.support_radius, tuple(sorted((m, tuple(sorted(p.items()))) for m, p in self._pieces.items()))))

    def __repr__(self):
        return f"TestFunction(R={self.support_radius}, core={self.core})"

    # linear structure
    def _combine(self, other, sign):
        if self.support_radius != other.support_radius:
            raise ValueError("test functions with different supports cannot be combined")
        pieces = {m: dict(p) for m, p in self._pieces.items()}
        for m, poly in other._pieces.items():
            tgt = pieces.setdefault(m, {})
            for ab, c in poly.items():
                tgt[ab] = tgt.get(ab, Fraction(0)) + sign * c
        return TestFunction(pieces, self.support_radius)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __mul__(self, c):
        c = as_fraction(c)
        return TestFunction({m: {ab: v * c for ab, v in p.items()} for m, p in self._pieces.items()}, self.support_radius)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    # calculus
    def derivative(self, i: int) -> "TestFunction":
        """d_i, ``i`` in {1, 2}: d_i (P D_m) = (d_i P) D_m + x_i P D_{m+1}."""
        if i not in (1, 2):
            raise ValueError("direction must be 1 or 2")
        out = {}
        for m, poly in self._pieces.items():
            for (a, b), c in poly.items():
                if i == 1:
                    if a:
                        out.setdefault(m, {})
                        out[m][(a - 1, b)] = out[m].get((a - 1, b), 0) + a * c
                    out.setdefault(m + 1, {})
                    out[m + 1][(a + 1, b)] = out[m + 1].get((a + 1, b), 0) + c
                else:
                    if b:
                        out.setdefault(m, {})
                        out[m][(a, b - 1)] = out[m].get((a, b - 1), 0) + b * c
                    out.setdefault(m + 1, {})
                    out[m + 1][(a, b + 1)] = out[m + 1].get((a, b + 1), 0) + c
        return TestFunction(out, self.support_radius)

    def derivative_multi(self, alpha) -> "TestFunction":
        out = self
        for _ in range(alpha[0]):
            out = out.derivative(1)
        for _ in range(alpha[1]):
            out = out.derivative(2)
        return out

    def gradient(self) -> tuple:
        return self.derivative(1), self.derivative(2)

    def hessian(self) -> tuple:
        d1, d2 = self.gradient()
        return ((d1.derivative(1), d1.derivative(2)), (d2.derivative(1), d2.derivative(2)))

    def derivative_at_origin(self, alpha) -> Fraction:
        """Exact d^alpha phi(O) from the polynomial core."""
        a = (int(alpha[0]), int(alpha[1]))
        return self.core.get(a, Fraction(0)) * factorial(a[0]) * factorial(a[1])

    def rescale(self, lam) -> "TestFunction":
        """phi_lambda(x) = lambda^-2 phi(x / lambda)."""
        lam_f = as_fraction(lam)
        if not 0 < lam_f <= 1:
            raise ValueError(f"rescaling factor must lie in (0, 1], got {lam}")
        out = {}
        for m, poly in self._pieces.items():
            # D_m(r/lam; R) = lam^(2m) D_m(r; lam R)
            out[m] = {(a, b): c * lam_f ** (2 * m - 2 - a - b) for (a, b), c in poly.items()}
        return TestFunction(out, self.support_radius * float(lam_f))

    # numerics
    def _poly_arrays(self, poly):
        items = sorted(poly.items())
        a = np.array([ab[0] for ab, _ in items], dtype=np.int64)
        b = np.array([ab[1] for ab, _ in items], dtype=np.int64)
        c = np.array([float(v) for _, v in items], dtype=np.float64)
        return a, b, c

    def values_polar(self, r, theta) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        r, theta = np.broadcast_arrays(r, theta)
        x, y = r * np.cos(theta), r * np.sin(theta)
        out = np.zeros(r.shape)
        for m, poly in sorted(self._pieces.items()):
            prof = profile(m, r, self.support_radius)
            if not np.any(prof):
                continue
            out += kernels.eval_poly(*self._poly_arrays(poly), x, y) * prof
        return out

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.values_polar(np.hypot(x, y), np.arctan2(y, x))

    def integral(self, nodes: int = 64) -> float:
        """Integral over the plane by tensor Gauss/trapezoid quadrature."""
        from .quadrature import radial_rule

        r, w, _ = radial_rule([(0.0, self.support_radius / 2, 4), (self.support_radius / 2, self.support_radius, 16)], nodes)
        M = 2 * self.degree + 16
        th = 2 * np.pi * np.arange(M) / M
        vals = self.values_polar(r[:, None], th[None, :])
        return float(np.sum(w * r * vals.sum(axis=1)) * 2 * np.pi / M)


def make_test_function(core: dict, support_radius: float) -> TestFunction:
    """Test function equal to the polynomial ``core`` on B_{R/2}."""
    return TestFunction({0: core}, support_radius)


def make_w_alpha(alpha, support_radius: float = 0.5) -> TestFunction:
    """w^alpha with d^beta w^alpha(O) = (-1)^|alpha| if beta = alpha else 0."""
    a1, a2 = int(alpha[0]), int(alpha[1])
    if a1 < 0 or a2 < 0:
        raise ValueError("multi-index entries must be non-negative")
    c = Fraction((-1) ** (a1 + a2), factorial(a1) * factorial(a2))
    return TestFunction({0: {(a1, a2): c}}, support_radius)


def probe_function(support_radius: float = 0.5, degree: int = 6) -> TestFunction:
    """Generic test function with core sum x^g / g! over |g| <= degree."""
    core = {}
    for total in range(degree + 1):
        for a in range(total + 1):
            core[(a, total - a)] = Fraction(1, factorial(a) * factorial(total - a))
    return TestFunction({0: core}, support_radius)


def rescale_test(phi: TestFunction, lam) -> TestFunction:
    return phi.rescale(lam)
