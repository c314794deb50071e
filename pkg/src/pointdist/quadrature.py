"""Independent numerical pairing oracle.

Smooth terms are integrated over the annuli ``eps_{j+1} < r < eps_j`` of a
dyadic ladder plus the outer region up to the test-function support.  Inside
``B_{R/2}`` the test function equals its polynomial core, so each homogeneous
degree of the core turns the integral over ``eps < r`` into a constant plus
a combination of ``eps^e (ln(eps / rho))^q`` for a single ``e``.  Fitting
those coefficients on the annulus sums and removing them gives the eps -> 0
limit with every divergent piece dropped, which is the principal value when
it exists and the finite part with reference radius ``rho`` otherwise.  Nothing here reads the symbolic
moment formulas of the field algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels
from .field_algebra import (
    Codomain,
    SingularField,
    degree_of_divergence,
    extension_policies,
)
from .testfn import TestFunction, probe_function, profile

__all__ = [
    "QuadratureSpec",
    "ExtrapolationError",
    "IndeterminateError",
    "NotCauchyError",
    "DEFAULT_SPEC",
    "radial_rule",
    "pair",
    "pair_point",
    "pair_scalar_smooth",
    "pv_ladder",
    "ladder_converges",
    "estimate_scaling_degree",
    "cutoff_series_extension",
    "circle_integral",
]


class ExtrapolationError(ArithmeticError):
    """The eps-ladder did not fit the expected asymptotic form."""

    def __init__(self, message, exponent_estimate=None):
        super().__init__(message)
        self.exponent_estimate = exponent_estimate


class IndeterminateError(ArithmeticError):
    pass


class NotCauchyError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    """Knobs of the oracle.

    ``levels`` is the number of ladder radii ``eps_j = R / 2^(j+2)``;
    ``angular_extra`` is added to twice the highest Fourier mode to size the
    trapezoid rule; ``radial_nodes`` Gauss-Legendre points per panel;
    ``transition_panels`` panels across the cutoff transition;
    ``fit_rtol`` bounds the relative fit residual.
    """

    levels: int = 11
    angular_extra: int = 16
    radial_nodes: int = 20
    transition_panels: int = 12
    fit_rtol: float = 1e-7

    def __post_init__(self):
        if self.levels < 3:
            raise ValueError("the eps-ladder needs at least 3 levels")
        if self.radial_nodes < 2 or self.transition_panels < 1 or self.angular_extra < 1:
            raise ValueError("quadrature orders must be positive")

    def ladder(self, support_radius: float) -> np.ndarray:
        return support_radius / 2.0 ** (np.arange(self.levels) + 2)


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=None)
def _gauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def radial_rule(panels, nodes: int):
    """Composite Gauss-Legendre rule.

    ``panels`` is a list of ``(a, b, count)``; each interval is split into
    ``count`` equal pieces.  Returns nodes, weights and a panel index per node
    counting the listed intervals (not the sub-pieces).
    """
    x, w = _gauss(nodes)
    rs, ws, idx = [], [], []
    for pid, (a, b, count) in enumerate(panels):
        edges = np.linspace(a, b, count + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = 0.5 * (hi - lo)
            rs.append(lo + half * (x + 1.0))
            ws.append(half * w)
            idx.append(np.full(nodes, pid, dtype=np.int64))
    return np.concatenate(rs), np.concatenate(ws), np.concatenate(idx)


def _angular_nodes(max_mode: int, degree: int, spec: QuadratureSpec) -> np.ndarray:
    M = 2 * (max_mode + degree) + spec.angular_extra
    return 2.0 * np.pi * np.arange(M) / M


class _Grid:
    """Ladder rule with angular projections of the test function.

    The function is ``sum_m P_m(x) D_m(r)``; each homogeneous degree of each
    ``P_m`` is projected on its own, and a degree-d piece has no mode n
    unless n <= d and d - n is even.  Those entries are left out rather than
    kept as roundoff that r^k would amplify near O.
    """

    def __init__(self, phi: TestFunction, max_mode: int, spec: QuadratureSpec, levels: int):
        R = phi.support_radius
        self.R = R
        self.eps = R / 2.0 ** (np.arange(levels) + 2)
        panels = [(self.eps[j + 1], self.eps[j], 1) for j in range(levels - 1)]
        panels.append((self.eps[0], R / 2, 1))
        panels.append((R / 2, R, spec.transition_panels))
        self.n_annuli = levels - 1
        self.n_panels = len(panels)
        self.r, self.w, self.idx = radial_rule(panels, spec.radial_nodes)
        self.theta = _angular_nodes(max_mode, phi.degree, spec)
        self.pieces = phi.pieces
        self.profiles = {m: profile(m, self.r, R) for m in self.pieces}
        self._proj = {}

    def _modes(self, poly: dict, n: int, s: int) -> dict:
        by_degree = {}
        for (a, b), cf in poly.items():
            by_degree.setdefault(a + b, []).append((a, b, float(cf)))
        trig = np.sin(n * self.theta) if s else np.cos(n * self.theta)
        c, sn = np.cos(self.theta), np.sin(self.theta)
        modes = {}
        for d, mons in sorted(by_degree.items()):
            if n > d or (d - n) % 2:
                continue
            ang = sum(cf * c**a * sn**b for a, b, cf in mons)
            val = float(ang @ trig * (2.0 * np.pi / self.theta.size))
            if val:
                modes[d] = val
        return modes

    def core_modes(self, n: int, s: int) -> dict:
        """{d: integral over theta of trig(n theta) * (degree-d piece of the core)}."""
        return self._modes(self.pieces.get(0, {}), n, s)

    def projection(self, n: int, s: int, outer_only: bool = False) -> np.ndarray:
        """Integral over theta of trig(n theta) * phi(r, theta), per radial node."""
        key = (n, s, outer_only)
        if key not in self._proj:
            proj = np.zeros_like(self.r)
            for m, poly in self.pieces.items():
                prof = self.profiles[m]
                if outer_only:
                    prof = np.where(self.r < self.R / 2, 0.0, prof)
                for d, a in self._modes(poly, n, s).items():
                    proj += a * self.r**d * prof
            self._proj[key] = proj
        return self._proj[key]


def _basis(e: int, p: int):
    """(exponent, log power) pairs of int_eps r^(e-1) (ln r)^p dr as a function of eps."""
    qs = range(1, p + 2) if e == 0 else range(0, p + 1)
    return [(e, q) for q in qs]


def _basis_values(basis, eps, rho):
    lg = np.log(eps / rho)
    return np.stack([eps**e * lg**q for e, q in basis], axis=-1)


def _extrapolate(annuli: np.ndarray, outer: float, eps: np.ndarray, basis, rho: float, spec: QuadratureSpec):
    """eps -> 0 limit with divergent parts dropped, from annulus sums."""
    G = _basis_values(basis, eps, rho)
    A = G[1:] - G[:-1]  # I(eps_{j+1}) - I(eps_j)
    scale = np.max(np.abs(A), axis=0)
    scale[scale == 0] = 1.0
    coef, *_ = np.linalg.lstsq(A / scale, annuli, rcond=None)
    coef = coef / scale
    resid = annuli - A @ coef
    size = max(np.max(np.abs(annuli)), abs(outer), 1e-300)
    if np.max(np.abs(resid)) > spec.fit_rtol * size:
        # growth rate of annulus sums as a divergence exponent estimate
        mags = np.abs(annuli[annuli != 0])
        expo = None
        if mags.size >= 2:
            expo = float(-np.polyfit(np.log(eps[1 : mags.size + 1]), np.log(mags), 1)[0])
        raise ExtrapolationError(
            f"eps-ladder does not fit the expected expansion (relative residual "
            f"{np.max(np.abs(resid)) / size:.2e})",
            exponent_estimate=expo,
        )
    return float(outer - G[0] @ coef)


def pair_scalar_smooth(items, phi: TestFunction, rho: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Pair ``sum c r^k (ln r)^p trig`` with ``phi``; ``items`` is [((k, p, n, s), c_float)].

    Outside B_{R/2} the integrand is summed directly.  Inside, each
    homogeneous degree m of the core contributes its angular projection times
    a radial integral of r^(k+1+m) (ln r)^p, whose eps -> 0 limit is taken
    on its own ladder so that every fit has one exponent.
    """
    items = [(key, c) for key, c in items if c]
    if not items or phi.is_zero():
        return 0.0
    grid = _Grid(phi, max(key[2] for key, _ in items), spec, spec.levels)
    na = grid.n_annuli
    ones = np.ones_like(grid.r)
    radial = {}
    total = 0.0
    for (k, p, n, s), c in sorted(items):
        sums = kernels.radial_panel_sums(k + 1, p, grid.r, grid.w, grid.projection(n, s, True), grid.idx, grid.n_panels)
        value = float(np.sum(sums[na + 1 :]))
        for m, a in grid.core_modes(n, s).items():
            if (k, p, m) not in radial:
                rs = kernels.radial_panel_sums(k + 1 + m, p, grid.r, grid.w, ones, grid.idx, grid.n_panels)
                radial[(k, p, m)] = _extrapolate(rs[:na], float(rs[na]), grid.eps, _basis(k + 2 + m, p), rho, spec)
            value += a * radial[(k, p, m)]
        total += c * value
    return total


def pair_point(F: SingularField, phi: TestFunction, comp=()) -> float:
    """Exact point-part pairing sum c (-1)^|alpha| d^alpha phi(O), as a float."""
    total = 0.0
    for (cc, alpha), c in sorted(F.point.items()):
        if cc != tuple(comp):
            continue
        d = phi.derivative_at_origin(alpha)
        if d:
            total += float(c) * (-1) ** sum(alpha) * float(d)
    return total


def _pair_component(F: SingularField, comp, phi: TestFunction, spec: QuadratureSpec) -> float:
    if phi.support_radius > F.domain_radius * (1 + 1e-12):
        raise ValueError("test function support exceeds the domain")
    items = [((k, p, n, s), float(c)) for (cc, k, p, n, s), c in F.smooth.items() if cc == comp]
    return pair_scalar_smooth(items, phi, F.rho, spec) + pair_point(F, phi, comp)


def pair(F: SingularField, phi, spec: QuadratureSpec = DEFAULT_SPEC):
    """F(phi).

    ``phi`` is a TestFunction (every component of F is paired with it and an
    array of component values is returned; a float for scalars) or a mapping
    from 0-based component tuples to TestFunctions (contracted to a float).
    """
    if isinstance(phi, TestFunction):
        comps = F.codomain.components
        vals = np.array([_pair_component(F, c, phi, spec) for c in comps])
        if F.codomain is Codomain.SCALAR:
            return float(vals[0])
        return vals.reshape({1: (2,), 2: (2, 2)}[F.codomain.rank])
    if isinstance(phi, Mapping):
        total = 0.0
        for comp, psi in sorted(phi.items()):
            comp = tuple(comp)
            if comp not in F.codomain.components:
                raise ValueError(f"component {comp} invalid for {F.codomain.value}")
            if psi is None or psi.is_zero():
                continue
            total += _pair_component(F, comp, psi, spec)
        return total
    raise TypeError("phi must be a TestFunction or a mapping of them")


def pv_ladder(F: SingularField, phi: TestFunction, spec: QuadratureSpec = DEFAULT_SPEC) -> np.ndarray:
    """Raw integrals of the smooth part of a scalar F over eps_j < r, no regularization."""
    if F.codomain is not Codomain.SCALAR:
        raise ValueError("pv_ladder expects a scalar field")
    items = [((k, p, n, s), float(c)) for (_, k, p, n, s), c in F.smooth.items()]
    if not items:
        return np.zeros(spec.levels)
    grid = _Grid(phi, max(key[2] for key, _ in items), spec, spec.levels)
    out = np.zeros(spec.levels)
    for (k, p, n, s), c in sorted(items):
        sums = kernels.radial_panel_sums(k + 1, p, grid.r, grid.w, grid.projection(n, s), grid.idx, grid.n_panels)
        outer = np.sum(sums[grid.n_annuli :])
        out += c * (outer + np.concatenate([[0.0], np.cumsum(sums[: grid.n_annuli])]))
    return out


def ladder_converges(values, rtol: float = 1e-9) -> bool:
    """Decide convergence of a ladder from its successive differences.

    Convergent ladders have differences shrinking geometrically (a log or
    power divergence keeps them constant or growing).
    """
    v = np.asarray(values, dtype=float)
    d = np.abs(np.diff(v))
    scale = max(np.max(np.abs(v)), 1.0)
    if np.all(d[-3:] <= rtol * scale):
        return True
    tail = d[-5:]
    ratios = tail[1:] / np.where(tail[:-1] == 0, np.inf, tail[:-1])
    return bool(np.median(ratios) < 0.75)


def _field_log_power(F: SingularField) -> int:
    pol = extension_policies(F)
    best = 0
    for key in F.smooth:
        best = max(best, key[2] + (1 if pol[key].kind == "finite-part" else 0))
    return best


def estimate_scaling_degree(
    F: SingularField,
    phi: TestFunction | None = None,
    lambdas=None,
    spec: QuadratureSpec = DEFAULT_SPEC,
    log_power: int | None = None,
    noise_floor: float = 1e-280,
) -> float:
    """Empirical scaling degree from F(phi_lambda) on a dyadic lambda grid.

    With ``log_power = 0`` this is minus the least-squares slope of
    log|F(phi_lambda)| against log(lambda).  Terms with logarithms (or a
    finite part whose reference radius does not scale) make F(phi_lambda)
    behave like lambda^-s times a polynomial in ln(lambda); the exponent is
    then chosen to make that polynomial fit best.
    """
    if phi is None:
        phi = probe_function(F.domain_radius / 2, degree=8)
    if lambdas is None:
        lambdas = [2.0**-j for j in range(1, 9)]
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any(np.diff(lambdas) >= 0) or np.any(lambdas <= 0) or np.any(lambdas > 1):
        raise ValueError("lambda grid must be decreasing inside (0, 1]")
    vals = []
    for lam in lambdas:
        v = np.atleast_1d(pair(F, phi.rescale(lam), spec)).ravel()
        vals.append(float(np.linalg.norm(v)) if v.size > 1 else float(v[0]))
    vals = np.array(vals)
    mags = np.abs(vals)
    if not np.any(mags > noise_floor) or np.any(mags <= noise_floor):
        raise IndeterminateError("pairings vanish on the lambda grid; scaling degree indeterminate")
    x = np.log(lambdas)
    slope = np.polyfit(x, np.log(mags), 1)[0]
    Q = _field_log_power(F) if log_power is None else int(log_power)
    if Q == 0:
        return float(-slope)
    signed = vals if np.all(np.isfinite(vals)) else mags
    V = np.vander(x, Q + 1)

    def misfit(s):
        y = signed * np.exp(s * x)
        y = y / np.max(np.abs(y))
        coef, *_ = np.linalg.lstsq(V, y, rcond=None)
        return float(np.linalg.norm(V @ coef - y))

    # the misfit has spurious local minima, so scan before refining
    guess = -slope
    grid = guess + np.arange(-3.0, 3.0 + 1e-9, 0.05)
    best = grid[int(np.argmin([misfit(s) for s in grid]))]
    res = minimize_scalar(misfit, bounds=(best - 0.05, best + 0.05), method="bounded", options={"xatol": 1e-10})
    return float(res.x)


def cutoff_series_extension(
    F0: SingularField,
    phi: TestFunction,
    j_max: int,
    spec: QuadratureSpec = DEFAULT_SPEC,
    cutoff_radius: float | None = None,
    strict: bool = True,
) -> np.ndarray:
    """T^j(phi) = integral of f (1 - theta(2^j x)) phi, j = 0..j_max.

    ``theta`` is the same bump profile with support ``cutoff_radius``
    (default half the test-function support).  With ``strict`` the
    construction refuses fields of non-negative degree, for which the
    sequence need not be Cauchy.
    """
    if F0.codomain is not Codomain.SCALAR:
        raise ValueError("cutoff_series_extension expects a scalar field")
    if F0.point:
        raise ValueError("cutoff_series_extension acts on smooth terms only")
    if strict and degree_of_divergence(F0) >= 0:
        raise NotCauchyError("cutoff series requires deg < 0")
    items = sorted(F0.smooth.items())
    out = np.zeros(j_max + 1)
    if not items:
        return out
    R = phi.support_radius
    rc = R / 2 if cutoff_radius is None else float(cutoff_radius)
    from .field_algebra import eval_smooth

    max_mode = max(key[3] for key, _ in items)
    theta = _angular_nodes(max_mode, phi.degree, spec)
    for j in range(j_max + 1):
        a = rc * 2.0**-j
        panels = [(a / 2, a, spec.transition_panels)]
        lo = a
        while lo < R / 2 * (1 - 1e-12):
            hi = min(2 * lo, R / 2)
            panels.append((lo, hi, 1))
            lo = hi
        panels.append((R / 2, R, spec.transition_panels))
        r, w, _ = radial_rule(panels, spec.radial_nodes)
        keep = 1.0 - profile(0, r, a)
        f = eval_smooth(F0, r[:, None], theta[None, :])
        ph = phi.values_polar(r[:, None], theta[None, :])
        ang = np.sum(f * ph, axis=1) * (2 * np.pi / theta.size)
        out[j] = float(np.sum(w * r * keep * ang))
    return out


def circle_integral(F: SingularField, eps: float, integrand: str = "traction", n_nodes: int | None = None) -> np.ndarray:
    """Trapezoid integral over |x| = eps of the smooth part.

    ``integrand="traction"`` integrates F e_r dl for a tensor F;
    ``"normal"`` integrates <F, e_r> dl for a vector F.
    """
    max_mode = max((key[3] for key in F.smooth), default=0)
    M = n_nodes or 2 * (max_mode + 1) + 32
    th = 2 * np.pi * np.arange(M) / M
    from .field_algebra import eval_smooth

    vals = eval_smooth(F, np.full(M, eps), th)
    er = np.stack([np.cos(th), np.sin(th)], axis=-1)
    if integrand == "traction":
        dens = np.einsum("mij,mj->mi", vals, er)
    elif integrand == "normal":
        dens = np.einsum("mi,mi->m", vals, er)
    else:
        raise ValueError(f"unknown integrand {integrand!r}")
    return dens.sum(axis=0) * (2 * np.pi * eps / M)
