"""Interaction Eshelby tensor and generalized forces on point defects.

The force on a defect with dislocation density A in a smooth external stress
sigma_2 is the point-supported vector F = Div J = (sigma_2 A) x e_3.  Cross
products accept a ``convention`` argument: ``"paper"`` uses
v x e_3 = (-v_2, v_1) and ``"right-hand"`` uses v x e_3 = (v_2, -v_1).  With
the classical curl used throughout this package, the loop integral of J n
equals the ``"right-hand"`` closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .coef import Coef, as_coef
from .elasticity import (
    IsotropicModuli,
    compliance_apply,
    dilatation_stress,
    incompatibility_stress,
    stiffness_apply,
)
from .field_algebra import (
    Codomain,
    FieldError,
    PointPart,
    SingularField,
    as_tensor,
    assemble,
    component,
    curl,
    derivative,
    eval_smooth,
    frobenius,
    grad,
    linear_combine,
    matmul,
    multiply,
    polynomial_field,
    restrict,
    scalar_identity,
    taylor_coefficients,
    transpose,
    truncate_taylor,
    zero_field,
)
from .quadrature import DEFAULT_SPEC, ExtrapolationError, QuadratureSpec

__all__ = [
    "CONVENTIONS",
    "Distortion",
    "GeneralizedForce",
    "cross_e3",
    "interaction_eshelby",
    "generalized_force",
    "peach_koehler",
    "dipole_force_couple",
    "dipole_pair_forces",
    "dilation_force",
    "dilation_density",
    "dipole_density",
    "skew_for_density",
    "dislocation_distortion",
    "dipole_distortion",
    "dilation_distortion",
    "smooth_distortion",
    "airy_stress",
    "stress_at_origin",
    "force_loop_oracle",
    "loop_integral_normal",
]

CONVENTIONS = ("paper", "right-hand")


def _check_convention(convention: str):
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")


def cross_e3(v, convention: str = "paper") -> tuple:
    """v x e_3 for a plane vector."""
    _check_convention(convention)
    v1, v2 = v
    return (-v2, v1) if convention == "paper" else (v2, -v1)


@dataclass(frozen=True)
class Distortion:
    """beta = E + a (e_1 x e_2 - e_2 x e_1) with E symmetric and a scalar."""

    strain: SingularField
    skew: SingularField | None = None

    def __post_init__(self):
        if self.strain.codomain is not Codomain.SYM_TENSOR:
            raise FieldError("strain must be a sym-tensor field")
        skew = self.skew
        if skew is None:
            skew = zero_field("scalar", self.strain.domain_radius, self.strain.rho)
            object.__setattr__(self, "skew", skew)
        if skew.codomain is not Codomain.SCALAR:
            raise FieldError("skew part must be scalar")

    @property
    def beta(self) -> SingularField:
        W = assemble("tensor", {(0, 1): self.skew, (1, 0): -self.skew})
        return linear_combine([(1, as_tensor(self.strain)), (1, W)])

    def dislocation_density(self) -> SingularField:
        return curl(self.beta)


@dataclass(frozen=True)
class GeneralizedForce:
    """F = sum_alpha F^alpha d^alpha delta_O."""

    entries: PointPart

    def coefficient(self, alpha) -> tuple:
        return tuple(self.entries.coefficient(alpha, (i,)) for i in range(2))

    @property
    def order(self) -> int:
        return self.entries.order

    @property
    def force(self) -> tuple:
        return self.coefficient((0, 0))

    @property
    def couple(self) -> dict:
        return {alpha: self.coefficient(alpha) for alpha in ((1, 0), (0, 1))}

    def to_record(self) -> dict:
        out = {}
        for (comp, alpha), c in sorted(self.entries.entries.items()):
            out.setdefault(f"{alpha[0]},{alpha[1]}", ["0", "0"])[comp[0]] = str(c)
        return out


def _smooth_near_O(F: SingularField, what: str):
    try:
        taylor_coefficients(F)
    except FieldError as exc:
        raise FieldError(f"{what} must be smooth at O: {exc}") from None


def interaction_eshelby(
    beta1: Distortion,
    sigma1: SingularField,
    beta2: Distortion,
    sigma2: SingularField,
    moduli: IsotropicModuli,
    truncation_order: int | None = None,
) -> SingularField:
    """J = 1/2 <C b1, b2> I - b2^T s1 + 1/2 <C b2, b1> I - b1^T s2.

    ``beta2`` and ``sigma2`` must be polynomial near O.  With
    ``truncation_order`` their Taylor expansions are cut at that degree.
    """
    _smooth_near_O(beta2.beta, "beta2")
    _smooth_near_O(sigma2, "sigma2")
    b1, b2 = beta1.beta, beta2.beta
    if truncation_order is not None:
        b2, _ = truncate_taylor(b2, truncation_order)
        sigma2, _ = truncate_taylor(sigma2, truncation_order)
    C1 = as_tensor(stiffness_apply(beta1.strain, moduli))
    C2 = stiffness_apply(beta2.strain, moduli)
    if truncation_order is not None:
        C2, _ = truncate_taylor(C2, truncation_order)
    C2 = as_tensor(C2)
    half = Fraction(1, 2)
    w = linear_combine([(half, frobenius(C1, b2)), (half, frobenius(C2, b1))])
    return linear_combine(
        [
            (1, scalar_identity(w, "tensor")),
            (-1, matmul(transpose(b2), as_tensor(sigma1))),
            (-1, matmul(transpose(b1), as_tensor(sigma2))),
        ]
    )


def _cross_field(v: SingularField, convention: str) -> SingularField:
    _check_convention(convention)
    v1, v2 = component(v, (0,)), component(v, (1,))
    if convention == "paper":
        return assemble("vector", {(0,): -v2, (1,): v1})
    return assemble("vector", {(0,): v2, (1,): -v1})


def generalized_force(
    A: SingularField, sigma2: SingularField, convention: str = "paper", truncation_order: int | None = None
) -> GeneralizedForce:
    """(sigma_2 A) x e_3 for a point-supported dislocation density A.

    sigma_2 is Taylor-expanded to ``truncation_order`` (default order(A) + 2);
    monomials of degree above order(A) annihilate every d^alpha delta_O with
    |alpha| <= order(A), and the dropped remainder is checked to vanish
    exactly against A.
    """
    if A.codomain is not Codomain.VECTOR:
        raise FieldError("dislocation density must be a vector field")
    if A.smooth:
        raise FieldError("dislocation density must be supported at O")
    _smooth_near_O(sigma2, "sigma2")
    if A.point_part.order < 0:
        return GeneralizedForce(PointPart("vector"))
    order = A.point_part.order + 2 if truncation_order is None else truncation_order
    kept, _ = truncate_taylor(sigma2, max(order, 0))
    product = matmul(as_tensor(kept), A)
    dropped = linear_combine([(1, sigma2), (-1, kept)])
    if not matmul(as_tensor(dropped), A).is_zero():
        raise FieldError("Taylor truncation order too low for this dislocation density")
    F = _cross_field(product, convention)
    return GeneralizedForce(F.point_part)


def _vec(v) -> tuple:
    v = tuple(as_coef(x) for x in v)
    if len(v) != 2:
        raise ValueError("expected a plane vector")
    return v


def _mat(s) -> tuple:
    return tuple(tuple(as_coef(x) for x in row) for row in s)


def peach_koehler(b, sigma0, convention: str = "paper") -> tuple:
    """(sigma_0 b) x e_3 with sigma_0 a constant 2x2 stress."""
    b = _vec(b)
    s = _mat(sigma0)
    sb = tuple(s[i][0] * b[0] + s[i][1] * b[1] for i in range(2))
    return cross_e3(sb, convention)


def _grad_stress_at_origin(sigma2: SingularField) -> dict:
    """{(i, j, k): d_k sigma_ij(O)} as Coef."""
    coeffs = taylor_coefficients(as_tensor(sigma2))
    out = {}
    for (i, j), poly in coeffs.items():
        out[(i, j, 0)] = poly.get((1, 0), Coef())
        out[(i, j, 1)] = poly.get((0, 1), Coef())
    return out


def stress_at_origin(sigma2: SingularField) -> tuple:
    """sigma_2(O) as a nested tuple of Coef."""
    coeffs = taylor_coefficients(as_tensor(sigma2))
    return tuple(tuple(coeffs[(i, j)].get((0, 0), Coef()) for j in range(2)) for i in range(2))


def dipole_density(b, v, domain_radius: float = 1.0, rho=None) -> SingularField:
    """A = b <grad delta_O, v>."""
    b, v = _vec(b), _vec(v)
    point = {}
    for i in range(2):
        for k, alpha in enumerate(((1, 0), (0, 1))):
            c = b[i] * v[k]
            if c:
                point[((i,), alpha)] = c
    return SingularField("vector", (), point, domain_radius, rho)


def dipole_force_couple(b, v, sigma2: SingularField, convention: str = "paper") -> tuple:
    """(force, couple) on a dislocation dipole A = b <grad delta_O, v>.

    force = -(grad sigma_2(O) (b x v)) x e_3; couple maps alpha in
    {(1,0), (0,1)} to the coefficient of d^alpha delta_O.
    """
    b, v = _vec(b), _vec(v)
    g = _grad_stress_at_origin(sigma2)
    t = tuple(sum((g[(i, j, k)] * b[j] * v[k] for j in range(2) for k in range(2)), Coef()) for i in range(2))
    force = tuple(-c for c in cross_e3(t, convention))
    s0 = stress_at_origin(sigma2)
    sb = cross_e3(tuple(s0[i][0] * b[0] + s0[i][1] * b[1] for i in range(2)), convention)
    couple = {alpha: (sb[0] * v[k], sb[1] * v[k]) for k, alpha in enumerate(((1, 0), (0, 1)))}
    return force, couple


def _eval_tensor_at(sigma2: SingularField, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    r = float(np.hypot(*x))
    if r == 0.0:
        s0 = stress_at_origin(sigma2)
        return np.array([[float(c) for c in row] for row in s0])
    vals = eval_smooth(as_tensor(sigma2), r, math.atan2(x[1], x[0]))
    return np.asarray(vals, dtype=float).reshape(2, 2)


def dipole_pair_forces(b, v, sigma2: SingularField, h: float, convention: str = "paper") -> dict:
    """Forces on the pair A_h = (b/h) delta_O - (b/h) delta_{O + h v}.

    Returns f1, f2, the net force f1 + f2 and the order-1 multipole
    coefficients -h f2 v_k of f1 delta_O + f2 delta_{O+hv} expanded at O.
    """
    if h <= 0:
        raise ValueError("separation must be positive")
    b = np.array([float(x) for x in _vec(b)])
    v = np.array([float(x) for x in _vec(v)])
    s0 = _eval_tensor_at(sigma2, (0.0, 0.0))
    sh = _eval_tensor_at(sigma2, h * v)
    f1 = np.array(cross_e3(s0 @ b, convention)) / h
    f2 = -np.array(cross_e3(sh @ b, convention)) / h
    couple = {alpha: -h * f2 * v[k] for k, alpha in enumerate(((1, 0), (0, 1)))}
    return {"f1": f1, "f2": f2, "net": f1 + f2, "couple": couple}


def dilation_density(a, domain_radius: float = 1.0, rho=None) -> SingularField:
    """A = (a/2)(e_1 x e_2 - e_2 x e_1) grad delta_O."""
    half = as_coef(a) * Fraction(1, 2)
    point = {((0,), (0, 1)): half, ((1,), (1, 0)): -half}
    return SingularField("vector", (), point, domain_radius, rho)


def dilation_force(a, sigma2: SingularField, normalization: str = "loop") -> tuple:
    """Force on a centre of dilation with A = (a/2) W grad delta_O.

    ``"loop"`` returns (a/2) grad(tr sigma_2)(O), the value of the loop
    integral of J n; ``"paper"`` returns a grad(tr sigma_2)(O), twice that.
    """
    if normalization not in ("loop", "paper"):
        raise ValueError(f"normalization must be 'loop' or 'paper', got {normalization!r}")
    a = as_coef(a)
    if normalization == "loop":
        a = a * Fraction(1, 2)
    g = _grad_stress_at_origin(sigma2)
    return tuple(a * (g[(0, 0, k)] + g[(1, 1, k)]) for k in range(2))


# builders for the isolated-defect fields used by the loop oracle


def _homogeneous_parts(F: SingularField) -> dict:
    parts = {}
    for key, c in F.smooth.items():
        comp, k, p, n, s = key
        if p:
            raise FieldError("log terms have no homogeneous potential")
        parts.setdefault(k, {})[key] = c
    return parts


def _gradient_point_potential(R: SingularField) -> SingularField:
    """Point-supported scalar c with grad c = R, or raise."""
    if R.smooth:
        raise FieldError("remainder is not point supported")
    point = {}
    for (comp, alpha), c in R.point.items():
        if comp == (0,) and alpha[0] >= 1:
            point[((), (alpha[0] - 1, alpha[1]))] = c
        elif comp == (1,) and alpha[0] == 0 and alpha[1] >= 1:
            point[((), (0, alpha[1] - 1))] = c
        elif comp not in ((0,), (1,)):
            raise FieldError("unexpected component")
    c = SingularField("scalar", (), point, R.domain_radius, R.rho)
    if not linear_combine([(1, grad(c)), (-1, R)]).is_zero():
        raise FieldError("remainder is not a gradient of a point-supported scalar")
    return c


def skew_for_density(strain: SingularField, A: SingularField | None = None) -> SingularField:
    """Scalar a with Curl(E + a W) = A, where Curl(a W) = grad a.

    The smooth part of grad a = -curl E is integrated degree by degree using
    Euler's identity a_k = (x . g_k)/(k + 1) for g_k homogeneous of degree k;
    the point-supported remainder must itself be a gradient.
    """
    R = strain.domain_radius
    c = curl(as_tensor(strain))
    g = restrict(c)
    x = polynomial_field("scalar", {(): {(1, 0): 1}}, R, strain.rho)
    y = polynomial_field("scalar", {(): {(0, 1): 1}}, R, strain.rho)
    pieces = [(0, zero_field("scalar", R, strain.rho))]
    for k, terms in sorted(_homogeneous_parts(g).items()):
        if k + 1 == 0:
            raise FieldError("curl of the strain has a 1/r part; no single-valued skew potential")
        gk = SingularField._raw(Codomain.VECTOR, terms, {}, R, strain.rho)
        dot = linear_combine([(-1, multiply(x, component(gk, (0,)))), (-1, multiply(y, component(gk, (1,))))])
        pieces.append((Fraction(1, k + 1), dot))
    a_smooth = linear_combine(pieces)
    target = A if A is not None else zero_field("vector", R, strain.rho)
    rem = linear_combine([(1, target), (-1, c), (-1, grad(a_smooth))])
    return linear_combine([(1, a_smooth), (1, _gradient_point_potential(rem))])


def dislocation_distortion(b, moduli: IsotropicModuli, domain_radius: float = 1.0, rho=None) -> tuple:
    """(beta_1, sigma_1) for an isolated dislocation with Curl beta_1 = b delta_O."""
    b1, b2 = _vec(b)
    s = incompatibility_stress(moduli, domain_radius, rho)
    sigma = linear_combine([(0, s), (b2, derivative(s, (1, 0))), (-b1, derivative(s, (0, 1)))])
    strain = compliance_apply(sigma, moduli)
    A = SingularField("vector", (), {((0,), (0, 0)): b1, ((1,), (0, 0)): b2}, domain_radius, rho)
    return Distortion(strain, skew_for_density(strain, A)), sigma


def dipole_distortion(b, v, moduli: IsotropicModuli, domain_radius: float = 1.0, rho=None) -> tuple:
    """(beta_1, sigma_1) with Curl beta_1 = b <grad delta_O, v>."""
    beta, sigma = dislocation_distortion(b, moduli, domain_radius, rho)
    v = _vec(v)
    alphas = ((1, 0), (0, 1))
    strain = linear_combine([(0, beta.strain)] + [(v[k], derivative(beta.strain, alphas[k])) for k in range(2)])
    skew = linear_combine([(0, beta.skew)] + [(v[k], derivative(beta.skew, alphas[k])) for k in range(2)])
    sigma = linear_combine([(0, sigma)] + [(v[k], derivative(sigma, alphas[k])) for k in range(2)])
    return Distortion(strain, skew), sigma


def dilation_distortion(a, moduli: IsotropicModuli, domain_radius: float = 1.0, rho=None) -> tuple:
    """(beta_1, sigma_1) with Curl beta_1 = (a/2) W grad delta_O and N = -(a/2) Lap delta_O."""
    E, nu = moduli.youngs, moduli.poisson
    scale = -as_coef(a) * Fraction(1, 2) / as_coef(2 * (nu * nu - 1) / E)
    sigma = dilatation_stress(moduli, domain_radius, rho) * scale
    strain = compliance_apply(sigma, moduli)
    A = dilation_density(a, domain_radius, rho)
    return Distortion(strain, skew_for_density(strain, A)), sigma


def airy_stress(phi: dict, domain_radius: float = 1.0, rho=None) -> SingularField:
    """Equilibrated stress from an Airy function given as {(a, b): c} monomials."""
    def d(poly, i):
        out = {}
        for (p, q), c in poly.items():
            if i == 0 and p:
                out[(p - 1, q)] = out.get((p - 1, q), 0) + p * as_coef(c)
            if i == 1 and q:
                out[(p, q - 1)] = out.get((p, q - 1), 0) + q * as_coef(c)
        return out

    s11 = d(d(phi, 1), 1)
    s22 = d(d(phi, 0), 0)
    s12 = {ab: -c for ab, c in d(d(phi, 0), 1).items()}
    return polynomial_field("sym-tensor", {(0, 0): s11, (1, 1): s22, (0, 1): s12, (1, 0): s12}, domain_radius, rho)


def smooth_distortion(sigma2: SingularField, moduli: IsotropicModuli) -> Distortion:
    """Compatible polynomial distortion (Curl beta_2 = 0) carrying stress sigma2."""
    _smooth_near_O(sigma2, "sigma2")
    strain = compliance_apply(sigma2, moduli)
    return Distortion(strain, skew_for_density(strain))


def loop_integral_normal(J: SingularField, eps: float, nodes: int = 256) -> np.ndarray:
    """Trapezoid rule for the integral of J n over |x| = eps (n = e_r)."""
    theta = 2 * np.pi * np.arange(nodes) / nodes
    vals = np.asarray(eval_smooth(as_tensor(restrict(J)), np.full(nodes, eps), theta), dtype=float)
    n = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    Jn = np.einsum("tij,tj->ti", vals, n)
    return Jn.sum(axis=0) * (2 * np.pi / nodes) * eps


def force_loop_oracle(
    J: SingularField, spec: QuadratureSpec | None = None, levels: int = 8, nodes: int = 256, rtol: float = 1e-9
) -> np.ndarray:
    """Limit as eps -> 0 of the loop integral of J n, from an eps ladder.

    Values on the ladder are fitted by c_0 + sum_d c_d eps^d (d = 1..3); a
    poor fit raises ExtrapolationError.
    """
    spec = spec or DEFAULT_SPEC
    if J.codomain.rank != 2:
        raise FieldError("force_loop_oracle needs a tensor field")
    if restrict(J).is_zero():
        return np.zeros(2)
    eps = J.domain_radius / 2 ** (np.arange(levels) + 2)
    vals = np.array([loop_integral_normal(J, e, nodes) for e in eps])
    basis = np.stack([eps**d for d in range(4)], axis=1)
    coef, *_ = np.linalg.lstsq(basis, vals, rcond=None)
    resid = np.max(np.abs(basis @ coef - vals))
    scale = max(1.0, float(np.max(np.abs(vals))))
    if resid > rtol * scale:
        raise ExtrapolationError(f"loop integral ladder does not fit a regular expansion (residual {resid:.2e})")
    return coef[0]
