"""Isotropic plane-strain elasticity with point sources.

Closed-form stresses for a unit point force (Kelvin), a unit point
incompatibility, a center of dilatation and a force dipole, plus the general
superposition ``sigma = sum B^alpha d^alpha sigma_force + sum N^alpha d^alpha sigma_incompat``
with every derivative taken distributionally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .coef import Coef, as_coef, as_fraction
from .field_algebra import (
    Codomain,
    FieldError,
    PointPart,
    SingularField,
    SmoothTerm,
    derivative,
    linear_combine,
    rotate_quarter,
    scalar_identity,
    trace,
    zero_field,
)

__all__ = [
    "IsotropicModuli",
    "PointSourceProblem",
    "compliance_apply",
    "stiffness_apply",
    "kelvin_stress",
    "incompatibility_stress",
    "dilatation_stress",
    "dipole_body_force_stress",
    "general_point_solution",
    "verify_solution",
]


@dataclass(frozen=True)
class IsotropicModuli:
    """Young's modulus and Poisson ratio, stored as exact rationals."""

    youngs: Fraction = Fraction(1)
    poisson: Fraction = Fraction(1, 4)

    def __post_init__(self):
        E = as_fraction(self.youngs)
        nu = as_fraction(self.poisson)
        if E <= 0:
            raise ValueError(f"Young's modulus must be positive, got {self.youngs}")
        if not -1 < nu < Fraction(1, 2):
            raise ValueError(f"Poisson ratio must lie in (-1, 1/2), got {self.poisson}")
        object.__setattr__(self, "youngs", E)
        object.__setattr__(self, "poisson", nu)


def _sym_check(sigma: SingularField):
    if sigma.codomain is not Codomain.SYM_TENSOR:
        raise FieldError("expected a sym-tensor field")


def _identity_like(sigma: SingularField, f: SingularField) -> SingularField:
    return scalar_identity(f, "sym-tensor")


def compliance_apply(sigma: SingularField, m: IsotropicModuli) -> SingularField:
    """E = ((1+nu)/E) sigma - (nu (1+nu)/E) tr(sigma) I."""
    _sym_check(sigma)
    E, nu = m.youngs, m.poisson
    a = (1 + nu) / E
    b = -nu * (1 + nu) / E
    return linear_combine([(a, sigma), (b, _identity_like(sigma, trace(sigma)))])


def stiffness_apply(strain: SingularField, m: IsotropicModuli) -> SingularField:
    """sigma = (E/(1+nu)) (strain + nu/(1-2nu) tr(strain) I)."""
    _sym_check(strain)
    E, nu = m.youngs, m.poisson
    a = E / (1 + nu)
    b = a * nu / (1 - 2 * nu)
    return linear_combine([(a, strain), (b, _identity_like(strain, trace(strain)))])


def kelvin_stress(m: IsotropicModuli, domain_radius: float = 1.0, rho=None) -> SingularField:
    """Stress of a unit point force along e_1: Div sigma + delta_O e_1 = 0."""
    nu = m.poisson
    pref = Coef.pi_power(-1, (1 - 2 * nu) / (4 * (1 - nu)))
    terms = [
        SmoothTerm(pref * ((2 * nu - 3) / (1 - 2 * nu)), -1, 0, 1, "cos", ("r", "r")),
        SmoothTerm(pref, -1, 0, 1, "sin", ("r", "theta")),
        SmoothTerm(pref, -1, 0, 1, "sin", ("theta", "r")),
        SmoothTerm(pref, -1, 0, 1, "cos", ("theta", "theta")),
    ]
    return SingularField("sym-tensor", terms, None, domain_radius, rho)


def incompatibility_stress(m: IsotropicModuli, domain_radius: float = 1.0, rho=None) -> SingularField:
    """Stress of a unit point incompatibility: Div sigma = 0, CurlCurl C^-1 sigma = delta_O."""
    E, nu = m.youngs, m.poisson
    pref = Coef.pi_power(-1, E / (8 * (1 - nu * nu)))
    terms = [
        SmoothTerm(pref * 2, 0, 1, 0, "cos", ("r", "r")),
        SmoothTerm(pref, 0, 0, 0, "cos", ("r", "r")),
        SmoothTerm(pref * 2, 0, 1, 0, "cos", ("theta", "theta")),
        SmoothTerm(pref * 3, 0, 0, 0, "cos", ("theta", "theta")),
    ]
    return SingularField("sym-tensor", terms, None, domain_radius, rho)


def _dilatation_smooth(domain_radius, rho):
    c = Coef.pi_power(-1)
    terms = [
        SmoothTerm(-c, -2, 0, 0, "cos", ("r", "r")),
        SmoothTerm(c, -2, 0, 0, "cos", ("theta", "theta")),
    ]
    return SingularField("sym-tensor", terms, None, domain_radius, rho)


def _delta_identity(c, domain_radius, rho):
    c = as_coef(c)
    point = {((0, 0), (0, 0)): c, ((1, 1), (0, 0)): c}
    return SingularField("sym-tensor", (), point, domain_radius, rho)


def dilatation_stress(m: IsotropicModuli, domain_radius: float = 1.0, rho=None) -> SingularField:
    """(1/(pi r^2))(-e_r e_r + e_t e_t) - delta_O I, sourced by N = (2(nu^2-1)/E) Lap delta_O."""
    return _dilatation_smooth(domain_radius, rho) + _delta_identity(-1, domain_radius, rho)


def dipole_body_force_stress(m: IsotropicModuli, domain_radius: float = 1.0, rho=None) -> SingularField:
    """Same smooth part plus (1/(1-2nu)) delta_O I, balancing B = (2(nu-1)/(1-2nu)) grad delta_O."""
    c = 1 / (1 - 2 * m.poisson)
    return _dilatation_smooth(domain_radius, rho) + _delta_identity(c, domain_radius, rho)


@dataclass(frozen=True)
class PointSourceProblem:
    """Point-supported body force B (vector) and incompatibility N (scalar)."""

    body_force: PointPart = field(default_factory=lambda: PointPart("vector"))
    incompatibility: PointPart = field(default_factory=lambda: PointPart("scalar"))
    moduli: IsotropicModuli = field(default_factory=IsotropicModuli)

    def __post_init__(self):
        if self.body_force.codomain is not Codomain.VECTOR:
            raise FieldError("body force must be vector-valued")
        if self.incompatibility.codomain is not Codomain.SCALAR:
            raise FieldError("incompatibility must be scalar-valued")

    def body_force_field(self, domain_radius: float = 1.0, rho=None) -> SingularField:
        return SingularField("vector", (), self.body_force, domain_radius, rho)

    def incompatibility_field(self, domain_radius: float = 1.0, rho=None) -> SingularField:
        return SingularField("scalar", (), self.incompatibility, domain_radius, rho)


def general_point_solution(p: PointSourceProblem, domain_radius: float = 1.0, rho=None) -> SingularField:
    """sum B_i^alpha d^alpha sigma_force(e_i) + sum N^alpha d^alpha sigma_incompat.

    The e_2 point-force solution is the e_1 solution rotated by pi/2.
    """
    m = p.moduli
    s1 = kelvin_stress(m, domain_radius, rho)
    basis = {(0,): s1, (1,): rotate_quarter(s1)}
    s2 = incompatibility_stress(m, domain_radius, rho)
    parts = [(0, zero_field("sym-tensor", domain_radius, rho))]
    for (comp, alpha), c in sorted(p.body_force.entries.items()):
        parts.append((c, derivative(basis[comp], alpha)))
    for (_, alpha), c in sorted(p.incompatibility.entries.items()):
        parts.append((c, derivative(s2, alpha)))
    return linear_combine(parts)


def verify_solution(sigma: SingularField, p: PointSourceProblem, spec=None):
    """(equilibrium report, incompatibility report) for Div sigma + B = 0 and CurlCurl C^-1 sigma = N."""
    from .checkers import check_equilibrium, check_incompatibility

    R, rho = sigma.domain_radius, sigma.rho
    eq = check_equilibrium(sigma, p.body_force_field(R, rho), spec=spec)
    inc = check_incompatibility(compliance_apply(sigma, p.moduli), p.incompatibility_field(R, rho), spec=spec)
    return eq, inc
