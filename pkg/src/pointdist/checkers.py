"""Equilibrium, compatibility and incompatibility checks with residual reports.

Each check combines exact symbolic residuals from the field algebra with the
same conditions evaluated numerically by the pairing oracle against the w^alpha
test functions.  A condition passes only when the symbolic value vanishes
exactly and the oracle value is within ``1e-8 (1 + scale)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .coef import Coef, as_coef
from .field_algebra import (
    Codomain,
    FieldError,
    PointPart,
    SingularField,
    SmoothTerm,
    as_tensor,
    component,
    curl,
    curl_curl,
    degree_of_divergence,
    div,
    eval_smooth,
    laplacian,
    linear_combine,
    multi_indices,
    restrict,
    scalar_identity,
    sym,
    zero_field,
)
from .quadrature import DEFAULT_SPEC, QuadratureSpec, pair
from .testfn import TestFunction, make_w_alpha
from .trig import COS, SIN, trig_mul

__all__ = [
    "Condition",
    "CheckReport",
    "DefectCharges",
    "SATISFIED",
    "VIOLATED",
    "INSUFFICIENT",
    "ORACLE_RTOL",
    "check_equilibrium",
    "check_equilibrium_restricted",
    "loop_integral_traction",
    "loop_integral_traction_exact",
    "check_compatibility",
    "cesaro_integral",
    "cesaro_parts",
    "cesaro_integral_quadrature",
    "identify_point_defect",
    "defect_strain",
    "check_incompatibility",
    "point_antiderivative_div",
    "point_antiderivative_curl",
    "point_antiderivative_curlcurl",
    "incompatibility_from_sources",
]

SATISFIED = "satisfied"
VIOLATED = "violated"
INSUFFICIENT = "insufficient-information"
ORACLE_RTOL = 1e-8


@dataclass(frozen=True)
class Condition:
    name: str
    residual: float
    tolerance: float
    passed: bool
    symbolic: str | None = None

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "symbolic": self.symbolic,
        }


@dataclass(frozen=True)
class CheckReport:
    check: str
    verdict: str
    conditions: tuple
    degree_report: dict = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return self.verdict == SATISFIED

    def failed(self) -> list:
        return [c for c in self.conditions if not c.passed]

    def to_text(self) -> str:
        lines = [f"check: {self.check}", f"verdict: {self.verdict}"]
        for key, val in self.degree_report.items():
            lines.append(f"degree {key}: {_fmt(val)}")
        for c in self.conditions:
            sym_txt = f" symbolic={c.symbolic}" if c.symbolic is not None else ""
            lines.append(
                f"  [{'pass' if c.passed else 'FAIL'}] {c.name}: residual={c.residual:.3e} tol={c.tolerance:.1e}{sym_txt}"
            )
        return "\n".join(lines)

    def to_record(self) -> dict:
        return {
            "check": self.check,
            "verdict": self.verdict,
            "degrees": {k: _fmt(v) for k, v in self.degree_report.items()},
            "conditions": [c.to_record() for c in self.conditions],
        }


def _fmt(v):
    if isinstance(v, float):
        if math.isinf(v):
            return "-inf" if v < 0 else "inf"
        return v
    return v


def _verdict(conditions) -> str:
    return SATISFIED if all(c.passed for c in conditions) else VIOLATED


def _symbolic_condition(name: str, value: Coef) -> Condition:
    return Condition(name, abs(float(value)), 0.0, not value, str(value))


def _smooth_condition(name: str, F: SingularField) -> Condition:
    residual = max((abs(float(c)) for c in F.smooth.values()), default=0.0)
    desc = f"{len(F.smooth)} nonzero terms"
    return Condition(name, residual, 0.0, not F.smooth, desc)


def _oracle_condition(name: str, symbolic: Coef, contributions: Iterable[float]) -> Condition:
    contributions = list(contributions)
    value = float(sum(contributions))
    scale = max((abs(c) for c in contributions), default=0.0)
    tol = ORACLE_RTOL * (1.0 + scale)
    return Condition(name, abs(value), tol, (not symbolic) and abs(value) <= tol, str(symbolic))


def _order(deg: float, shift: int) -> int:
    bound = deg + shift
    return -1 if bound == -math.inf else int(math.floor(bound + 1e-12))


def _test_radius(F: SingularField) -> float:
    return F.domain_radius / 2


def _grad_test(w: TestFunction, i: int) -> dict:
    g1, g2 = w.gradient()
    return {(i, 0): g1, (i, 1): g2}


def _A_hessian_test(w: TestFunction) -> dict:
    (h11, h12), (h21, h22) = w.hessian()
    return {(0, 0): h22, (1, 1): h11, (0, 1): -h21, (1, 0): -h12}


def _as_point_field(B, codomain, like: SingularField) -> SingularField:
    if B is None:
        return zero_field(codomain, like.domain_radius, like.rho)
    if isinstance(B, PointPart):
        return SingularField(codomain, (), B, like.domain_radius, like.rho)
    return B


def check_equilibrium(
    sigma: SingularField, B: SingularField | PointPart | None = None, spec: QuadratureSpec | None = None
) -> CheckReport:
    """Local equilibrium conditions for Div sigma + B = 0.

    Conditions: the smooth residual vanishes identically; for |alpha| <=
    deg(sigma) + 1 and i = 1, 2 the pairing -sigma(grad(w^alpha e_i)) +
    B(w^alpha e_i) vanishes; deg(B) <= deg(sigma) + 1.
    """
    spec = spec or DEFAULT_SPEC
    if sigma.codomain.rank != 2:
        raise FieldError("sigma must be a tensor field")
    B = _as_point_field(B, "vector", sigma)
    if B.codomain is not Codomain.VECTOR:
        raise FieldError("body force must be a vector field")
    residual = linear_combine([(1, div(sigma)), (1, B)])
    conds = [_smooth_condition("smooth residual div(sigma)+B == 0", restrict(residual))]
    deg_s, deg_b = degree_of_divergence(sigma), degree_of_divergence(B)
    radius = _test_radius(sigma)
    for alpha in multi_indices(_order(deg_s, 1)):
        w = make_w_alpha(alpha, radius)
        for i in range(2):
            s_part = -pair(sigma, _grad_test(w, i), spec)
            b_part = pair(B, {(i,): w}, spec)
            conds.append(
                _oracle_condition(
                    f"pairing alpha={alpha} e{i + 1}: -sigma(grad(w e)) + B(w e) == 0",
                    residual.point_coefficient(alpha, (i,)),
                    [s_part, b_part],
                )
            )
    conds.append(Condition("deg(B) <= deg(sigma) + 1", max(0.0, deg_b - deg_s - 1), 0.0, deg_b <= deg_s + 1))
    return CheckReport("equilibrium", _verdict(conds), tuple(conds), {"sigma": deg_s, "B": deg_b})


def _circle_parts(f: SingularField, weight: dict, extra_power: int = 1) -> dict:
    """Closed-form integral over |y| = eps of f(y) * weight(theta) * eps^(extra_power - 1) dl.

    Returns ``{(eps power, log power): Coef}`` so callers can see whether the
    result depends on eps.  ``weight`` is a trig polynomial.
    """
    out = {}
    for (_, k, p, n, s), c in f.smooth.items():
        prod = trig_mul({(n, s): Fraction(1)}, weight)
        moment = 2 * prod.get((0, COS), 0)
        if moment:
            key = (k + extra_power, p)
            out[key] = out.get(key, Coef()) + c * Coef.pi_power(1, moment)
    return {key: v for key, v in out.items() if v}


def _eval_parts(parts: dict, eps: float) -> float:
    return float(sum(float(c) * eps**e * math.log(eps) ** p for (e, p), c in parts.items()))


_ER = ({(1, COS): Fraction(1)}, {(1, SIN): Fraction(1)})
_ETHETA = ({(1, SIN): Fraction(-1)}, {(1, COS): Fraction(1)})


def _traction_parts(sigma0: SingularField) -> list:
    if sigma0.codomain.rank != 2:
        raise FieldError("traction needs a tensor field")
    out = []
    for i in range(2):
        acc = {}
        for j in range(2):
            for key, c in _circle_parts(component(sigma0, (i, j)), _ER[j]).items():
                acc[key] = acc.get(key, Coef()) + c
        out.append({k: v for k, v in acc.items() if v})
    return out


def loop_integral_traction(sigma0: SingularField, eps: float) -> np.ndarray:
    """Integral of sigma0 e_r over the circle |x| = eps, by Fourier orthogonality."""
    if not 0 < eps < sigma0.domain_radius:
        raise ValueError("eps must lie inside the domain")
    return np.array([_eval_parts(parts, eps) for parts in _traction_parts(restrict(sigma0))])


def loop_integral_traction_exact(sigma0: SingularField) -> tuple:
    """Exact eps-independent traction loop integral; raises if it depends on eps."""
    out = []
    for parts in _traction_parts(restrict(sigma0)):
        extra = {k: v for k, v in parts.items() if k != (0, 0)}
        if extra:
            raise FieldError(f"loop integral depends on eps through {sorted(extra)}")
        out.append(parts.get((0, 0), Coef()))
    return tuple(out)


def check_equilibrium_restricted(
    sigma0: SingularField, B_point: PointPart | SingularField | None = None, spec: QuadratureSpec | None = None
) -> CheckReport:
    """Conditions on the restriction: div sigma0 = 0 away from O and the
    traction loop integral equals -b^(0,0).  Sufficient only when deg(sigma0) < 0.
    """
    sigma0 = restrict(sigma0)
    B = _as_point_field(B_point, "vector", sigma0)
    if B.smooth:
        raise FieldError("B must be supported at O")
    conds = [_smooth_condition("div(sigma0) == 0 on the punctured disk", restrict(div(sigma0)))]
    deg_s, deg_b = degree_of_divergence(sigma0), degree_of_divergence(B)
    parts = _traction_parts(sigma0)
    for i in range(2):
        depends = {k: v for k, v in parts[i].items() if k != (0, 0)}
        value = parts[i].get((0, 0), Coef()) + B.point_coefficient((0, 0), (i,))
        if depends:
            conds.append(Condition(f"loop traction e{i + 1} independent of eps", 1.0, 0.0, False, str(depends)))
        conds.append(_symbolic_condition(f"loop traction e{i + 1} + b^(0,0) == 0", value))
    conds.append(Condition("deg(B) <= deg(sigma0) + 1", max(0.0, deg_b - deg_s - 1), 0.0, deg_b <= deg_s + 1))
    if not all(c.passed for c in conds):
        verdict = VIOLATED
    elif deg_s < 0:
        verdict = SATISFIED
    else:
        verdict = INSUFFICIENT
    return CheckReport("equilibrium-restricted", verdict, tuple(conds), {"sigma0": deg_s, "B": deg_b})


# compatibility


def cesaro_parts(E0: SingularField, cross: str = "right-hand") -> tuple:
    """Exact constant part K and rotation coefficient s of the Cesaro loop integral.

    The integral of E t + <Curl E, t> (y - x) x e_3 over |y| = eps equals
    ``K + s * (e_3 x x)``.  Each of the three returned entries (K_1, K_2, s)
    is a dict ``{(eps power, log power): Coef}``.  ``cross`` selects the sign
    of v x e_3: ``"right-hand"`` gives (v_2, -v_1) and ``"paper"`` the opposite.
    """
    E0 = restrict(E0)
    if E0.codomain.rank != 2:
        raise FieldError("Cesaro integral needs a tensor field")
    c = curl(E0)
    # y x e_3 = eps * (e_r x e_3) = -/+ eps e_theta
    sgn = -1 if cross == "right-hand" else 1
    if cross not in ("right-hand", "paper"):
        raise ValueError(f"unknown cross-product convention {cross!r}")
    K = []
    for i in range(2):
        acc = {}
        for j in range(2):
            for key, v in _circle_parts(component(E0, (i, j)), _ETHETA[j]).items():
                acc[key] = acc.get(key, Coef()) + v
        for j in range(2):
            w = trig_mul(_ETHETA[j], _ETHETA[i])
            for key, v in _circle_parts(component(c, (j,)), w, extra_power=2).items():
                acc[key] = acc.get(key, Coef()) + v * sgn
        K.append({k: v for k, v in acc.items() if v})
    s = {}
    for j in range(2):
        for key, v in _circle_parts(component(c, (j,)), _ETHETA[j]).items():
            s[key] = s.get(key, Coef()) + v
    return K[0], K[1], {k: v for k, v in s.items() if v}


def _e3_cross(x, cross: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    right = np.array([-x[1], x[0]])
    return right if cross == "right-hand" else -right


def cesaro_integral(E0: SingularField, x, eps: float, cross: str = "right-hand") -> np.ndarray:
    """Loop integral over |y| = eps of E dy + <Curl E, dy> (y - x) x e_3."""
    E0 = restrict(E0)
    _require_compatible_smooth(E0)
    K1, K2, s = cesaro_parts(E0, cross)
    K = np.array([_eval_parts(K1, eps), _eval_parts(K2, eps)])
    return K + _eval_parts(s, eps) * _e3_cross(x, cross)


def cesaro_integral_quadrature(
    E0: SingularField, x, eps: float, nodes: int = 256, cross: str = "right-hand"
) -> np.ndarray:
    """Trapezoid-rule version of :func:`cesaro_integral` built from point values."""
    E0 = restrict(E0)
    theta = 2 * np.pi * np.arange(nodes) / nodes
    r = np.full(nodes, float(eps))
    E = np.asarray(eval_smooth(as_tensor(E0), r, theta), dtype=float)
    c = np.asarray(eval_smooth(curl(E0), r, theta), dtype=float)
    t = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)
    y = eps * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    d = y - np.asarray(x, dtype=float)
    d_cross = np.stack([d[:, 1], -d[:, 0]], axis=-1)
    if cross == "paper":
        d_cross = -d_cross
    dens = np.einsum("tij,tj->ti", E, t) + np.einsum("ti,ti->t", c, t)[:, None] * d_cross
    return dens.sum(axis=0) * (2 * np.pi * eps / nodes)


def _require_compatible_smooth(E0: SingularField):
    cc = restrict(curl_curl(E0))
    if cc.smooth:
        raise FieldError("curl curl of the strain does not vanish away from O")


@dataclass(frozen=True)
class DefectCharges:
    burgers: tuple
    disclination: Coef
    higher: PointPart | None = None
    higher_resolved: bool = True

    def to_record(self) -> dict:
        return {
            "burgers": [str(b) for b in self.burgers],
            "burgers_float": [float(b) for b in self.burgers],
            "disclination": str(self.disclination),
            "disclination_float": float(self.disclination),
            "higher": None
            if self.higher is None
            else {f"{a}": str(c) for (_, a), c in sorted(self.higher.entries.items())},
            "higher_resolved": self.higher_resolved,
        }


def _exact_eps_free(parts: dict, what: str) -> Coef:
    extra = {k: v for k, v in parts.items() if k != (0, 0)}
    if extra:
        raise FieldError(f"{what} depends on eps through {sorted(extra)}")
    return parts.get((0, 0), Coef())


def identify_point_defect(E: SingularField) -> DefectCharges:
    """Burgers vector and disclination charge from the Cesaro integral of the restriction.

    Multipoles of order >= 2 are read off CurlCurl E as given, but they are
    only determined by the restriction when deg(E0) < 0.
    """
    E0 = restrict(E)
    _require_compatible_smooth(E0)
    K1, K2, s = cesaro_parts(E0)
    burgers = (_exact_eps_free(K1, "Cesaro constant part"), _exact_eps_free(K2, "Cesaro constant part"))
    disc = _exact_eps_free(s, "Cesaro rotation part")
    N = curl_curl(E)
    higher = PointPart("scalar", {k: v for k, v in N.point.items() if sum(k[1]) >= 2})
    return DefectCharges(burgers, disc, higher, degree_of_divergence(E0) < 0)


def defect_strain(burgers=(0, 0), disclination=0, domain_radius: float = 1.0, rho=None) -> SingularField:
    """Strain whose incompatibility is disclination*delta_O + b_2 d_1 delta_O - b_1 d_2 delta_O.

    Uses sym((1/(2 pi r)) b x e_theta) + (s/(2 pi)) ln r I.
    """
    b1, b2 = (as_coef(b) for b in burgers)
    s = as_coef(disclination)
    inv2pi = Coef.pi_power(-1, Fraction(1, 2))
    terms = []
    for i, b in enumerate((b1, b2)):
        if b:
            terms.append(SmoothTerm(-b * inv2pi, -1, 0, 1, "sin", (i + 1, 1)))
            terms.append(SmoothTerm(b * inv2pi, -1, 0, 1, "cos", (i + 1, 2)))
    V = SingularField("tensor", terms, None, domain_radius, rho)
    out = sym(V)
    if s:
        L = SingularField("scalar", [SmoothTerm(s * inv2pi, 0, 1)], None, domain_radius, rho)
        out = out + scalar_identity(L)
    return out


def check_compatibility(E: SingularField, spec: QuadratureSpec | None = None) -> CheckReport:
    """Compatibility of a strain: CurlCurl E = 0.

    Conditions: curl curl of the smooth part vanishes; E(A grad^2 w^alpha) = 0
    for |alpha| <= deg(E) + 2.  For deg(E) < 0 the Cesaro loop integral of the
    restriction is reported as well (it must vanish).
    """
    spec = spec or DEFAULT_SPEC
    if E.codomain.rank != 2:
        raise FieldError("strain must be a tensor field")
    N = curl_curl(E)
    conds = [_smooth_condition("curl curl of smooth part == 0", restrict(N))]
    deg_e = degree_of_divergence(E)
    radius = _test_radius(E)
    for alpha in multi_indices(_order(deg_e, 2)):
        w = make_w_alpha(alpha, radius)
        val = pair(E, _A_hessian_test(w), spec)
        conds.append(_oracle_condition(f"pairing alpha={alpha}: E(A grad^2 w) == 0", N.point_coefficient(alpha), [val]))
    if deg_e < 0 and not conds[0].residual:
        K1, K2, s = cesaro_parts(E)
        for name, parts in (("Cesaro constant e1", K1), ("Cesaro constant e2", K2), ("Cesaro rotation", s)):
            conds.append(_symbolic_condition(f"{name} == 0", _sum_parts(parts)))
    return CheckReport("compatibility", _verdict(conds), tuple(conds), {"E": deg_e})


def _sum_parts(parts: dict) -> Coef:
    # eps-dependent pieces cannot cancel the eps-free part, so any nonzero entry is a failure
    total = Coef()
    for v in parts.values():
        total = total + Coef({p: abs(q) for p, q in v.terms})
    return total


def check_incompatibility(
    E: SingularField, N: SingularField | PointPart | None = None, spec: QuadratureSpec | None = None
) -> CheckReport:
    """Incompatibility conditions for CurlCurl E = N."""
    spec = spec or DEFAULT_SPEC
    if E.codomain.rank != 2:
        raise FieldError("strain must be a tensor field")
    N = _as_point_field(N, "scalar", E)
    if N.codomain is not Codomain.SCALAR:
        raise FieldError("incompatibility must be scalar")
    cc = curl_curl(E)
    residual = linear_combine([(1, cc), (-1, N)])
    conds = [
        _smooth_condition("restricted curl curl(E0) - N0 == 0", restrict(residual)),
        Condition(
            "symbolic CurlCurl E - N == 0",
            max((abs(float(c)) for c in residual.point.values()), default=0.0),
            0.0,
            residual.is_zero(),
            f"{len(residual.point)} nonzero point entries",
        ),
    ]
    deg_e, deg_n = degree_of_divergence(E), degree_of_divergence(N)
    radius = _test_radius(E)
    for alpha in multi_indices(_order(deg_e, 2)):
        w = make_w_alpha(alpha, radius)
        e_part = pair(E, _A_hessian_test(w), spec)
        n_part = -pair(N, w, spec)
        conds.append(
            _oracle_condition(
                f"pairing alpha={alpha}: E(A grad^2 w) - N(w) == 0",
                residual.point_coefficient(alpha),
                [e_part, n_part],
            )
        )
    conds.append(Condition("deg(N) <= deg(E) + 2", max(0.0, deg_n - deg_e - 2), 0.0, deg_n <= deg_e + 2))
    return CheckReport("incompatibility", _verdict(conds), tuple(conds), {"E": deg_e, "N": deg_n})


# constructive antiderivatives


def _scalar_point_entries(E) -> dict:
    if isinstance(E, SingularField):
        if E.codomain is not Codomain.SCALAR:
            raise FieldError("expected a scalar field")
        if E.smooth:
            raise FieldError("expected a point-supported field")
        return {alpha: c for (_, alpha), c in E.point.items()}, E.domain_radius, E.rho
    if isinstance(E, PointPart):
        if E.codomain is not Codomain.SCALAR:
            raise FieldError("expected a scalar point part")
        return {alpha: c for (_, alpha), c in E.entries.items()}, 1.0, None
    raise TypeError("expected a PointPart or SingularField")


def point_antiderivative_div(E, domain_radius: float | None = None) -> SingularField:
    """Point-supported vector E_1 with Div E_1 = E (requires E^(0,0) = 0)."""
    entries, R, rho = _scalar_point_entries(E)
    R = domain_radius or R
    if entries.get((0, 0)):
        raise FieldError("E^(0,0) != 0: no point-supported antiderivative exists")
    point = {}
    for (a1, a2), c in entries.items():
        if a1:
            key = ((0,), (a1 - 1, a2))
        else:
            key = ((1,), (a1, a2 - 1))
        point[key] = point.get(key, Coef()) + c
    return SingularField("vector", (), point, R, rho)


def point_antiderivative_curl(E, domain_radius: float | None = None) -> SingularField:
    """Point-supported vector E_2 with Curl E_2 = E (classical curl d_1 v_2 - d_2 v_1)."""
    entries, R, rho = _scalar_point_entries(E)
    R = domain_radius or R
    if entries.get((0, 0)):
        raise FieldError("E^(0,0) != 0: no point-supported antiderivative exists")
    point = {}
    for (a1, a2), c in entries.items():
        if a1:
            key, val = ((1,), (a1 - 1, a2)), c
        else:
            key, val = ((0,), (a1, a2 - 1)), -c
        point[key] = point.get(key, Coef()) + val
    return SingularField("vector", (), point, R, rho)


def point_antiderivative_curlcurl(N, domain_radius: float | None = None) -> SingularField:
    """Point-supported sym-tensor E with CurlCurl E = N (requires N^alpha = 0 for |alpha| < 2)."""
    entries, R, rho = _scalar_point_entries(N)
    R = domain_radius or R
    low = [a for a, c in entries.items() if c and sum(a) < 2]
    if low:
        raise FieldError(f"entries of order < 2 present: {sorted(low)}")
    point = {}

    def add(comp, alpha, c):
        key = (comp, alpha)
        point[key] = point.get(key, Coef()) + c

    half = Fraction(1, 2)
    for (a1, a2), c in entries.items():
        if a1 >= 2:
            add((1, 1), (a1 - 2, a2), c)
        elif a1 == 0:
            add((0, 0), (0, a2 - 2), c)
        else:
            add((0, 1), (0, a2 - 1), -c * half)
            add((1, 0), (0, a2 - 1), -c * half)
    return SingularField("sym-tensor", (), point, R, rho)


def incompatibility_from_sources(
    A: SingularField | None = None, Theta: SingularField | None = None, vartheta: SingularField | None = None
) -> SingularField:
    """N = Curl A + Theta + Lap(vartheta); absent sources count as zero."""
    parts = []
    if A is not None:
        if A.codomain is not Codomain.VECTOR:
            raise FieldError("A must be a vector field")
        parts.append((1, curl(A)))
    if Theta is not None:
        if Theta.codomain is not Codomain.SCALAR:
            raise FieldError("Theta must be scalar")
        parts.append((1, Theta))
    if vartheta is not None:
        if vartheta.codomain is not Codomain.SCALAR:
            raise FieldError("vartheta must be scalar")
        parts.append((1, laplacian(vartheta)))
    if not parts:
        raise FieldError("at least one source is required")
    return linear_combine(parts)
