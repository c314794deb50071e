"""Exact algebra of planar fields whose only singularity sits at the origin.

A field is a finite sum of smooth terms ``c r^k (ln r)^p trig(n theta)`` per
Cartesian component, defined on the punctured disk, plus a point part
``sum_alpha c_alpha d^alpha delta_O``.  Non locally integrable terms are given
meaning through an extension policy: the principal value when it exists and a
finite part with reference radius ``rho`` otherwise.  Derivatives are
distributional: the classical derivative of every term, the shifted point part,
and the delta corrections that the boundary of a shrinking disk leaves behind.

Directions and Cartesian component labels are 1-based (``1, 2``) to follow
the usual e_1, e_2 notation; polar labels are ``"r"`` and ``"theta"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import factorial
from typing import Iterable, Mapping

import numpy as np

from . import kernels
from .coef import Coef, as_coef
from .trig import (
    COS,
    SIN,
    cos_sin_power,
    mode_product,
    monomial_circle_moment,
    polynomial_term_monomials,
    trig_mul,
)

__all__ = [
    "Codomain",
    "SmoothTerm",
    "PointPart",
    "ExtensionPolicy",
    "SingularField",
    "FieldError",
    "CodomainMismatch",
    "DerivativeNotRepresentable",
    "RepresentableLimitError",
    "UnsupportedPolicy",
    "MAX_LOG_POWER",
    "zero_field",
    "linear_combine",
    "scaling_degree",
    "degree_of_divergence",
    "pv_extension_exists",
    "canonical_extension",
    "extension_policies",
    "partial_derivative",
    "derivative",
    "grad",
    "div",
    "curl",
    "curl_curl",
    "div_div",
    "laplacian",
    "restrict",
    "eval_smooth",
    "transpose",
    "trace",
    "sym",
    "as_tensor",
    "apply_A",
    "scalar_identity",
    "component",
    "assemble",
    "rotate_quarter",
    "multiply",
    "matmul",
    "frobenius",
    "polynomial_field",
    "taylor_coefficients",
    "truncate_taylor",
    "polar_terms",
    "multi_indices",
]

MAX_LOG_POWER = 2


class FieldError(ValueError):
    """Base class for invalid field operations."""


class CodomainMismatch(FieldError):
    pass


class DerivativeNotRepresentable(FieldError):
    pass


class RepresentableLimitError(FieldError):
    pass


class UnsupportedPolicy(FieldError):
    pass


class Codomain(str, Enum):
    SCALAR = "scalar"
    VECTOR = "vector"
    TENSOR = "tensor"
    SYM_TENSOR = "sym-tensor"

    @property
    def rank(self) -> int:
        return {"scalar": 0, "vector": 1}.get(self.value, 2)

    @property
    def components(self) -> tuple:
        return _COMPONENTS[self.rank]


_COMPONENTS = {0: ((),), 1: ((0,), (1,)), 2: ((0, 0), (0, 1), (1, 0), (1, 1))}

_PARITY = {"cos": COS, "sin": SIN, 0: COS, 1: SIN}
_PARITY_NAME = {COS: "cos", SIN: "sin"}

# Cartesian components of the polar frame as trig polynomials.
_FRAME = {
    "r": ({(1, COS): Fraction(1)}, {(1, SIN): Fraction(1)}),
    "theta": ({(1, SIN): Fraction(-1)}, {(1, COS): Fraction(1)}),
}
_POLAR_ALIASES = {"r": "r", "theta": "theta", "t": "theta", "θ": "theta"}


def _as_int(value, what: str) -> int:
    if isinstance(value, bool):
        raise FieldError(f"{what} must be an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, Fraction) and value.denominator == 1:
        return int(value)
    raise FieldError(f"{what} must be an integer, got {value!r}")


def _alpha(alpha) -> tuple:
    a = tuple(_as_int(v, "multi-index entry") for v in alpha)
    if len(a) != 2 or min(a) < 0:
        raise FieldError(f"multi-index must be two non-negative integers, got {alpha!r}")
    return a


def multi_indices(order: int):
    """All 2D multi-indices with |alpha| <= order, graded then lexicographic."""
    for total in range(order + 1):
        for a1 in range(total, -1, -1):
            yield (a1, total - a1)


@dataclass(frozen=True)
class SmoothTerm:
    """``coeff * r^k (ln r)^p trig(n theta)`` attached to one frame component.

    ``comp`` is ``()`` for scalars, a 1-tuple for vectors and a pair for
    tensors.  Entries are either Cartesian labels 1, 2 or polar labels
    ``"r"``/``"theta"`` (not mixed within one term).
    """

    coeff: Coef
    k: int
    p: int = 0
    n: int = 0
    parity: str = "cos"
    comp: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coeff", as_coef(self.coeff))
        object.__setattr__(self, "k", _as_int(self.k, "radial exponent k"))
        p = _as_int(self.p, "log power p")
        if p < 0:
            raise FieldError(f"log power must be non-negative, got {p}")
        if p > MAX_LOG_POWER:
            raise RepresentableLimitError(f"log power {p} exceeds the cap {MAX_LOG_POWER}")
        object.__setattr__(self, "p", p)
        n = _as_int(self.n, "mode number n")
        if n < 0:
            raise FieldError(f"mode number must be non-negative, got {n}")
        object.__setattr__(self, "n", n)
        if self.parity not in ("cos", "sin"):
            raise FieldError(f"parity must be 'cos' or 'sin', got {self.parity!r}")
        if n == 0 and self.parity == "sin":
            raise FieldError("a mode-0 term must have parity cos")
        comp = tuple(self.comp)
        labels = []
        for c in comp:
            if isinstance(c, str):
                if c not in _POLAR_ALIASES:
                    raise FieldError(f"unknown frame label {c!r}")
                labels.append(_POLAR_ALIASES[c])
            else:
                ci = _as_int(c, "component label")
                if ci not in (1, 2):
                    raise FieldError(f"Cartesian component labels are 1 or 2, got {c!r}")
                labels.append(ci)
        if len(comp) > 2:
            raise FieldError("components have at most two indices")
        if labels and len({isinstance(c, str) for c in labels}) > 1:
            raise FieldError("cannot mix polar and Cartesian labels in one term")
        object.__setattr__(self, "comp", tuple(labels))

    @property
    def polar(self) -> bool:
        return bool(self.comp) and isinstance(self.comp[0], str)

    def cartesian(self) -> dict:
        """Expand into internal Cartesian keys ``(comp, k, p, n, s) -> Coef``."""
        s = _PARITY[self.parity]
        if not self.polar:
            comp = tuple(c - 1 for c in self.comp)
            return {(comp, self.k, self.p, self.n, s): self.coeff}
        out = {}
        rank = len(self.comp)
        for comp in _COMPONENTS[rank]:
            poly = {(self.n, s): Fraction(1)}
            for label, idx in zip(self.comp, comp):
                poly = trig_mul(poly, _FRAME[label][idx])
            for (n, s2), w in poly.items():
                key = (comp, self.k, self.p, n, s2)
                out[key] = out.get(key, Coef()) + self.coeff * w
        return {key: c for key, c in out.items() if c}


@dataclass(frozen=True)
class ExtensionPolicy:
    kind: str  # "pv" or "finite-part"
    rho: float | None = None


class PointPart:
    """Finite map from multi-index to the coefficient of d^alpha delta_O.

    Stored as ``(comp, alpha) -> Coef`` with zero entries pruned.
    """

    __slots__ = ("codomain", "_entries")

    def __init__(self, codomain, entries: Mapping | None = None):
        self.codomain = Codomain(codomain)
        clean = {}
        for (comp, alpha), c in (entries or {}).items():
            comp = tuple(comp)
            if comp not in self.codomain.components:
                raise CodomainMismatch(f"component {comp} invalid for {self.codomain.value}")
            c = as_coef(c)
            if c:
                key = (comp, _alpha(alpha))
                clean[key] = clean.get(key, Coef()) + c
        self._entries = {k: v for k, v in clean.items() if v}

    @classmethod
    def from_values(cls, codomain, values: Mapping) -> "PointPart":
        """Build from ``{alpha: value}`` with value a number, pair or 2x2 nested list."""
        codomain = Codomain(codomain)
        entries = {}
        for alpha, value in values.items():
            for comp in codomain.components:
                v = value
                for idx in comp:
                    v = v[idx]
                entries[(comp, alpha)] = v
        return cls(codomain, entries)

    @property
    def entries(self) -> dict:
        return dict(self._entries)

    @property
    def order(self) -> int:
        return max((sum(a) for _, a in self._entries), default=-1)

    def coefficient(self, alpha, comp=()) -> Coef:
        return self._entries.get((tuple(comp), tuple(alpha)), Coef())

    def __eq__(self, other):
        if not isinstance(other, PointPart):
            return NotImplemented
        return self.codomain == other.codomain and self._entries == other._entries

    def __bool__(self):
        return bool(self._entries)

    def __repr__(self):
        body = ", ".join(
            f"{_comp_label(comp)}d^{alpha}: {c}" for (comp, alpha), c in sorted(self._entries.items())
        )
        return f"PointPart({self.codomain.value}; {body})"


def _comp_label(comp) -> str:
    return "" if not comp else "[" + ",".join(str(i + 1) for i in comp) + "] "


def _prune(d: dict) -> dict:
    return {k: v for k, v in d.items() if v}


def _accumulate(target: dict, key, value):
    cur = target.get(key)
    target[key] = value if cur is None else cur + value


class SingularField:
    """Field on the disk of radius ``domain_radius`` singular at most at O.

    ``smooth`` maps ``(comp, k, p, n, s)`` to coefficients, ``point`` maps
    ``(comp, alpha)`` to coefficients.  ``rho`` is the finite-part reference
    radius used by every term that has no principal value.  Instances are
    immutable by convention; all operations return new fields.
    """

    __slots__ = ("codomain", "domain_radius", "rho", "_smooth", "_point")

    def __init__(
        self,
        codomain,
        smooth: Iterable[SmoothTerm] | Mapping = (),
        point: PointPart | Mapping | None = None,
        domain_radius: float = 1.0,
        rho: float | None = None,
    ):
        self.codomain = Codomain(codomain)
        self.domain_radius = float(domain_radius)
        if not self.domain_radius > 0:
            raise FieldError("domain radius must be positive")
        self.rho = self.domain_radius / 2 if rho is None else float(rho)
        if not 0 < self.rho < self.domain_radius:
            raise FieldError(f"finite-part radius must lie in (0, {self.domain_radius}), got {self.rho}")
        rank = self.codomain.rank
        terms = {}
        if isinstance(smooth, Mapping):
            for key, c in smooth.items():
                _accumulate(terms, key, as_coef(c))
        else:
            for t in smooth:
                if not isinstance(t, SmoothTerm):
                    raise TypeError(f"expected SmoothTerm, got {type(t).__name__}")
                if len(t.comp) != rank:
                    raise CodomainMismatch(
                        f"term component {t.comp} does not fit codomain {self.codomain.value}"
                    )
                for key, c in t.cartesian().items():
                    _accumulate(terms, key, c)
        for key in terms:
            comp, k, p, n, s = key
            if comp not in self.codomain.components:
                raise CodomainMismatch(f"component {comp} invalid for {self.codomain.value}")
            if p > MAX_LOG_POWER:
                raise RepresentableLimitError(f"log power {p} exceeds the cap {MAX_LOG_POWER}")
        self._smooth = _prune(terms)
        if point is None:
            self._point = {}
        else:
            if not isinstance(point, PointPart):
                point = PointPart(self.codomain, point)
            elif point.codomain.rank != rank:
                raise CodomainMismatch("point part codomain does not match the field")
            self._point = point.entries
        if self.codomain is Codomain.SYM_TENSOR:
            self._check_symmetric()

    @classmethod
    def _raw(cls, codomain, smooth: dict, point: dict, domain_radius: float, rho: float):
        obj = cls.__new__(cls)
        obj.codomain = Codomain(codomain)
        obj.domain_radius = domain_radius
        obj.rho = rho
        obj._smooth = _prune(smooth)
        obj._point = _prune(point)
        if obj.codomain is Codomain.SYM_TENSOR:
            obj._check_symmetric()
        return obj

    def _like(self, codomain, smooth, point):
        return SingularField._raw(codomain, smooth, point, self.domain_radius, self.rho)

    def _check_symmetric(self):
        for key, c in self._smooth.items():
            comp = key[0]
            mirror = ((comp[1], comp[0]),) + key[1:]
            if self._smooth.get(mirror) != c:
                raise FieldError(f"sym-tensor field has asymmetric smooth term at {key}")
        for (comp, alpha), c in self._point.items():
            if self._point.get(((comp[1], comp[0]), alpha)) != c:
                raise FieldError(f"sym-tensor field has asymmetric point entry at {alpha}")

    # accessors
    @property
    def smooth(self) -> dict:
        return dict(self._smooth)

    @property
    def point(self) -> dict:
        return dict(self._point)

    @property
    def point_part(self) -> PointPart:
        return PointPart(self.codomain, self._point)

    def smooth_terms(self) -> list:
        """Smooth part as Cartesian SmoothTerm records (sorted, deterministic)."""
        out = []
        for (comp, k, p, n, s), c in sorted(self._smooth.items()):
            out.append(SmoothTerm(c, k, p, n, _PARITY_NAME[s], tuple(i + 1 for i in comp)))
        return out

    def is_zero(self) -> bool:
        return not self._smooth and not self._point

    def point_coefficient(self, alpha, comp=()) -> Coef:
        return self._point.get((tuple(comp), tuple(alpha)), Coef())

    def __eq__(self, other):
        if not isinstance(other, SingularField):
            return NotImplemented
        return (
            self.codomain == other.codomain
            and self.domain_radius == other.domain_radius
            and self.rho == other.rho
            and self._smooth == other._smooth
            and self._point == other._point
        )

    def __hash__(self):
        return hash((self.codomain, self.domain_radius, self.rho, frozenset(self._smooth.items()), frozenset(self._point.items())))

    def __repr__(self):
        return (
            f"SingularField({self.codomain.value}, R={self.domain_radius}, "
            f"{len(self._smooth)} smooth terms, point={self.point_part!r})"
        )

    def describe(self) -> str:
        lines = [f"{self.codomain.value} field on disk R={self.domain_radius} (finite-part rho={self.rho})"]
        for (comp, k, p, n, s), c in sorted(self._smooth.items()):
            log = "" if p == 0 else (" ln(r)" if p == 1 else f" ln(r)^{p}")
            trig = "" if n == 0 else f" {_PARITY_NAME[s]}({n} theta)"
            lines.append(f"  {_comp_label(comp)}({c}) r^{k}{log}{trig}")
        for (comp, alpha), c in sorted(self._point.items()):
            lines.append(f"  {_comp_label(comp)}({c}) d^{alpha} delta_O")
        return "\n".join(lines)

    # arithmetic sugar
    def __add__(self, other):
        return linear_combine([(1, self), (1, other)])

    def __sub__(self, other):
        return linear_combine([(1, self), (-1, other)])

    def __neg__(self):
        return linear_combine([(-1, self)])

    def __mul__(self, c):
        return linear_combine([(c, self)])

    __rmul__ = __mul__


def zero_field(codomain, domain_radius: float = 1.0, rho: float | None = None) -> SingularField:
    return SingularField(codomain, (), None, domain_radius, rho)


def _compatible(fields) -> tuple:
    first = fields[0]
    for f in fields[1:]:
        if f.codomain != first.codomain:
            raise CodomainMismatch(f"codomain mismatch: {first.codomain.value} vs {f.codomain.value}")
        if f.domain_radius != first.domain_radius:
            raise FieldError("fields live on different domains")
        if f.rho != first.rho:
            raise FieldError("fields use different finite-part radii")
    return first.codomain, first.domain_radius, first.rho


def linear_combine(fields) -> SingularField:
    """Sum of ``c * F`` over ``(c, F)`` pairs, exact and pruned."""
    fields = list(fields)
    if not fields:
        raise FieldError("linear_combine needs at least one field")
    codomain, radius, rho = _compatible([f for _, f in fields])
    smooth, point = {}, {}
    for c, f in fields:
        c = as_coef(c)
        if not c:
            continue
        for key, v in f._smooth.items():
            _accumulate(smooth, key, c * v)
        for key, v in f._point.items():
            _accumulate(point, key, c * v)
    return SingularField._raw(codomain, smooth, point, radius, rho)


# degrees and extensions


def scaling_degree(F: SingularField) -> float:
    """Max of ``-k`` over smooth terms and ``|alpha| + 2`` over point entries."""
    vals = [-k for (_, k, _, _, _) in F._smooth]
    vals += [sum(alpha) + 2 for (_, alpha) in F._point]
    return float(max(vals)) if vals else -math.inf


def degree_of_divergence(F: SingularField) -> float:
    return scaling_degree(F) - 2


def _term_of(t):
    if isinstance(t, SmoothTerm):
        return t.k, t.p, t.n
    _, k, p, n, _ = t
    return k, p, n


def pv_extension_exists(t) -> bool:
    """Principal-value criterion for ``r^k trig(n theta)``.

    True for integrable terms (k >= -1) and, for ``k = -m <= -2``, exactly
    when every angular moment that the divergent radial integrals see
    vanishes, which happens iff ``n > m - 2``.
    """
    k, p, n = _term_of(t)
    if k >= -1:
        return True
    if p:
        raise UnsupportedPolicy("the principal-value criterion is only implemented for pure power terms")
    return n > -k - 2


def _term_policy(key, rho) -> ExtensionPolicy:
    _, k, p, n, _ = key
    if k >= -1 or (p == 0 and n > -k - 2):
        return ExtensionPolicy("pv")
    return ExtensionPolicy("finite-part", rho)


def extension_policies(F: SingularField) -> dict:
    """Policy for every smooth term, keyed like ``F.smooth``."""
    return {key: _term_policy(key, F.rho) for key in F._smooth}


def canonical_extension(smooth_terms, domain_radius: float = 1.0, codomain=None, rho=None) -> SingularField:
    """Extend smooth terms across O with no point part.

    Policies follow :func:`extension_policies`: pv where it exists, finite part
    with ``rho = domain_radius / 2`` otherwise.
    """
    terms = list(smooth_terms)
    if codomain is None:
        rank = len(terms[0].comp) if terms else 0
        if rank == 2:
            probe = SingularField("tensor", terms, None, domain_radius, rho)
            smooth = probe._smooth
            symmetric = all(smooth.get(((key[0][1], key[0][0]),) + key[1:]) == c for key, c in smooth.items())
            codomain = "sym-tensor" if symmetric else "tensor"
        else:
            codomain = ("scalar", "vector")[rank]
    return SingularField(codomain, terms, None, domain_radius, rho)


def restrict(F: SingularField) -> SingularField:
    """Restriction to the punctured disk: drop the point part."""
    return F._like(F.codomain, F._smooth, {})


# derivatives


@lru_cache(maxsize=None)
def _classical_derivative(k: int, p: int, n: int, s: int, i: int) -> tuple:
    """d/dx_i of r^k L^p trig(n, s) as ((k-1, p', n', s'), weight) pairs.

    d_i f = r^(k-1) [ (k L^p + p L^(p-1)) u_i T + L^p v_i T' ] with
    u = (cos, sin), v = (-sin, cos).
    """
    u = ((1, COS), (1, SIN))[i]
    v, vsign = (((1, SIN), -1), ((1, COS), 1))[i]
    out = {}

    def add(pp, mode_a, mode_b, weight):
        if not weight:
            return
        for (nn, ss), w in mode_product(*mode_a, *mode_b):
            key = (k - 1, pp, nn, ss)
            out[key] = out.get(key, Fraction(0)) + weight * w

    add(p, u, (n, s), Fraction(k))
    if p:
        add(p - 1, u, (n, s), Fraction(p))
    if n:
        # T' = -n sin(n) for cos, n cos(n) for sin
        dmode, dsign = ((n, SIN), -n) if s == COS else ((n, COS), n)
        add(p, v, dmode, Fraction(vsign * dsign))
    return tuple((key, w) for key, w in sorted(out.items()) if w)


@lru_cache(maxsize=None)
def _boundary_correction(k: int, p: int, n: int, s: int, i: int) -> tuple:
    """Delta coefficients left by the circle |x| = eps when differentiating.

    For each beta with k + |beta| + 1 = 0 the coefficient on d^beta delta_O is
    the eps-independent value of the integral over the circle of
    f * w^beta * (e_r)_i, with w^beta = (-1)^|beta| x^beta / beta! near O.
    Returns ((beta, weight_over_pi), ...); weights multiply pi.
    """
    order = -k - 1
    if order < 0:
        return ()
    out = []
    for b1 in range(order, -1, -1):
        beta = (b1, order - b1)
        a, b = beta
        if i == 0:
            a += 1
        else:
            b += 1
        moment = monomial_circle_moment(n, s, a, b)
        if not moment:
            continue
        if p:
            raise DerivativeNotRepresentable(
                f"term r^{k} ln(r)^{p} trig({n}) leaves a ln(eps) factor on d^{beta} delta_O "
                f"when differentiated in direction {i + 1}"
            )
        weight = Fraction((-1) ** order, factorial(beta[0]) * factorial(beta[1])) * moment
        out.append((beta, weight))
    return tuple(out)


def _check_direction(i) -> int:
    i = _as_int(i, "direction")
    if i not in (1, 2):
        raise FieldError(f"direction must be 1 or 2, got {i}")
    return i - 1


def _partial_dicts(smooth: dict, point: dict, i0: int):
    new_smooth, new_point = {}, {}
    for (comp, k, p, n, s), c in smooth.items():
        for (k2, p2, n2, s2), w in _classical_derivative(k, p, n, s, i0):
            _accumulate(new_smooth, (comp, k2, p2, n2, s2), c * w)
        for beta, w in _boundary_correction(k, p, n, s, i0):
            _accumulate(new_point, (comp, beta), c * Coef.pi_power(1, w))
    for (comp, alpha), c in point.items():
        shifted = (alpha[0] + 1, alpha[1]) if i0 == 0 else (alpha[0], alpha[1] + 1)
        _accumulate(new_point, (comp, shifted), c)
    return new_smooth, new_point


def partial_derivative(F: SingularField, i) -> SingularField:
    """Distributional derivative d_i F, ``i`` in {1, 2}."""
    i0 = _check_direction(i)
    smooth, point = _partial_dicts(F._smooth, F._point, i0)
    codomain = F.codomain
    return F._like(codomain, smooth, point)


def derivative(F: SingularField, alpha) -> SingularField:
    """d^alpha F as repeated distributional derivatives."""
    a1, a2 = _alpha(alpha)
    out = F
    for _ in range(a1):
        out = partial_derivative(out, 1)
    for _ in range(a2):
        out = partial_derivative(out, 2)
    return out


def component(F: SingularField, comp) -> SingularField:
    """Scalar field of one Cartesian component (0-based tuple)."""
    comp = tuple(comp)
    if comp not in F.codomain.components:
        raise CodomainMismatch(f"component {comp} invalid for {F.codomain.value}")
    smooth = {((),) + key[1:]: c for key, c in F._smooth.items() if key[0] == comp}
    point = {((), alpha): c for (cc, alpha), c in F._point.items() if cc == comp}
    return F._like(Codomain.SCALAR, smooth, point)


def assemble(codomain, parts: Mapping) -> SingularField:
    """Inverse of :func:`component`: ``parts`` maps 0-based comps to scalar fields."""
    codomain = Codomain(codomain)
    fields = [f for f in parts.values() if f is not None]
    if not fields:
        raise FieldError("assemble needs at least one component")
    _, radius, rho = _compatible(fields)
    smooth, point = {}, {}
    for comp, f in parts.items():
        if f is None:
            continue
        comp = tuple(comp)
        if f.codomain is not Codomain.SCALAR:
            raise CodomainMismatch("assemble expects scalar parts")
        if comp not in codomain.components:
            raise CodomainMismatch(f"component {comp} invalid for {codomain.value}")
        for key, c in f._smooth.items():
            _accumulate(smooth, (comp,) + key[1:], c)
        for (_, alpha), c in f._point.items():
            _accumulate(point, (comp, alpha), c)
    return SingularField._raw(codomain, smooth, point, radius, rho)


def _sum(fields):
    return linear_combine([(1, f) for f in fields])


def grad(F: SingularField) -> SingularField:
    """Gradient of a scalar (vector result) or vector (tensor d_j v_i at (i, j))."""
    if F.codomain is Codomain.SCALAR:
        return assemble("vector", {(0,): partial_derivative(F, 1), (1,): partial_derivative(F, 2)})
    if F.codomain is Codomain.VECTOR:
        parts = {}
        for i in range(2):
            ci = component(F, (i,))
            for j in range(2):
                parts[(i, j)] = partial_derivative(ci, j + 1)
        return assemble("tensor", parts)
    raise CodomainMismatch("grad is defined for scalar and vector fields")


def div(F: SingularField) -> SingularField:
    """Divergence; for tensors (Div V)_i = d_j V_ij."""
    if F.codomain is Codomain.VECTOR:
        return _sum([partial_derivative(component(F, (j,)), j + 1) for j in range(2)])
    if F.codomain.rank == 2:
        parts = {
            (i,): _sum([partial_derivative(component(F, (i, j)), j + 1) for j in range(2)])
            for i in range(2)
        }
        return assemble("vector", parts)
    raise CodomainMismatch("div is defined for vector and tensor fields")


def curl(F: SingularField) -> SingularField:
    """Classical-sign curl: d_1 v_2 - d_2 v_1; for tensors row-wise, (Curl V)_i = d_1 V_i2 - d_2 V_i1."""
    if F.codomain is Codomain.VECTOR:
        return linear_combine(
            [(1, partial_derivative(component(F, (1,)), 1)), (-1, partial_derivative(component(F, (0,)), 2))]
        )
    if F.codomain.rank == 2:
        parts = {
            (i,): linear_combine(
                [
                    (1, partial_derivative(component(F, (i, 1)), 1)),
                    (-1, partial_derivative(component(F, (i, 0)), 2)),
                ]
            )
            for i in range(2)
        }
        return assemble("vector", parts)
    raise CodomainMismatch("curl is defined for vector and tensor fields")


def curl_curl(F: SingularField) -> SingularField:
    """Incompatibility d11 V22 + d22 V11 - d12 (V12 + V21) of a tensor field."""
    if F.codomain.rank != 2:
        raise CodomainMismatch("curl_curl is defined for tensor fields")
    return curl(curl(F))


def div_div(F: SingularField) -> SingularField:
    if F.codomain.rank != 2:
        raise CodomainMismatch("div_div is defined for tensor fields")
    return div(div(F))


def laplacian(F: SingularField) -> SingularField:
    return linear_combine([(1, derivative(F, (2, 0))), (1, derivative(F, (0, 2)))])


# pointwise algebra


def transpose(F: SingularField) -> SingularField:
    if F.codomain.rank != 2:
        raise CodomainMismatch("transpose needs a tensor field")
    smooth = {((key[0][1], key[0][0]),) + key[1:]: c for key, c in F._smooth.items()}
    point = {((comp[1], comp[0]), alpha): c for (comp, alpha), c in F._point.items()}
    return F._like(F.codomain, smooth, point)


def as_tensor(F: SingularField) -> SingularField:
    if F.codomain.rank != 2:
        raise CodomainMismatch("as_tensor needs a tensor field")
    return F._like(Codomain.TENSOR, F._smooth, F._point)


def sym(F: SingularField) -> SingularField:
    if F.codomain.rank != 2:
        raise CodomainMismatch("sym needs a tensor field")
    half = Fraction(1, 2)
    T = as_tensor(F)
    S = linear_combine([(half, T), (half, transpose(T))])
    return S._like(Codomain.SYM_TENSOR, S._smooth, S._point)


def trace(F: SingularField) -> SingularField:
    if F.codomain.rank != 2:
        raise CodomainMismatch("trace needs a tensor field")
    return _sum([component(F, (0, 0)), component(F, (1, 1))])


def scalar_identity(f: SingularField, codomain="sym-tensor") -> SingularField:
    """``f I`` for a scalar field ``f``."""
    if f.codomain is not Codomain.SCALAR:
        raise CodomainMismatch("scalar_identity needs a scalar field")
    return assemble(codomain, {(0, 0): f, (1, 1): f})


def apply_A(F: SingularField) -> SingularField:
    """The map A(v x w) = (e3 x v) x (e3 x w): swaps diagonal entries, negates and transposes off-diagonal ones."""
    if F.codomain.rank != 2:
        raise CodomainMismatch("apply_A needs a tensor field")
    perm = {(0, 0): ((1, 1), 1), (1, 1): ((0, 0), 1), (0, 1): ((1, 0), -1), (1, 0): ((0, 1), -1)}
    smooth, point = {}, {}
    for key, c in F._smooth.items():
        comp, sign = perm[key[0]]
        smooth[(comp,) + key[1:]] = c * sign
    for (comp0, alpha), c in F._point.items():
        comp, sign = perm[comp0]
        point[(comp, alpha)] = c * sign
    return F._like(F.codomain, smooth, point)


def rotate_quarter(F: SingularField) -> SingularField:
    """Rotate a field by +pi/2 about O: F'(x) = Q F(Q^T x) (Q^T per index).

    Angles shift by pi/2 (theta -> theta - pi/2) and every component index is
    mapped by Q e1 = e2, Q e2 = -e1.  Point parts transform consistently:
    d^alpha delta_O picks up the chain-rule factors of the rotated variables.
    """
    smooth = {}
    for (comp, k, p, n, s), c in F._smooth.items():
        # cos(n(theta - pi/2)), sin(n(theta - pi/2))
        q = n % 4
        cn, sn = ((1, 0), (0, 1), (-1, 0), (0, -1))[q]  # cos(n pi/2), sin(n pi/2)
        if s == COS:
            parts = [((n, COS), cn), ((n, SIN), sn)]
        else:
            parts = [((n, SIN), cn), ((n, COS), -sn)]
        for comp2, sign in _rotate_comp(comp):
            for (nn, ss), w in parts:
                if not w or (nn == 0 and ss == SIN):
                    continue
                _accumulate(smooth, (comp2, k, p, nn, ss), c * (w * sign))
    point = {}
    for (comp, alpha), c in F._point.items():
        # delta(Q^T x) = delta(x); d/dy_1 = d_2 and d/dy_2 = -d_1 for y = Q^T x
        for comp2, sign in _rotate_comp(comp):
            for beta, w in _rotate_alpha(alpha):
                _accumulate(point, (comp2, beta), c * (w * sign))
    return F._like(F.codomain, smooth, point)


def _rotate_comp(comp):
    # Q e_1 = e_2, Q e_2 = -e_1 applied to each index
    out = [((), 1)]
    for idx in comp:
        new = []
        for prefix, sign in out:
            new.append((prefix + ((1,) if idx == 0 else (0,)), sign * (1 if idx == 0 else -1)))
        out = new
    return out


@lru_cache(maxsize=None)
def _rotate_alpha(alpha):
    # (d_2)^a1 (-d_1)^a2 expanded: a single multi-index with sign
    a1, a2 = alpha
    return (((a2, a1), (-1) ** a2),)


def _is_polynomial_key(key) -> bool:
    _, k, p, n, _ = key
    return p == 0 and k >= n and (k - n) % 2 == 0


def _product_dicts(f_smooth, f_point, g_smooth, g_point):
    """Product of two scalar fields; one must be a polynomial."""
    f_poly = all(_is_polynomial_key(k) for k in f_smooth) and not f_point
    g_poly = all(_is_polynomial_key(k) for k in g_smooth) and not g_point
    if not (f_poly or g_poly):
        raise FieldError("products are only defined when one factor is a polynomial (smooth at O)")
    if not f_poly:
        f_smooth, f_point, g_smooth, g_point = g_smooth, g_point, f_smooth, f_point
    smooth, point = {}, {}
    for (_, k1, p1, n1, s1), c1 in f_smooth.items():
        for (_, k2, p2, n2, s2), c2 in g_smooth.items():
            if p1 + p2 > MAX_LOG_POWER:
                raise RepresentableLimitError("product exceeds the log-power cap")
            for (n, s), w in mode_product(n1, s1, n2, s2):
                _accumulate(smooth, ((), k1 + k2, p1 + p2, n, s), c1 * c2 * w)
    if g_point:
        taylor = _monomials(f_smooth)
        for (_, alpha), c in g_point.items():
            # f d^alpha delta = sum_{b <= alpha} C(alpha, b) (-1)^{|alpha-b|} d^{alpha-b} f(0) d^b delta
            for b1 in range(alpha[0] + 1):
                for b2 in range(alpha[1] + 1):
                    g = (alpha[0] - b1, alpha[1] - b2)
                    fcoef = taylor.get(g)
                    if not fcoef:
                        continue
                    deriv = fcoef * (factorial(g[0]) * factorial(g[1]))
                    w = math.comb(alpha[0], b1) * math.comb(alpha[1], b2) * (-1) ** (g[0] + g[1])
                    _accumulate(point, ((), (b1, b2)), c * deriv * w)
    return smooth, point


def _monomials(smooth: dict) -> dict:
    """Monomial coefficients {(a, b): Coef} of a polynomial scalar smooth part."""
    out = {}
    for (_, k, p, n, s), c in smooth.items():
        for ab, w in polynomial_term_monomials(k, n, s):
            _accumulate(out, ab, c * w)
    return _prune(out)


def multiply(f: SingularField, g: SingularField) -> SingularField:
    """Pointwise product of two scalar fields, one of which is a polynomial."""
    if f.codomain is not Codomain.SCALAR or g.codomain is not Codomain.SCALAR:
        raise CodomainMismatch("multiply expects scalar fields")
    _compatible([f, g])
    smooth, point = _product_dicts(f._smooth, f._point, g._smooth, g._point)
    return f._like(Codomain.SCALAR, smooth, point)


def matmul(F: SingularField, G: SingularField) -> SingularField:
    """Tensor-tensor or tensor-vector product, one factor polynomial."""
    if F.codomain.rank != 2:
        raise CodomainMismatch("matmul expects a tensor on the left")
    if G.codomain.rank == 2:
        parts = {
            (i, j): _sum([multiply(component(F, (i, k)), component(G, (k, j))) for k in range(2)])
            for i in range(2)
            for j in range(2)
        }
        return assemble("tensor", parts)
    if G.codomain is Codomain.VECTOR:
        parts = {(i,): _sum([multiply(component(F, (i, k)), component(G, (k,))) for k in range(2)]) for i in range(2)}
        return assemble("vector", parts)
    raise CodomainMismatch("matmul expects a tensor or vector on the right")


def frobenius(F: SingularField, G: SingularField) -> SingularField:
    """Scalar field <F, G> = F_ij G_ij."""
    if F.codomain.rank != 2 or G.codomain.rank != 2:
        raise CodomainMismatch("frobenius expects tensor fields")
    return _sum([multiply(component(F, c), component(G, c)) for c in _COMPONENTS[2]])


def polynomial_field(codomain, polys: Mapping, domain_radius: float = 1.0, rho=None) -> SingularField:
    """Field with polynomial components.

    ``polys`` maps 0-based component tuples to ``{(a, b): coeff}`` meaning
    ``sum coeff x^a y^b``.  For sym-tensors give both off-diagonal entries.
    """
    codomain = Codomain(codomain)
    smooth = {}
    for comp, poly in polys.items():
        comp = tuple(comp)
        if comp not in codomain.components:
            raise CodomainMismatch(f"component {comp} invalid for {codomain.value}")
        for (a, b), c in poly.items():
            c = as_coef(c)
            for (n, s), w in cos_sin_power(a, b).items():
                _accumulate(smooth, (comp, a + b, 0, n, s), c * w)
    return SingularField._raw(codomain, smooth, {}, float(domain_radius), domain_radius / 2 if rho is None else rho)


def taylor_coefficients(F: SingularField) -> dict:
    """Monomial coefficients per component: {comp: {(a, b): Coef}}.

    Raises if any smooth term is not a polynomial or a point part exists.
    """
    if F._point:
        raise FieldError("field has a point part and no Taylor expansion at O")
    out = {}
    for comp in F.codomain.components:
        sm = {key: c for key, c in F._smooth.items() if key[0] == comp}
        bad = [key for key in sm if not _is_polynomial_key(key)]
        if bad:
            raise FieldError(f"field is not smooth at O (term {bad[0]})")
        out[comp] = _monomials(sm)
    return out


def truncate_taylor(F: SingularField, order: int) -> tuple:
    """Keep monomials of degree <= order; returns (field, dropped_max_abs)."""
    coeffs = taylor_coefficients(F)
    kept = {comp: {ab: c for ab, c in poly.items() if sum(ab) <= order} for comp, poly in coeffs.items()}
    dropped = max(
        (abs(float(c)) for poly in coeffs.values() for ab, c in poly.items() if sum(ab) > order),
        default=0.0,
    )
    return polynomial_field(F.codomain, kept, F.domain_radius, F.rho), dropped


def polar_terms(F: SingularField) -> list:
    """Smooth part re-folded onto the polar frame, for display.

    Returns SmoothTerm records with polar labels; ingesting them reproduces
    the Cartesian storage exactly.
    """
    rank = F.codomain.rank
    if rank == 0:
        return F.smooth_terms()
    labels = list(product(("r", "theta"), repeat=rank))
    acc = {}
    for (comp, k, p, n, s), c in F._smooth.items():
        for lab in labels:
            poly = {(n, s): Fraction(1)}
            for label, idx in zip(lab, comp):
                poly = trig_mul(poly, _FRAME[label][idx])
            for (nn, ss), w in poly.items():
                _accumulate(acc, (lab, k, p, nn, ss), c * w)
    return [
        SmoothTerm(c, k, p, n, _PARITY_NAME[s], lab)
        for (lab, k, p, n, s), c in sorted(_prune(acc).items())
    ]


# numerics


def _term_arrays(items):
    ks = np.array([key[1] for key, _ in items], dtype=np.int64)
    ps = np.array([key[2] for key, _ in items], dtype=np.int64)
    ns = np.array([key[3] for key, _ in items], dtype=np.int64)
    ss = np.array([key[4] for key, _ in items], dtype=np.int64)
    cs = np.array([float(c) for _, c in items], dtype=np.float64)
    return ks, ps, ns, ss, cs


def eval_smooth(F: SingularField, r, theta) -> np.ndarray:
    """Cartesian components of the smooth part at polar points.

    Scalar inputs give an array of shape ``()``, ``(2,)`` or ``(2, 2)``;
    array inputs append those component axes after the broadcast shape.
    """
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(r <= 0):
        raise FieldError("eval_smooth needs r > 0")
    r, theta = np.broadcast_arrays(r, theta)
    shape = r.shape
    flat_r, flat_t = r.ravel(), theta.ravel()
    comp_shape = {0: (), 1: (2,), 2: (2, 2)}[F.codomain.rank]
    out = np.zeros(shape + comp_shape)
    for comp in F.codomain.components:
        items = sorted((key, c) for key, c in F._smooth.items() if key[0] == comp)
        if not items:
            continue
        vals = kernels.eval_terms(*_term_arrays(items), flat_r, flat_t).reshape(shape)
        out[(Ellipsis,) + comp] = vals
    return out
