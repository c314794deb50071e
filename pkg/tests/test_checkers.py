import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pointdist.checkers import (
    INSUFFICIENT,
    SATISFIED,
    VIOLATED,
    cesaro_integral,
    cesaro_integral_quadrature,
    check_compatibility,
    check_equilibrium,
    check_equilibrium_restricted,
    check_incompatibility,
    defect_strain,
    identify_point_defect,
    incompatibility_from_sources,
    point_antiderivative_curl,
    point_antiderivative_curlcurl,
    point_antiderivative_div,
)
from pointdist.coef import as_coef
from pointdist.elasticity import IsotropicModuli, dilatation_stress, kelvin_stress
from pointdist.field_algebra import (
    FieldError,
    PointPart,
    SingularField,
    SmoothTerm,
    curl,
    curl_curl,
    div,
    polynomial_field,
)

small_q = st.fractions(min_value=-3, max_value=3, max_denominator=6)
alphas = st.tuples(st.integers(0, 3), st.integers(0, 3))


def e1_delta(c=1):
    return PointPart("vector", {((0,), (0, 0)): c})


def test_kelvin_needs_its_point_force():
    sigma = kelvin_stress(IsotropicModuli())
    assert check_equilibrium(sigma, e1_delta()).verdict == SATISFIED
    bad = check_equilibrium(sigma)
    assert bad.verdict == VIOLATED
    assert any("alpha=(0, 0) e1" in c.name for c in bad.failed())


def test_restricted_check_verdicts():
    sigma = kelvin_stress(IsotropicModuli())
    assert check_equilibrium_restricted(sigma, e1_delta()).verdict == SATISFIED
    assert check_equilibrium_restricted(sigma, e1_delta(2)).verdict == VIOLATED
    # degree 0: the restriction cannot see a multipole at O
    assert check_equilibrium_restricted(dilatation_stress(IsotropicModuli())).verdict == INSUFFICIENT


def test_report_serializes():
    rep = check_equilibrium(kelvin_stress(IsotropicModuli()), e1_delta())
    rec = rep.to_record()
    json.dumps(rec)
    assert rec["verdict"] == SATISFIED
    assert rep.to_text().splitlines()[:2] == ["check: equilibrium", "verdict: satisfied"]


def test_polynomial_strain_from_displacement_is_compatible():
    # u = (x^2 y, x y^2): E = sym grad u
    E = polynomial_field(
        "sym-tensor",
        {(0, 0): {(1, 1): 2}, (1, 1): {(1, 1): 2}, (0, 1): {(2, 0): Fraction(1, 2), (0, 2): Fraction(1, 2)}, (1, 0): {(2, 0): Fraction(1, 2), (0, 2): Fraction(1, 2)}},
    )
    assert check_compatibility(E).verdict == SATISFIED


@given(small_q, small_q, small_q)
def test_defect_strain_charges_round_trip(b1, b2, s):
    charges = identify_point_defect(defect_strain((b1, b2), s))
    assert charges.burgers == (as_coef(b1), as_coef(b2))
    assert charges.disclination == as_coef(s)


@pytest.mark.parametrize("b, s", [((1, 0), 0), ((0, 1), 0), ((0, 0), 1), ((1, -2), Fraction(1, 3))])
def test_defect_strain_incompatibility(b, s):
    E = defect_strain(b, s)
    N = SingularField("scalar", (), {((), (0, 0)): s, ((), (1, 0)): b[1], ((), (0, 1)): -b[0]})
    assert curl_curl(E) == N
    assert check_incompatibility(E, N).verdict == SATISFIED
    assert check_compatibility(E).verdict == VIOLATED


@pytest.mark.parametrize("x", [(0.1, 0.05), (-0.2, 0.1)])
def test_cesaro_closed_form_matches_quadrature(x):
    E = defect_strain((1, 2), Fraction(1, 2))
    exact = cesaro_integral(E, x, 0.05)
    quad = cesaro_integral_quadrature(E, x, 0.05)
    assert exact == pytest.approx(quad, rel=1e-9, abs=1e-12)


@given(st.dictionaries(alphas.filter(lambda a: sum(a) >= 1), small_q, min_size=1, max_size=4))
def test_point_antiderivatives_invert(entries):
    E = SingularField("scalar", (), {((), a): c for a, c in entries.items()})
    assert div(point_antiderivative_div(E)) == E
    assert curl(point_antiderivative_curl(E)) == E


@given(st.dictionaries(alphas.filter(lambda a: sum(a) >= 2), small_q, min_size=1, max_size=4))
def test_point_antiderivative_curlcurl_inverts(entries):
    N = SingularField("scalar", (), {((), a): c for a, c in entries.items()})
    assert curl_curl(point_antiderivative_curlcurl(N)) == N


def test_point_antiderivatives_refuse_monopoles():
    N = SingularField("scalar", (), {((), (0, 0)): 1})
    for fn in (point_antiderivative_div, point_antiderivative_curl, point_antiderivative_curlcurl):
        with pytest.raises(FieldError):
            fn(N)
    with pytest.raises(FieldError):
        point_antiderivative_curlcurl(SingularField("scalar", (), {((), (1, 0)): 1}))


def test_incompatibility_from_sources_adds_up():
    A = SingularField("vector", (), {((1,), (0, 0)): 1})
    Theta = SingularField("scalar", (), {((), (0, 0)): 2})
    vt = SingularField("scalar", (), {((), (0, 0)): 3})
    N = incompatibility_from_sources(A, Theta, vt)
    assert N.point == {((), (1, 0)): as_coef(1), ((), (0, 0)): as_coef(2), ((), (2, 0)): as_coef(3), ((), (0, 2)): as_coef(3)}
    with pytest.raises(FieldError):
        incompatibility_from_sources()


def test_check_equilibrium_rejects_scalar():
    with pytest.raises(FieldError):
        check_equilibrium(SingularField("scalar", [SmoothTerm(1, 0)]))
