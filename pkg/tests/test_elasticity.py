from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pointdist.checkers import SATISFIED, check_equilibrium
from pointdist.elasticity import (
    IsotropicModuli,
    PointSourceProblem,
    compliance_apply,
    general_point_solution,
    incompatibility_stress,
    kelvin_stress,
    stiffness_apply,
    verify_solution,
)
from pointdist.field_algebra import (
    FieldError,
    PointPart,
    SingularField,
    curl_curl,
    div,
    rotate_quarter,
)


def test_compliance_inverts_stiffness(moduli):
    sigma = kelvin_stress(moduli) + incompatibility_stress(moduli)
    assert stiffness_apply(compliance_apply(sigma, moduli), moduli) == sigma


def test_e2_point_force_is_the_rotated_solution(moduli):
    sigma = rotate_quarter(kelvin_stress(moduli))
    B = PointPart("vector", {((1,), (0, 0)): 1})
    assert check_equilibrium(sigma, B).verdict == SATISFIED


def test_incompatibility_stress_is_sourced_by_delta(moduli):
    sigma = incompatibility_stress(moduli)
    assert div(sigma).is_zero()
    assert curl_curl(compliance_apply(sigma, moduli)) == SingularField("scalar", (), {((), (0, 0)): 1})


alphas = st.tuples(st.integers(0, 1), st.integers(0, 1))
small_q = st.fractions(min_value=-2, max_value=2, max_denominator=3)


@given(
    st.dictionaries(st.tuples(st.integers(0, 1), alphas), small_q, max_size=2),
    st.dictionaries(alphas, small_q, max_size=2),
)
def test_general_solution_verifies(body, incompat):
    m = IsotropicModuli(1, Fraction(1, 4))
    p = PointSourceProblem(
        PointPart("vector", {((i,), a): c for (i, a), c in body.items()}),
        PointPart("scalar", {((), a): c for a, c in incompat.items()}),
        m,
    )
    eq, inc = verify_solution(general_point_solution(p), p)
    assert eq.verdict == SATISFIED
    assert inc.verdict == SATISFIED


@pytest.mark.parametrize("E, nu", [(0, Fraction(1, 4)), (-1, 0), (1, Fraction(1, 2)), (1, -1)])
def test_moduli_validation(E, nu):
    with pytest.raises(ValueError):
        IsotropicModuli(E, nu)


def test_moduli_are_exact():
    assert IsotropicModuli(2, 0.3).poisson == Fraction(3, 10)


def test_problem_codomains_checked():
    with pytest.raises(FieldError):
        PointSourceProblem(body_force=PointPart("scalar"))
    with pytest.raises(FieldError):
        PointSourceProblem(incompatibility=PointPart("vector"))
