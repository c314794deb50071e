from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pointdist.coef import Coef, as_coef
from pointdist.defect_force import (
    Distortion,
    airy_stress,
    cross_e3,
    dilation_density,
    dilation_distortion,
    dilation_force,
    dipole_density,
    dipole_force_couple,
    dipole_pair_forces,
    dislocation_distortion,
    force_loop_oracle,
    generalized_force,
    interaction_eshelby,
    peach_koehler,
    smooth_distortion,
    stress_at_origin,
)
from pointdist.elasticity import stiffness_apply
from pointdist.field_algebra import (
    FieldError,
    SingularField,
    SmoothTerm,
    as_tensor,
    div,
    frobenius,
    polynomial_field,
)

small_q = st.fractions(min_value=-3, max_value=3, max_denominator=4)
vectors = st.tuples(small_q, small_q)
conventions = st.sampled_from(["paper", "right-hand"])


@st.composite
def airy_functions(draw):
    monos = [(a, t - a) for t in range(2, 5) for a in range(t + 1)]
    coeffs = draw(st.lists(small_q, min_size=len(monos), max_size=len(monos)))
    return {m: c for m, c in zip(monos, coeffs) if c}


def coefs(v):
    return tuple(as_coef(x) for x in v)


def test_peach_koehler_example():
    sigma = [[0, 1], [1, 0]]
    assert peach_koehler((1, 0), sigma) == coefs((-1, 0))
    assert peach_koehler((1, 0), sigma, "right-hand") == coefs((1, 0))


@given(vectors)
def test_conventions_differ_by_sign(v):
    p, r = cross_e3(v, "paper"), cross_e3(v, "right-hand")
    assert p == tuple(-x for x in r)


@given(airy_functions(), vectors, conventions)
def test_generalized_force_of_dislocation_is_peach_koehler(phi, b, conv):
    sigma2 = airy_stress(phi)
    A = SingularField("vector", (), {((0,), (0, 0)): b[0], ((1,), (0, 0)): b[1]})
    F = generalized_force(A, sigma2, conv)
    assert F.force == peach_koehler(b, stress_at_origin(sigma2), conv)
    assert F.order == (0 if any(F.force) else -1)


@given(airy_functions(), vectors, vectors, conventions)
def test_generalized_force_of_dipole_matches_closed_form(phi, b, v, conv):
    sigma2 = airy_stress(phi)
    F = generalized_force(dipole_density(b, v), sigma2, conv)
    force, couple = dipole_force_couple(b, v, sigma2, conv)
    assert F.force == force
    assert F.couple == couple


@given(airy_functions(), small_q)
def test_dilation_force_is_half_gradient_of_trace(phi, a):
    sigma2 = airy_stress(phi)
    F = generalized_force(dilation_density(a), sigma2, "right-hand")
    assert F.force == dilation_force(a, sigma2, "loop")
    assert dilation_force(a, sigma2, "paper") == tuple(2 * c for c in dilation_force(a, sigma2))


def test_dilation_force_example_in_full_normalization():
    sigma2 = polynomial_field("sym-tensor", {(0, 0): {(1, 0): 1}})
    a = Fraction(3, 2)
    assert dilation_force(a, sigma2, "paper") == coefs((a, 0))


def test_pair_forces_converge_to_couple():
    sigma2 = airy_stress({(0, 2): 1, (3, 0): 1, (1, 2): Fraction(1, 2)})
    b, v = (1, 2), (Fraction(1, 2), -1)
    force, couple = dipole_force_couple(b, v, sigma2)
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        out = dipole_pair_forces(b, v, sigma2, h)
        assert out["net"] == pytest.approx([float(c) for c in force], rel=1e-12, abs=1e-1)
        errs.append(max(abs(out["couple"][a] - np.array([float(c) for c in couple[a]])).max() for a in couple))
    assert errs[1] / errs[0] == pytest.approx(0.5, abs=0.05)
    assert errs[2] / errs[1] == pytest.approx(0.5, abs=0.05)


@pytest.mark.parametrize("b", [(1, 0), (0, 1), (1, -2)])
def test_loop_oracle_agrees_with_right_hand_closed_form(moduli, b):
    sigma2 = airy_stress({(0, 2): 1, (1, 1): Fraction(1, 2), (2, 0): -1})
    beta1, sigma1 = dislocation_distortion(b, moduli)
    J = interaction_eshelby(beta1, sigma1, smooth_distortion(sigma2, moduli), sigma2, moduli)
    oracle = force_loop_oracle(J)
    expected = [float(c) for c in peach_koehler(b, stress_at_origin(sigma2), "right-hand")]
    assert oracle == pytest.approx(expected, abs=1e-9)


def test_dilation_distortion_density(moduli):
    beta, _ = dilation_distortion(1, moduli)
    assert beta.dislocation_density() == dilation_density(1)


def test_zero_density_gives_no_force():
    F = generalized_force(SingularField("vector"), airy_stress({(0, 2): 1}))
    assert F.order == -1
    assert F.force == (Coef(), Coef())
    assert F.to_record() == {}


def test_generalized_force_errors():
    sigma2 = airy_stress({(0, 2): 1})
    with pytest.raises(FieldError):
        generalized_force(SingularField("vector", [SmoothTerm(1, -1, 0, 0, "cos", ("r",))]), sigma2)
    with pytest.raises(FieldError):
        generalized_force(SingularField("scalar", (), {((), (0, 0)): 1}), sigma2)
    with pytest.raises(FieldError):
        generalized_force(dipole_density((0, 1), (1, 0)), airy_stress({(3, 0): 1}), truncation_order=0)
    with pytest.raises(ValueError):
        peach_koehler((1, 0), [[1, 0], [0, 1]], "left-hand")
    with pytest.raises(ValueError):
        dilation_force(1, sigma2, "other")
    with pytest.raises(ValueError):
        dipole_pair_forces((1, 0), (1, 0), sigma2, 0.0)


def test_distortion_validation():
    with pytest.raises(FieldError):
        Distortion(SingularField("scalar"))
    E = SingularField("sym-tensor")
    with pytest.raises(FieldError):
        Distortion(E, SingularField("vector"))


def test_interaction_tensor_vanishes_without_defect(moduli):
    sigma2 = airy_stress({(0, 2): 1, (2, 1): 1})
    beta2 = smooth_distortion(sigma2, moduli)
    zero = Distortion(SingularField("sym-tensor"))
    assert interaction_eshelby(zero, SingularField("sym-tensor"), beta2, sigma2, moduli).is_zero()


def test_interaction_energy_terms_coincide(moduli):
    beta1, _ = dislocation_distortion((1, 2), moduli)
    beta2 = smooth_distortion(airy_stress({(0, 2): 1, (1, 2): 1}), moduli)
    lhs = frobenius(as_tensor(stiffness_apply(beta1.strain, moduli)), beta2.beta)
    rhs = frobenius(as_tensor(stiffness_apply(beta2.strain, moduli)), beta1.beta)
    assert lhs == rhs


@pytest.mark.parametrize("b", [(1, 0), (0, 1), (2, -1)])
def test_divergence_of_interaction_tensor_is_the_force(moduli, b):
    sigma2 = airy_stress({(0, 2): 1, (1, 1): Fraction(1, 2)})
    beta1, sigma1 = dislocation_distortion(b, moduli)
    J = interaction_eshelby(beta1, sigma1, smooth_distortion(sigma2, moduli), sigma2, moduli)
    A = SingularField("vector", (), {((0,), (0, 0)): b[0], ((1,), (0, 0)): b[1]})
    F = generalized_force(A, sigma2, "right-hand")
    divJ = div(J)
    assert tuple(divJ.point_coefficient((0, 0), (i,)) for i in range(2)) == F.force
