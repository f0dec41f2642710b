import numpy as np
import pytest

from hgforge.errors import GenericityError
from hgforge.flows import (
    build_flow_operators,
    calogero_moser_matrix,
    evolve,
    evolved_exponents,
    ex_ey,
    ex_matrix,
    extended_products,
    flow_equation_residual,
    flow_exponential,
    jordan_block,
    jordan_determinant,
    jordan_normalizer,
    quaternion_matrices,
    tau_product,
    v_to_w_residual,
    vandermonde_check,
    vw_pairing_residual,
    z_matrix,
)
from hgforge.linalg import determinant, expm_pade, identity, invert, relative_residual
from hgforge.params import ExponentSet
from hgforge.residue import build_residue_triple

TAU1, TAU2 = 0.137, -0.291


def test_calogero_moser_rows_sum_to_zero():
    X = calogero_moser_matrix(np.array([0.1, 0.4, 0.75]))
    assert np.allclose(X.sum(axis=1), 0)
    assert X[0, 1] == pytest.approx(1 / 0.3)


def test_closed_forms_are_exponentials(exponents):
    operators = build_flow_operators(exponents)
    EX, EY = ex_ey(exponents, TAU1)
    assert relative_residual(EX, expm_pade(operators.X * TAU1)) < 1e-10
    assert relative_residual(EY, expm_pade(operators.Y * TAU1)) < 1e-10


def test_group_law(exponents):
    EX1, EY1 = ex_ey(exponents, TAU1)
    EX2, EY2 = ex_ey(exponents, TAU2)
    EX12, EY12 = ex_ey(exponents, TAU1 + TAU2)
    assert relative_residual(EX1 @ EX2, EX12) < 1e-10
    assert relative_residual(EY1 @ EY2, EY12) < 1e-10


def test_zero_time_is_identity(exponents):
    EX, EY = ex_ey(exponents, 0)
    assert np.array_equal(EX, identity(exponents.m))
    assert np.array_equal(EY, identity(exponents.m))


def test_s_intertwines_both_flags(exponents):
    """S = V X V^-1 = -W Y W^-1."""
    T = build_residue_triple(exponents)
    operators = build_flow_operators(exponents)
    other = -T.W @ operators.Y @ invert(T.W)
    assert relative_residual(operators.S, other) < 1e-8


def test_z_matrix_inverse(exponents):
    Z, Z_inv = z_matrix(exponents, TAU1)
    assert relative_residual(Z @ Z_inv, identity(exponents.m)) < 1e-9


def test_evolved_residues_sum_to_zero(exponents):
    state = evolve(exponents, TAU1, TAU2)
    assert np.allclose(state.A + state.B + state.C, 0)
    a1, a2 = evolved_exponents(exponents, TAU1, TAU2)
    assert state.a1 == pytest.approx(a1)
    assert state.a2 == pytest.approx(a2)


def test_default_flow_constants_keep_a2():
    """With k1 = k2 = 1 the exponent a2 is a flow invariant while a1 moves."""
    E = ExponentSet.from_exponents(0.3, [0.1, 0.5], [0.2, 0.75])
    a1, a2 = evolved_exponents(E, TAU1, TAU2)
    assert a2 == pytest.approx(E.a2)
    assert a1 == pytest.approx(E.a1 - E.m * (TAU1 + TAU2))


def test_flow_equations(exponents):
    scale = max(1.0, np.max(np.abs(build_residue_triple(exponents).B)))
    assert max(flow_equation_residual(exponents, TAU1, TAU2)) < 1e-5 * scale


def test_tau_product(exponents):
    product = tau_product(exponents, TAU1, TAU2)
    scale = max(
        1.0,
        np.max(np.abs(product.w_gram)),
        np.max(np.abs(product.v_basis)),
        np.max(np.abs(product.w_basis)),
    )
    assert product.w_diagonality_residual < 1e-8 * scale
    assert v_to_w_residual(exponents, product) < 1e-8 * scale
    assert vw_pairing_residual(exponents, product) < 1e-8 * scale


def test_extended_products(exponents):
    for form in extended_products(exponents, TAU1, TAU2):
        scale = max(1.0, np.max(np.abs(form.second_diagonal)), np.max(np.abs(form.first_basis)))
        assert form.second_basis_residual < 1e-8 * scale
        assert form.transition_residual < 1e-8 * scale


def test_extended_products_need_distinct_times(exponents):
    with pytest.raises(GenericityError):
        extended_products(exponents, TAU1, TAU1)


def test_jordan_normal_form(exponents_multi):
    E = exponents_multi
    G = jordan_normalizer(E, TAU1)
    EX, _ = ex_ey(E, TAU1)
    assert relative_residual(G @ EX @ invert(G), jordan_block(E.m)) < 1e-8
    expected = jordan_determinant(E, TAU1)
    assert abs(determinant(G) - expected) <= 1e-8 * max(abs(expected), 1.0)


def test_jordan_normalizer_needs_nonzero_time(exponents):
    with pytest.raises(GenericityError):
        jordan_normalizer(exponents, 0)


@pytest.mark.parametrize("tau", [TAU1, TAU2, 1.0])
def test_vandermonde_factorization(tau, exponents):
    assert vandermonde_check(exponents, tau, tol=1e-7)


def test_quaternion_relations(exponents):
    action = quaternion_matrices(exponents, TAU1, TAU2)
    assert action.relation_residual() < 1e-7
    scale = max(1.0, np.max(np.abs(action.gram)))
    factors = action.form_factors()
    assert tuple(sign for sign, _ in factors) == (-1, 1, -1)
    assert max(res for _, res in factors) < 1e-7 * scale


def test_flow_exponential_at_integer_times(exponents):
    """exp(S) exp(-S) = Id; integer times enter the Frobenius closed forms."""
    forward = flow_exponential(exponents, 1)
    backward = flow_exponential(exponents, -1)
    assert relative_residual(forward @ backward, identity(exponents.m)) < 1e-9
    b = exponents.b_arr
    assert relative_residual(ex_matrix(b, 1) @ ex_matrix(b, -1), identity(exponents.m)) < 1e-9
