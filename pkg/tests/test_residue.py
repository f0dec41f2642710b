import numpy as np
import pytest

from hgforge.errors import GenericityError
from hgforge.linalg import invert, relative_residual
from hgforge.params import ExponentSet
from hgforge.residue import (
    a_action_residual,
    build_residue_triple,
    check_flag_general_position,
    residue_form,
    residue_matrices,
    w_inverse_closed_form,
)


def test_residues_sum_to_zero(exponents):
    A, B, C = residue_matrices(exponents)
    assert np.allclose(A + B + C, 0, atol=1e-14)


def test_residue_spectra(exponents):
    """B and C are triangular with b and -c on the diagonal, A is a2 Id up to rank one."""
    E = exponents
    T = build_residue_triple(E)
    assert np.allclose(np.diag(T.B), E.b_arr)
    assert np.allclose(np.tril(T.B, -1), 0)
    assert np.allclose(np.diag(T.C), -E.c_arr)
    assert np.allclose(np.triu(T.C, 1), 0)
    assert np.allclose(T.A, E.a2 * np.eye(E.m) - np.outer(T.u, np.ones(E.m)))


def test_eigenvectors(exponents):
    E = exponents
    T = build_residue_triple(E)
    assert relative_residual(T.B @ T.V, T.V * E.b_arr[None, :]) < 1e-10
    assert relative_residual(T.C @ T.W, T.W * -E.c_arr[None, :]) < 1e-10
    assert relative_residual(T.A @ T.u, E.a1 * T.u) < 1e-12


def test_eigenvectors_complex(complex_exponents):
    E = complex_exponents
    T = build_residue_triple(E)
    assert relative_residual(T.B @ T.V, T.V * E.b_arr[None, :]) < 1e-10
    assert relative_residual(T.C @ T.W, T.W * -E.c_arr[None, :]) < 1e-10


def test_w_inverse_closed_form(exponents):
    E = exponents
    W = build_residue_triple(E).W
    assert relative_residual(w_inverse_closed_form(E), invert(W)) < 1e-9


def test_single_pair():
    """For m = 1 everything is a number: A = a1, B = b, C = -c, V = W = u."""
    E = ExponentSet.from_exponents(0.3, [0.1], [0.55])
    T = build_residue_triple(E)
    u = 0.1 - 0.55 + 0.3
    assert T.A[0, 0] == pytest.approx(E.a1)
    assert T.V[0, 0] == pytest.approx(u)
    assert T.W[0, 0] == pytest.approx(u)


def test_gram_is_diagonal_in_both_bases(exponents):
    form = residue_form(exponents)
    assert relative_residual(form.gram_v, np.diag(form.nu2)) < 1e-7
    assert relative_residual(form.gram_w, np.diag(form.mu2)) < 1e-7


def test_gram_is_symmetric(exponents):
    form = residue_form(exponents)
    assert relative_residual(form.gram, form.gram.T) < 1e-7


def test_flags_in_general_position(exponents):
    assert check_flag_general_position(build_residue_triple(exponents))


def test_a_acts_by_reflection(exponents):
    """A x = a2 x - (x, u) u for the residue form."""
    form = residue_form(exponents)
    scale = max(1.0, np.max(np.abs(form.gram)))
    assert a_action_residual(exponents, seed=3) <= 1e-7 * scale


def test_u_must_not_vanish():
    """u_i = b_i - c_i + a2 = 0 makes the flags degenerate."""
    E = ExponentSet.from_exponents(0.25, [0.1, 0.5], [0.35, 0.9])
    with pytest.raises(GenericityError) as excinfo:
        build_residue_triple(E)
    assert "u_i" in str(excinfo.value)
