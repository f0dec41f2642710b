import warnings

import numpy as np
import pytest

from hgforge.errors import DegenerateMatrixError, GenericityError
from hgforge.linalg import (
    determinant,
    expm_pade,
    compensated_product,
    condition_estimate,
    fsum_complex,
    guarded,
    hermitian_nullspace_dimension,
    hermitian_signature,
    inf_norm,
    invert,
    numerical_rank,
    relative_residual,
)


def test_inf_norm_is_largest_entry():
    assert inf_norm([[1, -3j], [2, 0]]) == 3
    assert inf_norm(np.zeros((0, 0))) == 0


def test_relative_residual_never_amplifies():
    assert relative_residual([1e-3], [0]) == pytest.approx(1e-3)
    assert relative_residual([100.0], [101.0]) == pytest.approx(1 / 101)


def test_invert():
    rng = np.random.default_rng(0)
    M = np.eye(4) + 0.2 * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    assert np.allclose(invert(M) @ M, np.eye(4), atol=1e-12)


def test_invert_singular():
    with pytest.raises(DegenerateMatrixError) as excinfo:
        invert([[1, 2], [2, 4]])
    assert "singular to working precision" in str(excinfo.value)


def test_invert_needs_square_matrix():
    with pytest.raises(ValueError):
        invert(np.ones((2, 3)))


@pytest.mark.parametrize(
    "M, expected",
    [
        ([[2]], 2),
        ([[0, 1], [1, 0]], -1),
        ([[1, 2j], [3, 4]], 4 - 6j),
    ],
)
def test_determinant(M, expected):
    assert determinant(M) == pytest.approx(expected)


def test_expm_of_nilpotent():
    N = np.array([[0, 1], [0, 0]])
    assert np.allclose(expm_pade(N * 2.5), [[1, 2.5], [0, 1]])


def test_numerical_rank():
    assert numerical_rank(np.outer([1, 2, 3], [1j, 1, 0])) == 1
    assert numerical_rank(np.eye(3)) == 3
    assert numerical_rank(np.zeros((2, 2))) == 0


@pytest.mark.parametrize(
    "G, counts, definite",
    [
        (np.diag([1.0, 2.0]), (2, 0, 0), True),
        (np.diag([-1.0, -2.0]), (0, 2, 0), True),
        (np.diag([1.0, -2.0]), (1, 1, 0), False),
        (np.array([[1, 1j], [-1j, 1]]), (1, 0, 1), False),
    ],
)
def test_hermitian_signature(G, counts, definite):
    signature = hermitian_signature(G)
    assert (signature.n_plus, signature.n_minus, signature.n_zero) == counts
    assert signature.definite is definite


def test_signature_rejects_non_hermitian():
    with pytest.raises(DegenerateMatrixError):
        hermitian_signature([[1, 1], [0, 1]])


def test_invariant_forms_of_a_diagonal_unitary():
    """A generic diagonal unitary preserves exactly the diagonal hermitian forms."""
    U = np.diag(np.exp(2j * np.pi * np.array([0.1, 0.37, 0.71])))
    assert hermitian_nullspace_dimension([U]) == 3
    assert hermitian_nullspace_dimension([np.eye(3)]) == 9


def test_invariant_forms_of_unimodular_scalars():
    """1x1 constraints of modulus one leave every real multiple of 1 invariant."""
    phases = [np.array([[np.exp(2j * np.pi * t)]]) for t in (0.13, 0.58, -0.29)]
    assert hermitian_nullspace_dimension(phases) == 1
    assert hermitian_nullspace_dimension([np.array([[2.0]])]) == 0


def test_guards():
    with pytest.raises(GenericityError) as excinfo:
        guarded(np.array([[1.0, 1e-12], [2.0, 3.0]]), "b_i-b_k")
    assert "b_i-b_k[1, 2]" in str(excinfo.value)


def test_fsum_complex():
    values = [1e16, 1 + 1j, -1e16]
    assert fsum_complex(values) == 1 + 1j


def test_compensated_product():
    values = np.array([[2.0, 3.0j, 5.0], [1e-200, 1e200, -1.0], [4.0, 0.0, 1.0]])
    products = compensated_product(values, axis=1)
    assert products[0] == pytest.approx(30j)
    assert products[1] == pytest.approx(-1.0)
    assert products[2] == 0
    assert compensated_product(values.T, axis=0) == pytest.approx(products)


def test_condition_estimate_is_real():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert condition_estimate([[2j, 0], [0, 1]]) == pytest.approx(2.0)
