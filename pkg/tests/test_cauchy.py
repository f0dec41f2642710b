import numpy as np
import pytest

from hgforge.cauchy import (
    Elliptic,
    Rational,
    Trigonometric,
    cauchy_determinant,
    cauchy_inverse_closed_form,
    cauchy_matrix,
    inverse_residual,
    kernel,
    kind_from_name,
    ndm_orthogonality,
    truncation_bound,
    weights,
)
from hgforge.errors import GenericityError
from hgforge.linalg import determinant
from hgforge.params import ExponentSet, swap_zero_infinity

EXACT_KINDS = [Rational(), Trigonometric()]


@pytest.mark.parametrize("kind", EXACT_KINDS, ids=lambda k: k.name)
def test_closed_form_inverse(kind, exponents):
    assert inverse_residual(exponents, kind) < 1e-7


@pytest.mark.parametrize("kind", EXACT_KINDS, ids=lambda k: k.name)
def test_determinant_product_formula(kind, exponents):
    expected = cauchy_determinant(exponents, kind)
    actual = determinant(cauchy_matrix(kind, exponents))
    assert abs(actual - expected) <= 1e-8 * max(abs(expected), 1.0)


@pytest.mark.parametrize("kind", EXACT_KINDS, ids=lambda k: k.name)
def test_ndm_is_complex_orthogonal(kind, exponents):
    assert ndm_orthogonality(exponents, kind) < 1e-7


def test_rational_inverse_complex_exponents(complex_exponents):
    assert inverse_residual(complex_exponents, Rational()) < 1e-7


def test_explicit_2x2():
    """With x = a2 + b and y = c the rational inverse is the textbook one."""
    E = ExponentSet.from_exponents(0.0, [1.0, 2.0], [0.5, -1.0])
    D = cauchy_matrix(Rational(), E)
    assert np.allclose(D, [[2.0, 0.5], [2 / 3, 1 / 3]])
    assert np.allclose(cauchy_inverse_closed_form(Rational(), E), np.linalg.inv(D))


def test_elliptic_single_pair(lattice):
    """For m = 1 the elliptic Cauchy matrix is 1/sn and its closed-form inverse sn."""
    E = ExponentSet.from_exponents(0.2, [0.15], [0.55])
    kind = Elliptic(lattice)
    assert inverse_residual(E, kind) < 1e-12
    assert ndm_orthogonality(E, kind) < 1e-12


def test_elliptic_trig_degeneration(exponents_multi, trig_limit_lattice):
    """A very long second period turns the elliptic matrix into the trigonometric one."""
    elliptic = cauchy_matrix(Elliptic(trig_limit_lattice), exponents_multi)
    trig = cauchy_matrix(Trigonometric(), exponents_multi)
    assert np.allclose(elliptic, np.pi * trig, rtol=1e-12)
    assert inverse_residual(exponents_multi, Elliptic(trig_limit_lattice)) < 1e-7


def test_elliptic_truncation_bound(exponents, lattice):
    assert 0 < truncation_bound(Elliptic(lattice), exponents) < 1e-13
    assert truncation_bound(Trigonometric(), exponents) == 0


@pytest.mark.parametrize("kind", [Rational(), Trigonometric()], ids=lambda k: k.name)
def test_swap_transposes(kind, complex_exponents):
    """Exchanging 0 and infinity transposes the Cauchy matrix."""
    swapped = swap_zero_infinity(complex_exponents)
    assert np.allclose(cauchy_matrix(kind, swapped), cauchy_matrix(kind, complex_exponents).T)


def test_weights_of_single_pair():
    E = ExponentSet.from_exponents(0.25, [0.1], [0.6])
    w = weights(Rational(), E)
    x = 0.25 + 0.1 - 0.6
    assert w.mu2[0] == pytest.approx(x)
    assert w.nu2[0] == pytest.approx(x)


def test_resonant_parameters():
    E = ExponentSet.from_exponents(0.5, [0.1, 0.3], [0.6, 0.2])
    with pytest.raises(GenericityError) as excinfo:
        cauchy_matrix(Rational(), E)
    assert "K(a2+b_i-c_j)" in str(excinfo.value)


def test_kernels():
    x = np.array([0.25, 0.5])
    assert np.allclose(kernel(Rational(), x), x)
    assert np.allclose(kernel(Trigonometric(), x), np.sin(np.pi * x))


def test_kind_from_name(lattice):
    assert kind_from_name("rational", tau=0.5) == Rational(0.5)
    assert kind_from_name("elliptic", lattice) == Elliptic(lattice)
    with pytest.raises(ValueError) as excinfo:
        kind_from_name("hyperbolic")
    assert "hyperbolic" in str(excinfo.value)
