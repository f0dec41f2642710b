import numpy as np
import pytest

from hgforge.elliptic import (
    LatticeSpec,
    csc_partial_fraction,
    euler_accelerate,
    inv_sn,
    inv_sn_lattice,
    outer_radius,
    p_minus_e3,
    sn,
)
from hgforge.errors import LatticeError

POINTS = [0.3, 0.25 + 0.1j, 0.6 - 0.2j, -0.45 + 0.3j]


@pytest.mark.parametrize("z", POINTS)
def test_quasi_periodicity(z, lattice):
    """omega1 flips the sign, omega2 is a period, and 1/sn is odd."""
    value = inv_sn(z, lattice).value
    assert inv_sn(z + lattice.omega1, lattice).value == pytest.approx(-value, rel=1e-10)
    assert inv_sn(z + lattice.omega2, lattice).value == pytest.approx(value, rel=1e-10)
    assert inv_sn(-z, lattice).value == pytest.approx(-value, rel=1e-12)


@pytest.mark.parametrize("z", POINTS)
def test_lattice_sum_agrees_with_cosecant_series(z, lattice):
    direct = inv_sn(z, lattice)
    summed = inv_sn_lattice(z, lattice)
    assert abs(direct.value - summed.value) <= max(1e-8, direct.tail_bound + summed.tail_bound)


def test_lattice_sum_without_acceleration_reports_a_larger_bound(lattice):
    accelerated = inv_sn_lattice(0.3, lattice)
    plain = inv_sn_lattice(0.3, lattice, accelerate=False)
    assert plain.tail_bound > accelerated.tail_bound
    assert abs(plain.value - inv_sn(0.3, lattice).value) <= plain.tail_bound


@pytest.mark.parametrize("x", [0.1, 0.37, 0.5, 0.83])
def test_trig_limit(x, trig_limit_lattice):
    """For a very long second period only the n2 = 0 term survives."""
    expected = np.pi / np.sin(np.pi * x)
    assert inv_sn(x, trig_limit_lattice).value == pytest.approx(expected, rel=1e-12)


def test_pole_at_origin(lattice):
    """Near zero 1/sn(z) behaves like 1/z."""
    z = 1e-4 + 1e-4j
    assert inv_sn(z, lattice).value * z == pytest.approx(1, rel=1e-6)


def test_sn_and_p(lattice):
    z = 0.25 + 0.1j
    value = inv_sn(z, lattice).value
    assert sn(z, lattice) == pytest.approx(1 / value)
    assert p_minus_e3(z, lattice) == pytest.approx(value**2)


@pytest.mark.parametrize("z", [0, 1, 0.8j, 2 - 1.6j])
def test_lattice_points_are_rejected(z, lattice):
    with pytest.raises(LatticeError) as excinfo:
        inv_sn(z, lattice)
    assert "period lattice" in str(excinfo.value)


def test_outer_radius_meets_requested_tail(lattice):
    N, bound = outer_radius(0.3 + 0.2j, lattice)
    assert bound < lattice.tail
    assert N >= 1


def test_fixed_outer_radius():
    L = LatticeSpec(omega2=0.8j, n2=3)
    N, bound = outer_radius(0.3, L)
    assert N == 3
    assert bound > 0


@pytest.mark.parametrize(
    "kwargs, message",
    [
        (dict(omega2=-0.8j), "Im(omega2/omega1) must be positive"),
        (dict(omega2=2.0), "Im(omega2/omega1) must be positive"),
        (dict(n1=5), "n1: Need at least 13 terms, got 5."),
    ],
)
def test_invalid_lattice(kwargs, message):
    with pytest.raises(LatticeError) as excinfo:
        LatticeSpec(**kwargs)
    assert message in str(excinfo.value)


@pytest.mark.parametrize("x", [0.2, 0.5 + 0.3j, -0.7])
@pytest.mark.parametrize("accelerate", [True, False])
def test_csc_partial_fraction(x, accelerate):
    expected = np.pi / np.sin(np.pi * x)
    tolerance = 1e-12 if accelerate else 1e-3
    assert abs(csc_partial_fraction(x, accelerate=accelerate) - expected) < tolerance * abs(
        expected
    )


def test_csc_rejects_integers():
    with pytest.raises(LatticeError):
        csc_partial_fraction(2.0)


def test_euler_acceleration_of_log2():
    """1 - 1/2 + 1/3 - ... converges to log 2 slowly; averaging speeds it up."""
    n = np.arange(1, 41)
    partial_sums = np.cumsum((-1.0) ** (n + 1) / n)
    estimate, spread = euler_accelerate(partial_sums)
    assert abs(estimate - np.log(2)) < 1e-9
    assert abs(partial_sums[-1] - np.log(2)) > 1e-3
    assert spread < 1e-6
