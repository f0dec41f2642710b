from fractions import Fraction

import numpy as np
import pytest

from hgforge.oracle import (
    RationalIdentity,
    TrialPoint,
    draw_point,
    evaluate_at,
    exact_determinant,
    ex_matrix,
    verify_rational_identity,
)


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("identity", list(RationalIdentity), ids=lambda i: i.value)
def test_identities_hold(identity, m):
    if m < identity.min_m:
        pytest.skip(f"{identity.value} needs m >= {identity.min_m}")
    assert verify_rational_identity(identity, m, trials=5, seed=m)


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize(
    "identity", [RationalIdentity.CAUCHY_INV, RationalIdentity.CAUCHY_DET], ids=lambda i: i.value
)
def test_corrupted_identity_is_caught(identity, m):
    """Negating one entry must break the identity; otherwise the oracle proves nothing."""
    assert not verify_rational_identity(identity, m, trials=3, seed=0, corrupt=True)


def test_identity_needs_minimal_size():
    with pytest.raises(ValueError) as excinfo:
        verify_rational_identity(RationalIdentity.LAGRANGE_ZERO_SUM, 1)
    assert str(excinfo.value) == "LAGRANGE_ZERO_SUM needs m >= 2, got 1."


def test_draw_point_uses_distinct_integers():
    point = draw_point(3, np.random.default_rng(0))
    values = [*point.b, *point.c, point.a2, point.tau1, point.tau2, point.x]
    assert len(set(values)) == len(values)
    assert all(v.denominator == 1 for v in values)


def test_vanishing_denominator_raises():
    """Evaluation is exact, a zero denominator is a ZeroDivisionError."""
    point = TrialPoint(
        b=(Fraction(1), Fraction(2)),
        c=(Fraction(4), Fraction(5)),
        a2=Fraction(3),
        tau1=Fraction(0),
        tau2=Fraction(7),
        x=Fraction(9),
    )
    with pytest.raises(ZeroDivisionError):
        evaluate_at(RationalIdentity.CAUCHY_INV, point)


def test_exact_determinant():
    M = [[Fraction(1, 2), Fraction(1, 3)], [Fraction(1, 4), Fraction(1, 5)]]
    assert exact_determinant(M) == Fraction(1, 10) - Fraction(1, 12)
    assert exact_determinant([[Fraction(0), Fraction(1)], [Fraction(0), Fraction(2)]]) == 0


def test_ex_matrix_at_zero_time_is_identity():
    b = (Fraction(1), Fraction(3))
    assert ex_matrix(b, Fraction(0)) == [[1, 0], [0, 1]]


def test_descriptions_cover_every_identity():
    for identity in RationalIdentity:
        assert identity.description
        assert identity.arity >= 1
