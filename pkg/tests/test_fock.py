from itertools import product

import numpy as np
import pytest

from hgforge.elliptic import inv_sn
from hgforge.fock import (
    FermionKind,
    FermionLabel,
    WickWord,
    fermion_vector,
    field_action_matrix,
    field_vev_elliptic,
    field_vev_trig,
    h_space_products,
    h_space_products_trig,
    pairing,
    pairing_direct,
    perfect_matchings,
    quaternion_field_action,
    site_product,
    site_product_magnitude,
    wick_pfaffian_check,
    wick_recursive,
    wick_vev,
)
from hgforge.params import ExponentSet

SITES = [(0, 0), (1, 0), (-1, 1)]


def _word(*letters):
    return WickWord(FermionLabel(kind, index, site) for kind, index, site in letters)


def test_label():
    label = FermionLabel("F0+", 1, [2, -1])
    assert label.kind is FermionKind.F0_DAG
    assert label.site == (2, -1)
    assert str(label) == "F0+_2(2, -1)"


def test_label_rejects_negative_index():
    with pytest.raises(ValueError) as excinfo:
        FermionLabel(FermionKind.F0, -1)
    assert "nonnegative index" in str(excinfo.value)


@pytest.mark.parametrize("site", SITES)
def test_pairing_table_matches_fermion_vectors(site, exponents, lattice):
    labels = [FermionLabel(kind, i, site) for kind in FermionKind for i in range(exponents.m)]
    for a, b in product(labels, repeat=2):
        table = pairing(a, b, exponents, lattice)
        direct = pairing_direct(a, b, exponents, lattice)
        assert abs(table - direct) <= 1e-7 * max(abs(table), 1.0)


def test_site_product_magnitude_bounds_the_product(exponents, lattice):
    site = (1, 0)
    for kind in FermionKind:
        g = fermion_vector(FermionLabel(kind, 0, site), exponents, lattice)
        h = fermion_vector(FermionLabel(FermionKind.F0_DAG, 0, site), exponents, lattice)
        value = site_product(g, h, exponents, site, lattice)
        magnitude = site_product_magnitude(g, h, exponents, site, lattice)
        assert magnitude >= abs(value) * (1 - 1e-12)


def test_like_fermions_do_not_pair(exponents, lattice):
    a = FermionLabel(FermionKind.F0, 0, (1, 0))
    b = FermionLabel(FermionKind.FINF, 0, (1, 0))
    assert pairing(a, a, exponents, lattice) == 0
    assert pairing(a, b, exponents, lattice) == 0


def test_different_sites_do_not_pair(exponents, lattice):
    a = FermionLabel(FermionKind.F0, 0, (0, 0))
    b = FermionLabel(FermionKind.FINF_DAG, 0, (1, 0))
    assert pairing(a, b, exponents, lattice) == 0
    assert pairing_direct(a, b, exponents, lattice) == 0


def test_perfect_matchings():
    assert list(perfect_matchings(4)) == [
        (1, [(0, 1), (2, 3)]),
        (-1, [(0, 2), (1, 3)]),
        (1, [(0, 3), (1, 2)]),
    ]
    assert len(list(perfect_matchings(6))) == 15


def test_two_letter_word_is_the_pairing(exponents, lattice):
    a = FermionLabel(FermionKind.F0, 0)
    b = FermionLabel(FermionKind.FINF_DAG, exponents.m - 1)
    assert wick_vev(WickWord([a, b]), exponents, lattice) == pairing(a, b, exponents, lattice)


def test_wick_rule_two_ways(exponents, lattice):
    word = _word(
        (FermionKind.F0, 0, (0, 0)),
        (FermionKind.FINF_DAG, 0, (0, 0)),
        (FermionKind.F0_DAG, exponents.m - 1, (1, 0)),
        (FermionKind.FINF, 0, (1, 0)),
        (FermionKind.F0, exponents.m - 1, (0, 0)),
        (FermionKind.F0_DAG, 0, (0, 0)),
    )
    expected = wick_vev(word, exponents, lattice)
    assert abs(wick_recursive(word, exponents, lattice) - expected) <= 1e-10 * max(
        abs(expected), 1.0
    )


def test_pfaffian(exponents, lattice):
    word = _word(
        (FermionKind.F0, 0, (0, 0)),
        (FermionKind.FINF_DAG, 0, (0, 0)),
        (FermionKind.F0_DAG, 0, (0, 0)),
        (FermionKind.FINF, exponents.m - 1, (0, 0)),
    )
    assert wick_pfaffian_check(word, exponents, lattice) < 1e-9


def test_odd_words_vanish(exponents, lattice):
    word = _word((FermionKind.F0, 0, (0, 0)))
    assert wick_vev(word, exponents, lattice) == 0
    assert wick_recursive(word, exponents, lattice) == 0


def test_long_words_are_rejected(exponents, lattice):
    word = WickWord([FermionLabel(FermionKind.F0, 0)] * 14)
    with pytest.raises(ValueError) as excinfo:
        wick_vev(word, exponents, lattice)
    assert "At most 12 letters" in str(excinfo.value)


def test_elliptic_field_vev(exponents, lattice):
    """Summing the pairings over the lattice gives 1/sn(a2 + b_i - c_j)."""
    E = exponents
    for i, j in product(range(E.m), repeat=2):
        vev = field_vev_elliptic(i, j, E, lattice)
        expected = inv_sn(E.a2 + E.b[i] - E.c[j], lattice)
        assert abs(vev.value - expected.value) <= max(1e-6, vev.tail_bound + expected.tail_bound)


def test_trig_field_vev(exponents):
    E = exponents
    for i, j in product(range(E.m), repeat=2):
        expected = np.pi / np.sin(np.pi * (E.a2 + E.b_arr[i] - E.c_arr[j]))
        assert field_vev_trig(i, j, E) == pytest.approx(expected, rel=1e-10)


def test_h_space_trig(exponents):
    forms = h_space_products_trig(exponents)
    assert [form.label for form in forms] == ["H", "H'"]
    assert max(form.dual_residual for form in forms) < 1e-7


def test_h_space_trig_limit(exponents, trig_limit_lattice):
    forms = h_space_products(exponents, trig_limit_lattice)
    assert max(form.dual_residual for form in forms) < 1e-7


def test_h_space_single_pair(lattice):
    E = ExponentSet.from_exponents(0.2, [0.15], [0.55])
    forms = h_space_products(E, lattice)
    assert max(form.dual_residual for form in forms) < 1e-10


@pytest.mark.parametrize("unit", "ijk")
def test_field_action_squares_to_minus_one(unit):
    M = field_action_matrix(unit, 2)
    assert np.allclose(M @ M, -np.eye(8))


def test_field_action_unknown_unit():
    with pytest.raises(ValueError) as excinfo:
        field_action_matrix("l", 2)
    assert "'l'" in str(excinfo.value)


def test_quaternion_field_action(exponents, lattice):
    report = quaternion_field_action(exponents, lattice, sites=[(1, 0), (-1, 1), (2, -1)])
    assert report.relation_residual == 0
    assert report.site_residual < 1e-7
    assert report.sites == ((1, 0), (-1, 1), (2, -1))
