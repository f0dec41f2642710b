"""Fermions over the period lattice and their vacuum expectation values.

At a site (n1, n2) with t1 = n1 omega1, t2 = n2 omega2 and T = t1 + t2 the fermion
vectors live in H(t1, t2) + H(t2, t1):

    F0_i    = (v_i(t1) + i v_i(t2)) / (sqrt 2 nu_i^2(T))     F0_i^+  : -i instead of i
    Finf_i  = (w_i(t2) + i w_i(t1)) / (sqrt 2 mu_i^2(T))     Finf_i^+: -i instead of i

paired by (-1)^n1 times the sum of the two tau-products, corrected by -1/T times the
products with u. Wick's rule extends the pairing to words, and the sum of the
F0 / Finf^+ pairings over all sites is 1/sn(a2 + b_i - c_j).
"""
from __future__ import annotations

import enum
import logging
from functools import lru_cache
from itertools import product
from typing import Dict, Iterator, List, Sequence, Tuple

import attrs
import numpy as np

from hgforge.cauchy import Elliptic, Rational, Trigonometric, cauchy_matrix, weights
from hgforge.elliptic import (
    EllipticValue,
    LatticeSpec,
    alternating_tail,
    csc_partial_fraction,
    outer_radius,
)
from hgforge.errors import LatticeError
from hgforge.flows import TauProduct, quaternion_matrices, tau_product
from hgforge.linalg import CMatrix, CVector, Signature, guarded, hermitian_signature, residual
from hgforge.params import ExponentSet

logger = logging.getLogger(__name__)

MAX_WICK_LENGTH = 12


class FermionKind(enum.Enum):
    F0 = "F0"
    F0_DAG = "F0+"
    FINF = "Finf"
    FINF_DAG = "Finf+"

    @property
    def at_zero(self) -> bool:
        return self in (FermionKind.F0, FermionKind.F0_DAG)

    @property
    def dagger(self) -> bool:
        return self in (FermionKind.F0_DAG, FermionKind.FINF_DAG)


def _nonnegative(instance, attribute: attrs.Attribute, value: int) -> None:
    if value < 0:
        raise ValueError(f"{attribute.name}: Expected a nonnegative index, got {value}.")


@attrs.frozen
class FermionLabel:
    kind: FermionKind = attrs.field(converter=FermionKind)
    index: int = attrs.field(validator=_nonnegative)
    site: Tuple[int, int] = attrs.field(default=(0, 0), converter=tuple)

    def __str__(self) -> str:
        return f"{self.kind.value}_{self.index + 1}{self.site}"


@attrs.frozen
class WickWord:
    letters: Tuple[FermionLabel, ...] = attrs.field(converter=tuple)

    def __len__(self) -> int:
        return len(self.letters)


def site_times(site: Tuple[int, int], L: LatticeSpec) -> Tuple[complex, complex]:
    n1, n2 = site
    return n1 * L.omega1, n2 * L.omega2


def _check_site(site: Tuple[int, int], L: LatticeSpec) -> None:
    n1, n2 = site
    if abs(n1) > L.n1 or (L.n2 is not None and abs(n2) > L.n2):
        raise LatticeError(f"Site {site} is outside the truncation ({L.n1}, {L.n2}).")


@attrs.frozen(eq=False)
class SiteProducts:
    """The two tau-products H(t1, t2) and H(t2, t1) of one site."""

    sign: int
    total: complex
    forward: TauProduct
    backward: TauProduct


def site_products(E: ExponentSet, site: Tuple[int, int], L: LatticeSpec) -> SiteProducts:
    _check_site(site, L)
    tau1, tau2 = site_times(site, L)
    return SiteProducts(
        sign=-1 if site[0] % 2 else 1,
        total=tau1 + tau2,
        forward=tau_product(E, tau1, tau2),
        backward=tau_product(E, tau2, tau1),
    )


def fermion_vector(label: FermionLabel, E: ExponentSet, L: LatticeSpec) -> CVector:
    products = site_products(E, label.site, L)
    i = label.index
    phase = -1j if label.kind.dagger else 1j
    if label.kind.at_zero:
        weight = guarded(products.forward.nu2[i], f"nu_{i + 1}^2")
        first = products.forward.v_basis[:, i]
        second = products.backward.v_basis[:, i]
    else:
        weight = guarded(products.forward.mu2[i], f"mu_{i + 1}^2")
        first = products.forward.w_basis[:, i]
        second = products.backward.w_basis[:, i]
    return np.concatenate([first, phase * second]) / (np.sqrt(2) * weight)


def site_product(
    g: CVector, h: CVector, E: ExponentSet, site: Tuple[int, int], L: LatticeSpec
) -> complex:
    """The modified symmetric product of two vectors of one site."""
    products = site_products(E, site, L)
    m = E.m
    u = E.u
    g1, g2, h1, h2 = g[:m], g[m:], h[:m], h[m:]
    G12, G21 = products.forward.gram, products.backward.gram
    value = g1 @ G12 @ h1 + g2 @ G21 @ h2
    if products.total != 0:
        correction = (u @ G12 @ g1) * (u @ G12 @ h1) + (u @ G21 @ g2) * (u @ G21 @ h2)
        value -= correction / products.total
    return complex(products.sign * value)


def site_product_magnitude(
    g: CVector, h: CVector, E: ExponentSet, site: Tuple[int, int], L: LatticeSpec
) -> float:
    """site_product with every term replaced by its absolute value."""
    products = site_products(E, site, L)
    m = E.m
    u = np.abs(E.u)
    g1, g2, h1, h2 = (np.abs(x) for x in (g[:m], g[m:], h[:m], h[m:]))
    G12, G21 = np.abs(products.forward.gram), np.abs(products.backward.gram)
    value = g1 @ G12 @ h1 + g2 @ G21 @ h2
    if products.total != 0:
        correction = (u @ G12 @ g1) * (u @ G12 @ h1) + (u @ G21 @ g2) * (u @ G21 @ h2)
        value += correction / abs(products.total)
    return float(value)


_ZERO_PAIRS = {
    frozenset({FermionKind.F0}),
    frozenset({FermionKind.F0_DAG}),
    frozenset({FermionKind.FINF}),
    frozenset({FermionKind.FINF_DAG}),
    frozenset({FermionKind.F0, FermionKind.FINF}),
    frozenset({FermionKind.F0_DAG, FermionKind.FINF_DAG}),
}


def _table_entry(
    E: ExponentSet, a: FermionKind, i: int, b: FermionKind, j: int, T, sign
) -> complex:
    """Multiplication table of one site; T and sign may be arrays of sites."""
    T = np.asarray(T, dtype=complex)
    correction = np.where(T == 0, 0, 1 / np.where(T == 0, 1, T))
    kinds = frozenset({a, b})
    if kinds in _ZERO_PAIRS:
        return np.zeros_like(T) if T.ndim else 0j
    if a.at_zero == b.at_zero:
        # F0 with F0^+, or Finf with Finf^+
        if i != j:
            diagonal = 0
        else:
            # scalar T only
            w = weights(Rational(complex(T)), E)
            diagonal = 1 / (w.nu2[i] if a.at_zero else w.mu2[i])
        return sign * (diagonal - correction)
    zero_index, inf_index = (i, j) if a.at_zero else (j, i)
    argument = E.a2 + E.b_arr[zero_index] - E.c_arr[inf_index] + T
    return sign * (1 / argument - correction)


def pairing(a: FermionLabel, b: FermionLabel, E: ExponentSet, L: LatticeSpec) -> complex:
    """Table value of the modified product; fermions at different sites do not pair."""
    if a.site != b.site:
        return 0j
    _check_site(a.site, L)
    tau1, tau2 = site_times(a.site, L)
    sign = -1 if a.site[0] % 2 else 1
    return complex(_table_entry(E, a.kind, a.index, b.kind, b.index, tau1 + tau2, sign))


def pairing_direct(a: FermionLabel, b: FermionLabel, E: ExponentSet, L: LatticeSpec) -> complex:
    """The same value computed from the fermion vectors."""
    if a.site != b.site:
        return 0j
    return site_product(fermion_vector(a, E, L), fermion_vector(b, E, L), E, a.site, L)


def _check_length(word: WickWord) -> None:
    if len(word) > MAX_WICK_LENGTH:
        raise ValueError(
            f"word: At most {MAX_WICK_LENGTH} letters are supported, got {len(word)}."
        )


def perfect_matchings(n: int) -> Iterator[Tuple[int, List[Tuple[int, int]]]]:
    """All perfect matchings of range(n) with the sign of the matching permutation."""
    if n == 0:
        yield 1, []
        return
    for k in range(1, n):
        rest = [x for x in range(1, n) if x != k]
        for sign, matching in perfect_matchings(n - 2):
            yield (-1) ** (k - 1) * sign, [(0, k)] + [(rest[p], rest[q]) for p, q in matching]


def _kernel_matrix(word: WickWord, E: ExponentSet, L: LatticeSpec) -> CMatrix:
    n = len(word)
    K = np.zeros((n, n), dtype=complex)
    for p in range(n):
        for q in range(p + 1, n):
            K[p, q] = pairing(word.letters[p], word.letters[q], E, L)
            K[q, p] = -K[p, q]
    return K


def wick_vev(word: WickWord, E: ExponentSet, L: LatticeSpec) -> complex:
    """Signed sum over all pairings of the word."""
    _check_length(word)
    n = len(word)
    if n % 2:
        return 0j
    K = _kernel_matrix(word, E, L)
    total = 0j
    for sign, matching in perfect_matchings(n):
        total += sign * np.prod([K[p, q] for p, q in matching])
    return complex(total)


def wick_recursive(word: WickWord, E: ExponentSet, L: LatticeSpec) -> complex:
    """Expansion along the first letter: sum_k (-1)^(k-1) (w_0, w_k) <rest>."""
    _check_length(word)
    K = _kernel_matrix(word, E, L)

    @lru_cache(maxsize=None)
    def expand(letters: Tuple[int, ...]) -> complex:
        if not letters:
            return 1 + 0j
        if len(letters) % 2:
            return 0j
        first, rest = letters[0], letters[1:]
        return sum(
            (-1) ** k * K[first, rest[k]] * expand(rest[:k] + rest[k + 1 :])
            for k in range(len(rest))
        )

    return complex(expand(tuple(range(len(word)))))


def wick_pfaffian_check(word: WickWord, E: ExponentSet, L: LatticeSpec) -> float:
    """|Pf(K)^2 - det K| relative to |det K| for the antisymmetrized kernel."""
    vev = wick_vev(word, E, L)
    det = complex(np.linalg.det(_kernel_matrix(word, E, L)))
    return abs(vev**2 - det) / max(abs(det), 1.0)


def _vev_slice(
    E: ExponentSet, i: int, j: int, n2: int, L: LatticeSpec, accelerate: bool
) -> Tuple[complex, float]:
    """Sum over n1 of the F0_i / Finf_j^+ pairings at row n2 of the lattice."""
    n1 = np.arange(1, L.n1 + 1)
    signs = np.where(n1 % 2 == 0, 1.0, -1.0)
    row = n2 * L.omega2
    base = _table_entry(E, FermionKind.F0, i, FermionKind.FINF_DAG, j, row, 1)
    pairs = _table_entry(
        E, FermionKind.F0, i, FermionKind.FINF_DAG, j, row + n1 * L.omega1, signs
    ) + _table_entry(E, FermionKind.F0, i, FermionKind.FINF_DAG, j, row - n1 * L.omega1, signs)
    return alternating_tail(complex(base), pairs, accelerate)


def field_vev_elliptic(
    i: int, j: int, E: ExponentSet, L: LatticeSpec, accelerate: bool = True
) -> EllipticValue:
    """<Finf_j^+ F0_i>: the pairings summed over the lattice, rows n2 outermost."""
    x = E.a2 + E.b_arr[i] - E.c_arr[j]
    N, outer_tail = outer_radius(x, L)
    total, inner_error = 0j, 0.0
    for n2 in range(-N, N + 1):
        value, error = _vev_slice(E, i, j, n2, L, accelerate)
        total += value
        inner_error += error
    logger.debug("Field VEV (%d, %d) over %d rows: %s.", i + 1, j + 1, 2 * N + 1, total)
    return EllipticValue(value=complex(total), tail_bound=outer_tail + inner_error)


def field_vev_trig(i: int, j: int, E: ExponentSet, N: int = 10_000) -> complex:
    """1/x + sum_{n != 0} (-1)^n (1/(x + n) - 1/n), x = a2 + b_i - c_j."""
    return csc_partial_fraction(E.a2 + E.b_arr[i] - E.c_arr[j], N)


@attrs.frozen(eq=False)
class HSpaceForm:
    """The form on the span of one field family, in two distinguished bases.

    The second basis is expressed in the first by change[:, j].
    """

    label: str
    gram: CMatrix
    change: CMatrix
    expected_dual: CMatrix

    @property
    def dual_gram(self) -> CMatrix:
        return self.change.T @ self.gram @ self.change

    @property
    def dual_residual(self) -> float:
        scale = max(np.max(np.abs(self.expected_dual)), 1.0)
        return residual(self.dual_gram, self.expected_dual) / scale

    def signature(self) -> Signature:
        hermitian = (self.gram + self.gram.conj().T) / 2
        return hermitian_signature(hermitian, tol=1e-9 * max(np.max(np.abs(hermitian)), 1.0))


def _h_space_pair(kind, E: ExponentSet) -> Tuple[HSpaceForm, HSpaceForm]:
    w = weights(kind, E)
    change = w.nu2[:, None] * cauchy_matrix(kind, E)
    gram = np.diag(1 / w.nu2)
    expected = np.diag(1 / w.mu2)
    return (
        HSpaceForm(label="H", gram=gram, change=change, expected_dual=expected),
        HSpaceForm(label="H'", gram=gram, change=change, expected_dual=expected),
    )


def h_space_products(E: ExponentSet, L: LatticeSpec) -> Tuple[HSpaceForm, HSpaceForm]:
    """Gram diag(1/nu_ell^2) on F0 (resp. F0^+), and the Finf^+ (resp. Finf) basis
    F0 N^2 D_ell in which the Gram should read diag(1/mu_ell^2)."""
    return _h_space_pair(Elliptic(L), E)


def h_space_products_trig(E: ExponentSet) -> Tuple[HSpaceForm, HSpaceForm]:
    return _h_space_pair(Trigonometric(), E)


_FAMILIES = (FermionKind.F0, FermionKind.F0_DAG, FermionKind.FINF, FermionKind.FINF_DAG)


def _field_images(unit: str) -> Dict[FermionKind, Tuple[complex, FermionKind]]:
    """q(F) = coefficient * F' for the generators acting on the field families."""
    if unit == "i":
        return {
            FermionKind.F0: (-1, FermionKind.F0_DAG),
            FermionKind.F0_DAG: (1, FermionKind.F0),
            FermionKind.FINF: (-1, FermionKind.FINF_DAG),
            FermionKind.FINF_DAG: (1, FermionKind.FINF),
        }
    if unit == "j":
        return {
            FermionKind.F0: (-1j, FermionKind.F0),
            FermionKind.F0_DAG: (1j, FermionKind.F0_DAG),
            FermionKind.FINF: (-1j, FermionKind.FINF),
            FermionKind.FINF_DAG: (1j, FermionKind.FINF_DAG),
        }
    if unit == "k":
        return {
            FermionKind.F0: (1j, FermionKind.F0_DAG),
            FermionKind.F0_DAG: (1j, FermionKind.F0),
            FermionKind.FINF: (1j, FermionKind.FINF_DAG),
            FermionKind.FINF_DAG: (1j, FermionKind.FINF),
        }
    raise ValueError(f"unit: Expected one of 'i', 'j', 'k', got {unit!r}.")


def field_action_matrix(unit: str, m: int) -> CMatrix:
    """The action on the 4m field span ordered F0, F0^+, Finf, Finf^+."""
    M = np.zeros((4 * m, 4 * m), dtype=complex)
    for kind, (coefficient, image) in _field_images(unit).items():
        source, target = _FAMILIES.index(kind), _FAMILIES.index(image)
        for i in range(m):
            M[target * m + i, source * m + i] = coefficient
    return M


@attrs.frozen(eq=False)
class ActionReport:
    relation_residual: float
    site_residual: float
    sites: Tuple[Tuple[int, int], ...]


def _relation_residual(i: CMatrix, j: CMatrix, k: CMatrix) -> float:
    one = np.eye(i.shape[0])
    return max(
        residual(i @ i, -one),
        residual(j @ j, -one),
        residual(k @ k, -one),
        residual(i @ j, k),
        residual(j @ k, i),
        residual(k @ i, j),
    )


def quaternion_field_action(
    E: ExponentSet,
    L: LatticeSpec,
    sites: Sequence[Tuple[int, int]] = (),
    seed: int = 0,
    n_sites: int = 10,
) -> ActionReport:
    """Field-wise quaternions and their agreement with the site-wise matrices."""
    m = E.m
    matrices = {unit: field_action_matrix(unit, m) for unit in "ijk"}
    relations = _relation_residual(matrices["i"], matrices["j"], matrices["k"])
    if not sites:
        rng = np.random.default_rng(seed)
        sites = [tuple(int(n) for n in rng.integers(-3, 4, size=2)) for _ in range(n_sites)]
    worst = 0.0
    for site in sites:
        tau1, tau2 = site_times(site, L)
        action = quaternion_matrices(E, tau1, tau2)
        local = {"i": action.i, "j": action.j, "k": action.k}
        for unit, (kind, index) in product("ijk", product(_FAMILIES, range(m))):
            coefficient, image = _field_images(unit)[kind]
            vector = fermion_vector(FermionLabel(kind, index, site), E, L)
            expected = coefficient * fermion_vector(FermionLabel(image, index, site), E, L)
            scale = max(np.max(np.abs(expected)), 1.0)
            worst = max(worst, residual(local[unit] @ vector, expected) / scale)
    return ActionReport(relation_residual=relations, site_residual=worst, sites=tuple(sites))
