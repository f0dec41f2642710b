"""Cauchy-type matrices D_ij = 1/K(a2 + b_i - c_j + t) and their closed-form inverses.

Three kernels K are supported: the identity (rational, with a shift t), sin(pi x)
(trigonometric) and sn (elliptic). The weights

    mu_i^2 = prod_k K(a2 + b_k - c_i + t) / prod_{k != i} K(c_k - c_i)
    nu_j^2 = prod_k K(a2 + b_j - c_k + t) / prod_{k != j} K(b_j - b_k)

give the inverse entries mu_i^2 nu_j^2 / K(a2 + b_j - c_i + t).
"""
from __future__ import annotations

import logging
from functools import singledispatch
from typing import Union

import attrs
import numpy as np

from hgforge.elliptic import LatticeSpec, inv_sn
from hgforge.linalg import CMatrix, compensated_product, guarded, inf_norm, residual
from hgforge.params import ExponentSet

logger = logging.getLogger(__name__)


@attrs.frozen
class Rational:
    tau: complex = attrs.field(default=0, converter=complex)

    name = "rational"


@attrs.frozen
class Trigonometric:
    name = "trig"


@attrs.frozen
class Elliptic:
    lattice: LatticeSpec = attrs.field(factory=LatticeSpec)

    name = "elliptic"


CauchyKind = Union[Rational, Trigonometric, Elliptic]


def kind_from_name(name: str, lattice: LatticeSpec = LatticeSpec(), tau: complex = 0) -> CauchyKind:
    kinds = {"rational": Rational(tau), "trig": Trigonometric(), "elliptic": Elliptic(lattice)}
    try:
        return kinds[name]
    except KeyError:
        raise ValueError(f"Unknown Cauchy kind {name!r}, expected one of {sorted(kinds)}.")


@singledispatch
def kernel(kind, x: np.ndarray) -> np.ndarray:
    raise TypeError(f"Unsupported Cauchy kind {kind!r}.")


@kernel.register
def _(kind: Rational, x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=complex)


@kernel.register
def _(kind: Trigonometric, x: np.ndarray) -> np.ndarray:
    return np.sin(np.pi * np.asarray(x, dtype=complex))


@kernel.register
def _(kind: Elliptic, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    return np.vectorize(lambda z: 1 / inv_sn(z, kind.lattice).value, otypes=[complex])(x)


@singledispatch
def shift(kind) -> complex:
    return 0j


@shift.register
def _(kind: Rational) -> complex:
    return kind.tau


@singledispatch
def truncation_bound(kind, E: ExponentSet) -> float:
    """Bound on the series truncation error entering the kernel values."""
    return 0.0


@truncation_bound.register
def _(kind: Elliptic, E: ExponentSet) -> float:
    args = np.concatenate(
        [np.ravel(kernel_arguments(kind, E)), np.ravel(E.b_arr[:, None] - E.b_arr[None, :])]
    )
    return max(
        (inv_sn(z, kind.lattice).tail_bound for z in args if z != 0), default=0.0
    )


def kernel_arguments(kind: CauchyKind, E: ExponentSet) -> CMatrix:
    """Matrix of a2 + b_i - c_j + t."""
    return E.a2 + E.b_arr[:, None] - E.c_arr[None, :] + shift(kind)


@attrs.frozen(eq=False)
class WeightPair:
    mu2: np.ndarray
    nu2: np.ndarray


def _offdiagonal_kernel_products(kind: CauchyKind, diffs: np.ndarray, label: str) -> np.ndarray:
    m = diffs.shape[0]
    values = np.ones((m, m), dtype=complex)
    mask = ~np.eye(m, dtype=bool)
    values[mask] = kernel(kind, diffs[mask])
    return guarded(compensated_product(values, axis=1), label)


def weights(kind: CauchyKind, E: ExponentSet) -> WeightPair:
    args = guarded(kernel(kind, kernel_arguments(kind, E)), "K(a2+b_i-c_j)")
    b, c = E.b_arr, E.c_arr
    c_diffs = c[None, :] - c[:, None]  # [i, k] = c_k - c_i
    b_diffs = b[:, None] - b[None, :]  # [j, k] = b_j - b_k
    mu2 = compensated_product(args, axis=0)
    mu2 = mu2 / _offdiagonal_kernel_products(kind, c_diffs, "K(c_k-c_i)")
    nu2 = compensated_product(args, axis=1)
    nu2 = nu2 / _offdiagonal_kernel_products(kind, b_diffs, "K(b_j-b_k)")
    return WeightPair(mu2=mu2, nu2=nu2)


def cauchy_matrix(kind: CauchyKind, E: ExponentSet) -> CMatrix:
    return 1 / guarded(kernel(kind, kernel_arguments(kind, E)), "K(a2+b_i-c_j)")


def cauchy_inverse_closed_form(kind: CauchyKind, E: ExponentSet) -> CMatrix:
    w = weights(kind, E)
    transposed_kernel = kernel(kind, kernel_arguments(kind, E)).T  # [i, j] = K(a2+b_j-c_i)
    return w.mu2[:, None] * w.nu2[None, :] / transposed_kernel


def cauchy_determinant(E: ExponentSet, kind: CauchyKind) -> complex:
    """prod_{i<j} K(x_i - x_j) K(y_j - y_i) / prod_{i,j} K(x_i - y_j), x_i = a2 + b_i + t, y = c."""
    b, c, m = E.b_arr, E.c_arr, E.m
    upper = np.triu_indices(m, k=1)
    numerator = np.prod(kernel(kind, (b[:, None] - b[None, :])[upper])) * np.prod(
        kernel(kind, (c[None, :] - c[:, None])[upper])
    )
    return complex(numerator / np.prod(kernel(kind, kernel_arguments(kind, E))))


def ndm_matrix(E: ExponentSet, kind: CauchyKind) -> CMatrix:
    """N D M with N = diag(nu), M = diag(mu), principal square roots."""
    w = weights(kind, E)
    return np.sqrt(w.nu2)[:, None] * cauchy_matrix(kind, E) * np.sqrt(w.mu2)[None, :]


def ndm_orthogonality(E: ExponentSet, kind: CauchyKind) -> float:
    """|(N D M)^T (N D M) - Id|, zero exactly when the Cauchy identity holds."""
    P = ndm_matrix(E, kind)
    return residual(P.T @ P, np.eye(E.m))


def inverse_residual(E: ExponentSet, kind: CauchyKind) -> float:
    D = cauchy_matrix(kind, E)
    residue_value = residual(D @ cauchy_inverse_closed_form(kind, E), np.eye(E.m))
    logger.debug(
        "%s Cauchy inverse residual %.3g (|D| = %.3g).", kind.name, residue_value, inf_norm(D)
    )
    return residue_value
