"""The additive hypergeometric triple A + B + C = 0 in the explicit basis.

B is upper triangular with diagonal b, C is lower triangular with diagonal -c and
A = a2 Id - u e^T is a2 times the identity up to a rank one term. Columns of V are
the eigenvectors v_i of B, columns of W the eigenvectors w_i of C.
"""
from __future__ import annotations

import logging

import attrs
import numpy as np

from hgforge.cauchy import Rational, weights
from hgforge.linalg import CMatrix, CVector, guarded, invert, residual
from hgforge.params import ExponentSet

logger = logging.getLogger(__name__)


@attrs.frozen(eq=False)
class ResidueTriple:
    A: CMatrix
    B: CMatrix
    C: CMatrix
    V: CMatrix
    W: CMatrix
    u: CVector
    E: ExponentSet

    @property
    def m(self) -> int:
        return self.E.m


def residue_matrices(E: ExponentSet):
    b, c, a2, m = E.b_arr, E.c_arr, E.a2, E.m
    u = E.u
    i, j = np.indices((m, m))
    A = np.where(i == j, (c - b)[:, None], (c - b - a2)[:, None]) * np.ones((m, m))
    B = np.where(i < j, u[:, None], 0) + np.diag(b)
    C = np.where(i > j, u[:, None], 0) - np.diag(c)
    return A.astype(complex), B.astype(complex), C.astype(complex)


def v_basis(E: ExponentSet) -> CMatrix:
    """V[j, i] = v_i^j = u_j prod_{k>j} (b_i - c_k + a2) / prod_{k>=j, k!=i} (b_i - b_k)."""
    b, c, a2, m, u = E.b_arr, E.c_arr, E.a2, E.m, E.u
    V = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(i + 1):
            numerator = np.prod(b[i] - c[j + 1 :] + a2)
            others = np.delete(np.arange(j, m), i - j)
            denominator = guarded(np.prod(b[i] - b[others]), f"b_{i + 1}-b_k")
            V[j, i] = u[j] * numerator / denominator
    return V


def w_basis(E: ExponentSet) -> CMatrix:
    """W[j, i] = w_i^j = u_j prod_{k<j} (b_k - c_i + a2) / prod_{k<=j, k!=i} (c_k - c_i)."""
    b, c, a2, m, u = E.b_arr, E.c_arr, E.a2, E.m, E.u
    W = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(i, m):
            numerator = np.prod(b[:j] - c[i] + a2)
            others = np.delete(np.arange(j + 1), i)
            denominator = guarded(np.prod(c[others] - c[i]), f"c_k-c_{i + 1}")
            W[j, i] = u[j] * numerator / denominator
    return W


def w_inverse_closed_form(E: ExponentSet) -> CMatrix:
    """W^-1[i, j] = 1/(b_j - c_i + a2) prod_{k<j} (c_k - c_i)/(b_k - c_i + a2) for i >= j."""
    b, c, a2, m = E.b_arr, E.c_arr, E.a2, E.m
    Winv = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(i + 1):
            factors = (c[:j] - c[i]) / (b[:j] - c[i] + a2)
            Winv[i, j] = np.prod(factors) / (b[j] - c[i] + a2)
    return Winv


def build_residue_triple(E: ExponentSet) -> ResidueTriple:
    guarded(E.u, "u_i")
    A, B, C = residue_matrices(E)
    return ResidueTriple(A=A, B=B, C=C, V=v_basis(E), W=w_basis(E), u=E.u, E=E)


@attrs.frozen(eq=False)
class ResidueForm:
    """The symmetric bilinear form of the residue space, Gram in the standard basis."""

    nu2: np.ndarray
    mu2: np.ndarray
    gram: CMatrix
    gram_v: CMatrix
    gram_w: CMatrix

    @property
    def w_diagonality_residual(self) -> float:
        return residual(self.gram_w, np.diag(self.mu2))

    def pair(self, x, y) -> complex:
        return complex(np.asarray(x) @ self.gram @ np.asarray(y))


def gram_from_basis(basis: CMatrix, diagonal: np.ndarray) -> CMatrix:
    """Gram matrix in the standard basis of the form with Gram diag(diagonal) in basis."""
    inverse = invert(basis)
    return inverse.T @ np.diag(diagonal) @ inverse


def residue_form(E: ExponentSet, T: ResidueTriple = None) -> ResidueForm:
    T = T or build_residue_triple(E)
    w = weights(Rational(), E)
    gram = gram_from_basis(T.V, w.nu2)
    return ResidueForm(
        nu2=w.nu2,
        mu2=w.mu2,
        gram=gram,
        gram_v=T.V.T @ gram @ T.V,
        gram_w=T.W.T @ gram @ T.W,
    )


def check_flag_general_position(T: ResidueTriple, tol: float = 1e-12) -> bool:
    """The flags of eigenvectors at 0 and infinity are opposite.

    V is upper triangular and W lower triangular, both with nonzero diagonals, and u
    has no zero coordinate.
    """
    V, W, u = T.V, T.W, T.u
    scale = max(np.max(np.abs(V)), np.max(np.abs(W)), 1.0)
    return bool(
        np.allclose(np.tril(V, -1), 0)
        and np.allclose(np.triu(W, 1), 0)
        and np.all(np.abs(np.diag(V)) > tol * scale)
        and np.all(np.abs(np.diag(W)) > tol * scale)
        and np.all(np.abs(u) > tol * scale)
    )


def a_action_residual(E: ExponentSet, seed: int = 0) -> float:
    """max over a random basis x of |A x - a2 x + (x, u) u|."""
    T = build_residue_triple(E)
    form = residue_form(E, T)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((E.m, E.m)) + 1j * rng.standard_normal((E.m, E.m))
    worst = 0.0
    for x in X.T:
        expected = E.a2 * x - form.pair(x, T.u) * T.u
        worst = max(worst, residual(T.A @ x, expected))
    return worst
