"""The multiplicative hypergeometric triple M_inf M_1 M_0 = Id in closed form.

M_0 is upper triangular with diagonal e(b_i), M_inf lower triangular with diagonal
e(-c_i) and M_1 = e(a2) Id + rho e^T, where e(x) = exp(2 pi i x). The columns of P
and Q are eigenvectors of M_0 and M_inf normalized so that both sum to the
eigenvector r of M_1.

For real exponents the triple preserves the hermitian form with Gram
diag(nu_trig^2) in the P basis and diag(mu_trig^2) in the Q basis.
"""
from __future__ import annotations

import logging
from typing import Tuple

import attrs
import numpy as np

from hgforge.cauchy import Trigonometric, cauchy_matrix, weights
from hgforge.linalg import (
    CMatrix,
    CVector,
    Signature,
    condition_estimate,
    guarded,
    hermitian_nullspace_dimension,
    hermitian_signature,
    identity,
    inf_norm,
    invert,
    numerical_rank,
    relative_residual,
    residual,
)
from hgforge.params import ExponentSet

logger = logging.getLogger(__name__)


def e(x) -> np.ndarray:
    """exp(2 pi i x) with the real part of x reduced to [-1/2, 1/2] first."""
    x = np.asarray(x, dtype=complex)
    return np.exp(2j * np.pi * (x - np.round(x.real)))


def _half_phase(x) -> np.ndarray:
    """exp(pi i x), reduced modulo 2 in the real part."""
    x = np.asarray(x, dtype=complex)
    return np.exp(1j * np.pi * (x - 2 * np.round(x.real / 2)))


def _partial_sums(E: ExponentSet) -> np.ndarray:
    """s_i = i a2 + sum_{k<=i} (b_k - c_k), 1-based i."""
    return np.cumsum(E.u)


@attrs.frozen(eq=False)
class MonodromyTriple:
    M0: CMatrix
    M1: CMatrix
    Minf: CMatrix
    P: CMatrix
    Q: CMatrix
    r: CVector
    E: ExponentSet

    @property
    def product_residual(self) -> float:
        return residual(self.Minf @ self.M1 @ self.M0, identity(self.E.m))

    def eigen_residuals(self) -> Tuple[float, float, float]:
        """M0 p_i = e(b_i) p_i, Minf q_i = e(-c_i) q_i and M1 r = e(a1) r."""
        E = self.E
        return (
            relative_residual(self.M0 @ self.P, self.P * e(E.b_arr)[None, :]),
            relative_residual(self.Minf @ self.Q, self.Q * e(-E.c_arr)[None, :]),
            relative_residual(self.M1 @ self.r, e(E.a1) * self.r),
        )

    @property
    def normalization_residual(self) -> float:
        """Both sum p_i and sum q_i should equal r."""
        return max(
            relative_residual(self.P.sum(axis=1), self.r),
            relative_residual(self.Q.sum(axis=1), self.r),
        )

    @property
    def m1_rank_defect(self) -> int:
        """rank(M1 - e(a2) Id), which is 1 for a rank one deviation."""
        return numerical_rank(self.M1 - e(self.E.a2) * identity(self.E.m))


def _monodromy_matrices(E: ExponentSet, sign: int) -> Tuple[CMatrix, CMatrix, CMatrix]:
    """The triple, or with sign = -1 the triple with every e(x) replaced by e(-x)."""
    b, c, a2, m = E.b_arr, E.c_arr, E.a2, E.m
    s = _partial_sums(E)

    def ee(x):
        return e(sign * np.asarray(x))

    U = ee(E.u)
    M0 = np.diag(ee(b)).astype(complex)
    for i in range(m):
        for j in range(i + 1, m):
            inner = np.sum(b[i + 1 : j] - c[i + 1 : j])
            M0[i, j] = ee((j - i - 1) * a2 + b[j] + inner) * (U[i] - 1)
    previous = np.concatenate([[0], s[:-1]])
    rho = ee(-previous - b + c) * (1 - U)
    M1 = ee(a2) * identity(m) + np.outer(rho, np.ones(m))
    Minf = np.diag(ee(-c)).astype(complex)
    for i in range(m):
        for j in range(i):
            Minf[i, j] = ee(-(b[i] + a2)) * (U[i] - 1)
    return M0, M1, Minf


def _eigenvectors(E: ExponentSet, sign: int) -> Tuple[CMatrix, CMatrix, CVector]:
    b, c, a2, a1, m = E.b_arr, E.c_arr, E.a2, E.a1, E.m
    s = _partial_sums(E)

    def ee(x):
        return e(sign * np.asarray(x))

    U = ee(E.u)
    P = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(i + 1):
            numerator = np.prod(ee(b[i] - c[j + 1 :] + a2) - 1)
            others = np.delete(np.arange(j, m), i - j)
            denominator = guarded(np.prod(ee(b[i] - b[others]) - 1), "e(b_i-b_k)-1")
            P[j, i] = ee(a1 - a2 + b[i] - b[j]) * (U[j] - 1) * numerator / denominator
    Q = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(i, m):
            numerator = np.prod(ee(b[:j] - c[i] + a2) - 1)
            others = np.delete(np.arange(j + 1), i)
            denominator = guarded(np.prod(ee(c[others] - c[i]) - 1), "e(c_k-c_i)-1")
            Q[j, i] = ee(-s[j]) * (U[j] - 1) * numerator / denominator
    r = ee(-s) * (U - 1)
    return P, Q, r


def build_monodromy(E: ExponentSet, sign: int = 1) -> MonodromyTriple:
    """The closed-form triple; sign = -1 gives the contragredient-type variant."""
    if sign not in (1, -1):
        raise ValueError(f"sign: Expected 1 or -1, got {sign}.")
    guarded(e(E.u) - 1, "e(u_i)-1")
    M0, M1, Minf = _monodromy_matrices(E, sign)
    P, Q, r = _eigenvectors(E, sign)
    if sign == -1:
        # keep the order of b and c, so no RealExponentSet here
        E = ExponentSet(
            a1=-E.a1, a2=-E.a2, b=[-x for x in E.b], c=[-x for x in E.c], k1=E.k1, k2=E.k2
        )
    triple = MonodromyTriple(M0=M0, M1=M1, Minf=Minf, P=P, Q=Q, r=r, E=E)
    logger.debug("Monodromy product residual %.3g.", triple.product_residual)
    return triple


def m0_inverse_closed_form(E: ExponentSet) -> CMatrix:
    """Upper triangular with diagonal e(-b_i) and entries e(a2 - c_i)(e(c_i - b_i - a2) - 1)."""
    b, c, a2, m = E.b_arr, E.c_arr, E.a2, E.m
    M = np.diag(e(-b)).astype(complex)
    for i in range(m):
        M[i, i + 1 :] = e(a2 - c[i]) * (e(c[i] - b[i] - a2) - 1)
    return M


@attrs.frozen(eq=False)
class TrigForm:
    nu2_trig: np.ndarray
    mu2_trig: np.ndarray
    gram: CMatrix
    signature: Signature

    def invariance_residuals(self, triple: MonodromyTriple) -> Tuple[float, float, float]:
        G = self.gram
        return tuple(
            relative_residual(M.conj().T @ G @ M, G)
            for M in (triple.M0, triple.M1, triple.Minf)
        )

    def q_diagonality_residual(self, triple: MonodromyTriple) -> float:
        return relative_residual(triple.Q.conj().T @ self.gram @ triple.Q, np.diag(self.mu2_trig))


def hermitian_form_trig(E: ExponentSet, triple: MonodromyTriple = None) -> TrigForm:
    if not E.is_real:
        raise TypeError("The invariant hermitian form needs real exponents.")
    triple = triple or build_monodromy(E)
    w = weights(Trigonometric(), E)
    P_inv = invert(triple.P)
    gram = P_inv.conj().T @ np.diag(w.nu2.real) @ P_inv
    return TrigForm(
        nu2_trig=w.nu2.real,
        mu2_trig=w.mu2.real,
        gram=gram,
        signature=hermitian_signature(gram, tol=1e-9 * max(np.max(np.abs(gram)), 1.0)),
    )


@attrs.frozen(eq=False)
class BilinearInvariance:
    """Residuals of the bilinear form; error_scale bounds their roundoff amplification."""

    gram: CMatrix
    residuals: Tuple[float, float, float]
    q_residual: float
    error_scale: float = 1.0


def bilinear_invariance(E: ExponentSet) -> BilinearInvariance:
    """M_check^T G M = G for complex exponents, M_check built with e(-x).

    G has Gram diag(nu_trig^2) between the P_check and P bases.
    """
    triple = build_monodromy(E)
    check = build_monodromy(E, sign=-1)
    w = weights(Trigonometric(), E)
    G = invert(check.P).T @ np.diag(w.nu2) @ invert(triple.P)
    pairs = ((check.M0, triple.M0), (check.M1, triple.M1), (check.Minf, triple.Minf))
    residuals = tuple(relative_residual(Mc.T @ G @ M, G) for Mc, M in pairs)
    q_residual = relative_residual(check.Q.T @ G @ triple.Q, np.diag(w.mu2))
    pairs += ((check.Q, triple.Q),)
    error_scale = (
        condition_estimate(check.P)
        * condition_estimate(triple.P)
        * max(max(inf_norm(Mc), 1.0) * max(inf_norm(M), 1.0) for Mc, M in pairs)
    )
    return BilinearInvariance(
        gram=G, residuals=residuals, q_residual=q_residual, error_scale=error_scale
    )


def p_from_q(E: ExponentSet) -> CMatrix:
    """K[i, j] with p_j = sum_i K[i, j] q_i.

    K[i, j] = e^{pi i (a1 + b_j - c_i)} nu_{j,trig}^2 / sin pi(a2 + b_j - c_i)
    """
    b, c = E.b_arr, E.c_arr
    nu2 = weights(Trigonometric(), E).nu2
    phases = _half_phase(E.a1 + b[None, :] - c[:, None])
    sines = guarded(np.sin(np.pi * (E.a2 + b[None, :] - c[:, None])), "sin pi(a2+b_j-c_i)")
    return phases * nu2[None, :] / sines


def pinvq_closed_form(E: ExponentSet) -> CMatrix:
    """(P^-1 Q)[i, j] = e^{-pi i (a1 + b_i - c_j)} times

        prod_{k!=i} sin pi(b_k - c_j + a2) / prod_{k!=j} sin pi(c_k - c_j)
    """
    b, c, a2, m = E.b_arr, E.c_arr, E.a2, E.m
    R = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            numerator = np.prod(np.sin(np.pi * (np.delete(b, i) - c[j] + a2)))
            denominator = np.prod(np.sin(np.pi * (np.delete(c, j) - c[j])))
            R[i, j] = _half_phase(-(E.a1 + b[i] - c[j])) * numerator / denominator
    return R


def p_from_q_residuals(E: ExponentSet, triple: MonodromyTriple = None) -> Tuple[float, float]:
    """P = Q K directly, and K^-1 = P^-1 Q through the closed form."""
    triple = triple or build_monodromy(E)
    K = p_from_q(E)
    direct = relative_residual(triple.P, triple.Q @ K)
    inverse = relative_residual(K @ pinvq_closed_form(E), identity(E.m))
    return direct, inverse


def invariant_form_dimension(triple: MonodromyTriple, tol: float = 1e-9) -> int:
    return hermitian_nullspace_dimension([triple.M0, triple.M1, triple.Minf], tol)


@attrs.frozen(eq=False)
class IsometryReport:
    L: CMatrix
    form_residual: float
    q_image_residual: float


def p_to_f0_isometry(E: ExponentSet, triple: MonodromyTriple = None) -> IsometryReport:
    """Coordinates of the solution space in the F0 basis of the trig fermion space.

    p_i goes to e^{pi i (a1 + b_i)} nu_i^2 F0_i. The trig form on solutions is the
    pullback of diag(1/nu^2), and q_j lands on e^{pi i c_j} mu_j^2 times the
    column j of N^2 D_trig.
    """
    triple = triple or build_monodromy(E)
    form = hermitian_form_trig(E, triple)
    b, c = E.b_arr, E.c_arr
    nu2, mu2 = form.nu2_trig, form.mu2_trig
    L = np.diag(_half_phase(E.a1 + b) * nu2) @ invert(triple.P)
    pulled_back = L.conj().T @ np.diag(1 / nu2) @ L
    expected_image = (
        nu2[:, None] * cauchy_matrix(Trigonometric(), E) * (_half_phase(c) * mu2)[None, :]
    )
    return IsometryReport(
        L=L,
        form_residual=relative_residual(pulled_back, form.gram),
        q_image_residual=relative_residual(L @ triple.Q, expected_image),
    )
