"""Calogero-Moser conjugation flows attached to the hypergeometric triple.

X and Y are the Calogero-Moser matrices built from b and c, EX(t) = exp(X t) and
EY(t) = exp(Y t) have closed forms, and S = V X V^-1 = -W Y W^-1 generates the
conjugation flow of the residues:

    B(t1) = V EX(t1) diag(b + k1 t1) EX(t1)^-1 V^-1
    C(t2) = W EY(t2) diag(-c + k2 t2) EY(t2)^-1 W^-1
"""
from __future__ import annotations

import logging
from math import factorial
from typing import Tuple

import attrs
import numpy as np

from hgforge.cauchy import Rational, weights
from hgforge.errors import GenericityError
from hgforge.linalg import CMatrix, CVector, guarded, identity, invert, residual
from hgforge.params import ExponentSet
from hgforge.residue import build_residue_triple, gram_from_basis

logger = logging.getLogger(__name__)

DIFFERENCE_STEP = 1e-5


def calogero_moser_matrix(x: np.ndarray) -> CMatrix:
    """Off-diagonal 1/(x_j - x_i), diagonal chosen so that rows sum to zero."""
    m = len(x)
    diffs = x[None, :] - x[:, None]
    M = np.zeros((m, m), dtype=complex)
    mask = ~np.eye(m, dtype=bool)
    M[mask] = 1 / guarded(diffs[mask], "x_j-x_i")
    M[np.diag_indices(m)] = -M.sum(axis=1)
    return M


@attrs.frozen(eq=False)
class FlowOperators:
    X: CMatrix
    Y: CMatrix
    S: CMatrix
    e: CVector


def build_flow_operators(E: ExponentSet) -> FlowOperators:
    X = calogero_moser_matrix(E.b_arr)
    Y = -calogero_moser_matrix(E.c_arr)
    T = build_residue_triple(E)
    S = T.V @ X @ invert(T.V)
    return FlowOperators(X=X, Y=Y, S=S, e=np.ones(E.m, dtype=complex))


def xi2(b: np.ndarray, tau: complex) -> np.ndarray:
    """xi_i^2(t) = prod_k (b_i - b_k + t) / prod_{k != i} (b_i - b_k)."""
    diffs = b[:, None] - b[None, :]
    off = np.where(np.eye(len(b), dtype=bool), 1, diffs)
    return np.prod(diffs + tau, axis=1) / guarded(np.prod(off, axis=1), "b_i-b_k")


def theta2(c: np.ndarray, tau: complex) -> np.ndarray:
    """theta_i^2(t) = prod_k (c_k - c_i + t) / prod_{k != i} (c_k - c_i)."""
    diffs = c[None, :] - c[:, None]
    off = np.where(np.eye(len(c), dtype=bool), 1, diffs)
    return np.prod(diffs + tau, axis=1) / guarded(np.prod(off, axis=1), "c_k-c_i")


def ex_matrix(b: np.ndarray, tau: complex) -> CMatrix:
    m = len(b)
    if tau == 0:
        return identity(m)
    denominators = guarded(b[None, :] - b[:, None] + tau, "b_j-b_i+t")
    return xi2(b, tau)[None, :] / denominators


def ey_matrix(c: np.ndarray, tau: complex) -> CMatrix:
    m = len(c)
    if tau == 0:
        return identity(m)
    denominators = guarded(c[:, None] - c[None, :] + tau, "c_i-c_j+t")
    return theta2(c, tau)[None, :] / denominators


def ex_ey(E: ExponentSet, tau: complex) -> Tuple[CMatrix, CMatrix]:
    tau = complex(tau)
    return ex_matrix(E.b_arr, tau), ey_matrix(E.c_arr, tau)


def z_matrix(E: ExponentSet, tau: complex) -> Tuple[CMatrix, CMatrix]:
    """Z(t)_ij = nu_j^2(t)/(b_j - c_i + a2 + t) and its closed-form inverse."""
    w = weights(Rational(tau), E)
    args = guarded(E.a2 + E.b_arr[:, None] - E.c_arr[None, :] + tau, "a2+b_i-c_j+t")
    Z = w.nu2[None, :] / args.T
    Z_inv = w.mu2[None, :] / args
    return Z, Z_inv


@attrs.frozen(eq=False)
class FlowState:
    B: CMatrix
    C: CMatrix
    A: CMatrix
    V: CMatrix
    W: CMatrix
    a1: complex
    a2: complex
    u: CVector


def evolved_exponents(E: ExponentSet, tau1: complex, tau2: complex) -> Tuple[complex, complex]:
    """(a1, a2) along the flows."""
    a2 = E.a2 + (1 - E.k1) * tau1 + (1 - E.k2) * tau2
    a1 = E.a1 + (1 - E.k1 - E.m) * tau1 + (1 - E.k2 - E.m) * tau2
    return a1, a2


def evolve(E: ExponentSet, tau1: complex, tau2: complex) -> FlowState:
    tau1, tau2 = complex(tau1), complex(tau2)
    T = build_residue_triple(E)
    EX, _ = ex_ey(E, tau1)
    _, EY = ex_ey(E, tau2)
    V_t = T.V @ EX
    W_t = T.W @ EY
    B_t = V_t @ np.diag(E.b_arr + E.k1 * tau1) @ invert(V_t)
    C_t = W_t @ np.diag(-E.c_arr + E.k2 * tau2) @ invert(W_t)
    a1, a2 = evolved_exponents(E, tau1, tau2)
    return FlowState(B=B_t, C=C_t, A=-B_t - C_t, V=V_t, W=W_t, a1=a1, a2=a2, u=T.u)


@attrs.frozen(eq=False)
class TauProduct:
    """The form with Gram diag(nu^2(t1 + t2)) in the v(t1) basis."""

    tau1: complex
    tau2: complex
    nu2: np.ndarray
    mu2: np.ndarray
    gram: CMatrix
    v_basis: CMatrix
    w_basis: CMatrix

    def pair(self, x, y) -> complex:
        return complex(np.asarray(x) @ self.gram @ np.asarray(y))

    @property
    def w_gram(self) -> CMatrix:
        return self.w_basis.T @ self.gram @ self.w_basis

    @property
    def w_diagonality_residual(self) -> float:
        return residual(self.w_gram, np.diag(self.mu2))


def tau_product(E: ExponentSet, tau1: complex, tau2: complex) -> TauProduct:
    tau1, tau2 = complex(tau1), complex(tau2)
    T = build_residue_triple(E)
    V_t = T.V @ ex_matrix(E.b_arr, tau1)
    W_t = T.W @ ey_matrix(E.c_arr, tau2)
    w = weights(Rational(tau1 + tau2), E)
    return TauProduct(
        tau1=tau1,
        tau2=tau2,
        nu2=w.nu2,
        mu2=w.mu2,
        gram=gram_from_basis(V_t, w.nu2),
        v_basis=V_t,
        w_basis=W_t,
    )


def v_to_w_residual(E: ExponentSet, product: TauProduct) -> float:
    """v_i(t1) = sum_j nu_i^2 / (a2 + b_i - c_j + t1 + t2) w_j(t2)."""
    T = product.tau1 + product.tau2
    args = E.a2 + E.b_arr[:, None] - E.c_arr[None, :] + T
    coefficients = product.nu2[:, None] / args  # [i, j]
    return residual(product.v_basis, product.w_basis @ coefficients.T)


def vw_pairing_residual(E: ExponentSet, product: TauProduct) -> float:
    """(v_i(t1), w_j(t2)) = nu_i^2 mu_j^2 / (a2 + b_i - c_j + t1 + t2)."""
    T = product.tau1 + product.tau2
    args = E.a2 + E.b_arr[:, None] - E.c_arr[None, :] + T
    expected = product.nu2[:, None] * product.mu2[None, :] / args
    actual = product.v_basis.T @ product.gram @ product.w_basis
    return residual(actual, expected)


@attrs.frozen(eq=False)
class ExtendedForm:
    """A form given by diagonal Grams in two bases related by a transition matrix."""

    gram: CMatrix
    first_basis: CMatrix
    second_basis: CMatrix
    first_diagonal: np.ndarray
    second_diagonal: np.ndarray
    transition: CMatrix

    @property
    def second_basis_residual(self) -> float:
        actual = self.second_basis.T @ self.gram @ self.second_basis
        return residual(actual, np.diag(self.second_diagonal))

    @property
    def transition_residual(self) -> float:
        return residual(self.first_basis, self.second_basis @ self.transition)


def extended_products(
    E: ExponentSet, tau1: complex, tau2: complex
) -> Tuple[ExtendedForm, ExtendedForm]:
    """The (+) form on v(t1), v(t2) and the (-) form on w(t1), w(t2)."""
    tau1, tau2 = complex(tau1), complex(tau2)
    if tau1 == tau2:
        raise GenericityError("Extended products need distinct times.")
    T = build_residue_triple(E)
    b, c = E.b_arr, E.c_arr
    delta = tau1 - tau2
    V1, V2 = T.V @ ex_matrix(b, tau1), T.V @ ex_matrix(b, tau2)
    W1, W2 = T.W @ ey_matrix(c, tau1), T.W @ ey_matrix(c, tau2)
    plus = ExtendedForm(
        gram=gram_from_basis(V1, xi2(b, delta)),
        first_basis=V1,
        second_basis=V2,
        first_diagonal=xi2(b, delta),
        second_diagonal=-xi2(b, -delta),
        transition=ex_matrix(b, delta),
    )
    minus = ExtendedForm(
        gram=gram_from_basis(W1, theta2(c, delta)),
        first_basis=W1,
        second_basis=W2,
        first_diagonal=theta2(c, delta),
        second_diagonal=-theta2(c, -delta),
        transition=ey_matrix(c, delta),
    )
    return plus, minus


def jordan_normalizer(E: ExponentSet, tau: complex) -> CMatrix:
    """G(t) with G EX(t) G^-1 equal to a single Jordan block with eigenvalue 1.

    G_ij = [sum_{s=0}^{m-i} prod_{t<s} (b_j - b_1 - t tau) / (s! tau^s)] / prod_{k!=j} (b_j - b_k)
    """
    tau = complex(tau)
    if tau == 0:
        raise GenericityError("The Jordan normalizer needs a nonzero time.")
    b, m = E.b_arr, E.m
    G = np.zeros((m, m), dtype=complex)
    for j in range(m):
        denominator = guarded(np.prod(np.delete(b[j] - b, j)), f"b_{j + 1}-b_k")
        terms = [
            np.prod([b[j] - b[0] - t * tau for t in range(s)]) / (factorial(s) * tau**s)
            for s in range(m)
        ]
        partial = np.cumsum(terms)
        for i in range(m):
            G[i, j] = partial[m - 1 - i] / denominator
    return G


def jordan_block(m: int) -> CMatrix:
    return identity(m) + np.diag(np.ones(m - 1, dtype=complex), 1)


def jordan_determinant(E: ExponentSet, tau: complex) -> complex:
    """det G = 1 / (prod_{k<m} k! tau^{m(m-1)/2} prod_{i<j} (b_j - b_i))."""
    b, m = E.b_arr, E.m
    upper = np.triu_indices(m, k=1)
    factorials = np.prod([factorial(k) for k in range(m)])
    differences = np.prod((b[None, :] - b[:, None])[upper])
    return complex(1 / (factorials * complex(tau) ** (m * (m - 1) // 2) * differences))


def vandermonde(x: np.ndarray, tau: complex) -> CMatrix:
    """Vnd(x, t)_ij = (x_j + t)^i with rows i = 0..m-1."""
    return np.vander(x + tau, increasing=True).T


def vandermonde_residuals(E: ExponentSet, tau: complex) -> Tuple[float, float]:
    """d(b)^-1 EX(t) d(b) vs Vnd(b,0)^-1 Vnd(b,t), and the mirror for c with -t."""
    tau = complex(tau)
    b, c = E.b_arr, E.c_arr
    d_b = np.array([np.prod(np.delete(b[i] - b, i)) for i in range(E.m)])
    d_c = np.array([np.prod(np.delete(c - c[i], i)) for i in range(E.m)])
    EX, EY = ex_ey(E, tau)
    x_side = (EX / d_b[:, None]) * d_b[None, :]
    y_side = (EY / d_c[:, None]) * d_c[None, :]
    x_expected = invert(vandermonde(b, 0)) @ vandermonde(b, tau)
    y_expected = invert(vandermonde(c, 0)) @ vandermonde(c, -tau)
    return residual(x_side, x_expected), residual(y_side, y_expected)


def vandermonde_check(E: ExponentSet, tau: complex, tol: float = 1e-8) -> bool:
    return bool(max(vandermonde_residuals(E, tau)) <= tol)


@attrs.frozen(eq=False)
class QuaternionAction:
    i: CMatrix
    j: CMatrix
    k: CMatrix
    gram: CMatrix

    def relation_residual(self) -> float:
        one = identity(self.i.shape[0])
        i, j, k = self.i, self.j, self.k
        return max(
            residual(i @ i, -one),
            residual(j @ j, -one),
            residual(k @ k, -one),
            residual(i @ j, k),
            residual(j @ k, i),
            residual(k @ i, j),
        )

    def form_factors(self) -> Tuple[Tuple[int, float], ...]:
        """For each of i, j, k: the sign s with Q^T G Q = s G and the residual."""
        factors = []
        for Q in (self.i, self.j, self.k):
            image = Q.T @ self.gram @ Q
            sign = 1 if residual(image, self.gram) <= residual(image, -self.gram) else -1
            factors.append((sign, residual(image, sign * self.gram)))
        return tuple(factors)


def flow_exponential(E: ExponentSet, tau: complex) -> CMatrix:
    """exp(S t) = V EX(t) V^-1."""
    V = build_residue_triple(E).V
    return V @ ex_matrix(E.b_arr, complex(tau)) @ invert(V)


def quaternion_matrices(E: ExponentSet, tau1: complex, tau2: complex) -> QuaternionAction:
    """The quaternions acting on the direct sum of the (t1, t2) and (t2, t1) spaces."""
    tau1, tau2 = complex(tau1), complex(tau2)
    m = E.m
    forward = flow_exponential(E, tau1 - tau2)
    backward = flow_exponential(E, tau2 - tau1)
    zero = np.zeros((m, m), dtype=complex)
    one = identity(m)
    i = np.block([[zero, 1j * forward], [1j * backward, zero]])
    j = np.block([[zero, -forward], [backward, zero]])
    k = np.block([[1j * one, zero], [zero, -1j * one]])
    gram = np.block(
        [
            [tau_product(E, tau1, tau2).gram, zero],
            [zero, tau_product(E, tau2, tau1).gram],
        ]
    )
    return QuaternionAction(i=i, j=j, k=k, gram=gram)


def flow_equation_residual(
    E: ExponentSet, tau1: complex, tau2: complex, h: float = DIFFERENCE_STEP
) -> Tuple[float, float]:
    """Central differences for dB/dt1 + [B, S] - k1 Id and dC/dt2 - [C, S] - k2 Id."""
    S = build_flow_operators(E).S
    one = identity(E.m)
    state = evolve(E, tau1, tau2)
    dB = (evolve(E, tau1 + h, tau2).B - evolve(E, tau1 - h, tau2).B) / (2 * h)
    dC = (evolve(E, tau1, tau2 + h).C - evolve(E, tau1, tau2 - h).C) / (2 * h)
    b_residual = residual(dB + state.B @ S - S @ state.B, E.k1 * one)
    c_residual = residual(dC - (state.C @ S - S @ state.C), E.k2 * one)
    return b_residual, c_residual
