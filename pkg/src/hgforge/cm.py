"""Rational Calogero-Moser phase space.

Quadruples (B, X; v, w) with [B, X] = v w - Id, up to the action of GL(m). When B
has distinct eigenvalues every orbit has a representative with B = diag(b), v = w = e
and X_ij = 1/(b_i - b_j), the momenta p_i sitting on the diagonal of X.
"""
from __future__ import annotations

import logging
from typing import Tuple

import attrs
import numpy as np
import scipy.linalg

from hgforge.errors import GenericityError
from hgforge.flows import build_flow_operators
from hgforge.linalg import CMatrix, CVector, identity, invert, residual
from hgforge.params import ExponentSet
from hgforge.residue import build_residue_triple

logger = logging.getLogger(__name__)

EIGENVALUE_SEPARATION = 1e-6


@attrs.frozen(eq=False)
class CMQuadruple:
    B: CMatrix = attrs.field(converter=lambda M: np.asarray(M, dtype=complex))
    X: CMatrix = attrs.field(converter=lambda M: np.asarray(M, dtype=complex))
    v: CVector = attrs.field(converter=lambda x: np.asarray(x, dtype=complex))
    w: CVector = attrs.field(converter=lambda x: np.asarray(x, dtype=complex))

    @property
    def m(self) -> int:
        return self.B.shape[0]


def moment_map(q: CMQuadruple) -> CMatrix:
    """[B, X] - v w."""
    return q.B @ q.X - q.X @ q.B - np.outer(q.v, q.w)


def subvariety_residual(q: CMQuadruple) -> float:
    return residual(moment_map(q), -identity(q.m))


def gl_action(g: CMatrix, q: CMQuadruple) -> CMQuadruple:
    g_inv = invert(g)
    return CMQuadruple(B=g @ q.B @ g_inv, X=g @ q.X @ g_inv, v=g @ q.v, w=q.w @ g_inv)


def cm_flow(q: CMQuadruple, k: int, t: complex) -> CMQuadruple:
    """B -> B + k t X^(k-1), the other entries fixed."""
    if k < 1:
        raise ValueError(f"k: Expected a positive integer, got {k}.")
    step = k * t * np.linalg.matrix_power(q.X, k - 1)
    return attrs.evolve(q, B=q.B + step)


def trace_invariants(q: CMQuadruple) -> np.ndarray:
    """tr X^j for j = 1..m."""
    return np.array(
        [np.trace(np.linalg.matrix_power(q.X, j)) for j in range(1, q.m + 1)]
    )


def _lexicographic_order(values: np.ndarray) -> np.ndarray:
    return np.lexsort((values.imag, values.real))


def cm_normal_form(q: CMQuadruple) -> CMQuadruple:
    """The representative with B diagonal (eigenvalues sorted), v = w = e."""
    eigenvalues, S = scipy.linalg.eig(q.B)
    gaps = np.abs(eigenvalues[:, None] - eigenvalues[None, :]) + np.eye(q.m)
    if q.m > 1 and gaps.min() < EIGENVALUE_SEPARATION * max(1.0, np.max(np.abs(eigenvalues))):
        raise GenericityError(f"B has (nearly) repeated eigenvalues {eigenvalues}.")
    diagonal = gl_action(invert(S), q)
    scale = diagonal.v
    if np.min(np.abs(scale)) < EIGENVALUE_SEPARATION:
        raise GenericityError("v has a vanishing coordinate in the eigenbasis of B.")
    normal = gl_action(np.diag(1 / scale), diagonal)
    order = _lexicographic_order(np.diag(normal.B))
    P = np.eye(q.m)[order]
    normal = gl_action(P, normal)
    logger.debug("Normal form residual %.3g.", subvariety_residual(normal))
    return CMQuadruple(B=np.diag(np.diag(normal.B)), X=normal.X, v=normal.v, w=normal.w)


def normal_form_coordinates(q: CMQuadruple) -> Tuple[CVector, CVector]:
    """Positions b_i and momenta p_i of the normal form."""
    normal = cm_normal_form(q)
    return np.diag(normal.B).copy(), np.diag(normal.X).copy()


def normal_form_matrix(positions: CVector, momenta: CVector) -> CMatrix:
    """X with X_ij = 1/(b_i - b_j) off the diagonal and p_i on it."""
    positions = np.asarray(positions, dtype=complex)
    diffs = positions[:, None] - positions[None, :]
    np.fill_diagonal(diffs, 1)
    X = 1 / diffs
    np.fill_diagonal(X, momenta)
    return X


def half_trace_square(X: CMatrix) -> complex:
    return complex(np.trace(X @ X) / 2)


@attrs.frozen
class H2Check:
    """-H2 from coordinates and from 1/2 tr X^2."""

    value: complex
    half_trace: complex

    @property
    def residual(self) -> float:
        return abs(self.value - self.half_trace)


def hamiltonian_h2(X: CMatrix, positions: CVector, momenta: CVector) -> H2Check:
    """-H2 = 1/2 sum p^2 - sum_{j<k} (x_j - x_k)^-2."""
    positions = np.asarray(positions, dtype=complex)
    momenta = np.asarray(momenta, dtype=complex)
    upper = np.triu_indices(len(positions), k=1)
    diffs = (positions[:, None] - positions[None, :])[upper]
    if diffs.size and np.min(np.abs(diffs)) < EIGENVALUE_SEPARATION:
        raise GenericityError("Two Calogero-Moser particles coincide.")
    value = np.sum(momenta**2) / 2 - np.sum(diffs**-2.0)
    return H2Check(value=complex(value), half_trace=half_trace_square(X))


def mhgs_quadruple(E: ExponentSet, residue_basis: bool = False) -> CMQuadruple:
    """(diag(b), -X_E; e, e), or the same quadruple as (B, -S; u, e^T V^-1)."""
    operators = build_flow_operators(E)
    if residue_basis:
        T = build_residue_triple(E)
        return CMQuadruple(B=T.B, X=-operators.S, v=T.u, w=operators.e @ invert(T.V))
    return CMQuadruple(B=np.diag(E.b_arr), X=-operators.X, v=operators.e, w=operators.e)


def mhgs_link_check(E: ExponentSet, X: CMatrix = None, tol: float = 1e-10) -> bool:
    """[X_E, diag(b)] = e e^T - Id."""
    X = build_flow_operators(E).X if X is None else np.asarray(X, dtype=complex)
    B = np.diag(E.b_arr)
    ones = np.ones((E.m, E.m))
    scale = max(np.max(np.abs(X)), 1.0)
    return bool(residual(X @ B - B @ X, ones - identity(E.m)) <= tol * scale)
