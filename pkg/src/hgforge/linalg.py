"""Dense complex matrix helpers shared by all modules.

All acceptance residuals in hgforge use the max-abs-entry norm from inf_norm.
"""
from __future__ import annotations

import logging
import math
from typing import Iterable, Sequence

import attrs
import numpy as np
import scipy.linalg

from hgforge.errors import DegenerateMatrixError, GenericityError

logger = logging.getLogger(__name__)

CMatrix = np.ndarray
CVector = np.ndarray

CONDITION_CAP = 1e12
RESONANCE_GUARD = 1e-8
UNIT_ROUNDOFF = np.finfo(float).eps / 2


def as_cmatrix(M) -> CMatrix:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise ValueError(f"Expected a matrix, got an array with shape {M.shape}.")
    return M


def inf_norm(M) -> float:
    """Largest absolute entry; zero for empty input."""
    M = np.asarray(M)
    return float(np.max(np.abs(M))) if M.size else 0.0


def residual(lhs, rhs) -> float:
    return inf_norm(np.asarray(lhs) - np.asarray(rhs))


def relative_residual(lhs, rhs) -> float:
    scale = max(inf_norm(lhs), inf_norm(rhs), 1.0)
    return residual(lhs, rhs) / scale


def identity(m: int) -> CMatrix:
    return np.eye(m, dtype=complex)


def condition_estimate(M) -> float:
    M = as_cmatrix(M)
    with np.errstate(all="ignore"):
        kappa = np.linalg.cond(M, p=1)
    kappa = float(np.real(kappa))
    return kappa if np.isfinite(kappa) else math.inf


def invert(M, cond_cap: float = CONDITION_CAP) -> CMatrix:
    """Inverse through a partially pivoted LU factorization."""
    M = as_cmatrix(M)
    m, n = M.shape
    if m != n:
        raise ValueError(f"Only square matrices can be inverted, got {m}x{n}.")
    kappa = condition_estimate(M)
    if kappa > cond_cap:
        raise DegenerateMatrixError(
            f"Matrix is singular to working precision (condition estimate {kappa:.3g})."
        )
    lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
    inverse = scipy.linalg.lu_solve((lu, piv), identity(m))
    logger.debug(
        "Inverted %dx%d matrix: residual %.3g, bound %.3g.",
        m,
        m,
        residual(M @ inverse, identity(m)),
        m * kappa * UNIT_ROUNDOFF,
    )
    return inverse


def determinant(M) -> complex:
    M = as_cmatrix(M)
    lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
    swaps = np.count_nonzero(piv != np.arange(len(piv)))
    return complex((-1) ** swaps * np.prod(np.diag(lu)))


def expm_pade(M) -> CMatrix:
    """Matrix exponential by scaling and squaring with a Pade approximant."""
    return scipy.linalg.expm(as_cmatrix(M))


def numerical_rank(M, tol: float = 1e-9) -> int:
    """Number of singular values above tol relative to the largest one."""
    s = scipy.linalg.svdvals(as_cmatrix(M))
    if not s.size or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


@attrs.frozen
class Signature:
    n_plus: int
    n_minus: int
    n_zero: int

    @property
    def definite(self) -> bool:
        return self.n_zero == 0 and (self.n_plus == 0 or self.n_minus == 0)


def hermitian_signature(G, tol: float = 1e-9) -> Signature:
    G = as_cmatrix(G)
    asymmetry = residual(G, G.conj().T)
    if asymmetry > tol:
        raise DegenerateMatrixError(
            f"Matrix is not hermitian: |G - G^H| = {asymmetry:.3g} exceeds {tol:.3g}."
        )
    eigenvalues = scipy.linalg.eigvalsh((G + G.conj().T) / 2)
    return Signature(
        n_plus=int(np.count_nonzero(eigenvalues > tol)),
        n_minus=int(np.count_nonzero(eigenvalues < -tol)),
        n_zero=int(np.count_nonzero(np.abs(eigenvalues) <= tol)),
    )


def _hermitian_basis(m: int) -> Iterable[CMatrix]:
    for i in range(m):
        E = np.zeros((m, m), dtype=complex)
        E[i, i] = 1
        yield E
    for i in range(m):
        for j in range(i + 1, m):
            E = np.zeros((m, m), dtype=complex)
            E[i, j] = E[j, i] = 1
            yield E
            E = np.zeros((m, m), dtype=complex)
            E[i, j], E[j, i] = 1j, -1j
            yield E


def hermitian_nullspace_dimension(
    constraints: Sequence[CMatrix], tol: float = 1e-9
) -> int:
    """Dimension of the space of hermitian G with M^H G M = G for every M given.

    The equations are linear over the reals in the m^2 coordinates of G; the answer
    is the number of singular values of the stacked system below tol times the
    largest squared constraint norm (at least 1).
    """
    constraints = [as_cmatrix(M) for M in constraints]
    m = constraints[0].shape[0]
    columns = []
    for H in _hermitian_basis(m):
        images = [M.conj().T @ H @ M - H for M in constraints]
        stacked = np.concatenate([img.ravel() for img in images])
        columns.append(np.concatenate([stacked.real, stacked.imag]))
    system = np.column_stack(columns)
    s = scipy.linalg.svdvals(system)
    scale = max([1.0] + [inf_norm(M) ** 2 for M in constraints])
    small = int(np.count_nonzero(s <= tol * scale))
    nullity = small + max(0, system.shape[1] - len(s))
    logger.debug("Hermitian invariance system: singular values %s.", s)
    return nullity


def guarded(values: np.ndarray, label: str, scale: float = 1.0) -> np.ndarray:
    """Raise GenericityError if any value is within the resonance guard of zero."""
    values = np.asarray(values)
    bad = np.argwhere(np.abs(values) < RESONANCE_GUARD * max(scale, 1.0))
    if bad.size:
        position = tuple(int(k) + 1 for k in bad[0])
        raise GenericityError(
            f"Resonant denominator {label}{list(position)} = {values[tuple(bad[0])]}."
        )
    return values


def fsum_complex(values: Iterable[complex]) -> complex:
    """Compensated sum of complex values."""
    values = [complex(v) for v in values]
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def compensated_product(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Products along axis, accumulated as compensated sums of complex logarithms.

    Zero factors give zero; the log-magnitudes and phases are summed with math.fsum.
    """
    values = np.moveaxis(np.asarray(values, dtype=complex), axis, -1)
    out = np.empty(values.shape[:-1], dtype=complex)
    for index in np.ndindex(out.shape):
        factors = values[index]
        if np.any(factors == 0):
            out[index] = 0
            continue
        out[index] = np.exp(fsum_complex(np.log(factors)))
    return out
