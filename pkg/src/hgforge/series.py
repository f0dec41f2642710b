"""Power series around 0 and infinity.

Scalar solutions of the generalized hypergeometric equation

    prod_k (theta - b_k) f = z prod_k (theta - c_k) f,    theta = z d/dz,

and vector Frobenius solutions of the m-hypergeometric system

    Y' = (A / (z - 1) + B / z) Y

for a2 = 0. Powers z**b use the principal branch with the cut along (-inf, 0].
"""
from __future__ import annotations

import cmath
import enum
import logging
import math
from typing import Optional, Sequence, Tuple

import attrs
import numpy as np
import scipy.special
from scipy.integrate import solve_ivp

from hgforge.cauchy import Rational, Trigonometric, weights
from hgforge.errors import SeriesError
from hgforge.flows import ex_matrix, ey_matrix
from hgforge.linalg import CMatrix, CVector, guarded, invert, relative_residual
from hgforge.params import ExponentSet
from hgforge.residue import build_residue_triple

logger = logging.getLogger(__name__)

CONVERGENCE_MARGIN = 1e-3
BRANCH_CUT_PROXIMITY = 1e-12
POLE_PROXIMITY = 1e-10
DEFAULT_ORDER = 80
MAX_TERMS = 20_000


class BasePoint(enum.Enum):
    ZERO = "0"
    INFINITY = "inf"


def pochhammer(x: complex, n: int) -> complex:
    """Rising factorial (x)_n = x (x + 1) ... (x + n - 1)."""
    if n < 0:
        raise ValueError(f"n: Expected a nonnegative integer, got {n}.")
    result = 1 + 0j
    for k in range(n):
        result *= x + k
    return result


def _is_nonpositive_integer(x: complex, proximity: float = POLE_PROXIMITY) -> bool:
    x = complex(x)
    return x.real < 0.5 and abs(x - round(x.real)) < proximity


@attrs.frozen
class PfqValue:
    value: complex
    next_term: complex
    terms: int


def hyper_pfq(
    b: Sequence[complex], c: Sequence[complex], z: complex, N: Optional[int] = None
) -> PfqValue:
    """Partial sum of sum_n prod (b_i)_n / prod (c_j)_n z^n / n!.

    With N given exactly N terms are summed. Otherwise terms are added until the next
    one drops below machine precision relative to the sum.
    """
    z = complex(z)
    if abs(z) >= 1 - CONVERGENCE_MARGIN:
        raise SeriesError(f"|z| = {abs(z):.6g} is outside the disc of convergence.")
    for x in c:
        if _is_nonpositive_integer(x):
            raise SeriesError(f"Lower parameter {x} is a nonpositive integer.")
    b = np.asarray(b, dtype=complex)
    c = np.asarray(c, dtype=complex)
    limit = N if N is not None else MAX_TERMS
    total, term = 0j, 1 + 0j
    n = 0
    while n < limit:
        total += term
        term *= np.prod(b + n) / np.prod(c + n) / (n + 1) * z
        n += 1
        if N is None and abs(term) <= np.finfo(float).eps * abs(total) / 4:
            break
    else:
        if N is None:
            logger.warning("pFq series stopped at %d terms with next term %.3g.", n, abs(term))
    return PfqValue(value=complex(total), next_term=complex(term), terms=n)


def complex_gamma(z: complex) -> complex:
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise SeriesError(f"Gamma has a pole at {z}.")
    return complex(scipy.special.gamma(z))


def _check_branch(z: complex) -> None:
    if abs(z.imag) <= BRANCH_CUT_PROXIMITY * max(abs(z), 1.0) and z.real <= 0:
        raise SeriesError(f"z = {z} lies on the branch cut (-inf, 0].")


def _local_variable(point: BasePoint, z: complex) -> complex:
    """z around 0 and 1/z around infinity, both required inside the unit disc."""
    z = complex(z)
    _check_branch(z)
    x = z if point is BasePoint.ZERO else 1 / z
    if not 0 < abs(x) < 1:
        raise SeriesError(f"z = {z} is outside the convergence region at {point.value}.")
    return x


def ghge_local_basis(
    E: ExponentSet, point: BasePoint, j: int, z: complex, N: Optional[int] = None
) -> complex:
    """The j-th scalar solution (0-based) at 0 or infinity."""
    b, c = E.b_arr, E.c_arr
    x = _local_variable(point, z)
    if point is BasePoint.ZERO:
        upper = b[j] - c
        lower = np.delete(b[j] - b + 1, j)
        exponent = b[j]
    else:
        upper = b - c[j]
        lower = np.delete(c - c[j] + 1, j)
        exponent = c[j]
    return complex(z) ** exponent * hyper_pfq(upper, lower, x, N).value


def _stirling2(n: int) -> np.ndarray:
    """S[p, k], Stirling numbers of the second kind for p, k <= n."""
    S = np.zeros((n + 1, n + 1))
    S[0, 0] = 1
    for p in range(1, n + 1):
        for k in range(1, p + 1):
            S[p, k] = k * S[p - 1, k] + S[p - 1, k - 1]
    return S


def cauchy_derivatives(f, z: complex, order: int, radius: float, nodes: int = 64) -> np.ndarray:
    """f^(k)(z) for k <= order from the trapezoidal rule on a circle around z."""
    phi = 2 * np.pi * np.arange(nodes) / nodes
    samples = np.array([f(z + radius * np.exp(1j * t)) for t in phi])
    coefficients = np.fft.fft(samples) / nodes  # Taylor coefficients times radius^k
    return np.array(
        [math.factorial(k) * coefficients[k] / radius**k for k in range(order + 1)]
    )


def _euler_operator(roots: np.ndarray, z: complex, derivatives: np.ndarray) -> complex:
    """prod_k (theta - roots_k) applied to f, given f^(k)(z)."""
    m = len(roots)
    polynomial = np.poly(roots)[::-1]  # ascending powers of theta
    S = _stirling2(m)
    theta_powers = [
        sum(S[p, k] * z**k * derivatives[k] for k in range(p + 1)) for p in range(m + 1)
    ]
    return complex(sum(polynomial[p] * theta_powers[p] for p in range(m + 1)))


def ghge_residual(
    E: ExponentSet, point: BasePoint, j: int, z: complex, radius: Optional[float] = None
) -> float:
    """Relative size of the GHGE operator applied to the j-th local solution at z."""
    z = complex(z)
    x = _local_variable(point, z)
    if radius is None:
        if point is BasePoint.ZERO:
            radius = min(abs(z), 1 - abs(z)) / 2
        else:
            radius = min(abs(z) - 1, abs(z) / 2) / 2
        radius = min(radius, abs(z.imag) / 2) if z.real < 0 else radius
    logger.debug("GHGE residual at %s (local variable %s), radius %.3g.", z, x, radius)
    derivatives = cauchy_derivatives(
        lambda w: ghge_local_basis(E, point, j, w), z, E.m, radius
    )
    left = _euler_operator(E.b_arr, z, derivatives)
    right = z * _euler_operator(E.c_arr, z, derivatives)
    scale = max(abs(left), abs(right), abs(derivatives[0]))
    return abs(left - right) / scale


@attrs.frozen(eq=False)
class SeriesCoefficients:
    """alpha[i, n] and beta[i, n] as products of Pochhammer ratios."""

    alpha: np.ndarray
    beta: np.ndarray


def series_coefficients(E: ExponentSet, N: int) -> SeriesCoefficients:
    b, c, m = E.b_arr, E.c_arr, E.m
    alpha = np.ones((m, N + 1), dtype=complex)
    beta = np.ones((m, N + 1), dtype=complex)
    for n in range(1, N + 1):
        k = n - 1
        for i in range(m):
            alpha[i, n] = alpha[i, k] * np.prod((b[i] - c + k) / (b[i] - b + 1 + k))
            beta[i, n] = beta[i, k] * np.prod((b - c[i] + k) / (c - c[i] + 1 + k))
    return SeriesCoefficients(alpha=alpha, beta=beta)


@attrs.frozen(eq=False)
class FrobeniusSolution:
    base_point: BasePoint
    index: int
    exponent: complex
    coeffs: np.ndarray  # [n, component]
    order: int

    def evaluate(self, z: complex) -> CVector:
        x = _local_variable(self.base_point, z)
        powers = x ** np.arange(self.order + 1)
        return complex(z) ** self.exponent * (powers @ self.coeffs)

    def derivative(self, z: complex) -> CVector:
        """d/dz of the truncated series, term by term."""
        z = complex(z)
        x = _local_variable(self.base_point, z)
        n = np.arange(self.order + 1)
        if self.base_point is BasePoint.ZERO:
            exponents = self.exponent + n
        else:
            exponents = self.exponent - n
        factors = exponents * x**n / z
        return complex(z) ** self.exponent * (factors @ self.coeffs)


def _require_zero_a2(E: ExponentSet) -> None:
    if E.a2 != 0:
        raise SeriesError(
            f"Frobenius series need a2 = 0, got a2 = {E.a2}; map the parameters with with_a2."
        )


def frobenius_recursion(E: ExponentSet, point: BasePoint, i: int, N: int) -> np.ndarray:
    """Coefficients from (B - (b_i + n)) f_n = A sum_{k<n} f_k, resp.
    (C + (c_i - n)) g_n = A sum_{k<n} g_k at infinity."""
    _require_zero_a2(E)
    T = build_residue_triple(E)
    m = E.m
    n = np.arange(1, N + 1)[:, None]
    coeffs = np.zeros((N + 1, m), dtype=complex)
    if point is BasePoint.ZERO:
        guarded(E.b_arr[i] - E.b_arr[None, :] + n, "b_i-b_k+n")
        coeffs[0] = T.V[:, i]
        operator, start = T.B, -E.b_arr[i]
    else:
        guarded(E.c_arr[None, :] - E.c_arr[i] + n, "c_k-c_i+n")
        coeffs[0] = T.W[:, i]
        operator, start = T.C, E.c_arr[i]
    running = coeffs[0].copy()
    for k in range(1, N + 1):
        shifted = operator + (start - k) * np.eye(m)
        coeffs[k] = np.linalg.solve(shifted, T.A @ running)
        running += coeffs[k]
    return coeffs


def frobenius_closed_form(E: ExponentSet, point: BasePoint, i: int, N: int) -> np.ndarray:
    """alpha_in (V EX(n))[:, i] at 0 and beta_in (W EY(n))[:, i] at infinity."""
    _require_zero_a2(E)
    T = build_residue_triple(E)
    coefficients = series_coefficients(E, N)
    coeffs = np.zeros((N + 1, E.m), dtype=complex)
    for n in range(N + 1):
        if point is BasePoint.ZERO:
            coeffs[n] = coefficients.alpha[i, n] * (T.V @ ex_matrix(E.b_arr, n)[:, i])
        else:
            coeffs[n] = coefficients.beta[i, n] * (T.W @ ey_matrix(E.c_arr, n)[:, i])
    return coeffs


def mhgs_frobenius(
    E: ExponentSet, point: BasePoint, i: int, N: int = DEFAULT_ORDER
) -> FrobeniusSolution:
    coeffs = frobenius_recursion(E, point, i, N)
    exponent = E.b_arr[i] if point is BasePoint.ZERO else E.c_arr[i]
    return FrobeniusSolution(
        base_point=point, index=i, exponent=complex(exponent), coeffs=coeffs, order=N
    )


def frobenius_two_route_residual(E: ExponentSet, point: BasePoint, i: int, N: int) -> float:
    """Largest per-coefficient relative difference between recursion and closed form."""
    recursion = frobenius_recursion(E, point, i, N)
    closed = frobenius_closed_form(E, point, i, N)
    return max(relative_residual(r, c) for r, c in zip(recursion, closed))


def fundamental_matrix(
    E: ExponentSet, point: BasePoint, z: complex, N: int = DEFAULT_ORDER
) -> CMatrix:
    """Columns are the m Frobenius solutions at the given base point, evaluated at z."""
    return np.column_stack([mhgs_frobenius(E, point, i, N).evaluate(z) for i in range(E.m)])


def mhgs_residual(E: ExponentSet, solution: FrobeniusSolution, z: complex) -> float:
    """|z f' - (B + A z / (z - 1)) f| relative to the size of the terms."""
    z = complex(z)
    T = build_residue_triple(E)
    f = solution.evaluate(z)
    lhs = z * solution.derivative(z)
    rhs = (T.B + T.A * z / (z - 1)) @ f
    return relative_residual(lhs, rhs)


def radius_estimate(solution: FrobeniusSolution) -> float:
    """|c_{N-1}| / |c_N|, tending to the radius of convergence 1."""
    last, previous = solution.coeffs[-1], solution.coeffs[-2]
    return float(np.linalg.norm(previous) / np.linalg.norm(last))


def _pfq_sum(upper, lower, x: complex, N: int) -> complex:
    return hyper_pfq(upper, lower, x, N).value


def mhgs_component_closed_form(
    E: ExponentSet, point: BasePoint, i: int, j: int, z: complex, N: int = DEFAULT_ORDER
) -> complex:
    """Component j of the i-th Frobenius solution (0-based) as a single mFm-1."""
    _require_zero_a2(E)
    b, c, m = E.b_arr, E.c_arr, E.m
    T = build_residue_triple(E)
    w = weights(Rational(), E)
    x = _local_variable(point, z)
    z = complex(z)
    k = np.arange(m)
    if point is BasePoint.ZERO:
        if i >= j:
            upper = np.where(k <= j, b[i] - c, b[i] - c + 1)
            lower = np.where(k < j, b[i] - b, b[i] - b + 1)[k != i]
            return z ** b[i] * T.V[j, i] * _pfq_sum(upper, lower, x, N)
        prefactor = (
            E.u[j] * w.nu2[i] * np.prod(b[i] - c[j + 1 :] + 1) / np.prod(b[i] - b[j:] + 1)
        )
        upper = np.where(k <= j, b[i] - c + 1, b[i] - c + 2)
        lower = np.where(k < j, b[i] - b + 1, b[i] - b + 2)[k != i]
        return z ** (b[i] + 1) * prefactor * _pfq_sum(upper, lower, x, N)
    if i <= j:
        upper = np.where(k < j, b - c[i] + 1, b - c[i])
        lower = np.where(k <= j, c - c[i] + 1, c - c[i])[k != i]
        return z ** c[i] * T.W[j, i] * _pfq_sum(upper, lower, x, N)
    prefactor = E.u[j] * w.mu2[i] * np.prod(b[:j] - c[i] + 1) / np.prod(c[: j + 1] - c[i] + 1)
    upper = np.where(k < j, b - c[i] + 2, b - c[i] + 1)
    lower = np.where(k <= j, c - c[i] + 2, c - c[i] + 1)[k != i]
    return z ** (c[i] - 1) * prefactor * _pfq_sum(upper, lower, x, N)


def connection_coefficients(E: ExponentSet) -> CMatrix:
    """Gamma[i, j], the coefficient of the i-th solution at infinity in the j-th at 0."""
    _require_zero_a2(E)
    b, c, m = E.b_arr, E.c_arr, E.m
    mu2 = weights(Trigonometric(), E).mu2
    G = np.zeros((m, m), dtype=complex)
    for i in range(m):
        row = np.prod([complex_gamma(x) for x in b - c[i]]) / np.prod(
            [complex_gamma(x) for x in np.delete(c - c[i], i)]
        )
        for j in range(m):
            column = np.prod([complex_gamma(x) for x in np.delete(b[j] - b, j)]) / np.prod(
                [complex_gamma(x) for x in b[j] - c]
            )
            phase = cmath.exp(1j * cmath.pi * (c[i] - b[j]))
            G[i, j] = row * column * phase * mu2[i] / cmath.sin(cmath.pi * (b[j] - c[i]))
    return G


def continue_along_segment(
    E: ExponentSet, Y0: CMatrix, z_start: complex, z_end: complex, rtol: float = 1e-12
) -> CMatrix:
    """Integrate Y' = (A/(z-1) + B/z) Y along the straight segment z_start -> z_end."""
    T = build_residue_triple(E)
    m = E.m
    z_start, z_end = complex(z_start), complex(z_end)
    direction = z_end - z_start

    def rhs(t, y):
        z = z_start + t * direction
        Y = y.reshape(m, m)
        return (direction * (T.A / (z - 1) + T.B / z) @ Y).ravel()

    solution = solve_ivp(
        rhs, (0.0, 1.0), np.asarray(Y0, dtype=complex).ravel(), method="DOP853",
        rtol=rtol, atol=rtol * 1e-2,
    )
    if not solution.success:
        raise SeriesError(f"Continuation from {z_start} to {z_end} failed: {solution.message}")
    logger.debug("Continuation %s -> %s took %d evaluations.", z_start, z_end, solution.nfev)
    return solution.y[:, -1].reshape(m, m)


def continuation_matrix(
    E: ExponentSet,
    z_start: complex = -0.5j,
    z_end: complex = -2j,
    N: int = DEFAULT_ORDER,
) -> CMatrix:
    """K with F0 = Finf K, the 0-basis continued through the lower half plane."""
    if complex(z_start).imag >= 0 or complex(z_end).imag >= 0:
        raise SeriesError("The continuation path must stay in the lower half plane.")
    F0 = fundamental_matrix(E, BasePoint.ZERO, z_start, N)
    continued = continue_along_segment(E, F0, z_start, z_end)
    return invert(fundamental_matrix(E, BasePoint.INFINITY, z_end, N)) @ continued


def _rank_one_quotient(M: CMatrix) -> float:
    """sigma_2 / sigma_1 of M, zero exactly when M has rank one."""
    s = np.linalg.svd(M, compute_uv=False)
    return float(s[1] / s[0]) if len(s) > 1 else 0.0


@attrs.frozen(eq=False)
class ConnectionReport:
    K: CMatrix
    endpoint_residual: float
    rank_one_residual: float
    gamma_quotient_residual: float
    fitted_constant: complex


def connection_report(E: ExponentSet, N: int = DEFAULT_ORDER) -> ConnectionReport:
    """Connection data from numerical continuation against the Gamma formula.

    The endpoint residual compares K computed with two different end points. The
    rank-one residual measures K_ij sin pi(b_j - c_i) against a rank one matrix and the
    quotient residual measures how far K / Gamma is from rank one; the fitted constant
    is the mean of K / Gamma.
    """
    K = continuation_matrix(E, N=N)
    K_other = continuation_matrix(E, z_end=-1.5 - 1.5j, N=N)
    b, c = E.b_arr, E.c_arr
    sines = np.sin(np.pi * (b[None, :] - c[:, None]))
    quotient = K / connection_coefficients(E)
    return ConnectionReport(
        K=K,
        endpoint_residual=relative_residual(K, K_other),
        rank_one_residual=_rank_one_quotient(K * sines),
        gamma_quotient_residual=_rank_one_quotient(quotient),
        fitted_constant=complex(np.mean(quotient)),
    )


def wronskian_scale(
    E: ExponentSet, z: complex = 0.3, N: int = DEFAULT_ORDER
) -> Tuple[complex, float]:
    """det of the fundamental matrix at 0 evaluated at z and the product of column norms."""
    F = fundamental_matrix(E, BasePoint.ZERO, z, N)
    return complex(np.linalg.det(F)), float(np.prod(np.linalg.norm(F, axis=0)))
