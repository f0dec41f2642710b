"""Exact-rational identity checker.

Every identity here is a statement about rational functions of the exponents. Both
sides are evaluated in exact arithmetic at random integer points; a failing point
is a disproof and enough passing points make a coincidence vanishingly unlikely.

Passing corrupt=True negates the first summand (or the (1,1) entry of the first
matrix factor), which must make the identity fail.
"""
from __future__ import annotations

import enum
import logging
from fractions import Fraction
from functools import reduce
from itertools import permutations
from operator import mul
from typing import Callable, Dict, Iterable, List, Sequence, Tuple

import attrs
import numpy as np

from hgforge.errors import OracleError

logger = logging.getLogger(__name__)

Matrix = List[List[Fraction]]

POINT_RANGE = 10**6
MAX_RESAMPLES = 1000


def _prod(values: Iterable[Fraction]) -> Fraction:
    return reduce(mul, values, Fraction(1))


@attrs.frozen
class TrialPoint:
    b: Tuple[Fraction, ...]
    c: Tuple[Fraction, ...]
    a2: Fraction
    tau1: Fraction
    tau2: Fraction
    x: Fraction

    @property
    def m(self) -> int:
        return len(self.b)


def draw_point(m: int, rng: np.random.Generator) -> TrialPoint:
    """Distinct integers for all free variables."""
    values = rng.choice(2 * POINT_RANGE + 1, size=2 * m + 4, replace=False) - POINT_RANGE
    values = [Fraction(int(v)) for v in values]
    return TrialPoint(
        b=tuple(values[:m]),
        c=tuple(values[m : 2 * m]),
        a2=values[2 * m],
        tau1=values[2 * m + 1],
        tau2=values[2 * m + 2],
        x=values[2 * m + 3],
    )


def _negate_first(terms: List[Fraction], corrupt: bool) -> List[Fraction]:
    if corrupt and terms:
        terms[0] = -terms[0]
    return terms


def _corrupt_matrix(M: Matrix, corrupt: bool) -> Matrix:
    if corrupt:
        M[0][0] = -M[0][0]
    return M


def _matmul(A: Matrix, B: Matrix) -> Matrix:
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in zip(*B)] for row in A]


def _identity(m: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]


def xi2(b: Sequence[Fraction], j: int, tau: Fraction) -> Fraction:
    m = len(b)
    return _prod(b[j] - b[k] + tau for k in range(m)) / _prod(
        b[j] - b[k] for k in range(m) if k != j
    )


def theta2(c: Sequence[Fraction], j: int, tau: Fraction) -> Fraction:
    m = len(c)
    return _prod(c[k] - c[j] + tau for k in range(m)) / _prod(
        c[k] - c[j] for k in range(m) if k != j
    )


def ex_matrix(b: Sequence[Fraction], tau: Fraction) -> Matrix:
    m = len(b)
    if tau == 0:
        return _identity(m)
    return [[xi2(b, j, tau) / (b[j] - b[i] + tau) for j in range(m)] for i in range(m)]


def ey_matrix(c: Sequence[Fraction], tau: Fraction) -> Matrix:
    m = len(c)
    if tau == 0:
        return _identity(m)
    return [[theta2(c, j, tau) / (c[i] - c[j] + tau) for j in range(m)] for i in range(m)]


def mu2(p: TrialPoint, i: int, tau: Fraction) -> Fraction:
    m, b, c = p.m, p.b, p.c
    return _prod(p.a2 + b[k] - c[i] + tau for k in range(m)) / _prod(
        c[k] - c[i] for k in range(m) if k != i
    )


def nu2(p: TrialPoint, i: int, tau: Fraction) -> Fraction:
    m, b, c = p.m, p.b, p.c
    return _prod(p.a2 + b[i] - c[k] + tau for k in range(m)) / _prod(
        b[i] - b[k] for k in range(m) if k != i
    )


def z_matrix(p: TrialPoint, tau: Fraction) -> Matrix:
    m, b, c = p.m, p.b, p.c
    return [
        [nu2(p, j, tau) / (b[j] - c[i] + p.a2 + tau) for j in range(m)] for i in range(m)
    ]


def z_inverse(p: TrialPoint, tau: Fraction) -> Matrix:
    m, b, c = p.m, p.b, p.c
    return [
        [mu2(p, j, tau) / (b[i] - c[j] + p.a2 + tau) for j in range(m)] for i in range(m)
    ]


def v_matrix(p: TrialPoint) -> Matrix:
    """Columns are the eigenvectors v_i of B."""
    m, b, c, a2 = p.m, p.b, p.c, p.a2
    V = [[Fraction(0)] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1):
            V[j][i] = (
                (b[j] - c[j] + a2)
                * _prod(b[i] - c[k] + a2 for k in range(j + 1, m))
                / _prod(b[i] - b[k] for k in range(j, m) if k != i)
            )
    return V


def w_inverse(p: TrialPoint) -> Matrix:
    m, b, c, a2 = p.m, p.b, p.c, p.a2
    Winv = [[Fraction(0)] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1):
            Winv[i][j] = _prod(
                (c[k] - c[i]) / (b[k] - c[i] + a2) for k in range(j)
            ) / (b[j] - c[i] + a2)
    return Winv


def _ex_group(p: TrialPoint, corrupt: bool) -> bool:
    left = _matmul(_corrupt_matrix(ex_matrix(p.b, p.tau1), corrupt), ex_matrix(p.b, p.tau2))
    right = _matmul(ey_matrix(p.c, p.tau1), ey_matrix(p.c, p.tau2))
    return left == ex_matrix(p.b, p.tau1 + p.tau2) and right == ey_matrix(
        p.c, p.tau1 + p.tau2
    )


def _jjprime(p: TrialPoint, corrupt: bool) -> bool:
    b, tau, m = p.b, p.tau1, p.m
    terms = [
        _prod(b[0] - b[k] + tau for k in range(1, m) if k != l)
        / _prod(b[l] - b[k] for k in range(1, m) if k != l)
        for l in range(1, m)
    ]
    return sum(_negate_first(terms, corrupt)) == 1


def _lagrange_zero_sum(p: TrialPoint, corrupt: bool) -> bool:
    b, tau, m = p.b, p.tau1, p.m
    for i, i1 in permutations(range(m), 2):
        terms = [
            _prod(b[k] - b[l] + tau for l in range(m) if l not in (i, i1))
            / _prod(b[k] - b[l] for l in range(m) if l != k)
            for k in range(m)
        ]
        if sum(_negate_first(terms, corrupt)) != 0:
            return False
    return True


def _lagrange_unit_sum(p: TrialPoint, corrupt: bool) -> bool:
    b, c, tau, m = p.b, p.c, p.tau1, p.m
    for i in range(m):
        terms = [
            _prod(b[j] - c[k] + tau for k in range(m) if k != i)
            / _prod(b[j] - b[k] for k in range(m) if k != j)
            for j in range(m)
        ]
        if sum(_negate_first(terms, corrupt)) != 1:
            return False
    return True


def _weight_sum(p: TrialPoint, corrupt: bool) -> bool:
    terms = [nu2(p, i, p.tau1) for i in range(p.m)]
    expected = sum(p.a2 + p.b[i] - p.c[i] + p.tau1 for i in range(p.m))
    return sum(_negate_first(terms, corrupt)) == expected


def _winv_v(p: TrialPoint, corrupt: bool) -> bool:
    return _matmul(_corrupt_matrix(w_inverse(p), corrupt), v_matrix(p)) == z_matrix(
        p, Fraction(0)
    )


def _z_ex(p: TrialPoint, corrupt: bool) -> bool:
    t1, t2 = p.tau1, p.tau2
    left = _matmul(_corrupt_matrix(z_inverse(p, t1), corrupt), z_matrix(p, t2))
    right = _matmul(z_matrix(p, t1), z_inverse(p, t2))
    return left == ex_matrix(p.b, t2 - t1) and right == ey_matrix(p.c, t2 - t1)


def _wd(p: TrialPoint, corrupt: bool) -> bool:
    b, c, x = p.b, p.c, p.x
    for i in range(1, p.m + 1):
        terms = [
            _prod(x - c[k] for k in range(i) if k != l)
            / _prod(x - b[k] for k in range(i - 1))
            * _prod(b[k] - c[l] for k in range(i - 1))
            / _prod(c[k] - c[l] for k in range(i) if k != l)
            for l in range(i)
        ]
        if sum(_negate_first(terms, corrupt)) != 1:
            return False
    return True


def _frob_step(p: TrialPoint, corrupt: bool) -> bool:
    b, c, x, m = p.b, p.c, p.x, p.m
    residues = [
        _prod(b[i] - c[k] for k in range(m)) / _prod(b[i] - b[k] for k in range(m) if k != i)
        for i in range(m)
    ]
    terms = [_prod(x - c[k] for k in range(m)) / _prod(x - b[k] for k in range(m))]
    terms += [-r / (x - b[i]) for i, r in enumerate(residues)]
    return sum(_negate_first(terms, corrupt)) == 1


def _cauchy_matrix(p: TrialPoint) -> Matrix:
    x = [p.a2 + bi + p.tau1 for bi in p.b]
    return [[1 / (xi - cj) for cj in p.c] for xi in x]


def exact_determinant(M: Matrix) -> Fraction:
    """Gaussian elimination over the rationals."""
    M = [row[:] for row in M]
    n, det = len(M), Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if M[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            M[col], M[pivot] = M[pivot], M[col]
            det = -det
        det *= M[col][col]
        for r in range(col + 1, n):
            factor = M[r][col] / M[col][col]
            M[r] = [a - factor * b for a, b in zip(M[r], M[col])]
    return det


def _cauchy_det(p: TrialPoint, corrupt: bool) -> bool:
    m = p.m
    x = [p.a2 + bi + p.tau1 for bi in p.b]
    y = p.c
    closed = _prod(
        (x[i] - x[j]) * (y[j] - y[i]) for i in range(m) for j in range(i + 1, m)
    ) / _prod(xi - yj for xi in x for yj in y)
    D = _corrupt_matrix(_cauchy_matrix(p), corrupt)
    return exact_determinant(D) == closed


def _cauchy_inv(p: TrialPoint, corrupt: bool) -> bool:
    m, tau = p.m, p.tau1
    inverse = [
        [mu2(p, i, tau) * nu2(p, j, tau) / (p.a2 + p.b[j] - p.c[i] + tau) for j in range(m)]
        for i in range(m)
    ]
    return _matmul(_corrupt_matrix(_cauchy_matrix(p), corrupt), inverse) == _identity(m)


class RationalIdentity(enum.Enum):
    EX_GROUP = "EX_GROUP"
    JJPRIME_1 = "JJPRIME_1"
    LAGRANGE_ZERO_SUM = "LAGRANGE_ZERO_SUM"
    LAGRANGE_UNIT_SUM = "LAGRANGE_UNIT_SUM"
    WEIGHT_SUM = "WEIGHT_SUM"
    WINV_V = "WINV_V"
    Z_EX = "Z_EX"
    WD = "WD"
    FROB_STEP = "FROB_STEP"
    CAUCHY_DET = "CAUCHY_DET"
    CAUCHY_INV = "CAUCHY_INV"

    @property
    def min_m(self) -> int:
        pairs = (RationalIdentity.JJPRIME_1, RationalIdentity.LAGRANGE_ZERO_SUM)
        return 2 if self in pairs else 1

    @property
    def arity(self) -> int:
        """Number of free scalar variables beyond the m-dependent ones."""
        return _ARITY[self]

    @property
    def description(self) -> str:
        return _DESCRIPTIONS[self]


_ARITY = {
    RationalIdentity.EX_GROUP: 2,
    RationalIdentity.JJPRIME_1: 1,
    RationalIdentity.LAGRANGE_ZERO_SUM: 1,
    RationalIdentity.LAGRANGE_UNIT_SUM: 1,
    RationalIdentity.WEIGHT_SUM: 2,
    RationalIdentity.WINV_V: 1,
    RationalIdentity.Z_EX: 3,
    RationalIdentity.WD: 1,
    RationalIdentity.FROB_STEP: 1,
    RationalIdentity.CAUCHY_DET: 2,
    RationalIdentity.CAUCHY_INV: 2,
}

_DESCRIPTIONS = {
    RationalIdentity.EX_GROUP: "EX(t1) EX(t2) = EX(t1 + t2), same for EY",
    RationalIdentity.JJPRIME_1: "sum over l >= 2 of the Lagrange basis at b_1 + t equals 1",
    RationalIdentity.LAGRANGE_ZERO_SUM: (
        "sum_k prod_{l != i, i'} (b_k - b_l + t) / prod_{l != k} (b_k - b_l) = 0"
    ),
    RationalIdentity.LAGRANGE_UNIT_SUM: (
        "sum_j prod_{k != i} (b_j - c_k + t) / prod_{k != j} (b_j - b_k) = 1"
    ),
    RationalIdentity.WEIGHT_SUM: "sum_i nu_i^2(t) = sum_i (a2 + b_i - c_i + t)",
    RationalIdentity.WINV_V: "closed-form W^-1 times V equals Z(0)",
    RationalIdentity.Z_EX: "Z^-1(t1) Z(t2) = EX(t2 - t1) and Z(t1) Z^-1(t2) = EY(t2 - t1)",
    RationalIdentity.WD: "interpolation identity behind the W D(n) product",
    RationalIdentity.FROB_STEP: "partial fractions of prod (x - c_k) / prod (x - b_k)",
    RationalIdentity.CAUCHY_DET: "Cauchy determinant product formula",
    RationalIdentity.CAUCHY_INV: "closed-form inverse of the rational Cauchy matrix",
}

_CHECKS: Dict[RationalIdentity, Callable[[TrialPoint, bool], bool]] = {
    RationalIdentity.EX_GROUP: _ex_group,
    RationalIdentity.JJPRIME_1: _jjprime,
    RationalIdentity.LAGRANGE_ZERO_SUM: _lagrange_zero_sum,
    RationalIdentity.LAGRANGE_UNIT_SUM: _lagrange_unit_sum,
    RationalIdentity.WEIGHT_SUM: _weight_sum,
    RationalIdentity.WINV_V: _winv_v,
    RationalIdentity.Z_EX: _z_ex,
    RationalIdentity.WD: _wd,
    RationalIdentity.FROB_STEP: _frob_step,
    RationalIdentity.CAUCHY_DET: _cauchy_det,
    RationalIdentity.CAUCHY_INV: _cauchy_inv,
}


def evaluate_at(identity: RationalIdentity, point: TrialPoint, corrupt: bool = False) -> bool:
    """Check one identity at one point; ZeroDivisionError propagates."""
    return _CHECKS[identity](point, corrupt)


def verify_rational_identity(
    identity: RationalIdentity,
    m: int,
    trials: int = 20,
    seed: int = 0,
    corrupt: bool = False,
    max_resamples: int = MAX_RESAMPLES,
) -> bool:
    identity = RationalIdentity(identity)
    if m < identity.min_m:
        raise ValueError(f"{identity.value} needs m >= {identity.min_m}, got {m}.")
    rng = np.random.default_rng(seed)
    resamples = 0
    for trial in range(trials):
        while True:
            point = draw_point(m, rng)
            try:
                holds = evaluate_at(identity, point, corrupt)
            except ZeroDivisionError:
                resamples += 1
                logger.warning(
                    "%s: denominator vanished at trial %d, resampling.", identity.value, trial
                )
                if resamples > max_resamples:
                    raise OracleError(
                        f"{identity.value}: no denominator-free point after "
                        f"{max_resamples} resamples."
                    )
                continue
            break
        if not holds:
            logger.info("%s fails at trial %d: %s", identity.value, trial, point)
            return False
    return True
