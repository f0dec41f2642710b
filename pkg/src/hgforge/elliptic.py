"""The elliptic kernel 1/sn and its degenerations.

1/sn is evaluated through the cosecant series along the omega2 direction, which
converges geometrically. The conditionally convergent double lattice sum is kept as
an independent check and is only meaningful in the fixed order implemented here:
inner sum over n1 (symmetric, alternating), outer sum over n2 (symmetric).

omega1 is an antiperiod and omega2 a period of 1/sn. The usual normalization of sn
is deliberately not applied.
"""
from __future__ import annotations

import logging
import math
from typing import Optional, Tuple

import attrs
import numpy as np

from hgforge.errors import LatticeError

logger = logging.getLogger(__name__)

DEFAULT_INNER_RADIUS = 400
DEFAULT_TAIL = 1e-14
ACCELERATION_DEPTH = 12
LATTICE_PROXIMITY = 1e-6


@attrs.frozen
class LatticeSpec:
    omega1: complex = attrs.field(default=1, converter=complex)
    omega2: complex = attrs.field(default=0.8j, converter=complex)
    n1: int = attrs.field(default=DEFAULT_INNER_RADIUS)
    n2: Optional[int] = attrs.field(default=None)
    tail: float = attrs.field(default=DEFAULT_TAIL)

    @omega2.validator
    def _oriented(self, attr: attrs.Attribute, value: complex) -> None:
        if self.omega1 == 0 or (value / self.omega1).imag <= 0:
            raise LatticeError(
                f"omega2: Im(omega2/omega1) must be positive, got omega1={self.omega1}, "
                f"omega2={value}."
            )

    @n1.validator
    def _positive(self, attr: attrs.Attribute, value: int) -> None:
        if value < ACCELERATION_DEPTH + 1:
            raise LatticeError(f"n1: Need at least {ACCELERATION_DEPTH + 1} terms, got {value}.")

    @property
    def ratio(self) -> complex:
        return self.omega2 / self.omega1


@attrs.frozen
class EllipticValue:
    value: complex
    tail_bound: float


def _check_off_lattice(z: complex, L: LatticeSpec) -> None:
    zp = z / L.omega1
    k2 = round(zp.imag / L.ratio.imag)
    distance = math.inf
    for n2 in (k2 - 1, k2, k2 + 1):
        r = zp - n2 * L.ratio
        for n1 in (math.floor(r.real), math.ceil(r.real)):
            distance = min(distance, abs(z - (n1 * L.omega1 + n2 * L.omega2)))
    if distance < LATTICE_PROXIMITY * abs(L.omega1):
        raise LatticeError(f"Argument {z} is within {distance:.3g} of the period lattice.")


def outer_radius(z: complex, L: LatticeSpec) -> Tuple[int, float]:
    """Truncation radius in the omega2 direction and the bound on the dropped terms.

    Uses |sin(pi(x + iy))| >= sinh(pi |y|) >= exp(pi |y|) / 4 once pi |y| > 0.35.
    """
    T = L.ratio.imag
    Y = abs((z / L.omega1).imag)
    scale = 8 * math.pi / abs(L.omega1) / (1 - math.exp(-math.pi * T))

    def bound(N: int) -> float:
        if math.pi * ((N + 1) * T - Y) < 0.35:
            return math.inf
        return scale * math.exp(math.pi * Y - math.pi * (N + 1) * T)

    if L.n2 is not None:
        return L.n2, bound(L.n2)
    N = 1
    while bound(N) >= L.tail:
        N += 1
    logger.debug("Outer radius %d for z=%s (tail %.3g).", N, z, bound(N))
    return N, bound(N)


def inv_sn(z: complex, L: LatticeSpec) -> EllipticValue:
    """1/sn(z) as (1/omega1) * sum_n2 pi / sin(pi (z/omega1 + n2 omega2/omega1))."""
    z = complex(z)
    _check_off_lattice(z, L)
    N, tail = outer_radius(z, L)
    n2 = np.arange(-N, N + 1)
    terms = np.pi / np.sin(np.pi * (z / L.omega1 + n2 * L.ratio))
    return EllipticValue(value=complex(terms.sum() / L.omega1), tail_bound=tail)


def sn(z: complex, L: LatticeSpec) -> complex:
    return 1 / inv_sn(z, L).value


def p_minus_e3(z: complex, L: LatticeSpec) -> complex:
    """Weierstrass p(z) - e3, the square of 1/sn."""
    return inv_sn(z, L).value ** 2


def euler_accelerate(
    partial_sums: np.ndarray, depth: int = ACCELERATION_DEPTH
) -> Tuple[complex, float]:
    """Repeated averaging of the last depth + 1 partial sums of an alternating series.

    Returns the estimate and half the spread of the last averaging level.
    """
    window = np.asarray(partial_sums)[-(depth + 1) :]
    previous = window
    while len(window) > 1:
        previous, window = window, (window[1:] + window[:-1]) / 2
    spread = abs(previous[-1] - previous[0]) / 2 if len(previous) > 1 else 0.0
    return complex(window[0]), float(spread)


def alternating_tail(
    base: complex, pair_terms: np.ndarray, accelerate: bool
) -> Tuple[complex, float]:
    """Sum base + sum(pair_terms), the terms alternating in sign.

    Without acceleration the plain partial sum is returned with the first omitted
    term estimated by the last one.
    """
    partial_sums = base + np.cumsum(pair_terms)
    if accelerate:
        return euler_accelerate(partial_sums)
    return complex(partial_sums[-1]), float(abs(pair_terms[-1]))


def _lattice_slice(
    z: complex, n2: int, L: LatticeSpec, accelerate: bool
) -> Tuple[complex, float]:
    w = z + n2 * L.omega2
    s = n2 * L.omega2
    n1 = np.arange(1, L.n1 + 1)
    signs = np.where(n1 % 2 == 0, 1.0, -1.0)
    shifts = n1 * L.omega1
    if n2 == 0:
        base = 1 / z
        pairs = signs * ((1 / (w + shifts) - 1 / shifts) + (1 / (w - shifts) + 1 / shifts))
    else:
        base = 1 / w - 1 / s
        pairs = signs * (
            (1 / (w + shifts) - 1 / (s + shifts)) + (1 / (w - shifts) - 1 / (s - shifts))
        )
    return alternating_tail(base, pairs, accelerate)


def inv_sn_lattice(z: complex, L: LatticeSpec, accelerate: bool = True) -> EllipticValue:
    """1/sn(z) from the alternating double lattice sum."""
    z = complex(z)
    _check_off_lattice(z, L)
    N, outer_tail = outer_radius(z, L)
    total, inner_error = 0j, 0.0
    for n2 in range(-N, N + 1):
        value, error = _lattice_slice(z, n2, L, accelerate)
        total += value
        inner_error += error
    return EllipticValue(value=total, tail_bound=outer_tail + inner_error)


def csc_partial_fraction(z: complex, N: int = 10_000, accelerate: bool = True) -> complex:
    """pi / sin(pi z) as 1/z + sum_{n=1..N} (-1)^n (1/(z+n) + 1/(z-n))."""
    z = complex(z)
    if abs(z - round(z.real)) < LATTICE_PROXIMITY:
        raise LatticeError(f"Argument {z} is (close to) an integer.")
    n = np.arange(1, N + 1)
    signs = np.where(n % 2 == 0, 1.0, -1.0)
    value, _ = alternating_tail(1 / z, signs * (1 / (z + n) + 1 / (z - n)), accelerate)
    return value
