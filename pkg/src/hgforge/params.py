"""Spectral data of hypergeometric triples: modelling, sampling and validation.

An exponent set collects the local exponents of the system: b at 0, c at infinity
(the residue at infinity has eigenvalues -c) and a1, a2 at 1. The value a1 is never
drawn independently, it always comes out of the trace condition.
"""
from __future__ import annotations

import enum
import logging
from itertools import product
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import attrs
import numpy as np

from hgforge.errors import SamplingError

logger = logging.getLogger(__name__)

EPS_INT = 1e-3
DELTA_SEP = 0.05
MAX_SAMPLING_TRIES = 20000


def _to_complex_tuple(values: Iterable[Any]) -> Tuple[complex, ...]:
    return tuple(complex(v) for v in values)


def _to_sorted_reals(values: Iterable[Any]) -> Tuple[float, ...]:
    return tuple(sorted(_to_real(v) for v in values))


def _to_real(value: Any) -> float:
    value = complex(value)
    if value.imag != 0:
        raise ValueError(f"Expected a real exponent, got {value}.")
    return value.real


def _lexicographic(values: Iterable[complex]) -> Tuple[complex, ...]:
    return tuple(sorted(values, key=lambda v: (v.real, v.imag)))


def trace_value(a1: complex, a2: complex, b: Sequence[complex], c: Sequence[complex]) -> complex:
    """Left side of the trace condition a1 + (m-1) a2 + sum(b - c) = 0."""
    return a1 + (len(b) - 1) * a2 + sum(b) - sum(c)


def solve_a1(a2: complex, b: Sequence[complex], c: Sequence[complex]) -> complex:
    return -((len(b) - 1) * a2 + sum(b) - sum(c))


@attrs.frozen(kw_only=True)
class ExponentSet:
    a1: complex = attrs.field(converter=complex)
    a2: complex = attrs.field(converter=complex)
    b: Tuple[complex, ...] = attrs.field(converter=_to_complex_tuple)
    c: Tuple[complex, ...] = attrs.field(converter=_to_complex_tuple)
    k1: complex = attrs.field(default=1, converter=complex)
    k2: complex = attrs.field(default=1, converter=complex)

    @c.validator
    def _same_size(self, attr: attrs.Attribute, value: Tuple[complex, ...]) -> None:
        if not self.b:
            raise ValueError("b: At least one exponent is required.")
        if len(value) != len(self.b):
            raise ValueError(
                f"c: Expected {len(self.b)} exponents to match b, got {len(value)}."
            )

    @classmethod
    def from_exponents(
        cls, a2: complex, b: Sequence[complex], c: Sequence[complex], **flow_constants
    ) -> ExponentSet:
        """Build an exponent set with a1 solved from the trace condition."""
        return cls(a1=solve_a1(complex(a2), b, c), a2=a2, b=b, c=c, **flow_constants)

    @property
    def m(self) -> int:
        return len(self.b)

    @property
    def b_arr(self) -> np.ndarray:
        return np.array(self.b, dtype=complex)

    @property
    def c_arr(self) -> np.ndarray:
        return np.array(self.c, dtype=complex)

    @property
    def u(self) -> np.ndarray:
        """Coordinates of the eigenvector of A for a1: u_i = b_i - c_i + a2."""
        return self.b_arr - self.c_arr + self.a2

    @property
    def trace_residual(self) -> float:
        return abs(trace_value(self.a1, self.a2, self.b, self.c))

    @property
    def is_real(self) -> bool:
        return all(v.imag == 0 for v in (self.a1, self.a2, *self.b, *self.c))

    def as_real(self) -> RealExponentSet:
        return RealExponentSet(
            a1=self.a1, a2=self.a2, b=self.b, c=self.c, k1=self.k1, k2=self.k2
        )


@attrs.frozen(kw_only=True)
class RealExponentSet(ExponentSet):
    """Exponent set with real entries, renumbered so that b and c are ascending."""

    a1: float = attrs.field(converter=_to_real)
    a2: float = attrs.field(converter=_to_real)
    b: Tuple[float, ...] = attrs.field(converter=_to_sorted_reals)
    c: Tuple[float, ...] = attrs.field(converter=_to_sorted_reals)

    @c.validator
    def _same_size(self, attr: attrs.Attribute, value: Tuple[float, ...]) -> None:
        ExponentSet._same_size(self, attr, value)

    @property
    def sorted_b(self) -> bool:
        return all(x < y for x, y in zip(self.b, self.b[1:]))

    @property
    def sorted_c(self) -> bool:
        return all(x < y for x, y in zip(self.c, self.c[1:]))

    def as_real(self) -> RealExponentSet:
        return self


def with_a2(E: ExponentSet, a2: complex) -> ExponentSet:
    """Replace a2 and re-derive a1 from the trace condition."""
    a2 = a2.real if isinstance(E, RealExponentSet) else a2
    return attrs.evolve(E, a2=a2, a1=solve_a1(complex(a2), E.b, E.c))


def swap_zero_infinity(E: ExponentSet) -> ExponentSet:
    """Exchange the roles of 0 and infinity: b -> -c, c -> -b."""
    return ExponentSet(
        a1=E.a1,
        a2=E.a2,
        b=[-x for x in E.c],
        c=[-x for x in E.b],
        k1=E.k2,
        k2=E.k1,
    )


def distance_to_integer(x: complex) -> float:
    return abs(complex(x) - round(complex(x).real))


@attrs.frozen
class Violation:
    kind: str
    i: int
    j: int
    value: complex

    def __str__(self) -> str:
        return f"{self.kind}[{self.i},{self.j}] = {self.value} is near an integer"


@attrs.frozen
class ValidationReport:
    violations: Tuple[Violation, ...]
    trace_residual: float

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_genericity(E: ExponentSet, eps_int: float = EPS_INT) -> ValidationReport:
    """List every exponent difference within eps_int of an integer.

    Never raises: degenerate input is reported, not rejected.
    """
    violations: List[Violation] = []
    pairs = (
        ("b-b", E.b, E.b, True),
        ("c-c", E.c, E.c, True),
        ("b-c", E.b, E.c, False),
    )
    for kind, xs, ys, skip_diagonal in pairs:
        for (i, x), (j, y) in product(enumerate(xs, 1), enumerate(ys, 1)):
            if skip_diagonal and i >= j:
                continue
            if distance_to_integer(x - y) < eps_int:
                violations.append(Violation(kind, i, j, x - y))
    return ValidationReport(tuple(violations), E.trace_residual)


def _kernel_separation(delta_sep: float, eps_int: float) -> float:
    return max(eps_int, delta_sep / 5)


def _acceptable(
    a2: complex, b: np.ndarray, c: np.ndarray, delta_sep: float, eps_int: float
) -> bool:
    m = len(b)
    for xs in (b, c):
        for i in range(m):
            for j in range(i + 1, m):
                if abs(xs[i] - xs[j]) < delta_sep:
                    return False
                if distance_to_integer(xs[i] - xs[j]) < eps_int:
                    return False
    sep = _kernel_separation(delta_sep, eps_int)
    for i in range(m):
        for j in range(m):
            if distance_to_integer(b[i] - c[j]) < sep:
                return False
            if distance_to_integer(a2 + b[i] - c[j]) < sep:
                return False
    a1 = solve_a1(a2, list(b), list(c))
    return distance_to_integer(a2 - a1) >= sep


class SamplingMode(enum.Enum):
    REAL01 = "real01"
    COMPLEX = "complex"


def sample_parameters(
    m: int,
    seed: int,
    mode: SamplingMode = SamplingMode.REAL01,
    delta_sep: float = DELTA_SEP,
    eps_int: float = EPS_INT,
    max_tries: int = MAX_SAMPLING_TRIES,
) -> ExponentSet:
    """Draw a generic exponent set, deterministic in (m, seed, mode, delta_sep).

    real01 draws b, c, a2 uniformly from [0, 1) and sorts b and c. complex draws real
    and imaginary parts from [0, 1). Draws are rejected until all exponent differences
    are separated and away from integers.
    """
    if m < 1:
        raise ValueError(f"m: Must be positive, got {m}.")
    if not 0 < delta_sep < 1 / (2 * m):
        raise ValueError(f"delta_sep: Must lie in (0, {1 / (2 * m)}), got {delta_sep}.")
    mode = SamplingMode(mode)
    rng = np.random.default_rng(seed)
    for attempt in range(1, max_tries + 1):
        if mode is SamplingMode.REAL01:
            b = np.sort(rng.random(m))
            c = np.sort(rng.random(m))
            a2 = rng.random()
        else:
            b = rng.random(m) + 1j * rng.random(m)
            c = rng.random(m) + 1j * rng.random(m)
            a2 = complex(rng.random(), rng.random())
            b = np.array(_lexicographic(b))
            c = np.array(_lexicographic(c))
        if _acceptable(a2, b, c, delta_sep, eps_int):
            logger.debug("Accepted parameters for m=%d after %d draws.", m, attempt)
            if mode is SamplingMode.REAL01:
                return RealExponentSet.from_exponents(float(a2), b.tolist(), c.tolist())
            return ExponentSet.from_exponents(a2, b.tolist(), c.tolist())
    raise SamplingError(
        f"Could not draw separated exponents for m={m} with delta_sep={delta_sep} "
        f"after {max_tries} tries; try a smaller separation."
    )


class PositivityColumn(enum.Enum):
    COLUMN1 = "Column1"
    COLUMN2 = "Column2"
    NEITHER = "Neither"


def check_positivity_conditions(E: RealExponentSet) -> PositivityColumn:
    """Decide which chain of interlacing inequalities the exponents satisfy.

    Column1: c_i - b_i < a2 < c_{i+1} - b_i for i < m and c_m - b_m < a2.
    Column2: c_{i-1} - b_i < a2 < c_i - b_i for i > 1 and a2 < c_1 - b_1.
    """
    if not isinstance(E, RealExponentSet):
        raise TypeError("Positivity conditions are only defined for real exponents.")
    if not (E.sorted_b and E.sorted_c):
        raise ValueError("Positivity conditions need b and c sorted ascending.")
    b, c, a2, m = E.b, E.c, E.a2, E.m
    column1 = all(c[i] - b[i] < a2 < c[i + 1] - b[i] for i in range(m - 1)) and (
        c[m - 1] - b[m - 1] < a2
    )
    if column1:
        return PositivityColumn.COLUMN1
    column2 = all(c[i - 1] - b[i] < a2 < c[i] - b[i] for i in range(1, m)) and (
        a2 < c[0] - b[0]
    )
    if column2:
        return PositivityColumn.COLUMN2
    return PositivityColumn.NEITHER


def constructed_positivity_set(
    m: int, column: PositivityColumn, seed: int = 0, jitter: float = 0.005
) -> RealExponentSet:
    """Real exponents built to satisfy (or violate) the positivity chains.

    All margins are 0.05 or more, the jitter only breaks ties between repeated runs.
    """
    column = PositivityColumn(column)
    rng = np.random.default_rng(seed)
    idx = np.arange(m)
    if column is PositivityColumn.COLUMN1:
        a2 = 0.3
        b = 0.05 + 0.1 * idx
        c = a2 + b - 0.05
    elif column is PositivityColumn.COLUMN2:
        a2 = 0.2
        b = 0.05 + 0.1 * idx
        c = a2 + b + 0.05
    else:
        if m < 2:
            raise ValueError("A single exponent pair always satisfies one chain.")
        a2 = 0.1
        b = 0.02 + 0.05 * idx
        c = 0.45 + 0.08 * idx
    b = b + rng.uniform(-jitter, jitter, m)
    c = c + rng.uniform(-jitter, jitter, m)
    a2 = a2 + rng.uniform(-jitter, jitter)
    return RealExponentSet.from_exponents(a2, b.tolist(), c.tolist())


def _encode(value: complex) -> List[float]:
    return [value.real, value.imag]


def _decode(pair: Any) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    re, im = pair
    return complex(re, im)


def exponent_set_to_json(E: ExponentSet) -> Dict[str, Any]:
    return {
        "m": E.m,
        "a1": _encode(E.a1),
        "a2": _encode(E.a2),
        "b": [_encode(x) for x in E.b],
        "c": [_encode(x) for x in E.c],
        "k1": _encode(E.k1),
        "k2": _encode(E.k2),
    }


def exponent_set_from_json(doc: Dict[str, Any]) -> ExponentSet:
    """Parse the JSON parameter file format; real data yields a RealExponentSet."""
    fields = dict(
        a1=_decode(doc["a1"]),
        a2=_decode(doc["a2"]),
        b=[_decode(x) for x in doc["b"]],
        c=[_decode(x) for x in doc["c"]],
        k1=_decode(doc.get("k1", 1)),
        k2=_decode(doc.get("k2", 1)),
    )
    if "m" in doc and doc["m"] != len(fields["b"]):
        raise ValueError(f"m: Declared {doc['m']} but b has {len(fields['b'])} entries.")
    exps = [fields["a1"], fields["a2"], *fields["b"], *fields["c"]]
    cls = RealExponentSet if all(v.imag == 0 for v in exps) else ExponentSet
    return cls(**fields)
