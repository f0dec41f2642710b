"""Verification suites: named lists of checks run over sampled parameters.

Each check maps a trial context to a residual (or a boolean verdict). Trials get
independent child seeds, so any (suite, m, seed) triple can be rerun on its own.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from itertools import product
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple, Union

import attrs
import numpy as np
import scipy.special

from hgforge.cauchy import (
    Elliptic,
    Rational,
    Trigonometric,
    cauchy_determinant,
    cauchy_matrix,
    inverse_residual,
    ndm_orthogonality,
)
from hgforge.cm import (
    cm_flow,
    cm_normal_form,
    gl_action,
    hamiltonian_h2,
    mhgs_link_check,
    mhgs_quadruple,
    normal_form_matrix,
    subvariety_residual,
    trace_invariants,
)
from hgforge.elliptic import LatticeSpec, csc_partial_fraction, inv_sn, inv_sn_lattice
from hgforge.errors import GenericityError
from hgforge.flows import (
    DIFFERENCE_STEP,
    build_flow_operators,
    evolve,
    ex_ey,
    ex_matrix,
    extended_products,
    flow_equation_residual,
    jordan_block,
    jordan_determinant,
    jordan_normalizer,
    quaternion_matrices,
    tau_product,
    v_to_w_residual,
    vandermonde_residuals,
    vw_pairing_residual,
    z_matrix,
)
from hgforge.fock import (
    FermionKind,
    FermionLabel,
    WickWord,
    field_vev_elliptic,
    fermion_vector,
    field_vev_trig,
    h_space_products,
    h_space_products_trig,
    pairing,
    pairing_direct,
    quaternion_field_action,
    site_product_magnitude,
    site_products,
    wick_pfaffian_check,
    wick_recursive,
    wick_vev,
)
from hgforge.linalg import (
    UNIT_ROUNDOFF,
    condition_estimate,
    determinant,
    expm_pade,
    identity,
    inf_norm,
    invert,
    relative_residual,
    residual,
)
from hgforge.monodromy import (
    bilinear_invariance,
    build_monodromy,
    hermitian_form_trig,
    invariant_form_dimension,
    m0_inverse_closed_form,
    p_from_q_residuals,
    p_to_f0_isometry,
)
from hgforge.oracle import RationalIdentity, verify_rational_identity
from hgforge.params import (
    ExponentSet,
    PositivityColumn,
    SamplingMode,
    check_positivity_conditions,
    constructed_positivity_set,
    exponent_set_from_json,
    exponent_set_to_json,
    sample_parameters,
    swap_zero_infinity,
    validate_genericity,
    with_a2,
)
from hgforge.report import CheckKind, CheckRecord, Report
from hgforge.residue import (
    a_action_residual,
    build_residue_triple,
    check_flag_general_position,
    residue_form,
    w_inverse_closed_form,
)
from hgforge.series import (
    BasePoint,
    ConnectionReport,
    connection_report,
    fundamental_matrix,
    ghge_residual,
    hyper_pfq,
    frobenius_two_route_residual,
    mhgs_component_closed_form,
    mhgs_frobenius,
    mhgs_residual,
    wronskian_scale,
)
from hgforge.settings import Tolerances

logger = logging.getLogger(__name__)

TIME_SEPARATION = 0.02
MAX_TIME_DRAWS = 1000
FROBENIUS_ORDER = 40
ZERO_POINT = 0.3
INFINITY_POINT = 3.0
TRIG_LIMIT_LATTICE = LatticeSpec(omega1=1, omega2=40j)
ROUNDOFF_SAFETY = 100.0


@attrs.frozen
class Measurement:
    """A residual with an optional floor for the tolerance (series tail bounds)."""

    residual: float
    tol_floor: float = 0.0
    extra: Dict[str, Any] = attrs.field(factory=dict)


Outcome = Union[float, bool, Measurement]


@attrs.frozen
class TrialContext:
    m: int
    trial: int
    seed: int
    tolerances: Tolerances = attrs.field(factory=Tolerances)
    lattice: LatticeSpec = attrs.field(factory=LatticeSpec)
    accelerate: bool = True

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])

    def exponents(self, mode: SamplingMode = SamplingMode.REAL01) -> ExponentSet:
        return sample_parameters(
            self.m,
            self.seed,
            mode,
            delta_sep=self.tolerances.delta_sep,
            eps_int=self.tolerances.eps_int,
        )

    def times(self, E: ExponentSet) -> Tuple[float, float]:
        """Two distinct real times keeping every shifted denominator away from zero."""
        rng = self.rng(1)
        b, c = E.b_arr, E.c_arr
        off = ~np.eye(E.m, dtype=bool)
        for _ in range(MAX_TIME_DRAWS):
            tau1, tau2 = rng.uniform(-0.5, 0.5, size=2)
            delta = tau1 - tau2
            shifted = [
                (E.a2 + b[:, None] - c[None, :] + tau1 + tau2).ravel(),
                (b[None, :] - b[:, None])[off] + delta,
                (b[None, :] - b[:, None])[off] - delta,
                (c[None, :] - c[:, None])[off] + delta,
                (c[None, :] - c[:, None])[off] - delta,
                np.array([delta, tau1, tau2]),
            ]
            if min(np.min(np.abs(s)) for s in shifted if s.size) > TIME_SEPARATION:
                return float(tau1), float(tau2)
        raise GenericityError(f"No admissible times found in {MAX_TIME_DRAWS} draws.")


@attrs.frozen
class Check:
    id: str
    ref: str
    run: Callable[[TrialContext], Outcome]
    tol_field: Optional[str] = "residual"
    tol_scale: float = 1.0
    min_m: int = 1
    probe_from_m: Optional[int] = None
    variant: Optional[str] = None

    def kind(self, m: int) -> CheckKind:
        if self.probe_from_m is not None and m >= self.probe_from_m:
            return CheckKind.PROBE
        return CheckKind.THEOREM

    def tolerance(self, tolerances: Tolerances, override: Optional[float] = None) -> float:
        """Exact checks (no tolerance field) always have tolerance zero."""
        if self.tol_field is None:
            return 0.0
        base = override if override is not None else getattr(tolerances, self.tol_field)
        return base * self.tol_scale


def _verdict(holds: bool) -> float:
    return 0.0 if holds else 1.0


def _scaled(value: float, *objects) -> float:
    """value relative to the largest entry of the objects, never amplified."""
    return value / max([1.0] + [inf_norm(o) for o in objects])


def _roundoff_floor(m: int, *amplifications: float) -> float:
    """Tolerance floor m u times the amplification factors (each at least 1)."""
    factor = float(np.prod([max(a, 1.0) for a in amplifications]))
    return ROUNDOFF_SAFETY * m * UNIT_ROUNDOFF * factor


# params


def _params_trace(ctx: TrialContext) -> float:
    return ctx.exponents().trace_residual


def _params_genericity(ctx: TrialContext) -> bool:
    return validate_genericity(ctx.exponents(), ctx.tolerances.eps_int).ok


def _params_swap(ctx: TrialContext) -> float:
    E = ctx.exponents(SamplingMode.COMPLEX)
    swapped = swap_zero_infinity(E)
    twice = swap_zero_infinity(swapped)
    return max(
        swapped.trace_residual,
        residual(twice.b_arr, E.b_arr),
        residual(twice.c_arr, E.c_arr),
    )


def _params_json(ctx: TrialContext) -> bool:
    E = ctx.exponents(SamplingMode.COMPLEX)
    return exponent_set_from_json(exponent_set_to_json(E)) == E


def _positivity_column(ctx: TrialContext) -> PositivityColumn:
    columns = list(PositivityColumn) if ctx.m > 1 else list(PositivityColumn)[:2]
    return columns[ctx.trial % len(columns)]


def _params_positivity(ctx: TrialContext) -> bool:
    column = _positivity_column(ctx)
    E = constructed_positivity_set(ctx.m, column, seed=ctx.seed)
    return check_positivity_conditions(E) is column


# identities


def _identity_check(identity: RationalIdentity, corrupt: bool = False) -> Callable:
    def run(ctx: TrialContext) -> bool:
        holds = verify_rational_identity(
            identity, ctx.m, trials=ctx.tolerances.oracle_points, seed=ctx.seed, corrupt=corrupt
        )
        return holds != corrupt

    return run


# residue


def _residue_sum(ctx: TrialContext) -> float:
    T = build_residue_triple(ctx.exponents())
    return _scaled(residual(T.A + T.B + T.C, 0), T.A, T.B, T.C)


def _residue_eigenvectors(ctx: TrialContext) -> float:
    E = ctx.exponents()
    T = build_residue_triple(E)
    return max(
        relative_residual(T.B @ T.V, T.V * E.b_arr[None, :]),
        relative_residual(T.C @ T.W, T.W * -E.c_arr[None, :]),
        relative_residual(T.A @ T.u, E.a1 * T.u),
    )


def _residue_w_inverse(ctx: TrialContext) -> float:
    E = ctx.exponents()
    T = build_residue_triple(E)
    return relative_residual(w_inverse_closed_form(E) @ T.W, identity(E.m))


def _residue_gram(ctx: TrialContext) -> float:
    form = residue_form(ctx.exponents())
    return _scaled(form.w_diagonality_residual, form.gram_w, np.diag(form.mu2))


def _residue_flags(ctx: TrialContext) -> bool:
    return check_flag_general_position(build_residue_triple(ctx.exponents()))


def _residue_a_action(ctx: TrialContext) -> float:
    E = ctx.exponents()
    return _scaled(a_action_residual(E, seed=ctx.seed), residue_form(E).gram)


# flows


def _flows_group(ctx: TrialContext) -> float:
    E = ctx.exponents()
    tau1, tau2 = ctx.times(E)
    EX1, EY1 = ex_ey(E, tau1)
    EX2, EY2 = ex_ey(E, tau2)
    EX12, EY12 = ex_ey(E, tau1 + tau2)
    return max(relative_residual(EX1 @ EX2, EX12), relative_residual(EY1 @ EY2, EY12))


def _flows_exponential(ctx: TrialContext) -> float:
    E = ctx.exponents()
    tau, _ = ctx.times(E)
    operators = build_flow_operators(E)
    EX, EY = ex_ey(E, tau)
    return max(
        relative_residual(EX, expm_pade(operators.X * tau)),
        relative_residual(EY, expm_pade(operators.Y * tau)),
    )


def _flows_z_matrix(ctx: TrialContext) -> float:
    E = ctx.exponents()
    tau, _ = ctx.times(E)
    Z, Z_inv = z_matrix(E, tau)
    return relative_residual(Z @ Z_inv, identity(E.m))


def _flows_equations(ctx: TrialContext) -> Measurement:
    E = ctx.exponents()
    tau1, tau2 = ctx.times(E)
    B = build_residue_triple(E).B
    state = evolve(E, tau1, tau2)
    conditioning = condition_estimate(state.V) * condition_estimate(state.W)
    size = max(inf_norm(state.B), inf_norm(state.C), 1.0)
    S = max(inf_norm(build_flow_operators(E).S), 1.0)
    h = DIFFERENCE_STEP
    # rounding in the difference quotient plus its h^2 truncation
    floor = _roundoff_floor(E.m, conditioning, size) / h + h**2 * S**3 * size * conditioning
    return Measurement(
        residual=_scaled(max(flow_equation_residual(E, tau1, tau2, h)), B),
        tol_floor=_scaled(floor, B),
        extra={"condition": conditioning},
    )


def _flows_tau_product(ctx: TrialContext) -> float:
    E = ctx.exponents()
    tau1, tau2 = ctx.times(E)
    P = tau_product(E, tau1, tau2)
    scale = max(inf_norm(P.w_gram), inf_norm(P.v_basis), inf_norm(P.w_basis), 1.0)
    return (
        max(P.w_diagonality_residual, v_to_w_residual(E, P), vw_pairing_residual(E, P))
        / scale
    )


def _flows_extended(ctx: TrialContext) -> float:
    E = ctx.exponents()
    tau1, tau2 = ctx.times(E)
    worst = 0.0
    for form in extended_products(E, tau1, tau2):
        scale = max(inf_norm(form.second_diagonal), inf_norm(form.first_basis), 1.0)
        worst = max(worst, form.second_basis_residual / scale, form.transition_residual / scale)
    return worst


def _flows_jordan(ctx: TrialContext) -> float:
    E = ctx.exponents()
    tau, _ = ctx.times(E)
    G = jordan_normalizer(E, tau)
    EX, _ = ex_ey(E, tau)
    conjugated = G @ EX @ invert(G)
    expected_det = jordan_determinant(E, tau)
    return max(
        relative_residual(conjugated, jordan_block(E.m)),
        abs(determinant(G) - expected_det) / max(abs(expected_det), 1.0),
    )


def _flows_vandermonde(ctx: TrialContext) -> float:
    E = ctx.exponents()
    tau, _ = ctx.times(E)
    return max(vandermonde_residuals(E, tau))


def _flows_quaternions(ctx: TrialContext) -> Measurement:
    E = ctx.exponents()
    tau1, tau2 = ctx.times(E)
    action = quaternion_matrices(E, tau1, tau2)
    scale = max(inf_norm(action.gram), 1.0)
    signs = tuple(sign for sign, _ in action.form_factors())
    worst = max(res for _, res in action.form_factors()) / scale
    if signs != (-1, 1, -1):
        worst = max(worst, 1.0)
    return Measurement(
        residual=max(action.relation_residual(), worst), extra={"signs": list(signs)}
    )


def _flows_translation(ctx: TrialContext) -> float:
    """Integer times are the ones entering the Frobenius closed forms."""
    E = ctx.exponents()
    return relative_residual(ex_matrix(E.b_arr, 1) @ ex_matrix(E.b_arr, -1), identity(E.m))


# cauchy


def _cauchy_kind(ctx: TrialContext, E: ExponentSet, variant: str):
    if variant == "rational":
        return Rational(sum(ctx.times(E)))
    if variant == "trig":
        return Trigonometric()
    return Elliptic(ctx.lattice)


def _cauchy_inverse(variant: str) -> Callable:
    def run(ctx: TrialContext) -> float:
        E = ctx.exponents()
        return inverse_residual(E, _cauchy_kind(ctx, E, variant))

    return run


def _cauchy_determinant(variant: str) -> Callable:
    def run(ctx: TrialContext) -> float:
        E = ctx.exponents()
        kind = _cauchy_kind(ctx, E, variant)
        expected = cauchy_determinant(E, kind)
        return abs(determinant(cauchy_matrix(kind, E)) - expected) / max(abs(expected), 1.0)

    return run


def _cauchy_ndm(variant: str) -> Callable:
    def run(ctx: TrialContext) -> float:
        E = ctx.exponents()
        return ndm_orthogonality(E, _cauchy_kind(ctx, E, variant))

    return run


def _cauchy_trig_limit(ctx: TrialContext) -> float:
    return inverse_residual(ctx.exponents(), Elliptic(TRIG_LIMIT_LATTICE))


def _cauchy_swap(ctx: TrialContext) -> float:
    E = ctx.exponents()
    swapped = swap_zero_infinity(E)
    return max(
        relative_residual(cauchy_matrix(kind, swapped), cauchy_matrix(kind, E).T)
        for kind in (Rational(), Trigonometric())
    )


# elliptic


def _elliptic_point(ctx: TrialContext) -> complex:
    rng = ctx.rng(3)
    L = ctx.lattice
    return complex(rng.uniform(0.15, 0.85) * L.omega1 + rng.uniform(-0.3, 0.3) * L.omega2)


def _elliptic_lattice_sum(ctx: TrialContext) -> Measurement:
    z = _elliptic_point(ctx)
    direct = inv_sn(z, ctx.lattice)
    lattice = inv_sn_lattice(z, ctx.lattice, accelerate=ctx.accelerate)
    return Measurement(
        residual=abs(direct.value - lattice.value),
        tol_floor=direct.tail_bound + lattice.tail_bound,
        extra={"z": [z.real, z.imag]},
    )


def _elliptic_periods(ctx: TrialContext) -> float:
    z = _elliptic_point(ctx)
    L = ctx.lattice
    value = inv_sn(z, L).value
    return max(
        abs(inv_sn(z + L.omega1, L).value + value),
        abs(inv_sn(z + L.omega2, L).value - value),
        abs(inv_sn(-z, L).value + value),
    ) / max(abs(value), 1.0)


def _elliptic_trig_limit(ctx: TrialContext) -> float:
    x = ctx.rng(3).uniform(0.1, 0.9)
    expected = np.pi / np.sin(np.pi * x)
    return abs(inv_sn(x, TRIG_LIMIT_LATTICE).value - expected) / abs(expected)


def _elliptic_csc(ctx: TrialContext) -> float:
    x = ctx.rng(3).uniform(0.1, 0.9)
    expected = np.pi / np.sin(np.pi * x)
    return abs(csc_partial_fraction(x, accelerate=ctx.accelerate) - expected) / abs(expected)


# series


def _series_exponents(ctx: TrialContext) -> ExponentSet:
    return with_a2(ctx.exponents(), 0)


def _series_pfq(ctx: TrialContext) -> float:
    E = ctx.exponents()
    a, b = E.b[0].real, E.c[0].real - 0.5
    c = E.a2.real + 1.25
    z = ctx.rng(4).uniform(-0.9, 0.9)
    expected = scipy.special.hyp2f1(a, b, c, z)
    return abs(hyper_pfq([a, b], [c], z).value - expected) / max(abs(expected), 1.0)


def _series_ghge(point: BasePoint) -> Callable:
    z = ZERO_POINT if point is BasePoint.ZERO else INFINITY_POINT

    def run(ctx: TrialContext) -> float:
        E = _series_exponents(ctx)
        return max(ghge_residual(E, point, j, z) for j in range(E.m))

    return run


def _series_frobenius(point: BasePoint) -> Callable:
    def run(ctx: TrialContext) -> float:
        E = _series_exponents(ctx)
        return max(
            frobenius_two_route_residual(E, point, i, FROBENIUS_ORDER) for i in range(E.m)
        )

    return run


def _series_mhgs(point: BasePoint) -> Callable:
    z = ZERO_POINT if point is BasePoint.ZERO else INFINITY_POINT

    def run(ctx: TrialContext) -> float:
        E = _series_exponents(ctx)
        return max(mhgs_residual(E, mhgs_frobenius(E, point, i), z) for i in range(E.m))

    return run


def _series_components(ctx: TrialContext) -> float:
    E = _series_exponents(ctx)
    worst = 0.0
    for point, z in ((BasePoint.ZERO, ZERO_POINT), (BasePoint.INFINITY, INFINITY_POINT)):
        F = fundamental_matrix(E, point, z)
        closed = np.array(
            [
                [mhgs_component_closed_form(E, point, i, j, z) for i in range(E.m)]
                for j in range(E.m)
            ]
        )
        worst = max(worst, relative_residual(F, closed))
    return worst


def _series_wronskian(ctx: TrialContext) -> float:
    """det F0 = const z^(sum b) (1 - z)^(tr A)."""
    E = _series_exponents(ctx)
    trace_a = np.trace(build_residue_triple(E).A)
    z1, z2 = ZERO_POINT, ZERO_POINT / 2
    ratio = wronskian_scale(E, z1)[0] / wronskian_scale(E, z2)[0]
    expected = (z1 / z2) ** np.sum(E.b_arr) * ((1 - z1) / (1 - z2)) ** trace_a
    return abs(ratio - expected) / abs(expected)


@lru_cache(maxsize=16)
def _connection(E: ExponentSet) -> ConnectionReport:
    return connection_report(E)


def _series_connection(field: str) -> Callable:
    def run(ctx: TrialContext) -> Measurement:
        report = _connection(_series_exponents(ctx))
        fitted = report.fitted_constant
        return Measurement(
            residual=getattr(report, field), extra={"fitted_constant": [fitted.real, fitted.imag]}
        )

    return run


# monodromy


def _monodromy_product(ctx: TrialContext) -> float:
    return build_monodromy(ctx.exponents()).product_residual


def _monodromy_eigen(ctx: TrialContext) -> float:
    triple = build_monodromy(ctx.exponents())
    return max(*triple.eigen_residuals(), triple.normalization_residual)


def _monodromy_rank_one(ctx: TrialContext) -> float:
    return abs(build_monodromy(ctx.exponents()).m1_rank_defect - 1)


def _monodromy_m0_inverse(ctx: TrialContext) -> float:
    E = ctx.exponents()
    return relative_residual(m0_inverse_closed_form(E) @ build_monodromy(E).M0, identity(E.m))


def _monodromy_hermitian(ctx: TrialContext) -> float:
    E = ctx.exponents()
    triple = build_monodromy(E)
    form = hermitian_form_trig(E, triple)
    return max(*form.invariance_residuals(triple), form.q_diagonality_residual(triple))


def _monodromy_dimension(ctx: TrialContext) -> float:
    return abs(invariant_form_dimension(build_monodromy(ctx.exponents())) - 1)


def _monodromy_definiteness(ctx: TrialContext) -> Measurement:
    column = _positivity_column(ctx)
    E = constructed_positivity_set(ctx.m, column, seed=ctx.seed)
    signature = hermitian_form_trig(E).signature
    expected = column is not PositivityColumn.NEITHER
    return Measurement(
        residual=_verdict(signature.definite == expected),
        extra={
            "column": column.value,
            "signature": [signature.n_plus, signature.n_minus, signature.n_zero],
        },
    )


def _monodromy_bilinear(ctx: TrialContext) -> Measurement:
    E = ctx.exponents(SamplingMode.COMPLEX)
    invariance = bilinear_invariance(E)
    return Measurement(
        residual=max(*invariance.residuals, invariance.q_residual),
        tol_floor=_roundoff_floor(E.m, invariance.error_scale),
        extra={"error_scale": invariance.error_scale},
    )


def _monodromy_p_from_q(ctx: TrialContext) -> float:
    return max(p_from_q_residuals(ctx.exponents()))


def _monodromy_isometry(ctx: TrialContext) -> float:
    report = p_to_f0_isometry(ctx.exponents())
    return max(report.form_residual, report.q_image_residual)


# fock


def _random_site(ctx: TrialContext, stream: int) -> Tuple[int, int]:
    n1, n2 = ctx.rng(stream).integers(-2, 3, size=2)
    return int(n1), int(n2)


def _fock_pairing_table(ctx: TrialContext) -> Measurement:
    E = ctx.exponents()
    site = _random_site(ctx, 5)
    products = site_products(E, site, ctx.lattice)
    conditioning = condition_estimate(products.forward.v_basis) * condition_estimate(
        products.backward.v_basis
    )
    worst, floor = 0.0, 0.0
    labels = [FermionLabel(kind, i, site) for kind in FermionKind for i in range(E.m)]
    for a, b in product(labels, repeat=2):
        table = pairing(a, b, E, ctx.lattice)
        direct = pairing_direct(a, b, E, ctx.lattice)
        scale = max(abs(table), 1.0)
        worst = max(worst, abs(table - direct) / scale)
        g, h = fermion_vector(a, E, ctx.lattice), fermion_vector(b, E, ctx.lattice)
        magnitude = site_product_magnitude(g, h, E, site, ctx.lattice) / scale
        floor = max(floor, _roundoff_floor(2 * E.m, conditioning, magnitude))
    return Measurement(residual=worst, tol_floor=floor, extra={"condition": conditioning})


def _random_word(ctx: TrialContext, length: int) -> WickWord:
    rng = ctx.rng(6)
    kinds = list(FermionKind)
    sites = [_random_site(ctx, 7), (0, 0)]
    return WickWord(
        FermionLabel(
            kinds[rng.integers(len(kinds))],
            int(rng.integers(ctx.m)),
            sites[rng.integers(len(sites))],
        )
        for _ in range(length)
    )


def _fock_wick(ctx: TrialContext) -> float:
    E = ctx.exponents()
    word = _random_word(ctx, 6)
    expected = wick_vev(word, E, ctx.lattice)
    return abs(wick_recursive(word, E, ctx.lattice) - expected) / max(abs(expected), 1.0)


def _fock_pfaffian(ctx: TrialContext) -> float:
    return wick_pfaffian_check(_random_word(ctx, 4), ctx.exponents(), ctx.lattice)


def _fock_vev_elliptic(ctx: TrialContext) -> Measurement:
    E = ctx.exponents()
    worst, bound = 0.0, 0.0
    for i, j in product(range(E.m), repeat=2):
        vev = field_vev_elliptic(i, j, E, ctx.lattice, accelerate=ctx.accelerate)
        expected = inv_sn(E.a2 + E.b[i] - E.c[j], ctx.lattice)
        worst = max(worst, abs(vev.value - expected.value))
        bound = max(bound, vev.tail_bound + expected.tail_bound)
    return Measurement(residual=worst, tol_floor=bound)


def _fock_vev_trig(ctx: TrialContext) -> float:
    E = ctx.exponents()
    worst = 0.0
    for i, j in product(range(E.m), repeat=2):
        x = E.a2 + E.b_arr[i] - E.c_arr[j]
        expected = np.pi / np.sin(np.pi * x)
        worst = max(worst, abs(field_vev_trig(i, j, E) - expected) / max(abs(expected), 1.0))
    return worst


def _fock_h_space(lattice: Optional[LatticeSpec] = None) -> Callable:
    def run(ctx: TrialContext) -> float:
        forms = h_space_products(ctx.exponents(), lattice or ctx.lattice)
        return max(form.dual_residual for form in forms)

    return run


def _fock_h_space_trig(ctx: TrialContext) -> float:
    return max(form.dual_residual for form in h_space_products_trig(ctx.exponents()))


def _fock_quaternion_action(ctx: TrialContext) -> float:
    report = quaternion_field_action(ctx.exponents(), ctx.lattice, seed=ctx.seed)
    return max(report.relation_residual, report.site_residual)


# cm


def _cm_subvariety(ctx: TrialContext) -> float:
    E = ctx.exponents()
    quadruples = (mhgs_quadruple(E), mhgs_quadruple(E, residue_basis=True))
    return max(_scaled(subvariety_residual(q), q.B, q.X) for q in quadruples)


def _random_gl(ctx: TrialContext) -> np.ndarray:
    rng = ctx.rng(8)
    return identity(ctx.m) + 0.3 * (
        rng.standard_normal((ctx.m, ctx.m)) + 1j * rng.standard_normal((ctx.m, ctx.m))
    )


def _cm_normal_form(ctx: TrialContext) -> float:
    E = ctx.exponents()
    q = mhgs_quadruple(E)
    normal = cm_normal_form(gl_action(_random_gl(ctx), q))
    positions, momenta = np.diag(normal.B), np.diag(normal.X)
    return max(
        relative_residual(positions, E.b_arr),
        relative_residual(momenta, np.diag(q.X)),
        relative_residual(normal_form_matrix(positions, momenta), normal.X),
    )


def _cm_flows(ctx: TrialContext) -> float:
    q = mhgs_quadruple(ctx.exponents())
    invariants = trace_invariants(q)
    t = ctx.rng(9).uniform(-0.5, 0.5)
    worst = 0.0
    for k in range(1, ctx.m + 1):
        moved = cm_flow(q, k, t)
        worst = max(
            worst,
            _scaled(subvariety_residual(moved), moved.B, moved.X),
            relative_residual(trace_invariants(moved), invariants),
        )
    return worst


def _cm_hamiltonian(ctx: TrialContext) -> float:
    E = ctx.exponents()
    normal = cm_normal_form(gl_action(_random_gl(ctx), mhgs_quadruple(E)))
    check = hamiltonian_h2(normal.X, np.diag(normal.B), np.diag(normal.X))
    return check.residual / max(abs(check.half_trace), 1.0)


def _cm_link(ctx: TrialContext) -> bool:
    return mhgs_link_check(ctx.exponents())


def _identity_checks() -> Tuple[Check, ...]:
    checks = [
        Check(
            f"identities.{identity.value.lower()}",
            identity.description,
            _identity_check(identity),
            tol_field=None,
            min_m=identity.min_m,
        )
        for identity in RationalIdentity
    ]
    canary = Check(
        "identities.canary",
        "corrupted Cauchy inverse must fail",
        _identity_check(RationalIdentity.CAUCHY_INV, corrupt=True),
        tol_field=None,
    )
    return tuple(checks) + (canary,)


def _cauchy_checks() -> Tuple[Check, ...]:
    checks = []
    names = {"rational": "rational", "trig": "trigonometric", "elliptic": "elliptic"}
    for variant, name in names.items():
        elliptic = variant == "elliptic"
        options = dict(
            tol_field="elliptic" if elliptic else "residual",
            probe_from_m=2 if elliptic else None,
            variant=variant,
        )
        checks += [
            Check(
                f"cauchy.inverse.{variant}",
                f"{name} Cauchy inverse",
                _cauchy_inverse(variant),
                tol_scale=1 if elliptic else 100,
                **options,
            ),
            Check(
                f"cauchy.det.{variant}",
                f"{name} Cauchy determinant",
                _cauchy_determinant(variant),
                **options,
            ),
            Check(
                f"cauchy.ndm.{variant}",
                f"{name} N D M is orthogonal",
                _cauchy_ndm(variant),
                tol_scale=1 if elliptic else 100,
                **options,
            ),
        ]
    checks += [
        Check(
            "cauchy.trig-limit",
            "elliptic Cauchy inverse as Im omega2 grows",
            _cauchy_trig_limit,
            tol_field="elliptic",
            variant="elliptic",
        ),
        Check("cauchy.swap", "swapping 0 and infinity transposes D", _cauchy_swap),
    ]
    return tuple(checks)


SUITES: Dict[str, Tuple[Check, ...]] = {
    "params": (
        Check("params.trace", "trace condition", _params_trace),
        Check(
            "params.genericity",
            "genericity of sampled exponents",
            _params_genericity,
            tol_field=None,
        ),
        Check("params.swap", "zero-infinity swap is an involution", _params_swap),
        Check("params.json", "parameter file encoding", _params_json, tol_field=None),
        Check(
            "params.positivity",
            "constructed positivity chains",
            _params_positivity,
            tol_field=None,
        ),
    ),
    "identities": _identity_checks(),
    "residue": (
        Check("residue.sum", "A + B + C = 0", _residue_sum),
        Check("residue.eigenvectors", "eigenvectors of A, B and C", _residue_eigenvectors),
        Check("residue.w-inverse", "closed-form inverse of W", _residue_w_inverse),
        Check("residue.gram", "residue form diagonal in both bases", _residue_gram),
        Check(
            "residue.flags",
            "spectral flags in general position",
            _residue_flags,
            tol_field=None,
        ),
        Check(
            "residue.a-action",
            "A acts as a2 minus a rank one reflection",
            _residue_a_action,
        ),
    ),
    "flows": (
        Check("flows.group", "EX and EY are one-parameter groups", _flows_group),
        Check(
            "flows.exponential",
            "EX(t) = exp(X t), EY(t) = exp(Y t)",
            _flows_exponential,
        ),
        Check("flows.translation", "EX(1) EX(-1) = Id", _flows_translation),
        Check("flows.z-matrix", "closed-form inverse of Z(t)", _flows_z_matrix),
        Check(
            "flows.equations",
            "conjugation flow equations",
            _flows_equations,
            tol_scale=1e3,
        ),
        Check(
            "flows.tau-product",
            "tau-products and the v-w transition",
            _flows_tau_product,
        ),
        Check("flows.extended", "extended (+) and (-) products", _flows_extended),
        Check(
            "flows.jordan",
            "Jordan normal form of EX(t)",
            _flows_jordan,
            tol_scale=10,
        ),
        Check(
            "flows.vandermonde",
            "EX and EY through Vandermonde matrices",
            _flows_vandermonde,
            tol_scale=10,
        ),
        Check(
            "flows.quaternions",
            "quaternion action on paired tau-products",
            _flows_quaternions,
        ),
    ),
    "cauchy": _cauchy_checks(),
    "elliptic": (
        Check(
            "elliptic.lattice-sum",
            "cosecant series against the lattice sum",
            _elliptic_lattice_sum,
            tol_field="elliptic",
        ),
        Check(
            "elliptic.periods",
            "antiperiod omega1, period omega2, odd",
            _elliptic_periods,
            tol_field="elliptic",
        ),
        Check(
            "elliptic.trig-limit",
            "1/sn tends to pi/sin(pi z)",
            _elliptic_trig_limit,
            tol_field="elliptic",
        ),
        Check(
            "elliptic.csc",
            "partial fractions of pi/sin(pi z)",
            _elliptic_csc,
            tol_field="elliptic",
        ),
    ),
    "series": (
        Check("series.pfq", "pFq against the Gauss function", _series_pfq, tol_scale=10),
        Check(
            "series.ghge.zero",
            "local GHGE solutions at 0",
            _series_ghge(BasePoint.ZERO),
            tol_scale=1e3,
        ),
        Check(
            "series.ghge.infinity",
            "local GHGE solutions at infinity",
            _series_ghge(BasePoint.INFINITY),
            tol_scale=1e3,
        ),
        Check(
            "series.frobenius.zero",
            "Frobenius coefficients at 0, two routes",
            _series_frobenius(BasePoint.ZERO),
        ),
        Check(
            "series.frobenius.infinity",
            "Frobenius coefficients at infinity, two routes",
            _series_frobenius(BasePoint.INFINITY),
        ),
        Check(
            "series.mhgs.zero",
            "Frobenius solutions solve the system at 0",
            _series_mhgs(BasePoint.ZERO),
            tol_scale=10,
        ),
        Check(
            "series.mhgs.infinity",
            "Frobenius solutions solve the system at infinity",
            _series_mhgs(BasePoint.INFINITY),
            tol_scale=10,
        ),
        Check(
            "series.components",
            "solution components as single mFm-1",
            _series_components,
            tol_scale=10,
        ),
        Check("series.wronskian", "Wronskian of the 0-basis", _series_wronskian, tol_scale=10),
        Check(
            "series.connection.endpoint",
            "continued basis independent of the end point",
            _series_connection("endpoint_residual"),
            tol_scale=100,
        ),
        Check(
            "series.connection.rank-one",
            "connection matrix times sines has rank one",
            _series_connection("rank_one_residual"),
            tol_scale=100,
            min_m=2,
        ),
        Check(
            "series.connection.gamma",
            "connection matrix against the Gamma formula",
            _series_connection("gamma_quotient_residual"),
            tol_scale=100,
            probe_from_m=1,
        ),
    ),
    "monodromy": (
        Check("monodromy.product", "Minf M1 M0 = Id", _monodromy_product),
        Check(
            "monodromy.eigenvectors",
            "eigenvectors p, q, r and their normalization",
            _monodromy_eigen,
        ),
        Check(
            "monodromy.rank-one",
            "M1 is a rank one deviation from a scalar",
            _monodromy_rank_one,
            tol_field=None,
        ),
        Check("monodromy.m0-inverse", "closed-form inverse of M0", _monodromy_m0_inverse),
        Check("monodromy.hermitian", "invariant hermitian form", _monodromy_hermitian),
        Check(
            "monodromy.form-dimension",
            "invariant hermitian form is unique",
            _monodromy_dimension,
            tol_field=None,
        ),
        Check(
            "monodromy.definiteness",
            "definiteness against positivity chains",
            _monodromy_definiteness,
            tol_field=None,
        ),
        Check(
            "monodromy.bilinear",
            "bilinear invariance for complex exponents",
            _monodromy_bilinear,
        ),
        Check("monodromy.p-from-q", "p in terms of q", _monodromy_p_from_q),
        Check(
            "monodromy.isometry",
            "solutions against the trigonometric fermions",
            _monodromy_isometry,
        ),
    ),
    "fock": (
        Check("fock.pairing", "pairing table against fermion vectors", _fock_pairing_table),
        Check("fock.wick", "Wick rule, matchings against expansion", _fock_wick),
        Check("fock.pfaffian", "Pfaffian squared equals the determinant", _fock_pfaffian),
        Check(
            "fock.vev.elliptic",
            "field VEV equals 1/sn",
            _fock_vev_elliptic,
            tol_field="elliptic",
            tol_scale=100,
        ),
        Check(
            "fock.vev.trig",
            "trigonometric field VEV",
            _fock_vev_trig,
            tol_field="elliptic",
            tol_scale=100,
        ),
        Check(
            "fock.h-space.elliptic",
            "elliptic forms on the field spaces",
            _fock_h_space(),
            tol_field="elliptic",
            probe_from_m=2,
        ),
        Check(
            "fock.h-space.trig-limit",
            "elliptic forms on the field spaces as Im omega2 grows",
            _fock_h_space(TRIG_LIMIT_LATTICE),
            tol_field="elliptic",
        ),
        Check(
            "fock.h-space.trig",
            "trigonometric forms on the field spaces",
            _fock_h_space_trig,
            tol_field="elliptic",
        ),
        Check(
            "fock.quaternions",
            "quaternion action site-wise and field-wise",
            _fock_quaternion_action,
        ),
    ),
    "cm": (
        Check("cm.subvariety", "hypergeometric quadruple on the subvariety", _cm_subvariety),
        Check(
            "cm.normal-form",
            "normal form recovers positions and momenta",
            _cm_normal_form,
            tol_scale=10,
        ),
        Check(
            "cm.flows",
            "Calogero-Moser flows preserve the subvariety",
            _cm_flows,
            tol_scale=10,
        ),
        Check("cm.hamiltonian", "-H2 = 1/2 tr X^2", _cm_hamiltonian, tol_scale=10),
        Check("cm.link", "[X, diag(b)] = e e^T - Id", _cm_link, tol_field=None),
    ),
}

SUITE_NAMES = tuple(SUITES) + ("all",)
CAUCHY_KINDS = ("rational", "trig", "elliptic")


def _known_suite(instance, attribute: attrs.Attribute, value: str) -> None:
    if value not in SUITE_NAMES:
        raise ValueError(f"suite: Expected one of {', '.join(SUITE_NAMES)}, got {value!r}.")


def _known_kind(instance, attribute: attrs.Attribute, value: Optional[str]) -> None:
    if value is not None and value not in CAUCHY_KINDS:
        raise ValueError(f"kind: Expected one of {', '.join(CAUCHY_KINDS)}, got {value!r}.")


def _at_least(minimum: int) -> Callable:
    def validate(instance, attribute: attrs.Attribute, value: int) -> None:
        if value < minimum:
            raise ValueError(f"{attribute.name}: Must be at least {minimum}, got {value}.")

    return validate


@attrs.frozen
class SuiteConfig:
    suite: str = attrs.field(validator=_known_suite)
    m: int = attrs.field(default=3, validator=_at_least(1))
    trials: int = attrs.field(default=5, validator=_at_least(1))
    seed: int = attrs.field(default=0, validator=_at_least(0))
    tolerances: Tolerances = attrs.field(factory=Tolerances)
    lattice: LatticeSpec = attrs.field(factory=LatticeSpec)
    tol: Optional[float] = None
    kind: Optional[str] = attrs.field(default=None, validator=_known_kind)
    accelerate: bool = True
    threads: int = attrs.field(default=1, validator=_at_least(1))

    def echo(self) -> Dict[str, Any]:
        """The effective configuration as plain JSON data."""
        return {
            "suite": self.suite,
            "m": self.m,
            "trials": self.trials,
            "seed": self.seed,
            "tol": self.tol,
            "kind": self.kind,
            "accelerate": self.accelerate,
            "threads": self.threads,
            "tolerances": attrs.asdict(self.tolerances),
            "lattice": {
                "omega1": [self.lattice.omega1.real, self.lattice.omega1.imag],
                "omega2": [self.lattice.omega2.real, self.lattice.omega2.imag],
                "n1": self.lattice.n1,
                "tail": self.lattice.tail,
            },
        }


def trial_seeds(seed: int, trials: int) -> List[int]:
    """Independent child seeds, one per trial."""
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(child.generate_state(1)[0]) for child in children]


def selected_checks(cfg: SuiteConfig) -> List[Check]:
    names = list(SUITES) if cfg.suite == "all" else [cfg.suite]
    checks: Iterable[Check] = (check for name in names for check in SUITES[name])
    return [
        check
        for check in checks
        if cfg.m >= check.min_m
        and (cfg.kind is None or check.variant is None or check.variant == cfg.kind)
    ]


def run_check(check: Check, ctx: TrialContext, override: Optional[float] = None) -> CheckRecord:
    """Run one check; exceptions end up in the record, never propagate."""
    tol = check.tolerance(ctx.tolerances, override)
    base = dict(id=check.id, ref=check.ref, m=ctx.m, trial=ctx.trial, kind=check.kind(ctx.m))
    try:
        outcome = check.run(ctx)
    except Exception as err:
        logger.warning("%s (trial %d) raised %s: %s", check.id, ctx.trial, type(err).__name__, err)
        return CheckRecord(residual=None, tol=tol, error=f"{type(err).__name__}: {err}", **base)
    if isinstance(outcome, (bool, np.bool_)):
        outcome = Measurement(residual=_verdict(outcome))
    elif not isinstance(outcome, Measurement):
        outcome = Measurement(residual=float(outcome))
    record = CheckRecord(
        residual=outcome.residual,
        tol=max(tol, outcome.tol_floor),
        extra=outcome.extra,
        **base,
    )
    if record.residual is None:
        record = attrs.evolve(record, error="non-finite residual")
    if not record.passed and record.kind is CheckKind.PROBE:
        logger.warning("Probe %s residual %s exceeds %.3g.", check.id, record.residual, record.tol)
    return record


def run_suite(cfg: SuiteConfig) -> Report:
    checks = selected_checks(cfg)
    contexts = [
        TrialContext(
            m=cfg.m,
            trial=trial,
            seed=seed,
            tolerances=cfg.tolerances,
            lattice=cfg.lattice,
            accelerate=cfg.accelerate,
        )
        for trial, seed in enumerate(trial_seeds(cfg.seed, cfg.trials))
    ]
    tasks = [(check, ctx) for check in checks for ctx in contexts]
    logger.info(
        "Running %d checks x %d trials of suite %s on %d threads.",
        len(checks),
        len(contexts),
        cfg.suite,
        cfg.threads,
    )
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        records = list(pool.map(lambda task: run_check(*task, override=cfg.tol), tasks))
    records.sort(key=lambda r: (r.id, r.trial))
    return Report(config=cfg.echo(), checks=records)
