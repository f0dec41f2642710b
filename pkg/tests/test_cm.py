import numpy as np
import pytest

from hgforge.cm import (
    CMQuadruple,
    cm_flow,
    cm_normal_form,
    gl_action,
    hamiltonian_h2,
    mhgs_link_check,
    mhgs_quadruple,
    normal_form_coordinates,
    normal_form_matrix,
    subvariety_residual,
    trace_invariants,
)
from hgforge.errors import GenericityError
from hgforge.linalg import identity, relative_residual


def _random_gl(m, seed=0):
    rng = np.random.default_rng(seed)
    return identity(m) + 0.3 * (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))


@pytest.mark.parametrize("residue_basis", [False, True])
def test_quadruple_lies_on_the_subvariety(residue_basis, exponents):
    q = mhgs_quadruple(exponents, residue_basis=residue_basis)
    scale = max(1.0, np.max(np.abs(q.B)), np.max(np.abs(q.X)))
    assert subvariety_residual(q) < 1e-9 * scale


def test_link_with_flow_operators(exponents):
    assert mhgs_link_check(exponents) is True


def test_link_rejects_other_matrices(exponents_multi):
    assert mhgs_link_check(exponents_multi, X=np.eye(exponents_multi.m)) is False


def test_gl_action_preserves_the_subvariety(exponents):
    q = gl_action(_random_gl(exponents.m), mhgs_quadruple(exponents))
    scale = max(1.0, np.max(np.abs(q.B)), np.max(np.abs(q.X)))
    assert subvariety_residual(q) < 1e-8 * scale


def test_normal_form_recovers_positions_and_momenta(exponents):
    E = exponents
    q = mhgs_quadruple(E)
    positions, momenta = normal_form_coordinates(gl_action(_random_gl(E.m, seed=4), q))
    assert relative_residual(positions, E.b_arr) < 1e-8
    assert relative_residual(momenta, np.diag(q.X)) < 1e-8
    normal = cm_normal_form(gl_action(_random_gl(E.m, seed=4), q))
    assert relative_residual(normal_form_matrix(positions, momenta), normal.X) < 1e-8
    assert np.allclose(normal.v, 1)
    assert np.allclose(normal.w, 1)


def test_normal_form_needs_distinct_eigenvalues():
    q = CMQuadruple(B=np.eye(2) * 0.5, X=np.zeros((2, 2)), v=[1, 1], w=[1, 1])
    with pytest.raises(GenericityError):
        cm_normal_form(q)


def test_normal_form_matrix():
    X = normal_form_matrix([0.0, 1.0], [0.2, -0.3])
    assert np.allclose(X, [[0.2, -1.0], [1.0, -0.3]])


@pytest.mark.parametrize("t", [0.3, -0.45])
def test_flows_preserve_subvariety_and_invariants(t, exponents):
    q = mhgs_quadruple(exponents)
    invariants = trace_invariants(q)
    for k in range(1, exponents.m + 1):
        moved = cm_flow(q, k, t)
        scale = max(1.0, np.max(np.abs(moved.B)), np.max(np.abs(moved.X)))
        assert subvariety_residual(moved) < 1e-8 * scale
        assert relative_residual(trace_invariants(moved), invariants) < 1e-12


def test_first_flow_translates(exponents):
    q = mhgs_quadruple(exponents)
    moved = cm_flow(q, 1, 0.25)
    assert np.allclose(moved.B, q.B + 0.25 * identity(exponents.m))
    assert np.array_equal(moved.X, q.X)


def test_flow_index_must_be_positive(exponents):
    with pytest.raises(ValueError) as excinfo:
        cm_flow(mhgs_quadruple(exponents), 0, 0.1)
    assert "positive integer" in str(excinfo.value)


def test_hamiltonian_two_particles():
    """1/2 (p1^2 + p2^2) - 1/(x1 - x2)^2 with x = (0, 1)."""
    X = normal_form_matrix([0.0, 1.0], [0.2, -0.3])
    check = hamiltonian_h2(X, [0.0, 1.0], [0.2, -0.3])
    assert check.value == pytest.approx((0.04 + 0.09) / 2 - 1)
    assert check.residual < 1e-14


def test_hamiltonian_in_normal_form(exponents):
    normal = cm_normal_form(gl_action(_random_gl(exponents.m, seed=2), mhgs_quadruple(exponents)))
    check = hamiltonian_h2(normal.X, np.diag(normal.B), np.diag(normal.X))
    assert check.residual < 1e-8 * max(abs(check.half_trace), 1.0)


def test_hamiltonian_rejects_collisions():
    with pytest.raises(GenericityError):
        hamiltonian_h2(np.zeros((2, 2)), [0.5, 0.5], [0.0, 0.0])
