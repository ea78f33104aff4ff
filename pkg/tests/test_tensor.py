import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import (
    InvariantViolationError, LayoutConflictError, SymmetryViolationError, UnknownSystemError,
)
from hardy import EXPERIMENT_LAYOUT, build_model
from tensor import (
    DensityOperator, LinearOperator, Projector, SpaceLayout, StateVector,
    apply, compose, density, dyad, embed_operator, hermitian_eigensystem,
    inner_product, partial_trace, reconstruct, superpose, tensor_product, trace,
)

from strategies import ALPHA_GRID, densities

Q1 = SpaceLayout.of(("q1", 2))
Q2 = SpaceLayout.of(("q2", 2))


def ket(layout, index):
    return StateVector.basis(layout, index)


# ── Layouts and values ────────────────────────────────────
def test_layout_dimension_is_product_of_factors():
    assert EXPERIMENT_LAYOUT.dim == 36
    assert EXPERIMENT_LAYOUT.labels == ("P1", "P2", "M1", "M2")


def test_layout_rejects_duplicate_systems():
    with pytest.raises(LayoutConflictError):
        SpaceLayout.of(("A", 2), ("A", 3))


def test_restrict_keeps_canonical_order():
    assert EXPERIMENT_LAYOUT.restrict(["M2", "P1"]).labels == ("P1", "M2")


def test_state_vector_must_be_normalized():
    with pytest.raises(InvariantViolationError):
        StateVector(Q1, [1.0, 1.0])


def test_state_vector_is_read_only():
    v = ket(Q1, 0)
    with pytest.raises(ValueError):
        v.amplitudes[0] = 2


def test_density_operator_rejects_negative_eigenvalue():
    with pytest.raises(InvariantViolationError):
        DensityOperator(Q1, np.diag([1.5, -0.5]))


def test_projector_must_be_idempotent():
    with pytest.raises(InvariantViolationError):
        Projector(Q1, np.diag([0.5, 0.0]))


# ── tensor_product ────────────────────────────────────────
def test_tensor_product_of_basis_states():
    v = tensor_product(ket(Q1, 0), ket(Q2, 1))
    np.testing.assert_allclose(v.amplitudes, [0, 1, 0, 0])
    assert v.layout.labels == ("q1", "q2")


def test_tensor_product_of_identities():
    op = tensor_product(LinearOperator.identity(Q1), LinearOperator.identity(SpaceLayout.of(("r", 3))))
    np.testing.assert_allclose(op.entries, np.eye(6))


def test_entangled_pair_from_factors():
    v = superpose([
        (0.8, tensor_product(ket(Q1, 0), ket(Q2, 0))),
        (-0.6, tensor_product(ket(Q1, 1), ket(Q2, 1))),
    ])
    np.testing.assert_allclose(v.amplitudes, [0.8, 0, 0, -0.6])


def test_tensor_product_rejects_shared_systems():
    with pytest.raises(LayoutConflictError):
        tensor_product(ket(Q1, 0), ket(Q1, 1))


def test_tensor_product_keeps_density_kind():
    rho = tensor_product(density(ket(Q1, 0)), density(ket(Q2, 1)))
    assert isinstance(rho, DensityOperator)


# ── partial_trace ─────────────────────────────────────────
def test_partial_trace_of_product_state():
    rho = density(tensor_product(ket(Q1, 0), ket(Q2, 0)))
    np.testing.assert_allclose(partial_trace(rho, {"q1"}).entries, [[1, 0], [0, 0]])


def test_partial_trace_of_maximally_entangled_pair():
    bell = StateVector(SpaceLayout.of(("q1", 2), ("q2", 2)), np.array([1, 0, 0, 1]) / np.sqrt(2))
    np.testing.assert_allclose(partial_trace(density(bell), {"q2"}).entries, np.eye(2) / 2, atol=1e-15)


def test_partial_trace_unknown_system():
    with pytest.raises(UnknownSystemError):
        partial_trace(density(ket(Q1, 0)), {"q2"})


def test_partial_trace_needs_a_kept_system():
    with pytest.raises(UnknownSystemError):
        partial_trace(density(ket(Q1, 0)), set())


def test_partial_trace_keeps_layout_order_for_unordered_keep():
    rho = density(StateVector.basis(EXPERIMENT_LAYOUT, 5))
    assert partial_trace(rho, ["M2", "P2"]).layout.labels == ("P2", "M2")


# ── hermitian_eigensystem ─────────────────────────────────
def test_eigensystem_of_diagonal():
    pairs = hermitian_eigensystem(LinearOperator(Q1, np.diag([0.36, 0.64])))
    assert [p.value for p in pairs] == pytest.approx([0.64, 0.36])
    np.testing.assert_allclose(np.abs(pairs[0].vector.amplitudes), [0, 1])
    assert not any(p.degenerate for p in pairs)


def test_eigensystem_of_pauli_x():
    pairs = hermitian_eigensystem(LinearOperator(Q1, [[0, 1], [1, 0]]))
    assert [p.value for p in pairs] == pytest.approx([1, -1])


def test_eigensystem_flags_degeneracy():
    pairs = hermitian_eigensystem(LinearOperator.identity(Q1))
    assert all(p.degenerate for p in pairs)


def test_eigensystem_gap_is_relative():
    pairs = hermitian_eigensystem(LinearOperator(SpaceLayout.of(("r", 3)), np.diag([1 - 1e-10, 1e-10, 0.0])))
    assert [p.degenerate for p in pairs] == [False, False, False]


def test_eigensystem_clusters_numerical_zeros():
    pairs = hermitian_eigensystem(LinearOperator(SpaceLayout.of(("r", 3)), np.diag([1.0, 1e-17, -1e-17])))
    assert [p.degenerate for p in pairs] == [False, True, True]


def test_eigensystem_rejects_non_hermitian():
    with pytest.raises(SymmetryViolationError):
        hermitian_eigensystem(LinearOperator(Q1, [[0, 1], [0, 0]]))


def test_eigenvectors_are_orthonormal():
    pairs = hermitian_eigensystem(LinearOperator(Q1, [[0.5, 0.2j], [-0.2j, 0.5]]))
    assert abs(inner_product(pairs[0].vector, pairs[1].vector)) < 1e-10


# ── embed_operator ────────────────────────────────────────
def test_embed_identity():
    target = SpaceLayout.of(("q1", 2), ("q2", 2))
    np.testing.assert_allclose(embed_operator(LinearOperator.identity(Q1), target).entries, np.eye(4))


def test_embed_on_first_factor():
    target = SpaceLayout.of(("q1", 2), ("q2", 2))
    np.testing.assert_allclose(embed_operator(dyad(ket(Q1, 0)), target).entries, np.diag([1, 1, 0, 0]))


def test_embed_on_second_factor():
    target = SpaceLayout.of(("q1", 2), ("q2", 2))
    np.testing.assert_allclose(embed_operator(dyad(ket(Q2, 0)), target).entries, np.diag([1, 0, 1, 0]))


def test_embed_reorders_factors():
    swapped = SpaceLayout.of(("q2", 2), ("q1", 2))
    target  = SpaceLayout.of(("q1", 2), ("q2", 2))
    # |q2=0, q1=1⟩ in swapped order is index 1; in target order it is index 2.
    op = embed_operator(dyad(StateVector.basis(swapped, 1)), target)
    np.testing.assert_allclose(op.entries, np.diag([0, 0, 1, 0]))


def test_embed_projector_into_experiment_space():
    basis = build_model(0.8).basis
    op = embed_operator(dyad(basis.ket("d", 1)), EXPERIMENT_LAYOUT)
    assert isinstance(op, Projector)
    assert trace(op).real == pytest.approx(18)


def test_embed_dimension_mismatch():
    with pytest.raises(LayoutConflictError):
        embed_operator(LinearOperator.identity(SpaceLayout.of(("P1", 3))), EXPERIMENT_LAYOUT)


def test_embed_unknown_system():
    with pytest.raises(UnknownSystemError):
        embed_operator(LinearOperator.identity(SpaceLayout.of(("X", 2))), EXPERIMENT_LAYOUT)


# ── Small operations ──────────────────────────────────────
def test_dyad_of_basis_state():
    np.testing.assert_allclose(dyad(ket(Q1, 0)).entries, [[1, 0], [0, 0]])


def test_dyad_has_unit_trace():
    v = StateVector(Q1, np.array([0.6, 0.8j]))
    assert trace(dyad(v)).real == pytest.approx(1)


@pytest.mark.parametrize("alpha", ALPHA_GRID[::7])
def test_u_and_v_are_orthogonal(alpha):
    basis = build_model(alpha).basis
    assert abs(inner_product(basis.ket("u", 1), basis.ket("v", 1))) < 1e-12


def test_apply_and_compose():
    x = LinearOperator(Q1, [[0, 1], [1, 0]])
    np.testing.assert_allclose(apply(x, ket(Q1, 0)).amplitudes, [0, 1])
    np.testing.assert_allclose(compose(x, x).entries, np.eye(2))


def test_layout_mismatch_is_reported():
    with pytest.raises(LayoutConflictError):
        inner_product(ket(Q1, 0), ket(Q2, 0))
    with pytest.raises(LayoutConflictError):
        compose(LinearOperator.identity(Q1), LinearOperator.identity(Q2))


# ── Properties ────────────────────────────────────────────
@settings(max_examples=50, deadline=None)
@given(densities(), st.sets(st.sampled_from(["A", "B", "C"]), min_size=1))
def test_partial_trace_preserves_trace(rho, keep):
    assert abs(trace(partial_trace(rho, keep)) - 1) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(densities())
def test_partial_traces_commute(rho):
    a_first = partial_trace(partial_trace(rho, {"B", "C"}), {"C"})
    b_first = partial_trace(partial_trace(rho, {"A", "C"}), {"C"})
    np.testing.assert_allclose(a_first.entries, b_first.entries, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(densities())
def test_eigensystem_reconstructs_operator(rho):
    pairs = hermitian_eigensystem(rho)
    assert [p.value for p in pairs] == sorted((p.value for p in pairs), reverse=True)
    assert np.max(np.abs(rho.entries - reconstruct(pairs))) <= 1e-10
    vectors = np.array([p.vector.amplitudes for p in pairs])
    np.testing.assert_allclose(vectors.conj() @ vectors.T, np.eye(len(pairs)), atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_embedding_is_a_homomorphism(seed):
    rng = np.random.default_rng(seed)
    local = SpaceLayout.of(("C", 2), ("A", 2))
    target = SpaceLayout.of(("A", 2), ("B", 3), ("C", 2))
    a = LinearOperator(local, rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    b = LinearOperator(local, rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    lhs = embed_operator(a @ b, target)
    rhs = embed_operator(a, target) @ embed_operator(b, target)
    np.testing.assert_allclose(lhs.entries, rhs.entries, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(densities(SpaceLayout.of(("A", 2), ("B", 2))), densities(SpaceLayout.of(("C", 3),)))
def test_tensor_then_trace_recovers_factor(a, b):
    recovered = partial_trace(tensor_product(a, b), {"A", "B"})
    np.testing.assert_allclose(recovered.entries, a.entries, atol=1e-12)
