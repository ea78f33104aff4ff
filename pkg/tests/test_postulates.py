import itertools
import logging

import numpy as np
import pytest
from hypothesis import given, settings

from errors import DisjointnessViolationError, InvariantViolationError, LayoutConflictError
from hardy import (
    branch_ket, branch_states, build_model, device_marginal, initial_branch_candidates,
    initial_state, pointer_projector,
)
from models import HiddenBranch, MeasurementSetting
from postulates import (
    OutcomeDistribution, ReferenceState,
    correlation_table, internal_candidates, joint_probability,
    naive_trace_functional, reduced_state,
)
from tensor import DensityOperator, SpaceLayout, StateVector, density, dyad, inner_product

from strategies import densities

D = MeasurementSetting.D


def basis_dyads(label, dim):
    layout = SpaceLayout.of((label, dim))
    return [dyad(StateVector.basis(layout, i)) for i in range(dim)]


# ── Reduced states and candidates ─────────────────────────
def test_reduced_state_of_p1(model):
    ref = reduced_state(initial_state(model.params).state, {"P1"})
    assert ref.subsystem == frozenset({"P1"})
    assert ref.reference == frozenset({"P1", "P2", "M1", "M2"})
    np.testing.assert_allclose(ref.state.entries, np.diag([0.64, 0.36]), atol=1e-12)


def test_reference_must_contain_subsystem():
    rho = density(StateVector.basis(SpaceLayout.of(("A", 2)), 0))
    with pytest.raises(InvariantViolationError):
        ReferenceState(frozenset({"A"}), frozenset({"B"}), rho)


def test_p1_candidates(model):
    candidates = internal_candidates(reduced_state(initial_state(model.params).state, {"P1"}))
    assert [c.probability for c in candidates] == pytest.approx([0.64, 0.36])
    assert abs(inner_product(candidates[0].state, branch_ket(HiddenBranch.plus, 1))) == pytest.approx(1)
    assert abs(inner_product(candidates[1].state, branch_ket(HiddenBranch.minus, 1))) == pytest.approx(1)


def test_p1_m1_candidates_are_branch_states(model, final_dd):
    candidates = internal_candidates(reduced_state(final_dd.state, {"P1", "M1"}))
    phi_plus, phi_minus = branch_states(model.params, D, 1)
    assert [c.probability for c in candidates] == pytest.approx([0.64, 0.36])
    assert abs(inner_product(candidates[0].state, phi_plus)) == pytest.approx(1)
    assert abs(inner_product(candidates[1].state, phi_minus)) == pytest.approx(1)


def test_zero_weight_candidates_are_dropped(final_dd):
    # M1 never shows the ready pointer after the measurement.
    assert len(internal_candidates(reduced_state(final_dd.state, {"M1"}))) == 2


def test_degenerate_candidates_are_reported(caplog):
    rho = DensityOperator(SpaceLayout.of(("A", 2)), np.eye(2) / 2)
    with caplog.at_level(logging.WARNING, logger="postulates"):
        candidates = internal_candidates(rho)
    assert all(c.degenerate for c in candidates)
    assert "underdetermined" in caplog.text


def test_small_alpha_branches_are_determined(caplog):
    params = build_model(1e-5).params
    with caplog.at_level(logging.WARNING, logger="postulates"):
        candidates = initial_branch_candidates(params)
    assert [c.probability for c in candidates] == pytest.approx([params.beta ** 2, 1e-10], rel=1e-6)
    assert not any(c.degenerate for c in candidates)
    assert "underdetermined" not in caplog.text


# ── Joint probabilities ───────────────────────────────────
def test_p1_p2_internal_states_are_related(model):
    signs = [("P1", [dyad(branch_ket(b, 1)) for b in HiddenBranch]),
             ("P2", [dyad(branch_ket(b, 2)) for b in HiddenBranch])]
    table = correlation_table(signs, density(initial_state(model.params).state))
    assert table.systems == ("P1", "P2")
    assert table[(0, 0)] == pytest.approx(0.64)
    assert table[(1, 1)] == pytest.approx(0.36)
    assert table[(0, 1)] == pytest.approx(0, abs=1e-15)
    assert table[(1, 0)] == pytest.approx(0, abs=1e-15)


def test_joint_pointer_probability(final_dd):
    pair = [({"M1"}, pointer_projector(1, 2)), ({"M2"}, pointer_projector(2, 2))]
    assert joint_probability(pair, density(final_dd.state)) == pytest.approx(0.0340828, abs=1e-7)


def test_joint_probability_accepts_reference_state(final_dd):
    rho = reduced_state(final_dd.state, {"M1", "M2"})
    pair = [("M1", pointer_projector(1, 2)), ("M2", pointer_projector(2, 2))]
    assert joint_probability(pair, rho) == pytest.approx(0.0340828, abs=1e-7)


def test_joint_probability_is_order_independent(model, final_dd):
    phi_plus, _ = branch_states(model.params, D, 1)
    assignments = [
        ({"P1", "M1"}, dyad(phi_plus)),
        ({"P2"}, dyad(branch_ket(HiddenBranch.plus, 2))),
        ({"M2"}, pointer_projector(2, 1)),
    ]
    rho = density(final_dd.state)
    values = [joint_probability(list(p), rho) for p in itertools.permutations(assignments)]
    assert max(values) - min(values) <= 1e-12


def test_marginal_consistency(final_dd):
    rho = density(final_dd.state)
    for j, p in device_marginal(final_dd, "M1")[1:]:
        total = sum(
            joint_probability([("M1", pointer_projector(1, j)), ("M2", pointer_projector(2, k))], rho)
            for k in range(3)
        )
        assert total == pytest.approx(p, abs=1e-12)


def test_overlapping_systems_are_rejected(model, final_dd):
    phi_plus, _ = branch_states(model.params, D, 1)
    triple = [({"P1", "M1"}, dyad(phi_plus)), ({"M1"}, pointer_projector(1, 2))]
    with pytest.raises(DisjointnessViolationError):
        joint_probability(triple, density(final_dd.state))


def test_projector_must_match_its_systems(final_dd):
    with pytest.raises(LayoutConflictError):
        joint_probability([({"M2"}, pointer_projector(1, 2))], density(final_dd.state))


def test_empty_assignment_list():
    rho = density(StateVector.basis(SpaceLayout.of(("A", 2)), 0))
    with pytest.raises(ValueError):
        joint_probability([], rho)


# ── Unguarded trace formula ───────────────────────────────
@pytest.mark.parametrize("branch, expected", [
    (HiddenBranch.plus, -0.0438208),
    (HiddenBranch.minus, 0.0779036),
])
def test_overlapping_trace_values(model, final_dd, branch, expected):
    phi = dict(zip(HiddenBranch, branch_states(model.params, D, 1)))[branch]
    triple = [
        ({"P1", "M1"}, dyad(phi)),
        ({"M1"}, pointer_projector(1, 2)),
        ({"M2"}, pointer_projector(2, 2)),
    ]
    value = naive_trace_functional(triple, density(final_dd.state))
    assert value.real == pytest.approx(expected, abs=1e-7)
    assert abs(value.imag) <= 1e-12


def test_unguarded_agrees_with_guarded_for_disjoint(model, final_dd):
    phi_plus, _ = branch_states(model.params, D, 1)
    pair = [({"P1", "M1"}, dyad(phi_plus)), ({"M2"}, pointer_projector(2, 2))]
    rho = density(final_dd.state)
    assert naive_trace_functional(pair, rho).real == pytest.approx(joint_probability(pair, rho), abs=1e-12)


# ── Correlation tables ────────────────────────────────────
def test_incomplete_candidates_need_a_waiver(final_dd):
    pointers = [(f"M{i}", [pointer_projector(i, j) for j in (1, 2)]) for i in (1, 2)]
    with pytest.raises(InvariantViolationError, match="projectors on M1"):
        correlation_table(pointers, density(final_dd.state))
    table = correlation_table(pointers, density(final_dd.state), require_complete=False)
    assert table.total() == pytest.approx(1, abs=1e-12)


def test_outcome_distribution_helpers():
    table = OutcomeDistribution(("X", "Y"), {(0, 0): 0.5, (0, 1): 0.25, (1, 1): 0.25})
    assert table.marginal(0) == {0: 0.75, 1: 0.25}
    assert table.max_deviation() == 0.0
    relabelled = table.relabel(lambda i: "ab"[i], lambda i: i + 1).with_reference(
        {("a", 1): 0.5, ("a", 2): 0.2, ("b", 2): 0.25}
    )
    assert relabelled[("a", 2)] == 0.25
    assert relabelled.max_deviation() == pytest.approx(0.05)
    with pytest.raises(TypeError):
        table.probabilities[(1, 0)] = 0.0


@settings(max_examples=40, deadline=None)
@given(densities())
def test_correlation_table_sums_to_one(rho):
    table = correlation_table([("A", basis_dyads("A", 2)), ("C", basis_dyads("C", 2))], rho)
    assert table.total() == pytest.approx(1, abs=1e-10)
    assert all(0 <= p <= 1 for _, p in table.items())
