"""
QRef - Verify Command
The four standard predictions plus the invariant suite at each α.
"""
import itertools
from typing import List

import numpy as np

from config import DENSITY_TRACE_TOL, PROPERTY_TOL, RECONSTRUCTION_TOL
from hardy import (
    EXPERIMENT_LAYOUT, PARTICLES, HardyModel,
    branch_ket, branch_states, closed_form_marginal, evolve, initial_state,
    measurement_unitary, pointer_projector,
)
from models import CheckResult, HiddenBranch, MeasurementSetting, ReportDocument, ReportRow, RunConfig
from postulates import (
    correlation_table, internal_candidates, joint_probability,
    naive_trace_functional, reduced_state,
)
from report import build_document, hardy_checks, item_quantities, rows_for
from tensor import (
    StateVector, density, dyad, embed_operator, hermitian_eigensystem,
    inner_product, partial_trace, reconstruct, trace,
)
from utils import check

U, D = MeasurementSetting.U, MeasurementSetting.D


def _candidate_residual(candidates, expected: List[tuple]) -> float:
    """Worst mismatch between candidates and (probability, state) pairs, both by descending probability."""
    expected = sorted(expected, key=lambda pair: -pair[0])
    if len(candidates) != len(expected):
        return 1.0
    return max(
        max(abs(c.probability - p), 1 - abs(inner_product(c.state, state)))
        for c, (p, state) in zip(candidates, expected)
    )


def invariant_suite(model: HardyModel, tolerance: float) -> List[CheckResult]:
    params, basis = model
    alpha2, beta2 = params.alpha ** 2, params.beta ** 2
    initial = initial_state(params)
    final   = evolve(initial, (D, D))
    rho     = density(final.state)
    rho_pm  = partial_trace(rho, {"P1", "M1"})
    phi_plus, phi_minus = branch_states(params, D, 1)
    out = []

    # Tensor core
    subsets = [keep for r in range(1, 5) for keep in itertools.combinations(EXPERIMENT_LAYOUT.labels, r)]
    out.append(check("partial_trace_trace",
                     max(abs(trace(partial_trace(rho, keep)) - 1) for keep in subsets), DENSITY_TRACE_TOL))

    p2_first = partial_trace(partial_trace(rho, {"P1", "M1", "M2"}), {"P1", "M1"})
    m2_first = partial_trace(partial_trace(rho, {"P1", "P2", "M1"}), {"P1", "M1"})
    out.append(check("partial_trace_commutes",
                     np.max(np.abs(p2_first.entries - m2_first.entries)), PROPERTY_TOL))

    pairs = hermitian_eigensystem(rho_pm)
    out.append(check("eigensystem_reconstruction",
                     np.max(np.abs(rho_pm.entries - reconstruct(pairs))), RECONSTRUCTION_TOL))

    unitary = measurement_unitary(basis, D, 1)
    branch  = dyad(phi_plus)
    lhs = embed_operator(unitary @ branch, EXPERIMENT_LAYOUT)
    rhs = embed_operator(unitary, EXPERIMENT_LAYOUT) @ embed_operator(branch, EXPERIMENT_LAYOUT)
    out.append(check("embedding_homomorphism", np.max(np.abs(lhs.entries - rhs.entries)), PROPERTY_TOL))

    # Measurement dynamics
    for setting in (U, D):
        for particle in PARTICLES:
            m = measurement_unitary(basis, setting, particle).entries
            out.append(check(f"unitarity_{setting.value}{particle}",
                             np.max(np.abs(m.conj().T @ m - np.eye(len(m)))), PROPERTY_TOL))
    out.append(check("evolve_norm", abs(np.linalg.norm(final.state.amplitudes) - 1), PROPERTY_TOL))

    out.append(check("branch_orthogonality", abs(inner_product(phi_plus, phi_minus)), PROPERTY_TOL))
    decomposition = alpha2 * dyad(phi_plus).entries + beta2 * dyad(phi_minus).entries
    out.append(check("branch_decomposition", np.max(np.abs(rho_pm.entries - decomposition)), PROPERTY_TOL))

    out.append(check("coefficient_identities", max(
        abs(basis.a ** 2 + basis.b ** 2 - 1),
        abs(basis.A ** 2 + basis.B ** 2 - 1),
        abs(params.alpha * basis.b ** 2 - params.beta * basis.a ** 2),
    ), PROPERTY_TOL))

    # Postulates
    pair = [({"P1", "M1"}, branch), ({"M2"}, pointer_projector(2, 2))]
    out.append(check("guarded_unguarded",
                     abs(naive_trace_functional(pair, rho) - joint_probability(pair, rho)), PROPERTY_TOL))

    plus, minus = branch_ket(HiddenBranch.plus, 1), branch_ket(HiddenBranch.minus, 1)
    out.append(check("postulate_p1_candidates", _candidate_residual(
        internal_candidates(reduced_state(initial.state, {"P1"})),
        [(alpha2, plus), (beta2, minus)],
    ), tolerance))
    out.append(check("postulate_p1m1_candidates", _candidate_residual(
        internal_candidates(rho_pm),
        [(alpha2, phi_plus), (beta2, phi_minus)],
    ), tolerance))

    devices = reduced_state(final.state, {"M1"})
    pointers = [(p, StateVector.basis(devices.state.layout, j))
                for j, p in closed_form_marginal(params, D) if p > 0]
    out.append(check("postulate_device_candidates",
                     _candidate_residual(internal_candidates(devices), pointers), tolerance))

    def signs(i):
        return [dyad(branch_ket(b, i)) for b in HiddenBranch]

    table = correlation_table([("P1", signs(1)), ("P2", signs(2))], density(initial.state))
    out.append(check("p1_p2_unique_relation", max(
        table[(0, 1)], table[(1, 0)], abs(table[(0, 0)] - alpha2), abs(table[(1, 1)] - beta2),
    ), tolerance))
    return out


def verify_row(model: HardyModel, tolerance: float) -> ReportRow:
    return ReportRow(
        alpha=model.params.alpha,
        beta=model.params.beta,
        quantities=item_quantities(model.params, tolerance),
        checks=invariant_suite(model, tolerance) + hardy_checks(model.params, tolerance),
    )


def build_report(config: RunConfig) -> ReportDocument:
    return build_document(config, rows_for(config, lambda model: verify_row(model, config.tolerance)))
