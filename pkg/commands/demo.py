"""
QRef - Demo Command
A walkthrough at a single α, narrating each postulate as it is applied.
"""
import logging
from typing import List

from config import CLI_ALPHA_GAP
from errors import ConfigError
from hardy import (
    HardyModel, build_model, device_marginal, evolve, hidden_branch_table,
    initial_state, outcome_distribution,
)
from models import HiddenBranch, MeasurementSetting, ReportDocument, RunConfig
from paradox import pseudo_probability
from postulates import internal_candidates, reduced_state
from report import build_document, full_row
from utils import fmt

log = logging.getLogger(__name__)

DD = (MeasurementSetting.D, MeasurementSetting.D)


def narrate(model: HardyModel) -> List[str]:
    params = model.params
    a, b = params.alpha, params.beta
    initial = initial_state(params)
    final = evolve(initial, DD)

    rho_p1 = reduced_state(initial.state, {"P1"}).state.entries
    p1 = internal_candidates(reduced_state(initial.state, {"P1"}))
    pm = internal_candidates(reduced_state(final.state, {"P1", "M1"}))
    marginal = device_marginal(final, "M1")
    joint = outcome_distribution(params, DD)
    branches = hidden_branch_table(params, DD)
    plus = pseudo_probability(params, HiddenBranch.plus).real
    minus = pseudo_probability(params, HiddenBranch.minus).real

    return [
        f"α = {fmt(a)}, β = {fmt(b)}",
        f"Postulate 1: the internal state of P1+P2 is the dyad of {fmt(a)}|++⟩ - {fmt(b)}|--⟩.",
        f"Postulate 2: ρ_P1(P1+P2) = diag({fmt(rho_p1[0, 0].real)}, {fmt(rho_p1[1, 1].real)}).",
        "Postulate 3: the internal state of P1 is one of its eigenvectors: "
        + ", ".join(f"p = {fmt(c.probability)}" for c in p1) + ".",
        "Postulate 5 (n=2): P1 and P2 internal states are uniquely related, |+⟩|-⟩ and |-⟩|+⟩ never occur.",
        "Measurement (D on both): ρ_P1+M1 has eigenvalues "
        + ", ".join(fmt(c.probability) for c in pm) + " on the branch states φ+, φ-.",
        "Postulate 4: M1 displays m1 or m2 with p = "
        + ", ".join(fmt(p) for j, p in marginal if j) + ", whatever M2 measures.",
        f"Postulate 5: P(M1,2,M2,2) = {fmt(joint[(2, 2)])} "
        f"(closed form {fmt(params.hardy_joint)}).",
        f"Branch and M2 jointly: P(+, m2) = {fmt(branches[(HiddenBranch.plus, 2)])}, "
        f"P(-, m2) = {fmt(branches[(HiddenBranch.minus, 2)])}.",
        f"Overlapping systems P1+M1, M1, M2: the trace formula gives {fmt(plus)} for φ+ "
        f"and {fmt(minus)} for φ-; one of them is negative, so no joint probability exists.",
    ]


def build_report(config: RunConfig) -> ReportDocument:
    if config.has_grid:
        raise ConfigError("demo runs at a single α; use --alpha")
    model = build_model(config.alphas()[0], CLI_ALPHA_GAP)
    log.info("demo at α=%s", model.params.alpha)
    return build_document(config, [full_row(model, config.tolerance)], notes=narrate(model))
