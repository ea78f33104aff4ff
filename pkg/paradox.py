"""
QRef - Paradox Analysis
The joint-probability trace formula applied to the overlapping systems
P1+M1, M1 and M2. The resulting "probability" that P1 started in |±⟩ and
both devices show m2 is negative for one branch, so no joint probability of
hidden variable and both results exists.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence

from config import ALPHA_BETA_GAP, CHECK_TOL, SIGN_GUARD
from errors import DegenerateParameterError, ParameterDomainError
from hardy import (
    HardyParameters, branch_states, build_model, evolve, initial_state,
    outcome_distribution, pointer_projector,
)
from models import (
    CheckResult, Classification, HiddenBranch, MeasurementSetting, ParadoxReport, alpha_grid,
)
from postulates import naive_trace_functional
from tensor import density, dyad
from utils import check, passed

log = logging.getLogger(__name__)

DD = (MeasurementSetting.D, MeasurementSetting.D)

# Projectors in written order: branch state of P1+M1, then m2 on M1, then m2 on M2.
WRITTEN_ORDER = (0, 1, 2)


def closed_form_pseudo(params: HardyParameters, branch: HiddenBranch) -> float:
    a, b = params.alpha, params.beta
    denominator = (a + b) * (1 - a * b) ** 2
    if branch == HiddenBranch.plus:
        return a ** 2 * b ** 4 * (b - a) / denominator
    return a ** 4 * b ** 2 * (a - b) / denominator


def pseudo_probability(params: HardyParameters, branch: HiddenBranch,
                       order: Sequence[int] = WRITTEN_ORDER) -> complex:
    """Tr[π_φ π_M1 π_M2 ρ] under the D/D settings, pointers m2 and m2.

    With overlapping projectors the trace depends on the order; any other
    permutation of WRITTEN_ORDER is accepted for exploration.
    """
    if sorted(order) != list(WRITTEN_ORDER):
        raise ValueError(f"order must be a permutation of {WRITTEN_ORDER}, got {tuple(order)}")
    final = evolve(initial_state(params), DD)
    phi_plus, phi_minus = branch_states(params, MeasurementSetting.D, 1)
    phi = phi_plus if branch == HiddenBranch.plus else phi_minus
    triple = [
        ({"P1", "M1"}, dyad(phi)),
        ({"M1"}, pointer_projector(1, 2)),
        ({"M2"}, pointer_projector(2, 2)),
    ]
    return naive_trace_functional([triple[i] for i in order], density(final.state))


def sum_rule_check(params: HardyParameters, pseudo: Optional[Dict[HiddenBranch, complex]] = None,
                   joint: Optional[float] = None) -> float:
    """|pseudo+ + pseudo- - P(D1=1, D2=1)|, the joint taken from the full state.

    Values already computed for these parameters may be passed in.
    """
    if pseudo is None:
        pseudo = {branch: pseudo_probability(params, branch) for branch in HiddenBranch}
    if joint is None:
        joint = outcome_distribution(params, DD)[(2, 2)]
    return abs(sum(value.real for value in pseudo.values()) - joint)


def classify(pseudo_plus: float, hardy_joint: float) -> Classification:
    if pseudo_plus < -SIGN_GUARD:
        return Classification.negative_plus
    if pseudo_plus > hardy_joint + SIGN_GUARD:
        return Classification.exceeds_joint
    return Classification.unclassified


def paradox_report(alpha: float, min_gap: float = ALPHA_BETA_GAP) -> ParadoxReport:
    try:
        params = build_model(alpha, min_gap).params
    except (DegenerateParameterError, ParameterDomainError) as exc:
        log.info("α=%s recorded as degenerate: %s", alpha, exc.detail)
        return ParadoxReport(alpha=alpha, classification=Classification.degenerate, detail=exc.detail)

    pseudo = {branch: pseudo_probability(params, branch) for branch in HiddenBranch}
    plus, minus = pseudo[HiddenBranch.plus], pseudo[HiddenBranch.minus]
    joint = outcome_distribution(params, DD)[(2, 2)]
    plus_closed = closed_form_pseudo(params, HiddenBranch.plus)
    return ParadoxReport(
        alpha=params.alpha,
        beta=params.beta,
        pseudo_plus=plus.real,
        pseudo_minus=minus.real,
        pseudo_plus_closed=plus_closed,
        pseudo_minus_closed=closed_form_pseudo(params, HiddenBranch.minus),
        hardy_joint=joint,
        classification=classify(plus.real, joint),
        imaginary_residual=max(abs(plus.imag), abs(minus.imag)),
        sum_rule_residual=sum_rule_check(params, pseudo, joint),
        closed_form_residual=abs(plus.real - plus_closed),
    )


def expected_classification(params: HardyParameters) -> Classification:
    if params.alpha > params.beta:
        return Classification.negative_plus
    return Classification.exceeds_joint


def consistency_checks(report: ParadoxReport, tolerance: float = CHECK_TOL) -> List[CheckResult]:
    """Sign dichotomy, imaginary residual, closed form and sum rule of one report."""
    if report.classification == Classification.degenerate:
        return []
    expected = expected_classification(HardyParameters(report.alpha, report.beta))
    return [
        passed("sign_dichotomy", report.classification == expected,
               detail=f"expected {expected.value}, got {report.classification.value}"),
        check("imaginary_residual", report.imaginary_residual, tolerance),
        check("pseudo_plus_closed_form", report.closed_form_residual, tolerance),
        check("sum_rule_residual", report.sum_rule_residual, tolerance),
    ]


def report_consistent(report: ParadoxReport, tolerance: float = CHECK_TOL) -> bool:
    return all(c.passed for c in consistency_checks(report, tolerance))


def default_grid() -> List[float]:
    return alpha_grid()


def negativity_sweep(alpha_grid: Iterable[float], workers: int = 1,
                     min_gap: float = ALPHA_BETA_GAP) -> List[ParadoxReport]:
    """One report per grid point, in grid order.

    Points are independent; with workers > 1 they run on a thread pool.
    """
    alphas = list(alpha_grid)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda a: paradox_report(a, min_gap), alphas))
    else:
        reports = [paradox_report(a, min_gap) for a in alphas]
    log.info("swept %d α values, %d degenerate", len(reports),
             sum(r.classification == Classification.degenerate for r in reports))
    return reports
