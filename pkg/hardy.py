"""
QRef - Hardy Scenario
Two particles P1, P2 prepared in α|++⟩ - β|--⟩, each measured by a
three-state device M1, M2 in the U basis (u, v) or the D basis (c, d).

Every probability here is available two ways: a closed form from the basis
overlaps, and a trace over the full 36-dimensional evolved state.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from config import (
    ALPHA_BETA_GAP, CHECK_TOL, DEVICE_DIM, STATE_NORM_TOL,
)
from errors import (
    DegenerateParameterError, InvariantViolationError, ParameterDomainError, StageError,
)
from models import HiddenBranch, MeasurementSetting, Stage
from postulates import (
    InternalCandidate, OutcomeDistribution,
    correlation_table, internal_candidates, reduced_state,
)
from tensor import (
    LinearOperator, Projector, SpaceLayout, StateVector,
    apply, density, dyad, embed_operator, superpose, tensor_product,
)

log = logging.getLogger(__name__)

Settings = Tuple[MeasurementSetting, MeasurementSetting]

PARTICLE_DIM = 2
PARTICLES    = (1, 2)
POINTERS     = (1, 2)      # result pointers; 0 is the ready state

EXPERIMENT_LAYOUT = SpaceLayout.of(
    ("P1", PARTICLE_DIM), ("P2", PARTICLE_DIM), ("M1", DEVICE_DIM), ("M2", DEVICE_DIM),
)

# |+⟩, |-⟩ are the computational basis of each particle.
BRANCH_VECTORS = {
    HiddenBranch.plus:  np.array([1.0, 0.0]),
    HiddenBranch.minus: np.array([0.0, 1.0]),
}


def particle_id(i: int) -> str:
    return f"P{i}"


def device_id(i: int) -> str:
    return f"M{i}"


def _device_index(system: str) -> int:
    index = int(system[1:]) if system[:1] == "M" and system[1:].isdigit() else 0
    if index not in PARTICLES:
        raise ValueError(f"no measuring device {system!r} in the Hardy scenario")
    return index


# ── Parameters and bases ──────────────────────────────────
@dataclass(frozen=True)
class HardyParameters:
    alpha: float
    beta:  float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ParameterDomainError(f"α and β must be positive, got {self.alpha}, {self.beta}")
        if abs(self.alpha ** 2 + self.beta ** 2 - 1.0) > STATE_NORM_TOL:
            raise ParameterDomainError(f"α² + β² = {self.alpha ** 2 + self.beta ** 2!r}, expected 1")
        if abs(self.alpha - self.beta) <= ALPHA_BETA_GAP:
            raise DegenerateParameterError(
                f"α = {self.alpha!r} is within {ALPHA_BETA_GAP:g} of β; B = 0 collapses the c/d basis"
            )

    @property
    def hardy_joint(self) -> float:
        """P(D1=1, D2=1) = α²β²(α-β)²/(1-αβ)²."""
        a, b = self.alpha, self.beta
        return a ** 2 * b ** 2 * (a - b) ** 2 / (1 - a * b) ** 2


@dataclass(frozen=True, eq=False)
class HardyBasis:
    """Coefficients and the u, v, c, d vectors in (|+⟩, |-⟩) coordinates.

    The same vectors serve both particles.
    """
    a: float
    b: float
    A: float
    B: float
    u: np.ndarray
    v: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @classmethod
    def from_params(cls, params: HardyParameters) -> "HardyBasis":
        alpha, beta = params.alpha, params.beta
        a = math.sqrt(alpha / (alpha + beta))
        b = math.sqrt(beta / (alpha + beta))
        A = math.sqrt(alpha * beta / (1 - alpha * beta))
        B = (beta - alpha) / math.sqrt(1 - alpha * beta)
        u = np.array([b, a])
        v = np.array([-a, b])
        return cls(a=a, b=b, A=A, B=B, u=u, v=v, c=A * u + B * v, d=-B * u + A * v)

    def xi(self, setting: MeasurementSetting) -> Tuple[np.ndarray, np.ndarray]:
        """(ξ1, ξ2), the eigenbasis of the measured observable."""
        if setting == MeasurementSetting.U:
            return self.u, self.v
        return self.c, self.d

    def overlap(self, setting: MeasurementSetting, j: int, branch: HiddenBranch) -> float:
        """⟨ξ_j|±⟩."""
        return float(self.xi(setting)[j - 1] @ BRANCH_VECTORS[branch])

    def ket(self, name: str, particle: int) -> StateVector:
        return StateVector(SpaceLayout.of((particle_id(particle), PARTICLE_DIM)), getattr(self, name))


class HardyModel(NamedTuple):
    params: HardyParameters
    basis:  HardyBasis


@lru_cache(maxsize=256)
def basis_of(params: HardyParameters) -> HardyBasis:
    return HardyBasis.from_params(params)


def build_model(alpha: float, min_gap: float = ALPHA_BETA_GAP) -> HardyModel:
    if not (math.isfinite(alpha) and 0 < alpha < 1):
        raise ParameterDomainError(f"α must lie in (0, 1), got {alpha!r}")
    beta = math.sqrt(1 - alpha ** 2)
    # Below the norm tolerance β (or α) is indistinguishable from 0.
    if min(alpha, beta) ** 2 <= STATE_NORM_TOL:
        raise ParameterDomainError(f"α = {alpha!r} leaves β² = {beta ** 2!r} below the norm tolerance")
    if abs(alpha - beta) <= min_gap:
        raise DegenerateParameterError(
            f"α = {alpha!r} is within {min_gap:g} of β; B = 0 collapses the c/d basis"
        )
    params = HardyParameters(alpha, beta)
    return HardyModel(params, basis_of(params))


# ── Measuring devices ─────────────────────────────────────
@dataclass(frozen=True)
class DeviceModel:
    """Pointer states m0 (ready), m1, m2 of device M_i."""
    particle: int
    dim:      int = DEVICE_DIM

    @property
    def label(self) -> str:
        return device_id(self.particle)

    @property
    def layout(self) -> SpaceLayout:
        return SpaceLayout.of((self.label, self.dim))

    def pointer(self, j: int) -> StateVector:
        return StateVector.basis(self.layout, j)

    def projector(self, j: int) -> Projector:
        return dyad(self.pointer(j))


def pointer_projector(particle: int, j: int) -> Projector:
    return DeviceModel(particle).projector(j)


@dataclass(frozen=True, eq=False)
class ExperimentState:
    params:   HardyParameters
    state:    StateVector
    stage:    Stage
    settings: Optional[Settings] = None

    def __post_init__(self):
        EXPERIMENT_LAYOUT.require_same(self.state.layout)
        if self.stage == Stage.final:
            amplitudes = self.state.amplitudes.reshape(EXPERIMENT_LAYOUT.dims)
            ready = max(np.max(np.abs(amplitudes[:, :, 0, :])), np.max(np.abs(amplitudes[:, :, :, 0])))
            if ready > STATE_NORM_TOL:
                raise InvariantViolationError(f"final state keeps amplitude {ready!r} on a ready pointer")

    @property
    def layout(self) -> SpaceLayout:
        return self.state.layout


def _particle_ket(vector: np.ndarray, particle: int) -> StateVector:
    return StateVector(SpaceLayout.of((particle_id(particle), PARTICLE_DIM)), vector)


def branch_ket(branch: HiddenBranch, particle: int) -> StateVector:
    """|+_i⟩ or |-_i⟩."""
    return _particle_ket(BRANCH_VECTORS[branch], particle)


# ── Scenario ──────────────────────────────────────────────
def initial_state(params: HardyParameters) -> ExperimentState:
    plus  = [branch_ket(HiddenBranch.plus, i) for i in PARTICLES]
    minus = [branch_ket(HiddenBranch.minus, i) for i in PARTICLES]
    pair = superpose([
        (params.alpha, tensor_product(*plus)),
        (-params.beta, tensor_product(*minus)),
    ])
    ready = tensor_product(DeviceModel(1).pointer(0), DeviceModel(2).pointer(0))
    return ExperimentState(params, tensor_product(pair, ready), Stage.initial)


# Cyclic pointer shift |m_k⟩ → |m_{k+1 mod 3}⟩.
_SHIFT = np.roll(np.eye(DEVICE_DIM), 1, axis=0)


def measurement_unitary(basis: HardyBasis, setting: MeasurementSetting, particle: int) -> LinearOperator:
    """|ξ_j⟩|m_k⟩ → |ξ_j⟩|m_{k+j mod 3}⟩ on P_i + M_i.

    On the ready sector this is |ξ_j⟩|m0⟩ → |ξ_j⟩|m_j⟩; the remaining
    pointer states are cycled so the map stays a permutation, hence unitary.
    """
    layout = SpaceLayout.of((particle_id(particle), PARTICLE_DIM), (device_id(particle), DEVICE_DIM))
    entries = sum(
        np.kron(np.outer(xi, xi), np.linalg.matrix_power(_SHIFT, j))
        for j, xi in enumerate(basis.xi(setting), start=1)
    )
    return LinearOperator(layout, entries)


def evolve(initial: ExperimentState, settings: Settings) -> ExperimentState:
    if initial.stage != Stage.initial:
        raise StageError(f"evolve needs an initial-stage state, got {initial.stage.value}")
    basis = basis_of(initial.params)
    step = LinearOperator.identity(EXPERIMENT_LAYOUT)
    for particle, setting in zip(PARTICLES, settings):
        step = embed_operator(measurement_unitary(basis, setting, particle), EXPERIMENT_LAYOUT) @ step
    log.debug("evolved α=%s under settings %s", initial.params.alpha, [s.value for s in settings])
    return ExperimentState(initial.params, apply(step, initial.state), Stage.final, tuple(settings))


def branch_states(params: HardyParameters, setting: MeasurementSetting,
                  particle: int = 1) -> Tuple[StateVector, StateVector]:
    """(φ+, φ-): φ± = Σ_j ⟨ξ_j|±⟩ |ξ_j⟩|m_j⟩ on P_i + M_i."""
    basis  = basis_of(params)
    device = DeviceModel(particle)
    kets = [
        tensor_product(_particle_ket(xi, particle), device.pointer(j))
        for j, xi in enumerate(basis.xi(setting), start=1)
    ]

    def branch(which: HiddenBranch) -> StateVector:
        return superpose([(basis.overlap(setting, j, which), kets[j - 1]) for j in POINTERS])

    return branch(HiddenBranch.plus), branch(HiddenBranch.minus)


def device_marginal(final: ExperimentState, device: str) -> List[Tuple[int, float]]:
    """[(j, p_j)] for pointers m0, m1, m2 of the given device."""
    if final.stage != Stage.final:
        raise StageError("device marginals are read from the final state")
    particle = _device_index(device)
    rho = reduced_state(final.state, {device_id(particle)}).state
    return [(j, float(rho.entries[j, j].real)) for j in range(DEVICE_DIM)]


def closed_form_marginal(params: HardyParameters, setting: MeasurementSetting) -> List[Tuple[int, float]]:
    """p_j = α²|⟨ξ_j|+⟩|² + β²|⟨ξ_j|-⟩|², with p_0 = 0."""
    basis = basis_of(params)
    return [(0, 0.0)] + [
        (j, params.alpha ** 2 * basis.overlap(setting, j, HiddenBranch.plus) ** 2
            + params.beta ** 2 * basis.overlap(setting, j, HiddenBranch.minus) ** 2)
        for j in POINTERS
    ]


def conditional_outcome_probabilities(params: HardyParameters,
                                      setting: MeasurementSetting) -> Dict[HiddenBranch, List[float]]:
    """|⟨ξ_j|±⟩|²: probability of result j given the initial internal state ±."""
    basis = basis_of(params)
    return {
        branch: [basis.overlap(setting, j, branch) ** 2 for j in POINTERS]
        for branch in HiddenBranch
    }


def closed_form_amplitude(params: HardyParameters, settings: Settings, j: int, k: int) -> float:
    """α⟨ξ¹_j|+⟩⟨ξ²_k|+⟩ - β⟨ξ¹_j|-⟩⟨ξ²_k|-⟩."""
    basis = basis_of(params)
    first, second = settings
    plus, minus = HiddenBranch.plus, HiddenBranch.minus
    return (params.alpha * basis.overlap(first, j, plus) * basis.overlap(second, k, plus)
            - params.beta * basis.overlap(first, j, minus) * basis.overlap(second, k, minus))


def closed_form_outcome(params: HardyParameters, settings: Settings) -> OutcomeDistribution:
    return OutcomeDistribution(
        ("M1", "M2"),
        {(j, k): closed_form_amplitude(params, settings, j, k) ** 2 for j in POINTERS for k in POINTERS},
    )


def _pointer_of_index(index: int) -> int:
    return POINTERS[index]


def outcome_distribution(params: HardyParameters, settings: Settings) -> OutcomeDistribution:
    """P(M1, j, M2, k) from the evolved state, with the closed form as reference."""
    final = evolve(initial_state(params), settings)
    pointers = [(device_id(i), [pointer_projector(i, j) for j in POINTERS]) for i in PARTICLES]
    # m0 carries no weight after the measurement, so the pointer lists are
    # complete on the support only.
    simulated = correlation_table(pointers, density(final.state), require_complete=False)
    table = simulated.relabel(_pointer_of_index, _pointer_of_index).with_reference(
        closed_form_outcome(params, settings).probabilities
    )
    if table.max_deviation() > CHECK_TOL:
        log.warning("outcome table at α=%s, settings %s deviates from the closed form by %.3g",
                    params.alpha, [s.value for s in settings], table.max_deviation())
    return table


def indicator_pointer(setting: MeasurementSetting, value: int) -> int:
    """Pointer showing observable value 0/1: U=1 is u (m1), D=1 is d (m2)."""
    if value not in (0, 1):
        raise ValueError(f"observable values are 0 or 1, got {value!r}")
    if setting == MeasurementSetting.U:
        return 1 if value == 1 else 2
    return 2 if value == 1 else 1


# Item number, settings, observable values, label.
HARDY_ITEMS = (
    (1, (MeasurementSetting.U, MeasurementSetting.U), (1, 1), "P(U1=1,U2=1)"),
    (2, (MeasurementSetting.D, MeasurementSetting.U), (1, 0), "P(D1=1,U2=0)"),
    (3, (MeasurementSetting.U, MeasurementSetting.D), (0, 1), "P(U1=0,D2=1)"),
    (4, (MeasurementSetting.D, MeasurementSetting.D), (1, 1), "P(D1=1,D2=1)"),
)


class ItemResult(NamedTuple):
    item:     int
    label:    str
    value:    float
    expected: float
    passed:   bool

    @property
    def abs_diff(self) -> float:
        return abs(self.value - self.expected)


def verify_items(params: HardyParameters, tolerance: float = CHECK_TOL) -> List[ItemResult]:
    """The four standard predictions, from the full evolved state."""
    results = []
    for item, settings, values, label in HARDY_ITEMS:
        key = tuple(indicator_pointer(s, v) for s, v in zip(settings, values))
        value = outcome_distribution(params, settings)[key]
        expected = params.hardy_joint if item == 4 else 0.0
        results.append(ItemResult(item, label, value, expected, abs(value - expected) <= tolerance))
    return results


def hidden_branch_table(params: HardyParameters, settings: Settings,
                        particle: int = 1) -> OutcomeDistribution:
    """Joint distribution of the branch state of P_i+M_i and the other pointer.

    P_i+M_i and the other device are disjoint, so the guarded joint
    probability applies.
    """
    other = 3 - particle
    final = evolve(initial_state(params), settings)
    phi_plus, phi_minus = branch_states(params, settings[particle - 1], particle)
    table = correlation_table(
        [
            ({particle_id(particle), device_id(particle)}, [dyad(phi_plus), dyad(phi_minus)]),
            (device_id(other), [pointer_projector(other, j) for j in POINTERS]),
        ],
        density(final.state),
        require_complete=False,
    )
    return table.relabel(lambda i: (HiddenBranch.plus, HiddenBranch.minus)[i], _pointer_of_index)


def initial_branch_candidates(params: HardyParameters, particle: int = 1) -> List[InternalCandidate]:
    """Internal-state candidates of P_i+M_i before the measurement: |±⟩|m0⟩."""
    state = initial_state(params).state
    return internal_candidates(reduced_state(state, {particle_id(particle), device_id(particle)}))
