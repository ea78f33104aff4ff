"""
QRef - Reference-System Postulates
States relative to quantum reference systems, internal-state candidates
and the joint-probability trace formula, expressed over tensor-core types.
"""
import itertools
import logging
from dataclasses import dataclass, replace
from types import MappingProxyType
from typing import (
    Callable, Dict, Hashable, Iterable, List, Mapping, NamedTuple,
    Optional, Sequence, Tuple, Union,
)

import numpy as np

from config import PROJECTOR_TOL, ZERO_EIGENVALUE
from errors import (
    DisjointnessViolationError, InvariantViolationError, LayoutConflictError,
)
from tensor import (
    DensityOperator, Projector, StateVector, SystemId,
    density, embed_operator, hermitian_eigensystem, partial_trace, system_set,
)

log = logging.getLogger(__name__)

Assignment = Tuple[Iterable[SystemId], Projector]
CandidateSet = Tuple[Iterable[SystemId], Sequence[Projector]]

# Joint probabilities are real and in [0, 1] up to this slack before clamping.
PROBABILITY_SLACK = 1e-10


@dataclass(frozen=True)
class ReferenceState:
    """ρ_S(R): the state of S relative to the reference system R."""
    subsystem: frozenset
    reference: frozenset
    state:     DensityOperator

    def __post_init__(self):
        if not self.subsystem <= self.reference:
            raise InvariantViolationError(
                f"subsystem {sorted(self.subsystem)} is not part of reference {sorted(self.reference)}"
            )
        if not isinstance(self.state, DensityOperator):
            raise InvariantViolationError("reference state must be a density operator")


class InternalCandidate(NamedTuple):
    state:       StateVector
    probability: float
    degenerate:  bool


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Joint probabilities keyed by one outcome per system.

    `reference`, when present, is an independently computed table for the
    same keys (the closed form, for the Hardy scenario).
    """
    systems:       Tuple[str, ...]
    probabilities: Mapping[Tuple[Hashable, ...], float]
    reference:     Optional[Mapping[Tuple[Hashable, ...], float]] = None

    def __post_init__(self):
        object.__setattr__(self, "probabilities", MappingProxyType(dict(self.probabilities)))
        if self.reference is not None:
            object.__setattr__(self, "reference", MappingProxyType(dict(self.reference)))

    def __getitem__(self, key) -> float:
        return self.probabilities[key]

    def __iter__(self):
        return iter(self.probabilities)

    def items(self):
        return self.probabilities.items()

    def total(self) -> float:
        return float(sum(self.probabilities.values()))

    def marginal(self, axis: int) -> Dict[Hashable, float]:
        out: Dict[Hashable, float] = {}
        for key, p in self.probabilities.items():
            out[key[axis]] = out.get(key[axis], 0.0) + p
        return out

    def max_deviation(self) -> float:
        if self.reference is None:
            return 0.0
        return max(abs(p - self.reference[key]) for key, p in self.probabilities.items())

    def with_reference(self, reference: Mapping) -> "OutcomeDistribution":
        return replace(self, reference=reference)

    def relabel(self, *labelers: Callable[[Hashable], Hashable]) -> "OutcomeDistribution":
        """Map each axis's outcome keys through the matching function."""
        def rekey(key):
            return tuple(f(k) for f, k in zip(labelers, key))
        reference = None if self.reference is None else {rekey(k): p for k, p in self.reference.items()}
        return OutcomeDistribution(
            self.systems, {rekey(k): p for k, p in self.probabilities.items()}, reference,
        )


def _as_density(rho: Union[DensityOperator, ReferenceState]) -> DensityOperator:
    return rho.state if isinstance(rho, ReferenceState) else rho


# ── Postulate 2 ───────────────────────────────────────────
def reduced_state(psi_R: StateVector, S: Iterable[SystemId]) -> ReferenceState:
    """ρ_S(R) = Tr_{R∖S} |ψ_R⟩⟨ψ_R|, with R the systems of psi_R."""
    S = system_set(S)
    return ReferenceState(
        subsystem=S,
        reference=frozenset(psi_R.layout.labels),
        state=partial_trace(density(psi_R), S),
    )


# ── Postulates 3 and 5 (n = 1) ────────────────────────────
def internal_candidates(rho_S_I: Union[ReferenceState, DensityOperator]) -> List[InternalCandidate]:
    """Possible internal states of S and their probabilities.

    The caller declares the reference system isolated; that cannot be read
    off a snapshot of the state.
    """
    state = _as_density(rho_S_I)
    if not isinstance(state, DensityOperator):
        raise InvariantViolationError("internal candidates need a density operator")
    candidates = [
        InternalCandidate(pair.vector, pair.value, pair.degenerate)
        for pair in hermitian_eigensystem(state)
        if pair.value >= ZERO_EIGENVALUE
    ]
    if any(c.degenerate for c in candidates):
        log.warning("internal state of %s is underdetermined: degenerate eigenvalues",
                    "+".join(state.layout.labels))
    return candidates


# ── Postulate 5 ───────────────────────────────────────────
def _validated(assignments: Sequence[Assignment]) -> List[Tuple[frozenset, Projector]]:
    if not assignments:
        raise ValueError("at least one assignment is required")
    out = []
    for systems, projector in assignments:
        systems = system_set(systems)
        if set(projector.layout.labels) != systems:
            raise LayoutConflictError(
                f"projector on {projector.layout} assigned to systems {sorted(systems)}"
            )
        out.append((systems, projector))
    return out


def _trace_functional(assignments: List[Tuple[frozenset, Projector]], rho: DensityOperator) -> complex:
    # Tr_{S1+...+Sn}[π1 ··· πn ρ_{S1+...+Sn}(I)] in the given order.
    union   = frozenset().union(*(systems for systems, _ in assignments))
    reduced = partial_trace(rho, union)
    product = np.eye(reduced.layout.dim, dtype=complex)
    for _, projector in assignments:
        product = product @ embed_operator(projector, reduced.layout).entries
    return complex(np.trace(product @ reduced.entries))


def joint_probability(assignments: Sequence[Assignment],
                      rho_I: Union[DensityOperator, ReferenceState]) -> float:
    """Probability that each system's internal state is its assigned dyad.

    Only defined for pairwise disjoint systems.
    """
    checked = _validated(assignments)
    seen: set = set()
    for systems, _ in checked:
        if seen & systems:
            raise DisjointnessViolationError(
                f"systems {sorted(seen & systems)} appear in more than one assignment"
            )
        seen |= systems

    value = _trace_functional(checked, _as_density(rho_I))
    if abs(value.imag) > PROBABILITY_SLACK or not -PROBABILITY_SLACK <= value.real <= 1 + PROBABILITY_SLACK:
        raise InvariantViolationError(f"joint probability {value!r} is not a probability")
    return min(max(value.real, 0.0), 1.0)


def naive_trace_functional(assignments: Sequence[Assignment],
                           rho_I: Union[DensityOperator, ReferenceState]) -> complex:
    """The joint-probability trace formula with no disjointness guard.

    Overlapping systems are allowed, the order is kept as given and the
    value is neither clamped nor made real.
    """
    return _trace_functional(_validated(assignments), _as_density(rho_I))


def _check_complete(systems: frozenset, projectors: Sequence[Projector]) -> None:
    total = sum(p.entries for p in projectors)
    if np.max(np.abs(total - np.eye(projectors[0].layout.dim))) > PROJECTOR_TOL:
        raise InvariantViolationError(
            f"projectors on {'+'.join(sorted(systems))} do not resolve the identity "
            f"(pass require_complete=False to waive)"
        )


def correlation_table(candidate_sets: Sequence[CandidateSet],
                      rho_I: Union[DensityOperator, ReferenceState],
                      require_complete: bool = True) -> OutcomeDistribution:
    """Joint distribution over one candidate list per system.

    Keys are tuples of indices into the candidate lists.
    """
    sets = [(system_set(systems), list(projectors)) for systems, projectors in candidate_sets]
    for systems, projectors in sets:
        if not projectors:
            raise ValueError(f"no candidates for {sorted(systems)}")
        if require_complete:
            _check_complete(systems, projectors)

    rho = _as_density(rho_I)
    table = {}
    for key in itertools.product(*(range(len(projectors)) for _, projectors in sets)):
        table[key] = joint_probability(
            [(systems, projectors[i]) for (systems, projectors), i in zip(sets, key)], rho,
        )
    labels = tuple("+".join(projectors[0].layout.labels) for _, projectors in sets)
    return OutcomeDistribution(labels, table)
