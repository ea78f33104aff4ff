"""
QRef - Tensor Core
Dense complex linear algebra over explicitly labelled tensor factors:
tensor products, partial traces, operator embedding and Hermitian
eigensystems. All values are immutable once constructed.
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from config import (
    STATE_NORM_TOL, HERMITIAN_TOL, DENSITY_TRACE_TOL, DENSITY_POSITIVITY_TOL,
    EIGEN_HERMITIAN_TOL, EIGEN_DEGENERACY_GAP, PROJECTOR_TOL, ZERO_EIGENVALUE,
)
from errors import (
    LayoutConflictError, UnknownSystemError,
    SymmetryViolationError, InvariantViolationError,
)

log = logging.getLogger(__name__)

SystemId = str


def _frozen(values) -> np.ndarray:
    out = np.array(values, dtype=complex)
    if not np.all(np.isfinite(out)):
        raise InvariantViolationError("non-finite entries")
    out.setflags(write=False)
    return out


def system_set(systems: Union[SystemId, Iterable[SystemId]]) -> frozenset:
    """Accept a single label or any iterable of labels."""
    if isinstance(systems, str):
        return frozenset([systems])
    return frozenset(systems)


# ── Layout ────────────────────────────────────────────────
@dataclass(frozen=True)
class SpaceLayout:
    factors: Tuple[Tuple[SystemId, int], ...]

    def __post_init__(self):
        factors = tuple((str(label), int(dim)) for label, dim in self.factors)
        labels  = [label for label, _ in factors]
        if not factors:
            raise LayoutConflictError("a layout needs at least one factor")
        if len(set(labels)) != len(labels):
            raise LayoutConflictError(f"duplicate systems in layout: {labels}")
        if any(dim < 1 for _, dim in factors):
            raise LayoutConflictError(f"non-positive dimension in layout: {factors}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, *factors: Tuple[SystemId, int]) -> "SpaceLayout":
        return cls(tuple(factors))

    @property
    def labels(self) -> Tuple[SystemId, ...]:
        return tuple(label for label, _ in self.factors)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def __contains__(self, label) -> bool:
        return label in self.labels

    def index_of(self, label: SystemId) -> int:
        if label not in self.labels:
            raise UnknownSystemError(f"system {label!r} not in layout {self}")
        return self.labels.index(label)

    def dimension_of(self, label: SystemId) -> int:
        return self.factors[self.index_of(label)][1]

    def restrict(self, keep: Iterable[SystemId]) -> "SpaceLayout":
        """Sub-layout with the kept systems, in this layout's order."""
        keep = system_set(keep)
        missing = keep - set(self.labels)
        if missing:
            raise UnknownSystemError(f"systems {sorted(missing)} not in layout {self}")
        return SpaceLayout(tuple(f for f in self.factors if f[0] in keep))

    def concat(self, other: "SpaceLayout") -> "SpaceLayout":
        shared = set(self.labels) & set(other.labels)
        if shared:
            raise LayoutConflictError(f"layouts share systems {sorted(shared)}")
        return SpaceLayout(self.factors + other.factors)

    def require_same(self, other: "SpaceLayout") -> None:
        if self != other:
            raise LayoutConflictError(f"layout mismatch: {self} vs {other}")

    def __str__(self) -> str:
        return " ⊗ ".join(f"{label}:{dim}" for label, dim in self.factors)


# ── States and operators ──────────────────────────────────
@dataclass(frozen=True, eq=False)
class StateVector:
    layout:     SpaceLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = _frozen(self.amplitudes).reshape(-1)
        if amplitudes.shape != (self.layout.dim,):
            raise LayoutConflictError(
                f"{amplitudes.shape[0]} amplitudes for layout {self.layout} (dim {self.layout.dim})"
            )
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1.0) > STATE_NORM_TOL:
            raise InvariantViolationError(f"state norm {norm!r} is not 1")
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def basis(cls, layout: SpaceLayout, index: int) -> "StateVector":
        amplitudes = np.zeros(layout.dim, dtype=complex)
        amplitudes[index] = 1.0
        return cls(layout, amplitudes)


@dataclass(frozen=True, eq=False)
class LinearOperator:
    layout:  SpaceLayout
    entries: np.ndarray

    def __post_init__(self):
        entries = _frozen(self.entries)
        if entries.shape != (self.layout.dim, self.layout.dim):
            raise LayoutConflictError(
                f"operator shape {entries.shape} does not match layout {self.layout}"
            )
        object.__setattr__(self, "entries", entries)

    @classmethod
    def identity(cls, layout: SpaceLayout) -> "LinearOperator":
        return cls(layout, np.eye(layout.dim))

    @property
    def adjoint(self) -> "LinearOperator":
        return LinearOperator(self.layout, self.entries.conj().T)

    def is_hermitian(self, atol: float) -> bool:
        return bool(linalg.ishermitian(self.entries, atol=atol))

    def __matmul__(self, other: "LinearOperator") -> "LinearOperator":
        return compose(self, other)


@dataclass(frozen=True, eq=False)
class DensityOperator(LinearOperator):
    """Hermitian, positive semidefinite, unit trace."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_hermitian(HERMITIAN_TOL):
            raise InvariantViolationError("density operator is not Hermitian")
        tr = np.trace(self.entries)
        if abs(tr - 1.0) > DENSITY_TRACE_TOL:
            raise InvariantViolationError(f"density operator trace {tr!r} is not 1")
        lowest = linalg.eigvalsh(self.entries)[0]
        if lowest < -DENSITY_POSITIVITY_TOL:
            raise InvariantViolationError(f"density operator has eigenvalue {lowest!r}")


@dataclass(frozen=True, eq=False)
class Projector(LinearOperator):
    """Hermitian and idempotent."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_hermitian(PROJECTOR_TOL):
            raise InvariantViolationError("projector is not Hermitian")
        if np.max(np.abs(self.entries @ self.entries - self.entries)) > PROJECTOR_TOL:
            raise InvariantViolationError("projector is not idempotent")


def _same_kind(template: LinearOperator, layout: SpaceLayout, entries) -> LinearOperator:
    # Kronecker products keep projectors projectors and
    # density operators density operators.
    if isinstance(template, (Projector, DensityOperator)):
        return type(template)(layout, entries)
    return LinearOperator(layout, entries)


# ── Operations ────────────────────────────────────────────
def tensor_product(a, b):
    layout = a.layout.concat(b.layout)
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(layout, np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, LinearOperator) and isinstance(b, LinearOperator):
        entries = np.kron(a.entries, b.entries)
        if type(a) is type(b):
            return _same_kind(a, layout, entries)
        return LinearOperator(layout, entries)
    raise TypeError(f"cannot take the tensor product of {type(a).__name__} and {type(b).__name__}")


def superpose(terms: Sequence[Tuple[complex, StateVector]]) -> StateVector:
    """Σ c·|ψ⟩ over states sharing one layout; the sum must be normalized."""
    layout = terms[0][1].layout
    amplitudes = np.zeros(layout.dim, dtype=complex)
    for coefficient, state in terms:
        layout.require_same(state.layout)
        amplitudes = amplitudes + coefficient * state.amplitudes
    return StateVector(layout, amplitudes)


def partial_trace(rho: LinearOperator, keep: Iterable[SystemId]):
    keep = system_set(keep)
    if not keep:
        raise UnknownSystemError("partial trace must keep at least one system")
    kept = rho.layout.restrict(keep)
    traced_labels = [label for label in rho.layout.labels if label not in keep]
    traced_dim = math.prod(rho.layout.dimension_of(label) for label in traced_labels)

    n     = len(rho.layout.factors)
    order = [rho.layout.index_of(label) for label in kept.labels + tuple(traced_labels)]
    tensor = rho.entries.reshape(rho.layout.dims * 2).transpose(order + [n + i for i in order])
    reduced = np.trace(
        tensor.reshape(kept.dim, traced_dim, kept.dim, traced_dim), axis1=1, axis2=3
    )
    log.debug("partial trace %s -> %s", rho.layout, kept)
    if isinstance(rho, DensityOperator):
        return DensityOperator(kept, reduced)
    return LinearOperator(kept, reduced)


class EigenPair(NamedTuple):
    value:      float
    vector:     StateVector
    degenerate: bool


def _fix_phase(vector: np.ndarray) -> np.ndarray:
    # Largest component real and positive, so eigenvectors are reproducible.
    pivot = vector[np.argmax(np.abs(vector))]
    return vector * (abs(pivot) / pivot)


def hermitian_eigensystem(op: LinearOperator) -> List[EigenPair]:
    """Eigenpairs with eigenvalues in descending order.

    Neighbouring eigenvalues closer than the relative degeneracy gap are
    flagged; their eigenvectors are an arbitrary orthonormal basis of the
    eigenspace.
    """
    if not op.is_hermitian(EIGEN_HERMITIAN_TOL):
        raise SymmetryViolationError(f"operator on {op.layout} is not Hermitian")
    values, vectors = linalg.eigh(op.entries)
    values, vectors = values[::-1], vectors[:, ::-1]

    degenerate = [False] * len(values)
    for i in range(1, len(values)):
        scale = max(abs(values[i - 1]), abs(values[i]))
        # Eigenvalues at numerical zero form one cluster whatever their ratio.
        if scale < ZERO_EIGENVALUE or values[i - 1] - values[i] < EIGEN_DEGENERACY_GAP * scale:
            degenerate[i - 1] = degenerate[i] = True
    if any(degenerate):
        log.debug("degenerate eigenvalues on %s: %s", op.layout,
                  [float(v) for v, flag in zip(values, degenerate) if flag])

    return [
        EigenPair(float(values[i]), StateVector(op.layout, _fix_phase(vectors[:, i])), degenerate[i])
        for i in range(len(values))
    ]


def embed_operator(local: LinearOperator, target: SpaceLayout) -> LinearOperator:
    """Act as `local` on its factors of `target` and as identity elsewhere."""
    for label, dim in local.layout.factors:
        if target.dimension_of(label) != dim:
            raise LayoutConflictError(
                f"system {label!r} has dimension {dim} locally but "
                f"{target.dimension_of(label)} in {target}"
            )
    rest  = [label for label in target.labels if label not in local.layout]
    order = list(local.layout.labels) + rest
    dims  = [target.dimension_of(label) for label in order]
    full  = np.kron(local.entries, np.eye(math.prod(target.dimension_of(label) for label in rest)))

    n    = len(order)
    perm = [order.index(label) for label in target.labels]
    entries = full.reshape(dims * 2).transpose(perm + [n + p for p in perm]).reshape(target.dim, target.dim)
    if isinstance(local, Projector):
        return Projector(target, entries)
    return LinearOperator(target, entries)


def dyad(v: StateVector) -> Projector:
    return Projector(v.layout, np.outer(v.amplitudes, v.amplitudes.conj()))


def density(v: StateVector) -> DensityOperator:
    return DensityOperator(v.layout, np.outer(v.amplitudes, v.amplitudes.conj()))


def inner_product(a: StateVector, b: StateVector) -> complex:
    a.layout.require_same(b.layout)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def apply(op: LinearOperator, v: StateVector) -> StateVector:
    """op|v⟩; op must preserve the norm of v."""
    op.layout.require_same(v.layout)
    return StateVector(v.layout, op.entries @ v.amplitudes)


def compose(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    a.layout.require_same(b.layout)
    return LinearOperator(a.layout, a.entries @ b.entries)


def trace(op: LinearOperator) -> complex:
    return complex(np.trace(op.entries))


def reconstruct(pairs: Sequence[EigenPair]) -> np.ndarray:
    """Σ λ|e⟩⟨e| from an eigensystem, for reconstruction checks."""
    return sum(pair.value * np.outer(pair.vector.amplitudes, pair.vector.amplitudes.conj())
               for pair in pairs)
