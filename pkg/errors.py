"""
QRef - Errors
Every failure carries an exit code and a human-readable detail, the CLI
maps them straight to the process status.
"""


class QRefError(Exception):
    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


# ── Linear algebra ────────────────────────────────────────
class LayoutConflictError(QRefError):
    """Overlapping systems, mismatched dimensions or mismatched layouts."""


class UnknownSystemError(QRefError):
    """A system label that the layout does not contain."""


class SymmetryViolationError(QRefError):
    """Operator expected Hermitian but is not."""


class InvariantViolationError(QRefError):
    """State, density operator or projector invariants do not hold."""


# ── Postulates ────────────────────────────────────────────
class DisjointnessViolationError(QRefError):
    """Joint probability requested for systems that share a factor."""


# ── Hardy scenario ────────────────────────────────────────
class ParameterDomainError(QRefError):
    exit_code = 4


class DegenerateParameterError(QRefError):
    exit_code = 4


class StageError(QRefError):
    """Experiment state used at the wrong stage (initial vs final)."""


# ── CLI ───────────────────────────────────────────────────
class ConfigError(QRefError):
    exit_code = 3


class ReportWriteError(QRefError):
    exit_code = 5
