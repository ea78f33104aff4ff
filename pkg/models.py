"""
QRef - Pydantic Models & Enums
"""
import math
from enum import Enum
from datetime import datetime
from typing import Optional, List

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from config import (
    DEFAULT_ALPHA, DEFAULT_GRID_MIN, DEFAULT_GRID_MAX, DEFAULT_GRID_STEPS, CHECK_TOL,
)


def alpha_grid(alpha_min: float = DEFAULT_GRID_MIN, alpha_max: float = DEFAULT_GRID_MAX,
               steps: int = DEFAULT_GRID_STEPS) -> List[float]:
    """Evenly spaced α values, both endpoints included."""
    return [float(a) for a in np.linspace(alpha_min, alpha_max, steps)]


class MeasurementSetting(str, Enum):
    U = "U"     # basis (u, v)
    D = "D"     # basis (c, d)


class HiddenBranch(str, Enum):
    plus  = "plus"
    minus = "minus"


class Stage(str, Enum):
    initial = "initial"
    final   = "final"


class Classification(str, Enum):
    negative_plus = "negative_plus"
    exceeds_joint = "exceeds_joint"
    degenerate    = "degenerate"
    unclassified  = "unclassified"


class Command(str, Enum):
    verify  = "verify"
    sweep   = "sweep"
    paradox = "paradox"
    demo    = "demo"


class OutputFormat(str, Enum):
    json = "json"
    csv  = "csv"
    text = "text"


# ── Run configuration ─────────────────────────────────────
class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    command:            Command
    alpha:              Optional[float] = None
    alpha_min:          Optional[float] = None
    alpha_max:          Optional[float] = None
    steps:              Optional[int]   = None
    output_format:      OutputFormat    = OutputFormat.text
    output_path:        Optional[str]   = None
    tolerance_override: Optional[float] = None
    workers:            int             = 1

    @field_validator("alpha", "alpha_min", "alpha_max", "tolerance_override")
    @classmethod
    def _finite(cls, v):
        if v is not None and not math.isfinite(v):
            raise ValueError("must be a finite number")
        return v

    @model_validator(mode="after")
    def _check_grid(self):
        grid = (self.alpha_min, self.alpha_max, self.steps)
        if any(v is not None for v in grid):
            if any(v is None for v in grid):
                raise ValueError("a grid needs --alpha-min, --alpha-max and --steps together")
            if self.alpha is not None:
                raise ValueError("give either --alpha or a grid, not both")
            if self.steps < 1:
                raise ValueError("steps must be at least 1")
            if not 0 < self.alpha_min < self.alpha_max < 1:
                raise ValueError("grid bounds must satisfy 0 < min < max < 1")
        if self.tolerance_override is not None and self.tolerance_override <= 0:
            raise ValueError("tolerance must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        return self

    @property
    def has_grid(self) -> bool:
        return self.steps is not None

    @property
    def tolerance(self) -> float:
        return self.tolerance_override if self.tolerance_override is not None else CHECK_TOL

    def alphas(self) -> List[float]:
        """The α values this run covers, ascending."""
        if self.has_grid:
            return alpha_grid(self.alpha_min, self.alpha_max, self.steps)
        if self.alpha is not None:
            return [self.alpha]
        if self.command == Command.sweep:
            return alpha_grid()
        return [DEFAULT_ALPHA]


# ── Report pieces ─────────────────────────────────────────
class Quantity(BaseModel):
    """One number computed both in closed form and from the full state."""
    name:        str
    label:       Optional[str]   = None
    simulated:   Optional[float] = None
    closed_form: Optional[float] = None
    abs_diff:    Optional[float] = None
    passed:      bool            = True


class CheckResult(BaseModel):
    name:     str
    passed:   bool
    residual: Optional[float] = None
    detail:   Optional[str]   = None


class ParadoxReport(BaseModel):
    alpha:                Optional[float] = None
    beta:                 Optional[float] = None
    pseudo_plus:          Optional[float] = None
    pseudo_minus:         Optional[float] = None
    pseudo_plus_closed:   Optional[float] = None
    pseudo_minus_closed:  Optional[float] = None
    hardy_joint:          Optional[float] = None
    classification:       Classification
    imaginary_residual:   Optional[float] = None
    sum_rule_residual:    Optional[float] = None
    closed_form_residual: Optional[float] = None
    detail:               Optional[str]   = None


class ReportRow(BaseModel):
    alpha:              float
    beta:               Optional[float]          = None
    classification:     Optional[Classification] = None
    imaginary_residual: Optional[float]          = None
    quantities:         List[Quantity]           = []
    checks:             List[CheckResult]        = []
    paradox:            Optional[ParadoxReport]  = None

    @property
    def passed(self) -> bool:
        return all(q.passed for q in self.quantities) and all(c.passed for c in self.checks)


class ReportMetadata(BaseModel):
    tool:         str
    version:      str
    config:       RunConfig
    generated_at: datetime


class ReportSummary(BaseModel):
    total_checks:      int
    passed:            int
    failed:            int
    degenerate_points: int = 0

    @property
    def ok(self) -> bool:
        return self.failed == 0


class ReportDocument(BaseModel):
    metadata: ReportMetadata
    rows:     List[ReportRow]
    summary:  ReportSummary
    notes:    List[str] = []
