"""
QRef - Shared Utility Helpers
"""
from typing import Optional

from config import SIGNIFICANT_DIGITS
from models import CheckResult, Quantity


def fmt(value: Optional[float]) -> str:
    """Fixed significant digits; empty for missing values."""
    if value is None:
        return ""
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def quantity(name: str, simulated: float, closed_form: float, tolerance: float,
             label: Optional[str] = None) -> Quantity:
    diff = abs(simulated - closed_form)
    return Quantity(
        name=name, label=label, simulated=simulated, closed_form=closed_form,
        abs_diff=diff, passed=diff <= tolerance,
    )


def check(name: str, residual: float, tolerance: float, detail: Optional[str] = None) -> CheckResult:
    return CheckResult(name=name, passed=bool(residual <= tolerance), residual=float(residual), detail=detail)


def passed(name: str, ok: bool, detail: Optional[str] = None) -> CheckResult:
    return CheckResult(name=name, passed=bool(ok), detail=detail)
