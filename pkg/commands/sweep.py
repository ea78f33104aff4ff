"""
QRef - Sweep Command
Full per-α rows over a grid: items, outcome tables, device marginals and
the paradox numbers.
"""
from models import ReportDocument, RunConfig
from report import build_document, full_row, rows_for


def build_report(config: RunConfig) -> ReportDocument:
    return build_document(config, rows_for(config, lambda model: full_row(model, config.tolerance)))
