"""
QRef - Paradox Command
"""
from config import CLI_ALPHA_GAP
from hardy import build_model
from models import ReportDocument, RunConfig
from paradox import negativity_sweep
from report import build_document, paradox_row


def build_report(config: RunConfig) -> ReportDocument:
    alphas = config.alphas()
    if not config.has_grid:
        # A single α must be valid; on a grid degenerate points become rows.
        build_model(alphas[0], CLI_ALPHA_GAP)
    reports = negativity_sweep(alphas, workers=config.workers, min_gap=CLI_ALPHA_GAP)
    return build_document(config, [paradox_row(r, config.tolerance) for r in reports])
