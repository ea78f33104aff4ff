"""
QRef - Reports
Row assembly shared by the commands, and serialization of a ReportDocument
to JSON, CSV or an aligned text table.
"""
import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence

from config import CLI_ALPHA_GAP, LOCALITY_TOL, TOOL_NAME, VERSION
from errors import DegenerateParameterError, ParameterDomainError, ReportWriteError
from hardy import (
    HARDY_ITEMS, POINTERS, HardyModel, HardyParameters,
    build_model, closed_form_marginal, conditional_outcome_probabilities,
    device_marginal, evolve, initial_state, outcome_distribution, verify_items,
)
from models import (
    CheckResult, Classification, HiddenBranch, MeasurementSetting, OutputFormat, ParadoxReport,
    Quantity, ReportDocument, ReportMetadata, ReportRow, ReportSummary, RunConfig,
)
from paradox import consistency_checks, paradox_report
from utils import check, fmt, quantity

log = logging.getLogger(__name__)

U, D = MeasurementSetting.U, MeasurementSetting.D
SETTING_PAIRS = ((U, U), (U, D), (D, U), (D, D))

QUANTITY_NAMES = (
    [f"item{item}" for item, *_ in HARDY_ITEMS]
    + [f"P_{s1.value}{s2.value}_{j}{k}" for s1, s2 in SETTING_PAIRS for j in POINTERS for k in POINTERS]
    + [f"p_M{i}_m{j}" for i in (1, 2) for j in POINTERS]
    + ["pseudo_plus", "pseudo_minus", "sum_rule"]
)
BASE_COLUMNS = ["alpha", "beta", "classification", "imaginary_residual", "passed"]
CSV_COLUMNS  = BASE_COLUMNS + [f"{name}_{part}" for name in QUANTITY_NAMES for part in ("sim", "closed", "diff")]


# ── Quantities and checks ─────────────────────────────────
def item_quantities(params: HardyParameters, tolerance: float) -> List[Quantity]:
    return [
        quantity(f"item{r.item}", r.value, r.expected, tolerance, label=r.label)
        for r in verify_items(params, tolerance)
    ]


def table_quantities(params: HardyParameters, tolerance: float) -> List[Quantity]:
    out = []
    for settings in SETTING_PAIRS:
        table = outcome_distribution(params, settings)
        s1, s2 = (s.value for s in settings)
        for (j, k), p in sorted(table.items()):
            out.append(quantity(f"P_{s1}{s2}_{j}{k}", p, table.reference[(j, k)], tolerance,
                                label=f"P(M1,{j},M2,{k}) {s1}/{s2}"))
    return out


def marginal_quantities(params: HardyParameters, tolerance: float) -> List[Quantity]:
    final = evolve(initial_state(params), (D, D))
    closed = dict(closed_form_marginal(params, D))
    out = []
    for i in (1, 2):
        for j, p in device_marginal(final, f"M{i}"):
            if j in POINTERS:
                out.append(quantity(f"p_M{i}_m{j}", p, closed[j], tolerance, label=f"p_{j} on M{i} (D/D)"))
    return out


def paradox_quantities(report: ParadoxReport, tolerance: float) -> List[Quantity]:
    return [
        quantity("pseudo_plus", report.pseudo_plus, report.pseudo_plus_closed, tolerance,
                 label="Tr[π(φ+) π(M1:m2) π(M2:m2) ρ]"),
        quantity("pseudo_minus", report.pseudo_minus, report.pseudo_minus_closed, tolerance,
                 label="Tr[π(φ-) π(M1:m2) π(M2:m2) ρ]"),
        quantity("sum_rule", report.pseudo_plus + report.pseudo_minus, report.hardy_joint, tolerance,
                 label="pseudo+ + pseudo- vs P(D1=1,D2=1)"),
    ]


def hardy_checks(params: HardyParameters, tolerance: float) -> List[CheckResult]:
    out = []
    for settings in SETTING_PAIRS:
        name = "".join(s.value for s in settings)
        out.append(check(f"table_sum_{name}", abs(outcome_distribution(params, settings).total() - 1), tolerance))

    initial = initial_state(params)
    for device, partner_index in (("M1", 1), ("M2", 0)):
        marginals = []
        for partner in (U, D):
            settings = [D, D]
            settings[partner_index] = partner
            marginals.append(device_marginal(evolve(initial, tuple(settings)), device))
        residual = max(abs(p - q) for (_, p), (_, q) in zip(*marginals))
        out.append(check(f"marginal_locality_{device}", residual, LOCALITY_TOL))

    conditional = conditional_outcome_probabilities(params, D)
    plus, minus = conditional[HiddenBranch.plus], conditional[HiddenBranch.minus]
    closed = dict(closed_form_marginal(params, D))
    residual = max(
        abs(params.alpha ** 2 * plus[j - 1] + params.beta ** 2 * minus[j - 1] - closed[j])
        for j in POINTERS
    )
    out.append(check("conditional_marginal_consistency", residual, tolerance))
    return out


# ── Rows ──────────────────────────────────────────────────
def degenerate_row(alpha: float, detail: Optional[str] = None) -> ReportRow:
    return ReportRow(
        alpha=alpha, classification=Classification.degenerate,
        paradox=ParadoxReport(alpha=alpha, classification=Classification.degenerate, detail=detail),
    )


def paradox_row(report: ParadoxReport, tolerance: float) -> ReportRow:
    if report.classification == Classification.degenerate:
        return degenerate_row(report.alpha, report.detail)
    return ReportRow(
        alpha=report.alpha,
        beta=report.beta,
        classification=report.classification,
        imaginary_residual=report.imaginary_residual,
        quantities=paradox_quantities(report, tolerance),
        checks=consistency_checks(report, tolerance),
        paradox=report,
    )


def full_row(model: HardyModel, tolerance: float) -> ReportRow:
    """Items, outcome tables, marginals and the paradox numbers at one α."""
    params = model.params
    row = paradox_row(paradox_report(params.alpha), tolerance)
    quantities = (item_quantities(params, tolerance) + table_quantities(params, tolerance)
                  + marginal_quantities(params, tolerance) + row.quantities)
    return row.model_copy(update={
        "quantities": quantities,
        "checks": hardy_checks(params, tolerance) + row.checks,
    })


def rows_for(config: RunConfig, make_row: Callable[[HardyModel], ReportRow]) -> List[ReportRow]:
    """One row per α of the run.

    A degenerate α is fatal for a single-point run and kept as an empty row
    on a grid. With several workers the rows are computed on a thread pool.
    """
    def row_at(alpha: float) -> ReportRow:
        try:
            model = build_model(alpha, CLI_ALPHA_GAP)
        except (DegenerateParameterError, ParameterDomainError) as exc:
            if not config.has_grid:
                raise
            log.info("α=%s is degenerate, row kept without values", alpha)
            return degenerate_row(alpha, exc.detail)
        return make_row(model)

    alphas = config.alphas()
    if config.workers > 1 and len(alphas) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(row_at, alphas))
    return [row_at(alpha) for alpha in alphas]


def summarize(rows: Sequence[ReportRow]) -> ReportSummary:
    results = [r.passed for row in rows for r in (*row.quantities, *row.checks)]
    return ReportSummary(
        total_checks=len(results),
        passed=sum(results),
        failed=len(results) - sum(results),
        degenerate_points=sum(row.classification == Classification.degenerate for row in rows),
    )


def build_document(config: RunConfig, rows: Iterable[ReportRow], notes: Sequence[str] = ()) -> ReportDocument:
    rows = sorted(rows, key=lambda row: row.alpha)
    return ReportDocument(
        metadata=ReportMetadata(
            tool=TOOL_NAME, version=VERSION, config=config,
            generated_at=datetime.now(timezone.utc),
        ),
        rows=rows,
        summary=summarize(rows),
        notes=list(notes),
    )


# ── Serialization ─────────────────────────────────────────
def _csv_record(row: ReportRow) -> List[str]:
    record = {
        "alpha": fmt(row.alpha),
        "beta": fmt(row.beta),
        "classification": row.classification.value if row.classification else "",
        "imaginary_residual": fmt(row.imaginary_residual),
        "passed": str(row.passed).lower(),
    }
    by_name = {q.name: q for q in row.quantities}
    for name in QUANTITY_NAMES:
        q = by_name.get(name)
        record[f"{name}_sim"]    = fmt(q.simulated) if q else ""
        record[f"{name}_closed"] = fmt(q.closed_form) if q else ""
        record[f"{name}_diff"]   = fmt(q.abs_diff) if q else ""
    return [record[column] for column in CSV_COLUMNS]


def _to_csv(doc: ReportDocument) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in doc.rows:
        writer.writerow(_csv_record(row))
    return buffer.getvalue()


def _table(header: Sequence[str], lines: Sequence[Sequence[str]], indent: str = "  ") -> List[str]:
    widths = [max(len(cell) for cell in column) for column in zip(header, *lines)]
    return [indent + "  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip()
            for line in (header, *lines)]


def _to_text(doc: ReportDocument) -> str:
    meta = doc.metadata
    out = [f"{meta.tool} {meta.version}  {meta.config.command.value}"]
    if doc.notes:
        out.append("")
        out.extend(doc.notes)
    for row in doc.rows:
        status = "PASS" if row.passed else "FAIL"
        classification = row.classification.value if row.classification else "-"
        out += ["", f"α = {fmt(row.alpha)}  β = {fmt(row.beta) or '-'}  {classification}  [{status}]"]
        if row.quantities:
            out += _table(
                ("quantity", "label", "simulated", "closed form", "|diff|", ""),
                [(q.name, q.label or "", fmt(q.simulated), fmt(q.closed_form), fmt(q.abs_diff),
                  "ok" if q.passed else "FAIL") for q in row.quantities],
            )
        if row.checks:
            out += _table(
                ("check", "residual", ""),
                [(c.name, fmt(c.residual), "ok" if c.passed else "FAIL") for c in row.checks],
            )
    s = doc.summary
    out += ["", f"summary: {s.total_checks} checks, {s.passed} passed, {s.failed} failed, "
                f"{s.degenerate_points} degenerate points"]
    return "\n".join(out) + "\n"


def serialize(doc: ReportDocument, output_format: OutputFormat) -> bytes:
    if output_format == OutputFormat.json:
        return doc.model_dump_json(indent=2).encode("utf-8")
    if output_format == OutputFormat.csv:
        return _to_csv(doc).encode("utf-8")
    return _to_text(doc).encode("utf-8")


def parse_csv(data: bytes) -> List[Dict[str, str]]:
    return list(csv.DictReader(io.StringIO(data.decode("utf-8"))))


def write_output(data: bytes, path: Optional[str], stream=None) -> None:
    """Write to `path`, or to `stream` (stdout's buffer) when no path is given."""
    if path is None:
        stream.write(data)
        stream.flush()
        return
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise ReportWriteError(f"cannot write report to {path}: {exc}") from exc
    log.info("report written to %s", path)
