# ================================
# REPORTS
# ================================
# Report documents hold no timestamps, so the same inputs give byte-identical files.

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import pandas as pd

from models.models import (
    AssumptionReport,
    ChshResult,
    CorrelatorTable,
    LocalRealizability,
    OptimizationResult,
    QUANTUM_BOUND,
    ValidationReport,
)

logger = logging.getLogger(__name__)

REPORT_FORMAT_VERSION = 1
VALUE_FORMAT = "{:.9f}"


def _frame_text(frame: pd.DataFrame) -> str:
    if frame.empty:
        return "(empty)"
    return frame.to_string(index=False)


def correlator_frame(table: CorrelatorTable) -> pd.DataFrame:
    rows = [
        {"a": a, "b": b, "c": c, "M": value}
        for (a, b, c), value in sorted(table.entries.items())
    ]
    return pd.DataFrame(rows, columns=["a", "b", "c", "M"])


def render_table(table: CorrelatorTable) -> str:
    frame = correlator_frame(table)
    frame["M"] = frame["M"].map(VALUE_FORMAT.format)
    header = "Correlator table" + (" (coupled settings)" if table.coupled else "")
    return f"{header}\n{_frame_text(frame)}"


def render_chsh(result: ChshResult) -> str:
    return (
        f"CHSH a={result.a} a'={result.a_prime} b={result.b} b'={result.b_prime} c={result.c} "
        f"sign {result.sign.value}: {VALUE_FORMAT.format(result.value)}"
    )


def render_chsh_list(results: Iterable[ChshResult]) -> str:
    rows = [
        {
            "a": r.a, "a'": r.a_prime, "b": r.b, "b'": r.b_prime, "c": r.c,
            "sign": r.sign.value, "CHSH": VALUE_FORMAT.format(r.value),
        }
        for r in results
    ]
    return _frame_text(pd.DataFrame(rows))


def render_product_form(residual: float) -> str:
    return f"product-form residual max|M - Abar Bbar|: {residual:.3e}"


def assumption_frame(report: AssumptionReport) -> pd.DataFrame:
    rows = []
    for name, verdict in report.verdicts.items():
        rows.append({
            "assumption": name,
            "max_dev": f"{verdict.max_dev:.3e}",
            "weighted_dev": f"{verdict.weighted_dev:.3e}",
            "verdict": "pass" if verdict.passed else "FAIL",
        })
    return pd.DataFrame(rows, columns=["assumption", "max_dev", "weighted_dev", "verdict"])


def render_assumption_report(report: AssumptionReport) -> str:
    lines = [_frame_text(assumption_frame(report)), ""]
    for name in report.failed():
        worst = report.verdicts[name].worst_context
        if worst:
            lines.append(f"  {name}: worst context {json.dumps(worst, sort_keys=True)}")
    if report.c_null_deviation is not None:
        lines.append(f"p(nu|a,b) = p(nu) deviation (c null): {report.c_null_deviation:.3e}")
    if report.local_causality is not None:
        lines.append(f"local causality p(A,B|...) = p(A|...) p(B|...) deviation: {report.local_causality:.3e}")
    lines.append(f"tolerance: {report.tolerance:g}")
    lines.append(f"bound supported by the verdicts: {report.bound:g}")
    lines.append(f"quantum reference: {VALUE_FORMAT.format(report.quantum_reference)}")
    return "\n".join(lines)


def render_validation(report: ValidationReport) -> str:
    if report.ok:
        return "model is valid"
    return "\n".join(["model is invalid:"] + [f"  {violation}" for violation in report.violations])


def render_optimization(result: OptimizationResult) -> str:
    return f"max CHSH = {VALUE_FORMAT.format(result.value)} ({result.certificate.value})"


def render_ladder(rows: List[Tuple[str, OptimizationResult]]) -> str:
    frame = pd.DataFrame(
        [
            {"relaxed": label, "max CHSH": VALUE_FORMAT.format(result.value), "certificate": result.certificate.value}
            for label, result in rows
        ],
        columns=["relaxed", "max CHSH", "certificate"],
    )
    return f"{_frame_text(frame)}\nquantum reference: {VALUE_FORMAT.format(QUANTUM_BOUND)}"


def render_realizability(result: LocalRealizability) -> str:
    lines = ["locally realizable" if result.realizable else "NOT locally realizable"]
    if result.realizable and result.weights:
        frame = pd.DataFrame(
            [{"strategy": name, "weight": f"{weight:.6f}"} for name, weight in sorted(result.weights.items())]
        )
        lines.append(_frame_text(frame))
    if result.witness:
        lines.append(f"witness: {json.dumps(result.witness, sort_keys=True)}")
    lines.append("CHSH facet values: " + " ".join(f"{value:+.6f}" for value in result.facet_values))
    return "\n".join(lines)


# ================================
# REPORT DOCUMENTS
# ================================

def _plain(value: Any) -> Any:
    """Sections as JSON-ready values; objects with to_dict are expanded"""
    if hasattr(value, "to_dict"):
        return _plain(value.to_dict())
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if hasattr(value, "item") and callable(value.item):
        return value.item()
    return value


def report_document(command: str, **sections: Any) -> Dict[str, Any]:
    document = {"format_version": REPORT_FORMAT_VERSION, "command": command}
    for name, section in sections.items():
        if section is not None:
            document[name] = _plain(section)
    return document


def dumps_report(document: Dict[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def write_report(document: Dict[str, Any], path: Optional[Union[str, Path]]) -> None:
    if path is None:
        return
    Path(path).write_text(dumps_report(document), encoding="utf-8")
    logger.info("Report written to %s", path)
