# ================================
# OPTIMIZATION ENTRY POINTS
# ================================

import logging
from dataclasses import replace
from typing import List, Tuple

from models.errors import BeablesError, EnumerationCapError
from models.models import (
    ASSUMPTION_NAMES,
    OptimizationProblem,
    OptimizationResult,
)
from .ascent import coordinate_ascent
from .enumeration import enumerate_deterministic

logger = logging.getLogger(__name__)

STRATEGIES = ("auto", "enumerate", "ascend")


def optimize(problem: OptimizationProblem, strategy: str = "auto") -> OptimizationResult:
    """
    'enumerate' and 'ascend' run one method; 'auto' enumerates and falls
    back to coordinate ascent when the strategy count exceeds the cap.
    """
    if strategy not in STRATEGIES:
        raise BeablesError(f"Unknown strategy '{strategy}' (expected one of {', '.join(STRATEGIES)})")
    if strategy == "ascend":
        return coordinate_ascent(problem)
    if strategy == "enumerate":
        return enumerate_deterministic(problem)
    try:
        return enumerate_deterministic(problem)
    except EnumerationCapError as e:
        logger.warning("%s; falling back to coordinate ascent", e)
        return coordinate_ascent(problem)


def relaxed_problem(template: OptimizationProblem, name: str) -> OptimizationProblem:
    """The template with one more assumption relaxed; relaxing no_contextuality widens c to |a||b|"""
    assumptions = template.assumptions.relax(name)
    cards = dict(template.cardinalities)
    if name == "no_contextuality" and template.coupling is None:
        cards["c"] = max(cards["c"], cards["a"] * cards["b"])
    return replace(template, assumptions=assumptions, cardinalities=cards)


def bound_ladder(template: OptimizationProblem, strategy: str = "auto") -> List[Tuple[str, OptimizationResult]]:
    """
    Maximum CHSH with nothing relaxed beyond the template, then with each
    single assumption relaxed in turn. Rows are labelled 'none' or by the
    relaxed assumption.
    """
    rows = [("none", optimize(template, strategy))]
    for name in ASSUMPTION_NAMES:
        if not getattr(template.assumptions, name):
            continue
        rows.append((name, optimize(relaxed_problem(template, name), strategy)))
    for label, result in rows:
        logger.info("Ladder %-26s %.9f (%s)", label, result.value, result.certificate.value)
    return rows
