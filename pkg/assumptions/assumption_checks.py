# ================================
# ASSUMPTION CHECKS
# ================================
# Verdicts do not depend on the settings prior; weighted deviations do.

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from beables.utils import PriorSpec, global_joint, resolve_settings_prior
from models.models import (
    ALGEBRAIC_BOUND,
    AssumptionReport,
    AssumptionVerdict,
    BeablesModel,
    CIDeviation,
    JointDistribution,
    LOCAL_BOUND,
    Triple,
)
from probability.probability_operations import ci_deviation

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ContextualityCheck:
    passed: bool
    missing_triples: Tuple[Triple, ...]
    total_triples: int


@dataclass(frozen=True)
class ConspiracyCheck:
    deviation: CIDeviation
    c_null_deviation: Optional[CIDeviation] = None


def _joint(model: BeablesModel, settings_prior: PriorSpec, joint: Optional[JointDistribution]) -> JointDistribution:
    return joint if joint is not None else global_joint(model, settings_prior)


def check_bell_factorization(model: BeablesModel, settings_prior: PriorSpec = None,
                             joint: Optional[JointDistribution] = None) -> Tuple[CIDeviation, CIDeviation]:
    """
    p(A|a,b,c,lambda,mu,nu,B) = p(A|a,c,lambda,nu) and the mirror statement for B.

    Returns:
        (deviation_A, deviation_B)
    """
    joint = _joint(model, settings_prior, joint)
    deviation_A = ci_deviation(joint, X=("A",), Y=("b", "mu", "B"), Z=("a", "c", "lambda", "nu"))
    deviation_B = ci_deviation(joint, X=("B",), Y=("a", "lambda", "A"), Z=("b", "c", "mu", "nu"))
    return deviation_A, deviation_B


def check_local_causality(model: BeablesModel, settings_prior: PriorSpec = None,
                          joint: Optional[JointDistribution] = None) -> float:
    """p(A,B|a,b,c,lambda,mu,nu) = p(A|a,c,lambda,nu) p(B|b,c,mu,nu), as the larger of the two factorization deviations"""
    deviation_A, deviation_B = check_bell_factorization(model, settings_prior, joint)
    return max(deviation_A.max_dev, deviation_B.max_dev)


def check_no_correlation(model: BeablesModel, settings_prior: PriorSpec = None,
                         joint: Optional[JointDistribution] = None) -> CIDeviation:
    """p(lambda|mu,nu,a,b,c) = p(lambda|nu,a,b,c)"""
    joint = _joint(model, settings_prior, joint)
    return ci_deviation(joint, X=("lambda",), Y=("mu",), Z=("nu", "a", "b", "c"))


def check_no_nonlocal_conspiracy(model: BeablesModel, settings_prior: PriorSpec = None,
                                 joint: Optional[JointDistribution] = None) -> Tuple[CIDeviation, CIDeviation]:
    """
    p(lambda|nu,a,b,c) = p(lambda|nu,a,c) and p(mu|nu,a,b,c) = p(mu|nu,b,c).

    Returns:
        (deviation_A, deviation_B)
    """
    joint = _joint(model, settings_prior, joint)
    deviation_A = ci_deviation(joint, X=("lambda",), Y=("b",), Z=("nu", "a", "c"))
    deviation_B = ci_deviation(joint, X=("mu",), Y=("a",), Z=("nu", "b", "c"))
    return deviation_A, deviation_B


def check_no_conspiracy(model: BeablesModel, settings_prior: PriorSpec = None,
                        joint: Optional[JointDistribution] = None) -> ConspiracyCheck:
    """
    p(nu|a,b,c) = p(nu|c). With c null the same test is also reported in
    its unconditioned form p(nu|a,b) = p(nu).
    """
    joint = _joint(model, settings_prior, joint)
    deviation = ci_deviation(joint, X=("nu",), Y=("a", "b"), Z=("c",))
    c_null = None
    if model.space("c").is_null:
        c_null = ci_deviation(joint, X=("nu",), Y=("a", "b"), Z=())
    return ConspiracyCheck(deviation=deviation, c_null_deviation=c_null)


def check_no_contextuality(model: BeablesModel) -> ContextualityCheck:
    """Passes iff a, b and c can be varied independently (full Cartesian product of contexts)"""
    a_labels, b_labels, c_labels = model.labels("a"), model.labels("b"), model.labels("c")
    total = len(a_labels) * len(b_labels) * len(c_labels)
    if model.coupling is None:
        return ContextualityCheck(passed=True, missing_triples=(), total_triples=total)
    missing = tuple(model.coupling.missing_triples(a_labels, b_labels, c_labels))
    return ContextualityCheck(passed=not missing, missing_triples=missing, total_triples=total)


def _worst_context(deviation: CIDeviation) -> Optional[Dict[str, object]]:
    worst = deviation.worst_context()
    if worst is None or worst.spread == 0.0:
        return None
    return {
        "given": dict(zip(deviation.z, worst.z)),
        "varied": dict(zip(deviation.y, worst.y)),
        "spread": worst.spread,
    }


def _verdict(name: str, deviation: CIDeviation, tolerance: float) -> AssumptionVerdict:
    return AssumptionVerdict(
        name=name,
        max_dev=deviation.max_dev,
        weighted_dev=deviation.weighted_dev,
        passed=deviation.max_dev <= tolerance,
        worst_context=_worst_context(deviation),
    )


def full_report(model: BeablesModel, settings_prior: PriorSpec = None,
                tolerance: float = DEFAULT_TOLERANCE) -> AssumptionReport:
    """
    Run every checker and attach the CHSH bound the verdicts support:
    2 when everything passes, 4 as soon as anything fails. The quantum
    reference 2*sqrt(2) rides along for display.
    """
    prior = resolve_settings_prior(model, settings_prior)
    joint = global_joint(model, prior)

    factorization_A, factorization_B = check_bell_factorization(model, prior, joint)
    nonlocal_A, nonlocal_B = check_no_nonlocal_conspiracy(model, prior, joint)
    conspiracy = check_no_conspiracy(model, prior, joint)
    contextuality = check_no_contextuality(model)

    verdicts: Dict[str, AssumptionVerdict] = {
        "bell_factorization_A": _verdict("bell_factorization_A", factorization_A, tolerance),
        "bell_factorization_B": _verdict("bell_factorization_B", factorization_B, tolerance),
        "no_correlation": _verdict("no_correlation", check_no_correlation(model, prior, joint), tolerance),
        "no_nonlocal_conspiracy_A": _verdict("no_nonlocal_conspiracy_A", nonlocal_A, tolerance),
        "no_nonlocal_conspiracy_B": _verdict("no_nonlocal_conspiracy_B", nonlocal_B, tolerance),
        "no_conspiracy": _verdict("no_conspiracy", conspiracy.deviation, tolerance),
    }
    missing_fraction = len(contextuality.missing_triples) / contextuality.total_triples
    verdicts["no_contextuality"] = AssumptionVerdict(
        name="no_contextuality",
        max_dev=missing_fraction,
        weighted_dev=missing_fraction,
        passed=contextuality.passed,
        worst_context={"missing": [list(t) for t in contextuality.missing_triples[:8]]} if not contextuality.passed else None,
    )

    bound = LOCAL_BOUND if all(verdict.passed for verdict in verdicts.values()) else ALGEBRAIC_BOUND
    failed: List[str] = [name for name, verdict in verdicts.items() if not verdict.passed]
    if failed:
        logger.info("Model '%s' fails: %s", model.name, ", ".join(failed))
    return AssumptionReport(
        verdicts=verdicts,
        tolerance=tolerance,
        bound=bound,
        settings_prior=prior,
        missing_triples=contextuality.missing_triples,
        c_null_deviation=conspiracy.c_null_deviation.max_dev if conspiracy.c_null_deviation else None,
        local_causality=max(factorization_A.max_dev, factorization_B.max_dev),
    )
