# ================================
# COORDINATE ASCENT
# ================================
# For a fixed quadruple and sign pattern the objective is linear in each factor,
# so every step moves one factor to a maximizing vertex.

import logging
from typing import List, Optional, Tuple

import numpy as np

from beables.beables_operations import max_chsh, model_max_chsh
from models.errors import BeablesError
from models.models import (
    CertificateKind,
    ChshResult,
    CorrelatorTable,
    OptimizationProblem,
    OptimizationResult,
    SETTING_ROLES,
)
from .utils import (
    AXES,
    AXIS,
    FACTOR_ORDER,
    Factors,
    correlators_from_factors,
    full_tensor,
    model_from_factors,
    outcome_values,
    random_factors,
)

logger = logging.getLogger(__name__)

IMPROVEMENT_TOLERANCE = 1e-12


def _objective_weights(problem: OptimizationProblem, table: CorrelatorTable, best: ChshResult) -> np.ndarray:
    """
    W[a, b, c, A, B] such that sum(W * p) reproduces the current CHSH value,
    broadcast to the full factor axes.
    """
    shape = tuple(problem.cardinalities[role] for role in SETTING_ROLES)
    w = np.zeros(shape)
    m1, m2, m3, m4 = (table.entries[context] for context in best.contexts)
    sigma_1 = 1.0 if m1 + best.sign.first * m2 >= 0 else -1.0
    sigma_2 = 1.0 if m3 + best.sign.second * m4 >= 0 else -1.0
    coefficients = (sigma_1, sigma_1 * best.sign.first, sigma_2, sigma_2 * best.sign.second)
    for context, coefficient in zip(best.contexts, coefficients):
        index = tuple(problem.labels(role).index(label) for role, label in zip(SETTING_ROLES, context))
        w[index] += coefficient

    outcomes = np.multiply.outer(outcome_values(problem, "A"), outcome_values(problem, "B"))
    weights = np.multiply.outer(w, outcomes)  # a, b, c, A, B
    full = [1] * len(AXES)
    for axis in ("a", "b", "c", "A", "B"):
        full[AXIS[axis]] = problem.cardinalities[axis]
    return weights.reshape(full)


def _vertex_update(factors: Factors, target: str, weights: np.ndarray) -> np.ndarray:
    """One-hot factor maximizing the objective with every other factor fixed"""
    coefficient = weights * full_tensor(factors, skip=target)
    factor = factors[target]
    summed = tuple(i for i, size in enumerate(factor.shape) if size == 1 and coefficient.shape[i] != 1)
    coefficient = coefficient.sum(axis=summed, keepdims=True)
    coefficient = np.broadcast_to(coefficient, factor.shape)
    axis = AXIS[target]
    choice = np.argmax(coefficient, axis=axis)
    one_hot = np.zeros(factor.shape)
    np.put_along_axis(one_hot, np.expand_dims(choice, axis), 1.0, axis=axis)
    return one_hot


def _climb(problem: OptimizationProblem, factors: Factors) -> Tuple[Factors, List[float]]:
    """Sweep until a full sweep gains nothing; returns the end point and per-sweep values"""
    table = correlators_from_factors(problem, factors)
    values = [max_chsh(table).value]
    for _ in range(problem.max_sweeps):
        for target in FACTOR_ORDER:
            best = max_chsh(table)
            factors[target] = _vertex_update(factors, target, _objective_weights(problem, table, best))
            table = correlators_from_factors(problem, factors)
        values.append(max_chsh(table).value)
        if values[-1] <= values[-2] + IMPROVEMENT_TOLERANCE:
            break
    return factors, values


def coordinate_ascent(problem: OptimizationProblem, restarts: Optional[int] = None) -> OptimizationResult:
    """
    Best CHSH value reachable by coordinate ascent from `restarts` random
    starts (defaults to the problem's budget).

    The trace holds the incumbent after every sweep, so it never decreases.
    The reported value is a local optimum; it never exceeds the exact
    maximum of enumerate_deterministic on the same problem.
    """
    restarts = problem.restarts if restarts is None else restarts
    if restarts < 1:
        raise BeablesError(f"Coordinate ascent needs at least one restart, got {restarts}")
    rng = np.random.default_rng(problem.seed)

    best_factors: Optional[Factors] = None
    best_value = -np.inf
    trace: List[float] = []
    for restart in range(restarts):
        factors, values = _climb(problem, random_factors(problem, rng))
        for value in values:
            trace.append(max(trace[-1], value) if trace else value)
        if values[-1] > best_value:
            best_factors, best_value = factors, values[-1]
        logger.debug("Restart %d ends at %.12f after %d sweep(s)", restart, values[-1], len(values) - 1)

    model = model_from_factors(problem, best_factors, name="ascent-best")
    chsh: ChshResult = model_max_chsh(model)
    logger.info("Coordinate ascent: max CHSH %.9f over %d restart(s)", chsh.value, restarts)
    return OptimizationResult(
        model=model,
        chsh=chsh,
        certificate=CertificateKind.ASCENT_LOCAL,
        trace=tuple(trace),
        problem=problem,
        strategies_examined=restarts,
    )
