# ================================
# LOCAL POLYTOPE
# ================================
# 2x2 tables only: LP feasibility over the 16 deterministic tables A(a) B(b),
# cross-checked against the eight CHSH facets.

import itertools
import logging
from typing import Dict, List, Tuple

import numpy as np
from scipy.optimize import linprog

from models.errors import ScenarioSizeError
from models.models import CorrelatorTable, LOCAL_BOUND, LocalRealizability

logger = logging.getLogger(__name__)

WEIGHT_CUTOFF = 1e-12
RESIDUAL_TOLERANCE = 1e-9

# Signs of M00, M01, M10, M11 with an odd number of minus signs
FACET_SIGNS: Tuple[Tuple[int, int, int, int], ...] = tuple(
    signs for signs in itertools.product((1, -1), repeat=4) if np.prod(signs) == -1
)


def _as_vector(table: CorrelatorTable) -> Tuple[np.ndarray, Tuple[str, ...], Tuple[str, ...]]:
    """(M00, M01, M10, M11) in label order, after checking the scenario size"""
    a_labels = sorted({triple[0] for triple in table.entries})
    b_labels = sorted({triple[1] for triple in table.entries})
    c_labels = sorted({triple[2] for triple in table.entries})
    if len(a_labels) != 2 or len(b_labels) != 2 or len(c_labels) != 1 or table.coupled:
        raise ScenarioSizeError(
            f"Local polytope test needs a 2x2 table with null c, got a={a_labels}, b={b_labels}, c={c_labels}"
        )
    c = c_labels[0]
    vector = np.array([table.get(a, b, c) for a in a_labels for b in b_labels])
    return vector, tuple(a_labels), tuple(b_labels)


def deterministic_strategies() -> List[Tuple[Tuple[int, int], Tuple[int, int]]]:
    """The 16 response pairs ((A(a0), A(a1)), (B(b0), B(b1)))"""
    return [
        (responses_A, responses_B)
        for responses_A in itertools.product((-1, 1), repeat=2)
        for responses_B in itertools.product((-1, 1), repeat=2)
    ]


def _strategy_matrix() -> np.ndarray:
    """4 x 16 matrix whose columns are the deterministic correlator tables"""
    columns = [
        [x * y for x in responses_A for y in responses_B]
        for responses_A, responses_B in deterministic_strategies()
    ]
    return np.array(columns, dtype=float).T


def _strategy_name(responses_A, responses_B, a_labels, b_labels) -> str:
    def side(labels, responses):
        return ",".join(f"{label}:{value:+d}" for label, value in zip(labels, responses))
    return f"A({side(a_labels, responses_A)}) B({side(b_labels, responses_B)})"


def chsh_facet_values(table: CorrelatorTable) -> Tuple[float, ...]:
    """The eight values sum(+/- M(a, b)) with an odd number of minus signs"""
    vector, _, _ = _as_vector(table)
    return tuple(float(np.dot(signs, vector)) for signs in FACET_SIGNS)


def satisfies_chsh_facets(table: CorrelatorTable, tolerance: float = 1e-9) -> bool:
    """All eight CHSH facets hold and every entry lies in [-1, 1]"""
    vector, _, _ = _as_vector(table)
    if np.any(np.abs(vector) > 1.0 + tolerance):
        return False
    return max(chsh_facet_values(table)) <= LOCAL_BOUND + tolerance


def decide_local_realizability(table: CorrelatorTable) -> LocalRealizability:
    """
    Is the table a mixture of deterministic local strategies?

    Returns:
        LocalRealizability; realizable tables carry the mixing weights,
        the others a witness: the most violated CHSH facet, or the entry
        lying outside [-1, 1]

    Raises:
        ScenarioSizeError: unless the table has exactly two a and two b settings and null c
    """
    vector, a_labels, b_labels = _as_vector(table)
    facet_values = chsh_facet_values(table)
    strategies = deterministic_strategies()
    matrix = _strategy_matrix()

    a_eq = np.vstack([matrix, np.ones((1, len(strategies)))])
    b_eq = np.concatenate([vector, [1.0]])
    solution = linprog(
        c=np.zeros(len(strategies)),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=[(0.0, None)] * len(strategies),
        method="highs",
    )

    if solution.status == 0 and np.abs(a_eq @ solution.x - b_eq).max() <= RESIDUAL_TOLERANCE:
        weights: Dict[str, float] = {}
        for weight, (responses_A, responses_B) in zip(solution.x, strategies):
            if weight > WEIGHT_CUTOFF:
                weights[_strategy_name(responses_A, responses_B, a_labels, b_labels)] = float(weight)
        logger.debug("Table is local; %d strategies in the mixture", len(weights))
        return LocalRealizability(realizable=True, weights=weights, facet_values=facet_values)

    logger.debug("LP infeasible (status %d: %s)", solution.status, solution.message)
    out_of_range = [
        (f"M({a},{b})", float(value))
        for (a, b), value in zip(itertools.product(a_labels, b_labels), vector)
        if abs(value) > 1.0
    ]
    if out_of_range:
        name, value = out_of_range[0]
        witness = {"kind": "entry_bound", "entry": name, "value": value, "bound": 1.0}
    else:
        index = int(np.argmax(facet_values))
        witness = {
            "kind": "chsh_facet",
            "coefficients": {
                f"M({a},{b})": sign
                for (a, b), sign in zip(itertools.product(a_labels, b_labels), FACET_SIGNS[index])
            },
            "value": facet_values[index],
            "bound": LOCAL_BOUND,
        }
    return LocalRealizability(realizable=False, witness=witness, facet_values=facet_values)
