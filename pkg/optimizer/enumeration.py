# ================================
# DETERMINISTIC ENUMERATION
# ================================

import itertools
import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from beables.beables_operations import chsh_candidates, model_max_chsh
from models.errors import EnumerationCapError
from models.models import (
    CertificateKind,
    CorrelatorTable,
    OptimizationProblem,
    OptimizationResult,
    SETTING_ROLES,
    SignChoice,
)
from .utils import model_from_conditional, outcome_values, seed_cardinality

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-12


def _domain(keys: Sequence[tuple]) -> Tuple[int, np.ndarray]:
    """Sorted distinct keys and, per cell, the position of its key"""
    distinct = sorted(set(keys))
    position = {key: i for i, key in enumerate(distinct)}
    return len(distinct), np.array([position[key] for key in keys], dtype=int)


def _all_maps(cardinality: int, size: int) -> np.ndarray:
    """Every map from `size` inputs to range(cardinality), lexicographically"""
    rows = list(itertools.product(range(cardinality), repeat=size))
    return np.array(rows, dtype=int).reshape(len(rows), size)


def _partition(keys) -> Tuple[int, ...]:
    """Cells relabelled by order of first appearance of their key"""
    labels: Dict[object, int] = {}
    return tuple(labels.setdefault(key, len(labels)) for key in keys)


class _Scenario:
    """Cells are (allowed context, shared seed value) pairs, context-major"""

    def __init__(self, problem: OptimizationProblem):
        self.problem = problem
        self.cards = dict(problem.cardinalities)
        self.triples = problem.allowed_triples()
        self.n_seed = seed_cardinality(problem)
        self.settings = np.array([
            [problem.labels(role).index(label) for role, label in zip(SETTING_ROLES, triple)]
            for triple in self.triples
        ], dtype=int)
        self.cell_context = np.repeat(np.arange(len(self.triples)), self.n_seed)
        self.cell_seed = np.tile(np.arange(self.n_seed), len(self.triples))
        self.cell_a, self.cell_b, self.cell_c = (self.settings[self.cell_context, i] for i in range(3))
        self.n_cells = len(self.cell_context)

        assumptions = problem.assumptions
        if assumptions.no_conspiracy:
            nu_keys = [(c,) for c in self.cell_c]
        else:
            nu_keys = list(zip(self.cell_a, self.cell_b, self.cell_c))
        self.nu_size, self.nu_index = _domain(nu_keys)

    def lambda_keys(self, nu_cells: np.ndarray) -> List[tuple]:
        keys = zip(self.cell_seed, self.cell_a, self.cell_c, nu_cells)
        if self.problem.assumptions.no_nonlocal_conspiracy_A:
            return list(keys)
        return [key + (b,) for key, b in zip(keys, self.cell_b)]

    def mu_keys(self, nu_cells: np.ndarray) -> List[tuple]:
        keys = zip(self.cell_seed, self.cell_b, self.cell_c, nu_cells)
        if self.problem.assumptions.no_nonlocal_conspiracy_B:
            return list(keys)
        return [key + (a,) for key, a in zip(keys, self.cell_a)]

    def response_keys(self, nu_cells, lambda_cells, mu_cells) -> Tuple[List[tuple], List[tuple]]:
        """What the A and B responses read in each cell"""
        assumptions = self.problem.assumptions
        keys_A = list(zip(self.cell_a, self.cell_c, lambda_cells, nu_cells))
        if not assumptions.bell_factorization_A:
            keys_A = [key + (b, mu) for key, b, mu in zip(keys_A, self.cell_b, mu_cells)]
        keys_B = list(zip(self.cell_b, self.cell_c, mu_cells, nu_cells))
        if not assumptions.bell_factorization_B:
            keys_B = [key + (a, lam) for key, a, lam in zip(keys_B, self.cell_a, lambda_cells)]
        return keys_A, keys_B

    def hidden_maps(self, nu_row: np.ndarray):
        nu_cells = nu_row[self.nu_index]
        lambda_size, lambda_index = _domain(self.lambda_keys(nu_cells))
        mu_size, mu_index = _domain(self.mu_keys(nu_cells))
        return nu_cells, (lambda_size, lambda_index), (mu_size, mu_index)

    def quads(self) -> List[Tuple[Tuple[int, int, int, int], SignChoice]]:
        coupling = self.problem.effective_coupling()
        skeleton = CorrelatorTable(
            entries={triple: 0.0 for triple in self.triples},
            a_labels=self.problem.labels("a"),
            b_labels=self.problem.labels("b"),
            c_labels=self.problem.labels("c"),
            coupled=coupling is not None and not coupling.is_full_product(
                self.problem.labels("a"), self.problem.labels("b"), self.problem.labels("c")
            ),
        )
        position = {triple: i for i, triple in enumerate(self.triples)}
        quads = []
        for *_, contexts in chsh_candidates(skeleton):
            indices = tuple(position[context] for context in contexts)
            quads.extend((indices, sign) for sign in (SignChoice.MINUS_PLUS, SignChoice.PLUS_MINUS))
        return quads


def count_strategies(problem: OptimizationProblem) -> int:
    """
    Number of deterministic (nu, lambda, mu) maps the enumeration visits.

    Raises:
        EnumerationCapError: as soon as the count passes the problem's cap
    """
    scenario = _Scenario(problem)
    cap = problem.enumeration_cap
    nu_maps = problem.cardinalities["nu"] ** scenario.nu_size
    if nu_maps > cap:
        raise EnumerationCapError(nu_maps, cap)
    total = 0
    for nu_row in _all_maps(problem.cardinalities["nu"], scenario.nu_size):
        _, (lambda_size, _), (mu_size, _) = scenario.hidden_maps(nu_row)
        total += problem.cardinalities["lambda"] ** lambda_size * problem.cardinalities["mu"] ** mu_size
        if total > cap:
            raise EnumerationCapError(total, cap)
    return total


def _distinct_groupings(scenario: _Scenario) -> Dict[Tuple[tuple, tuple], tuple]:
    """First (lexicographic) hidden strategy for every distinct pair of response groupings"""
    cards = scenario.cards
    groupings: Dict[Tuple[tuple, tuple], tuple] = {}
    for nu_row in _all_maps(cards["nu"], scenario.nu_size):
        nu_cells, (lambda_size, lambda_index), (mu_size, mu_index) = scenario.hidden_maps(nu_row)
        lambda_cells_all = _all_maps(cards["lambda"], lambda_size)[:, lambda_index]
        mu_cells_all = _all_maps(cards["mu"], mu_size)[:, mu_index]
        for lambda_cells in lambda_cells_all:
            for mu_cells in mu_cells_all:
                keys_A, keys_B = scenario.response_keys(nu_cells, lambda_cells, mu_cells)
                grouping = (_partition(keys_A), _partition(keys_B))
                if grouping not in groupings:
                    groupings[grouping] = (nu_cells, lambda_cells, mu_cells)
    return groupings


def _best_responses(scenario: _Scenario, grouping, quads, values_A, values_B):
    """
    Exact maximum over all outcome responses for one grouping of cells.

    Returns:
        (value, A index per cell, B index per cell)
    """
    classes_A, classes_B = (np.array(part, dtype=int) for part in grouping)
    n_A, n_B = len(values_A), len(values_B)
    groups_A, groups_B = int(classes_A.max()) + 1, int(classes_B.max()) + 1
    size = n_A ** groups_A * n_B ** groups_B
    if size > scenario.problem.enumeration_cap:
        raise EnumerationCapError(size, scenario.problem.enumeration_cap)

    responses_A = _all_maps(n_A, groups_A)[:, classes_A]   # rows x cells
    responses_B = _all_maps(n_B, groups_B)[:, classes_B]
    shape = (len(scenario.triples), scenario.n_seed)
    cells_A = values_A[responses_A].reshape((-1,) + shape)
    cells_B = values_B[responses_B].reshape((-1,) + shape)
    correlators = np.einsum("its,jts->ijt", cells_A, cells_B) / scenario.n_seed

    best = (-np.inf, 0, 0)
    for (i1, i2, i3, i4), sign in quads:
        values = (np.abs(correlators[..., i1] + sign.first * correlators[..., i2])
                  + np.abs(correlators[..., i3] + sign.second * correlators[..., i4]))
        flat = int(np.argmax(values))
        value = float(values.flat[flat])
        if value > best[0] + TIE_TOLERANCE:
            row_A, row_B = np.unravel_index(flat, values.shape)
            best = (value, int(row_A), int(row_B))
    value, row_A, row_B = best
    return value, responses_A[row_A], responses_B[row_B]


def enumerate_deterministic(problem: OptimizationProblem) -> OptimizationResult:
    """
    Exact maximum CHSH value over deterministic strategies allowed by the
    problem's assumption set.

    Ties keep the lexicographically smallest strategy, so the returned model
    is reproducible.

    Raises:
        EnumerationCapError: if the hidden-strategy count exceeds the cap
    """
    examined = count_strategies(problem)
    scenario = _Scenario(problem)
    quads = scenario.quads()
    values_A, values_B = outcome_values(problem, "A"), outcome_values(problem, "B")

    groupings = _distinct_groupings(scenario)
    logger.debug("%d hidden strategies, %d distinct response groupings", examined, len(groupings))

    best = None
    trace: List[float] = []
    for grouping, hidden in groupings.items():
        value, responses_A, responses_B = _best_responses(scenario, grouping, quads, values_A, values_B)
        if best is None or value > best[0] + TIE_TOLERANCE:
            best = (value, hidden, responses_A, responses_B)
            trace.append(value)

    value, (nu_cells, lambda_cells, mu_cells), responses_A, responses_B = best
    cards = problem.cardinalities
    conditional = np.zeros(tuple(cards[role] for role in ("a", "b", "c", "nu", "lambda", "mu", "A", "B")))
    for cell in range(scenario.n_cells):
        a, b, c = scenario.settings[scenario.cell_context[cell]]
        index = (a, b, c, nu_cells[cell], lambda_cells[cell], mu_cells[cell], responses_A[cell], responses_B[cell])
        conditional[index] += 1.0 / scenario.n_seed

    model = model_from_conditional(problem, conditional, name="enumeration-best")
    chsh = model_max_chsh(model)
    if abs(chsh.value - value) > 1e-9:
        logger.warning("Enumerated value %.12f re-scores as %.12f", value, chsh.value)
    logger.info("Enumeration (%s): max CHSH %.9f", problem.assumptions.label(), chsh.value)
    return OptimizationResult(
        model=model,
        chsh=chsh,
        certificate=CertificateKind.ENUMERATION_EXACT,
        trace=tuple(trace),
        problem=problem,
        strategies_examined=examined,
    )
