from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from models.models import (
    AssumptionSet,
    BeablesModel,
    CorrelatorTable,
    JointDistribution,
    OptimizationProblem,
    ROLES,
    SETTING_ROLES,
    outcome_value_map,
)

# Axes of the full factorized tensor. s is a shared seed, uniform and
# independent of the settings, that both lambda and mu may read when
# no_correlation is relaxed.
AXES = ("s", "a", "b", "c", "nu", "lambda", "mu", "A", "B")
AXIS = {name: i for i, name in enumerate(AXES)}

# Factors in update order; p(s) is fixed
FACTOR_ORDER = ("nu", "lambda", "mu", "A", "B")

Factors = Dict[str, np.ndarray]


def factor_parents(assumptions: AssumptionSet) -> Dict[str, Tuple[str, ...]]:
    """
    Parents of each conditional factor. Every enforced assumption removes
    exactly the dependence it forbids:

        p(nu|c)  p(lambda|s,a,c,nu)  p(mu|s,b,c,nu)  p(A|a,c,lambda,nu)  p(B|b,c,mu,nu)
    """
    parents = {
        "s": (),
        "nu": ("c",) if assumptions.no_conspiracy else ("a", "b", "c"),
        "lambda": ("s", "a", "c", "nu") + (() if assumptions.no_nonlocal_conspiracy_A else ("b",)),
        "mu": ("s", "b", "c", "nu") + (() if assumptions.no_nonlocal_conspiracy_B else ("a",)),
        "A": ("a", "c", "nu", "lambda") + (() if assumptions.bell_factorization_A else ("b", "mu")),
        "B": ("b", "c", "nu", "mu") + (() if assumptions.bell_factorization_B else ("a", "lambda")),
    }
    return parents


def seed_cardinality(problem: OptimizationProblem) -> int:
    return 1 if problem.assumptions.no_correlation else problem.seed_cardinality


def axis_sizes(problem: OptimizationProblem) -> Dict[str, int]:
    sizes = {role: problem.cardinalities[role] for role in ROLES}
    sizes["s"] = seed_cardinality(problem)
    return sizes


def factor_shape(target: str, parents: Tuple[str, ...], sizes: Mapping[str, int]) -> Tuple[int, ...]:
    """Full-rank shape with size 1 on every axis the factor does not read"""
    return tuple(sizes[axis] if axis == target or axis in parents else 1 for axis in AXES)


def random_factors(problem: OptimizationProblem, rng: np.random.Generator) -> Factors:
    """Dirichlet(1) rows for every conditional factor, uniform p(s)"""
    sizes = axis_sizes(problem)
    parents = factor_parents(problem.assumptions)
    factors = {"s": np.full(factor_shape("s", (), sizes), 1.0 / sizes["s"])}
    for target in FACTOR_ORDER:
        shape = factor_shape(target, parents[target], sizes)
        draws = rng.exponential(size=shape)
        factors[target] = draws / draws.sum(axis=AXIS[target], keepdims=True)
    return factors


def full_tensor(factors: Factors, skip: Optional[str] = None) -> np.ndarray:
    """Broadcast product of the factors, optionally leaving one out"""
    product = None
    for name, factor in factors.items():
        if name == skip:
            continue
        product = factor if product is None else product * factor
    return product


def conditional_tensor(factors: Factors) -> np.ndarray:
    """p(nu, lambda, mu, A, B | a, b, c) with axes (a, b, c, nu, lambda, mu, A, B)"""
    return full_tensor(factors).sum(axis=AXIS["s"])


def outcome_values(problem: OptimizationProblem, role: str) -> np.ndarray:
    labels = problem.labels(role)
    value_map = outcome_value_map(labels)
    return np.array([value_map[label] for label in labels])


def correlators_from_factors(problem: OptimizationProblem, factors: Factors) -> CorrelatorTable:
    conditional = conditional_tensor(factors)
    outcomes = conditional.sum(axis=(3, 4, 5))  # a, b, c, A, B
    values = np.einsum("abcxy,x,y->abc", outcomes, outcome_values(problem, "A"), outcome_values(problem, "B"))
    coupling = problem.effective_coupling()
    entries = {}
    for triple in problem.allowed_triples():
        index = tuple(problem.labels(role).index(label) for role, label in zip(SETTING_ROLES, triple))
        entries[triple] = float(values[index])
    return CorrelatorTable(
        entries=entries,
        a_labels=problem.labels("a"),
        b_labels=problem.labels("b"),
        c_labels=problem.labels("c"),
        coupled=coupling is not None and not coupling.is_full_product(
            problem.labels("a"), problem.labels("b"), problem.labels("c")
        ),
    )


def model_from_conditional(problem: OptimizationProblem, conditional: np.ndarray, name: str) -> BeablesModel:
    """
    Wrap p(nu, lambda, mu, A, B | a, b, c) (axes a, b, c, nu, lambda, mu, A, B)
    as a model over the problem's allowed contexts.
    """
    spaces = {role: problem.space(role) for role in ROLES}
    context_spaces = tuple(spaces[role] for role in ("A", "B", "lambda", "mu", "nu"))
    joints = {}
    for triple in problem.allowed_triples():
        index = tuple(problem.labels(role).index(label) for role, label in zip(SETTING_ROLES, triple))
        block = conditional[index]  # nu, lambda, mu, A, B
        joints[triple] = JointDistribution(variables=context_spaces, weights=block.transpose(3, 4, 1, 2, 0))
    return BeablesModel(
        spaces=spaces,
        context_joints=joints,
        value_map_A=outcome_value_map(problem.labels("A")),
        value_map_B=outcome_value_map(problem.labels("B")),
        coupling=problem.effective_coupling(),
        name=name,
    )


def model_from_factors(problem: OptimizationProblem, factors: Factors, name: str) -> BeablesModel:
    return model_from_conditional(problem, conditional_tensor(factors), name)
