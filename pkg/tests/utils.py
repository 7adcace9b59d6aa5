import itertools
from pathlib import Path
from typing import Dict, Mapping, Optional

import numpy as np

from model_files.model_document import parse_model
from models.models import (
    BeablesModel,
    CONTEXT_VARIABLES,
    CorrelatorTable,
    FiniteSpace,
    JointDistribution,
    ROLES,
    SETTING_ROLES,
    outcome_labels,
    outcome_value_map,
)
from probability.utils import random_distribution

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

SMALL_CARDINALITIES = {"a": 2, "b": 2, "c": 1, "lambda": 2, "mu": 2, "nu": 2, "A": 2, "B": 2}


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def load_fixture(name: str) -> BeablesModel:
    return parse_model(fixture_path(f"{name}.model"))


def model_spaces(cardinalities: Optional[Mapping[str, int]] = None) -> Dict[str, FiniteSpace]:
    cards = dict(SMALL_CARDINALITIES)
    cards.update(cardinalities or {})
    return {
        role: FiniteSpace(role, outcome_labels(cards[role]) if role in ("A", "B")
                          else tuple(str(i) for i in range(cards[role])))
        for role in ROLES
    }


def model_from_tensors(spaces: Mapping[str, FiniteSpace], tensors: Mapping[tuple, np.ndarray],
                       name: str = "test") -> BeablesModel:
    """Model from per-context weight tensors with axes (A, B, lambda, mu, nu)"""
    context_spaces = tuple(spaces[role] for role in CONTEXT_VARIABLES)
    return BeablesModel(
        spaces=spaces,
        context_joints={
            triple: JointDistribution(variables=context_spaces, weights=weights)
            for triple, weights in tensors.items()
        },
        value_map_A=outcome_value_map(spaces["A"].labels),
        value_map_B=outcome_value_map(spaces["B"].labels),
        name=name,
    )


def uniform_context_model(weights: np.ndarray, cardinalities: Optional[Mapping[str, int]] = None,
                          name: str = "test") -> BeablesModel:
    """The same (A, B, lambda, mu, nu) tensor in every setting context"""
    spaces = model_spaces(cardinalities)
    triples = itertools.product(*(spaces[role].labels for role in SETTING_ROLES))
    return model_from_tensors(spaces, {triple: np.asarray(weights, dtype=float) for triple in triples}, name)


def settings_model(tensor_for, cardinalities: Optional[Mapping[str, int]] = None,
                   name: str = "test") -> BeablesModel:
    """Context tensors computed from the integer setting indices (i_a, i_b, i_c)"""
    spaces = model_spaces(cardinalities)
    tensors = {}
    for indices in itertools.product(*(range(spaces[role].cardinality) for role in SETTING_ROLES)):
        triple = tuple(spaces[role].labels[i] for role, i in zip(SETTING_ROLES, indices))
        tensors[triple] = np.asarray(tensor_for(*indices), dtype=float)
    return model_from_tensors(spaces, tensors, name)


def random_model(rng: np.random.Generator, cardinalities: Optional[Mapping[str, int]] = None,
                 zero_fraction: float = 0.0, name: str = "random") -> BeablesModel:
    spaces = model_spaces(cardinalities)
    context_spaces = tuple(spaces[role] for role in CONTEXT_VARIABLES)
    joints = {
        triple: random_distribution(context_spaces, rng, zero_fraction)
        for triple in itertools.product(*(spaces[role].labels for role in SETTING_ROLES))
    }
    return BeablesModel(
        spaces=spaces,
        context_joints=joints,
        value_map_A=outcome_value_map(spaces["A"].labels),
        value_map_B=outcome_value_map(spaces["B"].labels),
        name=name,
    )


def table_from_matrix(matrix, c: str = "0") -> CorrelatorTable:
    matrix = np.asarray(matrix, dtype=float)
    return CorrelatorTable(
        entries={(str(i), str(j), c): float(matrix[i, j]) for i in range(matrix.shape[0])
                 for j in range(matrix.shape[1])},
        a_labels=tuple(str(i) for i in range(matrix.shape[0])),
        b_labels=tuple(str(j) for j in range(matrix.shape[1])),
        c_labels=(c,),
    )


def outcome_tensor(p_AB, hidden_shape=(1, 1, 1)) -> np.ndarray:
    """(A, B) weights placed on the first hidden label of every hidden beable"""
    p_AB = np.asarray(p_AB, dtype=float)
    tensor = np.zeros(p_AB.shape + tuple(hidden_shape))
    tensor[..., 0, 0, 0] = p_AB
    return tensor
