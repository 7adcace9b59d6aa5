from typing import Dict, Mapping, Optional, Sequence, Union

import numpy as np

from models.errors import SettingsPriorError
from models.models import (
    BeablesModel,
    CONTEXT_VARIABLES,
    FiniteSpace,
    JointDistribution,
    SETTING_ROLES,
    Triple,
)
from probability.utils import aligned_weights

GLOBAL_VARIABLES = SETTING_ROLES + CONTEXT_VARIABLES

PriorSpec = Union[None, str, Mapping[Triple, float]]


def context_tensor(joint: JointDistribution) -> np.ndarray:
    """Weights of a context joint with axes (A, B, lambda, mu, nu)"""
    return aligned_weights(joint, CONTEXT_VARIABLES)


def resolve_settings_prior(model: BeablesModel, prior: PriorSpec = None) -> Dict[Triple, float]:
    """
    Settings prior p(a, b, c) over the model's allowed triples.

    None falls back to the prior carried by the model, then to uniform;
    'uniform' forces uniform. The result is normalized and strictly
    positive on every allowed triple.
    """
    allowed = model.allowed_triples()
    if prior is None:
        prior = model.settings_prior if model.settings_prior is not None else "uniform"
    if isinstance(prior, str):
        if prior != "uniform":
            raise SettingsPriorError(f"Unknown settings prior '{prior}' (expected 'uniform' or a table)")
        return {triple: 1.0 / len(allowed) for triple in allowed}

    weights = {tuple(str(label) for label in triple): float(value) for triple, value in prior.items()}
    allowed_set = set(allowed)
    stray = [triple for triple, value in weights.items() if triple not in allowed_set and value != 0.0]
    if stray:
        raise SettingsPriorError(f"Settings prior puts weight on disallowed triples: {sorted(stray)}")
    missing = [triple for triple in allowed if weights.get(triple, 0.0) <= 0.0]
    if missing:
        raise SettingsPriorError(
            f"Settings prior must be strictly positive on every allowed triple; zero or missing for {missing}"
        )
    if any(value < 0 for value in weights.values()):
        raise SettingsPriorError("Settings prior has negative weights")
    total = sum(weights[triple] for triple in allowed)
    return {triple: weights[triple] / total for triple in allowed}


def global_joint(model: BeablesModel, prior: PriorSpec = None) -> JointDistribution:
    """p(a, b, c, A, B, lambda, mu, nu) = p(a, b, c) p(A, B, lambda, mu, nu | a, b, c)"""
    prior = resolve_settings_prior(model, prior)
    spaces = tuple(model.space(role) for role in GLOBAL_VARIABLES)
    weights = np.zeros(tuple(space.cardinality for space in spaces))
    for triple, mass in prior.items():
        index = tuple(model.space(role).index(label) for role, label in zip(SETTING_ROLES, triple))
        weights[index] = mass * context_tensor(model.joint_for(triple))
    return JointDistribution(variables=spaces, weights=weights)


def conditional_array(dist: JointDistribution, target: str, givens: Sequence[str]) -> np.ndarray:
    """Dense p(target | givens) with axes givens + (target,); undefined rows are uniform"""
    tensor = aligned_weights(dist, tuple(givens) + (target,))
    mass = tensor.sum(axis=-1, keepdims=True)
    n_target = tensor.shape[-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(mass > 0, tensor / np.where(mass > 0, mass, 1.0), 1.0 / n_target)


def combined_space(name: str, first: FiniteSpace, second: FiniteSpace) -> FiniteSpace:
    """Product space labelled 'x|y'"""
    return FiniteSpace(name=name, labels=tuple(f"{x}|{y}" for x in first.labels for y in second.labels))


def default_value_map(space: FiniteSpace, values: Optional[Mapping[str, float]] = None) -> Dict[str, float]:
    if values is not None:
        return {str(k): float(v) for k, v in values.items()}
    return {label: float(label) for label in space.labels}
