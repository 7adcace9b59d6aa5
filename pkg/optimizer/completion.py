# ================================
# HIDDEN COMPLETIONS
# ================================

import logging

import numpy as np

from beables.utils import combined_space, context_tensor, resolve_settings_prior
from models.errors import SettingsPriorError
from models.models import (
    BeablesModel,
    FiniteSpace,
    JointDistribution,
    ObservedJoint,
    OBSERVED_VARIABLES,
)

logger = logging.getLogger(__name__)


def hidden_completion(observed: ObservedJoint, common_past: bool = False) -> BeablesModel:
    """
    Model with a = s_A, b = s_B, c null, lambda a copy of A and mu a copy of B.

    With `common_past` the pair (A, B) is also written to nu. The observed
    settings marginal becomes the model's settings prior.

    Raises:
        SettingsPriorError: if some setting pair has zero probability
    """
    dist = observed.distribution
    weights = dist.weights  # A, s_A, B, s_B
    settings = observed.settings_marginal()
    if np.any(settings <= 0):
        zero = [
            (a, b) for (i, a) in enumerate(dist.space("s_A").labels)
            for (j, b) in enumerate(dist.space("s_B").labels) if settings[i, j] <= 0
        ]
        raise SettingsPriorError(f"Observed settings have zero probability for (s_A, s_B) in {zero}")

    space_A, space_B = dist.space("A"), dist.space("B")
    n_A, n_B = space_A.cardinality, space_B.cardinality
    nu_space = combined_space("nu", space_A, space_B) if common_past else FiniteSpace.null("nu")
    spaces = {
        "a": dist.space("s_A").renamed("a"),
        "b": dist.space("s_B").renamed("b"),
        "c": FiniteSpace.null("c"),
        "lambda": space_A.renamed("lambda"),
        "mu": space_B.renamed("mu"),
        "nu": nu_space,
        "A": space_A,
        "B": space_B,
    }
    context_spaces = tuple(spaces[role] for role in ("A", "B", "lambda", "mu", "nu"))

    joints = {}
    prior = {}
    for i, a in enumerate(spaces["a"].labels):
        for j, b in enumerate(spaces["b"].labels):
            outcomes = weights[:, i, :, j] / settings[i, j]
            tensor = np.zeros(tuple(space.cardinality for space in context_spaces))
            for x in range(n_A):
                for y in range(n_B):
                    tensor[x, y, x, y, x * n_B + y if common_past else 0] = outcomes[x, y]
            joints[(a, b, "0")] = JointDistribution(variables=context_spaces, weights=tensor)
            prior[(a, b, "0")] = float(settings[i, j])

    logger.debug("Completed %dx%d observed settings (common past: %s)", settings.shape[0], settings.shape[1], common_past)
    return BeablesModel(
        spaces=spaces,
        context_joints=joints,
        value_map_A=observed.value_map_A,
        value_map_B=observed.value_map_B,
        settings_prior=prior,
        name="hidden-completion" + ("+common-past" if common_past else ""),
    )


def observed_marginal(model: BeablesModel, settings_prior=None) -> JointDistribution:
    """p(A, s_A, B, s_B) of a model with null c, under its settings prior"""
    prior = resolve_settings_prior(model, settings_prior)
    spaces = (model.space("A"), model.space("a").renamed("s_A"), model.space("B"), model.space("b").renamed("s_B"))
    weights = np.zeros(tuple(space.cardinality for space in spaces))
    for (a, b, c), mass in prior.items():
        outcomes = context_tensor(model.joint_for((a, b, c))).sum(axis=(2, 3, 4))
        weights[:, model.space("a").index(a), :, model.space("b").index(b)] += mass * outcomes
    return JointDistribution(variables=spaces, weights=weights)


def observed_from_table(dist: JointDistribution) -> ObservedJoint:
    """Observed joint with the numeric outcome labels as values"""
    if dist.names != OBSERVED_VARIABLES:
        dist = JointDistribution(
            variables=tuple(dist.space(name) for name in OBSERVED_VARIABLES),
            weights=np.transpose(dist.weights, [dist.axis(name) for name in OBSERVED_VARIABLES]),
        )
    return ObservedJoint(
        distribution=dist,
        value_map_A={label: float(label) for label in dist.space("A").labels},
        value_map_B={label: float(label) for label in dist.space("B").labels},
    )
