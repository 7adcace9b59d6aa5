# ================================
# BEABLE RE-SEPARATIONS
# ================================
# Folding c into nu or nu into c keeps every correlator but moves a violated
# assumption between conspiracy and contextuality.

import itertools
import logging
from typing import Dict

import numpy as np

from models.errors import BeablesError
from models.models import (
    BeablesModel,
    FiniteSpace,
    JointDistribution,
    SettingCoupling,
    Triple,
)
from .utils import PriorSpec, combined_space, conditional_array, context_tensor, global_joint, resolve_settings_prior

logger = logging.getLogger(__name__)


def merge_settings_into_common_past(model: BeablesModel, settings_prior: PriorSpec = None) -> BeablesModel:
    """
    Make nu complete information so that c is null: nu' = (c, nu).

    p(A,B,lambda,mu,nu'|a,b) = p(c|a,b) p(A,B,lambda,mu,nu|a,b,c), with
    p(c|a,b) taken from the settings prior. Pairs (a, b) that occur with no
    c at all stay excluded through a coupling.
    """
    prior = resolve_settings_prior(model, settings_prior)
    c_space, nu_space = model.space("c"), model.space("nu")
    new_nu = combined_space("nu", c_space, nu_space)
    null_c = FiniteSpace.null("c")
    spaces = dict(model.spaces, c=null_c, nu=new_nu)
    context_spaces = tuple(spaces[role] for role in ("A", "B", "lambda", "mu", "nu"))

    joints: Dict[Triple, JointDistribution] = {}
    new_prior: Dict[Triple, float] = {}
    for a, b in itertools.product(model.labels("a"), model.labels("b")):
        weights = {c: prior[(a, b, c)] for c in model.labels("c") if (a, b, c) in prior}
        pair_mass = sum(weights.values())
        if pair_mass == 0:
            continue
        blocks = []
        for c in c_space.labels:
            if c in weights:
                blocks.append(weights[c] / pair_mass * context_tensor(model.joint_for((a, b, c))))
            else:
                blocks.append(np.zeros(tuple(s.cardinality for s in model.context_spaces())))
        stacked = np.stack(blocks, axis=-2)  # (A, B, lambda, mu, c, nu)
        shape = stacked.shape[:4] + (new_nu.cardinality,)
        triple = (a, b, null_c.labels[0])
        joints[triple] = JointDistribution(variables=context_spaces, weights=stacked.reshape(shape))
        new_prior[triple] = pair_mass

    coupling = None
    if len(joints) < model.space("a").cardinality * model.space("b").cardinality:
        coupling = SettingCoupling(allowed_triples=frozenset(joints))
    return BeablesModel(
        spaces=spaces,
        context_joints=joints,
        value_map_A=model.value_map_A,
        value_map_B=model.value_map_B,
        coupling=coupling,
        settings_prior=new_prior,
        name=f"{model.name}+nu-complete" if model.name else "nu-complete",
    )


def merge_common_past_into_settings(model: BeablesModel, settings_prior: PriorSpec = None) -> BeablesModel:
    """
    Take c to be complete information: c' = (c, nu), nu null.

    Context (a, b, (c, nu)) exists only where p(nu|a,b,c) > 0 and holds
    p(A,B,lambda,mu|a,b,c,nu). When some of those contexts are missing the
    result carries a coupling, so setting-dependence of nu reappears as
    contextuality.
    """
    prior = resolve_settings_prior(model, settings_prior)
    c_space, nu_space = model.space("c"), model.space("nu")
    new_c = combined_space("c", c_space, nu_space)
    null_nu = FiniteSpace.null("nu")
    spaces = dict(model.spaces, c=new_c, nu=null_nu)
    context_spaces = tuple(spaces[role] for role in ("A", "B", "lambda", "mu", "nu"))

    joints: Dict[Triple, JointDistribution] = {}
    new_prior: Dict[Triple, float] = {}
    for (a, b, c), mass in prior.items():
        tensor = context_tensor(model.joint_for((a, b, c)))
        p_nu = tensor.reshape(-1, nu_space.cardinality).sum(axis=0)
        for index, nu in enumerate(nu_space.labels):
            if p_nu[index] <= 0:
                continue
            triple = (a, b, f"{c}|{nu}")
            joints[triple] = JointDistribution(
                variables=context_spaces,
                weights=tensor[..., index:index + 1] / p_nu[index],
            )
            new_prior[triple] = mass * p_nu[index]

    full = set(itertools.product(model.labels("a"), model.labels("b"), new_c.labels))
    coupling = None if set(joints) == full else SettingCoupling(allowed_triples=frozenset(joints))
    if coupling is not None:
        logger.debug("%d of %d merged contexts have zero probability", len(full) - len(joints), len(full))
    return BeablesModel(
        spaces=spaces,
        context_joints=joints,
        value_map_A=model.value_map_A,
        value_map_B=model.value_map_B,
        coupling=coupling,
        settings_prior=new_prior,
        name=f"{model.name}+c-complete" if model.name else "c-complete",
    )


def factorized_projection(model: BeablesModel, settings_prior: PriorSpec = None) -> BeablesModel:
    """
    The model rebuilt in averaged-response form

        p(nu|c) p(lambda|nu,a,c) p(mu|nu,b,c) p(A|a,c,lambda,nu) p(B|b,c,mu,nu)

    from its own conditionals under the settings prior (zero-probability
    rows become uniform). Every deviation checker returns 0 on the result.
    """
    prior = resolve_settings_prior(model, settings_prior)
    joint = global_joint(model, prior)
    p_nu = conditional_array(joint, "nu", ("c",))                               # c, nu
    p_lambda = conditional_array(joint, "lambda", ("nu", "a", "c"))             # nu, a, c, lambda
    p_mu = conditional_array(joint, "mu", ("nu", "b", "c"))                     # nu, b, c, mu
    p_A = conditional_array(joint, "A", ("a", "c", "lambda", "nu"))             # a, c, lambda, nu, A
    p_B = conditional_array(joint, "B", ("b", "c", "mu", "nu"))                 # b, c, mu, nu, B

    joints = {}
    for a, b, c in prior:
        ia, ib, ic = model.space("a").index(a), model.space("b").index(b), model.space("c").index(c)
        weights = np.einsum(
            "n,nl,nm,lnA,mnB->ABlmn",
            p_nu[ic], p_lambda[:, ia, ic], p_mu[:, ib, ic], p_A[ia, ic], p_B[ib, ic],
        )
        joints[(a, b, c)] = JointDistribution(variables=model.context_spaces(), weights=weights)
    return model.with_context_joints(joints, name=f"{model.name}+projection" if model.name else "projection")


def mix_models(first: BeablesModel, second: BeablesModel, weight: float) -> BeablesModel:
    """Context-wise weight * first + (1 - weight) * second"""
    if not 0.0 <= weight <= 1.0:
        raise BeablesError(f"Mixing weight must lie in [0, 1], got {weight}")
    if first.spaces != second.spaces or set(first.allowed_triples()) != set(second.allowed_triples()):
        raise BeablesError("Only models over the same spaces and contexts can be mixed")
    joints = {}
    for triple in first.allowed_triples():
        one, two = first.joint_for(triple), second.joint_for(triple)
        joints[triple] = JointDistribution(
            variables=one.variables,
            weights=weight * context_tensor(one) + (1.0 - weight) * context_tensor(two),
        )
    return first.with_context_joints(joints)
