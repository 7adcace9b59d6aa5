# ================================
# PROBABILITY OPERATIONS
# ================================
# Conditioning contexts of probability zero are undefined and left out of every deviation.

import logging

import numpy as np

from models.errors import OverlappingVariablesError, SpaceMismatchError
from models.models import (
    CIDeviation,
    ConditionalTable,
    ContextDeviation,
    JointDistribution,
    NORMALIZATION_TOLERANCE,
)
from .utils import aligned_weights, as_names, assignments, check_disjoint, check_known, spaces_of

logger = logging.getLogger(__name__)


def marginalize(dist: JointDistribution, keep) -> JointDistribution:
    """
    Sum out every variable not in `keep`.

    The kept variables stay in the distribution's own order, so keeping all
    of them returns an identical distribution.
    """
    keep = as_names(keep)
    check_known(dist, keep)
    ordered = [name for name in dist.names if name in keep]
    return JointDistribution(
        variables=spaces_of(dist, ordered),
        weights=aligned_weights(dist, ordered),
    )


def conditional_table(dist: JointDistribution, targets, givens) -> ConditionalTable:
    """
    p(targets | givens) for every assignment of the givens.

    Args:
        dist: joint distribution
        targets: variable names whose conditional distribution is wanted
        givens: conditioning variable names, disjoint from targets

    Returns:
        ConditionalTable; a slice is None exactly where p(givens) = 0
    """
    targets, givens = as_names(targets), as_names(givens)
    check_known(dist, targets + givens)
    check_disjoint(targets, givens)

    target_spaces = spaces_of(dist, targets)
    given_spaces = spaces_of(dist, givens)
    tensor = aligned_weights(dist, givens + targets)
    n_given = int(np.prod([space.cardinality for space in given_spaces])) if givens else 1
    target_shape = tuple(space.cardinality for space in target_spaces)
    blocks = tensor.reshape((n_given,) + target_shape)

    slices = {}
    for key, block in zip(assignments(given_spaces), blocks):
        mass = float(block.sum())
        slices[key] = block / mass if mass > 0 else None
    return ConditionalTable(targets=target_spaces, givens=given_spaces, slices=slices)


def reconstruct_joint(table: ConditionalTable, givens_marginal: JointDistribution) -> JointDistribution:
    """Rebuild p(givens, targets) = p(targets | givens) p(givens)"""
    given_names = tuple(space.name for space in table.givens)
    if tuple(givens_marginal.variables) != tuple(table.givens):
        raise SpaceMismatchError(
            f"Marginal is over {givens_marginal.names}, table conditions on {given_names}"
        )
    target_shape = tuple(space.cardinality for space in table.targets)
    rows = []
    for key, mass in zip(assignments(table.givens), givens_marginal.weights.reshape(-1)):
        block = table.slices[key]
        rows.append(np.zeros(target_shape) if block is None else block * mass)
    shape = tuple(space.cardinality for space in table.givens) + target_shape
    return JointDistribution(
        variables=tuple(table.givens) + tuple(table.targets),
        weights=np.array(rows).reshape(shape),
    )


def tv_distance(d1: JointDistribution, d2: JointDistribution) -> float:
    """Total variation distance (1/2) sum |d1 - d2| over identical spaces"""
    if tuple(d1.variables) != tuple(d2.variables):
        raise SpaceMismatchError(
            f"Cannot compare distributions over different spaces: {d1.names} vs {d2.names}"
        )
    return float(0.5 * np.abs(d1.weights - d2.weights).sum())


def ci_deviation(dist: JointDistribution, X, Y, Z=()) -> CIDeviation:
    """
    How far X is from being independent of Y given Z.

    For every context (y, z) of positive probability, the record holds
    tv(p(X|y,z), p(X|z)) and the largest tv(p(X|y,z), p(X|y',z)) over the
    other positive y'. max_dev is the largest of those pairwise distances
    (so it lies in [0, 1] and is 0 exactly when X and Y are independent
    given Z); weighted_dev is the p(y,z)-weighted mean distance to p(X|z).
    """
    X, Y, Z = as_names(X), as_names(Y), as_names(Z)
    check_known(dist, X + Y + Z)
    check_disjoint(X, Y, Z)

    z_spaces, y_spaces, x_spaces = spaces_of(dist, Z), spaces_of(dist, Y), spaces_of(dist, X)
    n_z = int(np.prod([s.cardinality for s in z_spaces])) if Z else 1
    n_y = int(np.prod([s.cardinality for s in y_spaces])) if Y else 1
    n_x = int(np.prod([s.cardinality for s in x_spaces])) if X else 1
    w = aligned_weights(dist, Z + Y + X).reshape(n_z, n_y, n_x)

    p_yz = w.sum(axis=2)
    p_z = p_yz.sum(axis=1)
    positive = p_yz > 0

    with np.errstate(invalid="ignore", divide="ignore"):
        cond_yz = np.where(positive[:, :, None], w / p_yz[:, :, None], np.nan)
        cond_z = np.where((p_z > 0)[:, None], w.sum(axis=1) / p_z[:, None], np.nan)

    to_marginal = 0.5 * np.abs(cond_yz - cond_z[:, None, :]).sum(axis=2)
    pairwise = 0.5 * np.abs(cond_yz[:, :, None, :] - cond_yz[:, None, :, :]).sum(axis=3)
    pair_valid = positive[:, :, None] & positive[:, None, :]
    pairwise = np.where(pair_valid, pairwise, 0.0)
    spread = pairwise.max(axis=2)

    z_keys = list(assignments(z_spaces))
    y_keys = list(assignments(y_spaces))
    records = []
    for iz, iy in zip(*np.nonzero(positive)):
        records.append(ContextDeviation(
            y=y_keys[iy],
            z=z_keys[iz],
            probability=float(p_yz[iz, iy]),
            deviation=float(to_marginal[iz, iy]),
            spread=float(spread[iz, iy]),
        ))

    total = float(p_yz[positive].sum())
    max_dev = float(spread[positive].max()) if records else 0.0
    weighted_dev = float((p_yz[positive] * to_marginal[positive]).sum() / total) if total > 0 else 0.0
    return CIDeviation(x=X, y=Y, z=Z, max_dev=max_dev, weighted_dev=weighted_dev, per_context=tuple(records))


def self_conditioning_check(dist: JointDistribution, v: str, Z=(), tolerance: float = NORMALIZATION_TOLERANCE) -> bool:
    """
    Consistency self-test: p(v | v, Z) is a point mass on the conditioned
    value in every positive-probability context.

    v is duplicated into a copy variable so that it can be both target and
    given of the same conditional table.
    """
    Z = as_names(Z)
    check_known(dist, (v,) + Z)
    if v in Z:
        raise OverlappingVariablesError([v])

    space = dist.space(v)
    copy_name = f"{v}__copy"
    while copy_name in dist.names:
        copy_name += "_"
    copy_space = space.renamed(copy_name)

    marginal = aligned_weights(dist, (v,) + Z)
    doubled = np.zeros((space.cardinality,) + marginal.shape)
    for i in range(space.cardinality):
        doubled[i, i] = marginal[i]
    duplicated = JointDistribution(
        variables=(copy_space,) + spaces_of(dist, (v,) + Z),
        weights=doubled,
    )

    table = conditional_table(duplicated, targets=copy_name, givens=(v,) + Z)
    for key in table.defined_contexts():
        expected = np.zeros(space.cardinality)
        expected[space.index(key[0])] = 1.0
        if not np.allclose(table.slices[key], expected, rtol=0.0, atol=tolerance):
            logger.debug("p(%s|%s, %s) is not a point mass in context %s", v, v, Z, key)
            return False
    return True
