import itertools
from typing import Iterable, Iterator, Sequence, Tuple

import numpy as np

from models.errors import OverlappingVariablesError, UnknownVariableError
from models.models import FiniteSpace, JointDistribution


def as_names(variables) -> Tuple[str, ...]:
    """Accept a single name, an iterable of names, or FiniteSpaces"""
    if variables is None:
        return ()
    if isinstance(variables, str):
        return (variables,)
    if isinstance(variables, FiniteSpace):
        return (variables.name,)
    return tuple(v.name if isinstance(v, FiniteSpace) else str(v) for v in variables)


def check_known(dist: JointDistribution, names: Iterable[str]):
    for name in names:
        if name not in dist.names:
            raise UnknownVariableError(name, dist.names)


def check_disjoint(*groups: Sequence[str]):
    seen = set()
    overlap = set()
    for group in groups:
        if len(set(group)) != len(group):
            overlap.update(name for name in group if list(group).count(name) > 1)
        overlap.update(seen.intersection(group))
        seen.update(group)
    if overlap:
        raise OverlappingVariablesError(overlap)


def aligned_weights(dist: JointDistribution, names: Sequence[str]) -> np.ndarray:
    """Marginal tensor of `names`, with axes in exactly that order"""
    check_known(dist, names)
    axes = [dist.axis(name) for name in names]
    dropped = tuple(axis for axis in range(len(dist.variables)) if axis not in axes)
    summed = dist.weights.sum(axis=dropped) if dropped else np.array(dist.weights)
    remaining = [axis for axis in range(len(dist.variables)) if axis in axes]
    order = [remaining.index(axis) for axis in axes]
    return np.transpose(summed, order) if order else summed


def spaces_of(dist: JointDistribution, names: Sequence[str]) -> Tuple[FiniteSpace, ...]:
    return tuple(dist.space(name) for name in names)


def assignments(spaces: Sequence[FiniteSpace]) -> Iterator[Tuple[str, ...]]:
    """Label tuples in C order of the spaces' tensor axes"""
    return itertools.product(*(space.labels for space in spaces))


def random_distribution(variables: Sequence[FiniteSpace], rng: np.random.Generator,
                        zero_fraction: float = 0.0) -> JointDistribution:
    """Dirichlet-distributed joint; optionally knock out a fraction of the cells"""
    shape = tuple(space.cardinality for space in variables)
    size = int(np.prod(shape)) if shape else 1
    weights = rng.dirichlet(np.ones(size))
    if zero_fraction > 0 and size > 1:
        mask = rng.random(size) < zero_fraction
        if mask.all():
            mask[rng.integers(size)] = False
        weights = np.where(mask, 0.0, weights)
        weights = weights / weights.sum()
    return JointDistribution(variables=tuple(variables), weights=weights.reshape(shape))
