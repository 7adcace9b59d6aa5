import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from models.errors import OverlappingVariablesError, SpaceMismatchError, UnknownVariableError
from models.models import FiniteSpace, JointDistribution
from probability.probability_operations import (
    ci_deviation,
    conditional_table,
    marginalize,
    reconstruct_joint,
    self_conditioning_check,
    tv_distance,
)
from probability.utils import random_distribution

X = FiniteSpace("x", ("0", "1"))
Y = FiniteSpace("y", ("0", "1"))
Z = FiniteSpace("z", ("0", "1", "2"))


def xy(weights):
    return JointDistribution(variables=(X, Y), weights=weights)


def test_marginalize_uniform_stays_uniform():
    result = marginalize(JointDistribution.uniform((X, Y)), ["x"])
    assert result.names == ("x",)
    assert np.allclose(result.weights, [0.5, 0.5])


def test_marginalize_keep_everything_is_identity():
    dist = xy([[0.1, 0.2], [0.3, 0.4]])
    assert marginalize(dist, ["x", "y"]).allclose(dist, atol=0.0)


def test_marginalize_hand_sum():
    result = marginalize(xy([[0.1, 0.2], [0.3, 0.4]]), "x")
    assert np.allclose(result.weights, [0.3, 0.7], rtol=0.0, atol=1e-12)


def test_marginalize_unknown_variable():
    with pytest.raises(UnknownVariableError, match="'w'"):
        marginalize(xy([[0.1, 0.2], [0.3, 0.4]]), ["w"])


def test_marginalization_commutes():
    rng = np.random.default_rng(7)
    for _ in range(50):
        dist = random_distribution((X, Y, Z), rng)
        direct = marginalize(dist, ["z"])
        staged = marginalize(marginalize(dist, ["y", "z"]), ["z"])
        assert np.allclose(direct.weights, staged.weights, rtol=0.0, atol=1e-12)


def test_conditional_of_independent_product():
    px, py = np.array([0.3, 0.7]), np.array([0.6, 0.4])
    table = conditional_table(xy(np.outer(px, py)), targets="x", givens="y")
    for key in table.defined_contexts():
        assert np.allclose(table.slice(key), px, rtol=0.0, atol=1e-12)


def test_conditional_zero_context_is_undefined():
    table = conditional_table(xy([[0.0, 0.5], [0.0, 0.5]]), targets="x", givens="y")
    assert table.slice(("0",)) is None
    assert np.allclose(table.slice(("1",)), [0.5, 0.5])
    assert table.undefined_contexts() == [("0",)]


def test_conditional_hand_division():
    table = conditional_table(xy([[0.1, 0.2], [0.3, 0.4]]), targets="y", givens="x")
    assert np.allclose(table.slice(("0",)), [1 / 3, 2 / 3], rtol=0.0, atol=1e-12)


def test_conditional_overlap_rejected():
    with pytest.raises(OverlappingVariablesError):
        conditional_table(xy([[0.1, 0.2], [0.3, 0.4]]), targets=["x", "y"], givens=["y"])


def test_conditional_reconstruction_round_trip():
    rng = np.random.default_rng(11)
    for _ in range(50):
        dist = random_distribution((X, Y, Z), rng, zero_fraction=0.3)
        table = conditional_table(dist, targets=["x"], givens=["y", "z"])
        rebuilt = reconstruct_joint(table, marginalize(dist, ["y", "z"]))
        assert rebuilt.names == ("y", "z", "x")
        assert np.allclose(rebuilt.weights, np.moveaxis(dist.weights, 0, -1), rtol=0.0, atol=1e-12)


def test_tv_distance_examples():
    point_0 = JointDistribution.point_mass((X,), ("0",))
    point_1 = JointDistribution.point_mass((X,), ("1",))
    assert tv_distance(point_0, point_0) == 0.0
    assert tv_distance(point_0, point_1) == pytest.approx(1.0)
    half = JointDistribution(variables=(X,), weights=[0.5, 0.5])
    skewed = JointDistribution(variables=(X,), weights=[0.75, 0.25])
    assert tv_distance(half, skewed) == pytest.approx(0.25)


def test_tv_distance_space_mismatch():
    with pytest.raises(SpaceMismatchError):
        tv_distance(JointDistribution.uniform((X,)), JointDistribution.uniform((Y,)))


def test_ci_deviation_product_is_zero():
    rng = np.random.default_rng(3)
    px, py, pz = (rng.dirichlet(np.ones(n)) for n in (2, 2, 3))
    dist = JointDistribution(variables=(X, Y, Z), weights=np.einsum("i,j,k->ijk", px, py, pz))
    assert ci_deviation(dist, "x", "y", "z").max_dev == pytest.approx(0.0, abs=1e-12)


def test_ci_deviation_perfect_copy_is_one():
    result = ci_deviation(xy([[0.5, 0.0], [0.0, 0.5]]), "x", "y")
    assert result.max_dev == pytest.approx(1.0)


def test_ci_deviation_noisy_copy():
    result = ci_deviation(xy([[0.45, 0.05], [0.05, 0.45]]), "x", "y")
    assert result.max_dev == pytest.approx(0.8, abs=1e-12)
    # p(x|y) = (0.9, 0.1) vs p(x) = (0.5, 0.5)
    assert result.weighted_dev == pytest.approx(0.4, abs=1e-12)
    worst = result.worst_context()
    assert worst.spread == pytest.approx(0.8, abs=1e-12)


def test_ci_deviation_overlap_rejected():
    with pytest.raises(OverlappingVariablesError):
        ci_deviation(xy([[0.45, 0.05], [0.05, 0.45]]), ["x"], ["x"])


def test_ci_deviation_invariant_under_relabeling():
    rng = np.random.default_rng(5)
    for _ in range(20):
        dist = random_distribution((X, Y, Z), rng)
        relabeled = JointDistribution(variables=dist.variables, weights=dist.weights[::-1, :, ::-1])
        original = ci_deviation(dist, "x", "y", "z")
        permuted = ci_deviation(relabeled, "x", "y", "z")
        assert permuted.max_dev == pytest.approx(original.max_dev, abs=1e-12)
        assert permuted.weighted_dev == pytest.approx(original.weighted_dev, abs=1e-12)


def test_ci_deviation_zero_on_screened_construction():
    rng = np.random.default_rng(9)
    for _ in range(50):
        pz = rng.dirichlet(np.ones(3))
        px_z = rng.dirichlet(np.ones(2), size=3)
        py_z = rng.dirichlet(np.ones(2), size=3)
        weights = np.einsum("k,ki,kj->ijk", pz, px_z, py_z)
        dist = JointDistribution(variables=(X, Y, Z), weights=weights)
        assert ci_deviation(dist, "x", "y", "z").max_dev <= 1e-12


def test_ci_deviation_skips_zero_contexts():
    weights = np.zeros((2, 2, 3))
    weights[:, :, 0] = [[0.25, 0.25], [0.25, 0.25]]
    dist = JointDistribution(variables=(X, Y, Z), weights=weights)
    result = ci_deviation(dist, "x", "y", "z")
    assert result.max_dev == 0.0
    assert all(record.z == ("0",) for record in result.per_context)


def test_self_conditioning_uniform():
    assert self_conditioning_check(JointDistribution.uniform((X, Y, Z)), "x", ["z"])


def test_self_conditioning_zero_values_skipped():
    dist = xy([[0.0, 0.0], [0.5, 0.5]])
    assert self_conditioning_check(dist, "x", ["y"])


def test_self_conditioning_random_distributions():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        dist = random_distribution((X, Y, Z), rng, zero_fraction=0.2)
        assert self_conditioning_check(dist, "y", ["z"])


def test_self_conditioning_rejects_v_in_z():
    with pytest.raises(OverlappingVariablesError):
        self_conditioning_check(JointDistribution.uniform((X, Y)), "x", ["x"])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=4, max_size=4))
def test_marginals_preserve_normalization(raw):
    weights = np.array(raw).reshape(2, 2)
    dist = xy(weights / weights.sum())
    assert marginalize(dist, "y").is_normalized()
