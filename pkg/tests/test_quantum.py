import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beables.beables_operations import max_chsh
from models.errors import BeablesError
from models.models import MeasurementDirection, QUANTUM_BOUND, QuantumScenario
from quantum.quantum_reference import (
    closed_form_correlator,
    quantum_table,
    singlet_correlator,
    singlet_observed,
    tsirelson_gap_scan,
)

OPTIMAL = QuantumScenario.from_angles([0.0, math.pi / 2], [math.pi / 4, 3 * math.pi / 4])

angles = st.floats(min_value=-20.0, max_value=20.0, allow_nan=False)


def test_parallel_directions_anticorrelate():
    assert singlet_correlator(0.3, 0.3) == pytest.approx(-1.0, abs=1e-12)


def test_orthogonal_directions_uncorrelated():
    assert singlet_correlator(0.0, math.pi / 2) == pytest.approx(0.0, abs=1e-12)


def test_quarter_turn_correlator():
    assert singlet_correlator(math.pi / 4, 0.0) == pytest.approx(-math.sqrt(2) / 2, abs=1e-12)


def test_direction_angle_is_normalized():
    direction = MeasurementDirection(-math.pi / 2)
    assert 0.0 <= direction.angle < 2 * math.pi
    assert direction.angle == pytest.approx(3 * math.pi / 2)


@settings(max_examples=200, deadline=None)
@given(angles)
def test_same_direction_always_minus_one(angle):
    assert singlet_correlator(angle, angle) == pytest.approx(-1.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(angles, angles, angles)
def test_correlator_depends_on_difference_only(da, db, shift):
    assert singlet_correlator(da + shift, db + shift) == pytest.approx(singlet_correlator(da, db), abs=1e-9)


def test_trace_matches_closed_form():
    rng = np.random.default_rng(15)
    for da, db in rng.uniform(0.0, 2 * math.pi, size=(1000, 2)):
        assert singlet_correlator(da, db) == pytest.approx(closed_form_correlator(da, db), abs=1e-12)


def test_optimal_angles_reach_quantum_bound():
    assert max_chsh(quantum_table(OPTIMAL)).value == pytest.approx(QUANTUM_BOUND, abs=1e-9)


def test_single_direction_table():
    table = quantum_table(QuantumScenario.from_angles([0.0], [0.0]))
    assert list(table.entries) == [("0", "0", "0")]
    assert table.get("0", "0", "0") == pytest.approx(-1.0, abs=1e-12)


def test_scenario_needs_directions():
    with pytest.raises(BeablesError):
        QuantumScenario.from_angles([], [0.0])


def test_random_scenarios_stay_below_quantum_bound():
    rng = np.random.default_rng(16)
    for row in rng.uniform(0.0, 2 * math.pi, size=(10_000, 4)):
        scenario = QuantumScenario.from_angles(row[:2], row[2:])
        assert max_chsh(quantum_table(scenario)).value <= QUANTUM_BOUND + 1e-9


def test_scan_coarse_grid():
    assert tsirelson_gap_scan(4) <= QUANTUM_BOUND + 1e-12


@pytest.mark.parametrize("resolution, gap", [(64, 1e-3), (512, 1e-6)])
def test_scan_approaches_quantum_bound(resolution, gap):
    value = tsirelson_gap_scan(resolution)
    assert value <= QUANTUM_BOUND + 1e-12
    assert QUANTUM_BOUND - value <= gap


def test_scan_rejects_empty_grid():
    with pytest.raises(BeablesError):
        tsirelson_gap_scan(0)


def test_singlet_observed_statistics():
    observed = singlet_observed(OPTIMAL)
    weights = observed.distribution.weights
    assert weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(observed.settings_marginal(), 0.25)
    values = np.array([-1.0, 1.0])
    table = quantum_table(OPTIMAL)
    for i in range(2):
        for j in range(2):
            outcomes = weights[:, i, :, j] / weights[:, i, :, j].sum()
            assert values @ outcomes @ values == pytest.approx(table.get(str(i), str(j), "0"), abs=1e-12)
