# ================================
# SINGLET REFERENCE
# ================================
# E(a, b) = Tr(rho sigma(a) x sigma(b)); the closed form -cos(a - b) only cross-checks the trace.

import logging
from typing import Union

import numpy as np

from models.errors import BeablesError
from models.models import (
    CorrelatorTable,
    FiniteSpace,
    JointDistribution,
    MeasurementDirection,
    ObservedJoint,
    QuantumScenario,
    outcome_labels,
    outcome_value_map,
)

logger = logging.getLogger(__name__)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# (|01> - |10>) / sqrt(2)
SINGLET = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2.0)
SINGLET_DENSITY = np.outer(SINGLET, SINGLET.conj())

Direction = Union[MeasurementDirection, float]


def _angle(direction: Direction) -> float:
    if isinstance(direction, MeasurementDirection):
        return direction.angle
    return MeasurementDirection(direction).angle


def spin_observable(angle: float) -> np.ndarray:
    return np.cos(angle) * PAULI_Z + np.sin(angle) * PAULI_X


def singlet_correlator(da: Direction, db: Direction) -> float:
    """Expectation of the product of the +/-1 spin outcomes along da and db"""
    observable = np.kron(spin_observable(_angle(da)), spin_observable(_angle(db)))
    return float(np.real(np.trace(SINGLET_DENSITY @ observable)))


def closed_form_correlator(da: Direction, db: Direction) -> float:
    return -float(np.cos(_angle(da) - _angle(db)))


def quantum_table(scenario: QuantumScenario) -> CorrelatorTable:
    """M(a, b) over the scenario's directions; settings are labelled by position, c is null"""
    entries = {}
    for i, da in enumerate(scenario.directions_A):
        for j, db in enumerate(scenario.directions_B):
            entries[(str(i), str(j), "0")] = singlet_correlator(da, db)
    return CorrelatorTable(
        entries=entries,
        a_labels=tuple(str(i) for i in range(len(scenario.directions_A))),
        b_labels=tuple(str(j) for j in range(len(scenario.directions_B))),
        c_labels=("0",),
    )


def singlet_observed(scenario: QuantumScenario) -> ObservedJoint:
    """
    Observed statistics p(A, s_A, B, s_B) of the singlet with uniformly
    chosen settings; outcome probabilities come from the spin projectors.
    """
    outcomes = (-1, 1)
    n_a, n_b = len(scenario.directions_A), len(scenario.directions_B)
    weights = np.zeros((2, n_a, 2, n_b))
    identity = np.eye(2, dtype=complex)
    for i, da in enumerate(scenario.directions_A):
        for j, db in enumerate(scenario.directions_B):
            for x, outcome_A in enumerate(outcomes):
                for y, outcome_B in enumerate(outcomes):
                    projector = np.kron(
                        (identity + outcome_A * spin_observable(da.angle)) / 2.0,
                        (identity + outcome_B * spin_observable(db.angle)) / 2.0,
                    )
                    probability = max(0.0, float(np.real(np.trace(SINGLET_DENSITY @ projector))))
                    weights[x, i, y, j] = probability / (n_a * n_b)
    labels = outcome_labels(2)
    spaces = (
        FiniteSpace("A", labels),
        FiniteSpace.indexed("s_A", n_a),
        FiniteSpace("B", labels),
        FiniteSpace.indexed("s_B", n_b),
    )
    return ObservedJoint(
        distribution=JointDistribution(variables=spaces, weights=weights),
        value_map_A=outcome_value_map(labels),
        value_map_B=outcome_value_map(labels),
    )


def tsirelson_gap_scan(resolution: int) -> float:
    """
    Largest CHSH value over a uniform grid of `resolution` angles in [0, 2pi)
    for a', b, b', with a fixed at 0.

    The correlator only depends on angle differences, so fixing a loses
    nothing. Differences are looked up from one trace evaluation per grid
    step.
    """
    if resolution < 1:
        raise BeablesError(f"Resolution must be >= 1, got {resolution}")
    angles = 2.0 * np.pi * np.arange(resolution) / resolution
    # e[k] = E(theta_k, 0); any pair of grid angles differs by a grid angle
    e = np.array([singlet_correlator(angle, 0.0) for angle in angles])

    k = np.arange(resolution)
    b, b_prime = k[:, None], k[None, :]
    e_ab = e[(-b) % resolution]
    e_abp = e[(-b_prime) % resolution]

    best = -np.inf
    for a_prime in range(resolution):
        e_apb = e[(a_prime - b) % resolution]
        e_apbp = e[(a_prime - b_prime) % resolution]
        minus_plus = np.abs(e_ab - e_abp) + np.abs(e_apb + e_apbp)
        plus_minus = np.abs(e_ab + e_abp) + np.abs(e_apb - e_apbp)
        best = max(best, float(minus_plus.max()), float(plus_minus.max()))
    logger.debug("Angle grid of %d points reaches CHSH %.12f", resolution, best)
    return best
