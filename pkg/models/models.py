# ================================
# DATA MODELS
# ================================

import os
import math
import itertools
from dataclasses import dataclass, field, replace
from typing import List, Optional, Dict, Any, Tuple, Mapping, Sequence, FrozenSet
from enum import Enum

import numpy as np

from .errors import (
    BeablesError,
    ContextualityError,
    InvalidDistributionError,
    MissingEntryError,
    UnknownVariableError,
)

# Roles of the eight variables of a Bell experiment. Settings are the
# non-hidden beables, lambda/mu/nu the hidden ones, A/B the outcomes.
SETTING_ROLES = ("a", "b", "c")
HIDDEN_ROLES = ("lambda", "mu", "nu")
OUTCOME_ROLES = ("A", "B")
ROLES = SETTING_ROLES + HIDDEN_ROLES + OUTCOME_ROLES

# Variable order of every per-context joint p(A,B,lambda,mu,nu|a,b,c)
CONTEXT_VARIABLES = ("A", "B", "lambda", "mu", "nu")

NORMALIZATION_TOLERANCE = 1e-12
QUANTUM_BOUND = 2.0 * math.sqrt(2.0)
LOCAL_BOUND = 2.0
ALGEBRAIC_BOUND = 4.0

Triple = Tuple[str, str, str]


@dataclass(frozen=True)
class FiniteSpace:
    name: str
    labels: Tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        object.__setattr__(self, "labels", labels)
        if not self.name:
            raise BeablesError("FiniteSpace needs a name")
        if len(labels) < 1:
            raise BeablesError(f"Space '{self.name}' must have at least one label")
        if len(set(labels)) != len(labels):
            raise BeablesError(f"Space '{self.name}' has duplicate labels: {list(labels)}")

    @property
    def cardinality(self) -> int:
        return len(self.labels)

    @property
    def is_null(self) -> bool:
        return len(self.labels) == 1

    def index(self, label: str) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise BeablesError(f"Label '{label}' is not in space '{self.name}' {list(self.labels)}") from None

    def renamed(self, name: str) -> 'FiniteSpace':
        return FiniteSpace(name=name, labels=self.labels)

    @classmethod
    def null(cls, name: str) -> 'FiniteSpace':
        return cls(name=name, labels=("0",))

    @classmethod
    def indexed(cls, name: str, cardinality: int) -> 'FiniteSpace':
        return cls(name=name, labels=tuple(str(i) for i in range(cardinality)))

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "labels": list(self.labels)}


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Dense probability tensor over an ordered list of named finite spaces.

    Construction only checks structure (distinct names, tensor shape). Use
    `from_weights` when the tensor must also be a normalized distribution;
    `normalization_problems` lists what is wrong with one that is not.
    """
    variables: Tuple[FiniteSpace, ...]
    weights: np.ndarray

    def __post_init__(self):
        variables = tuple(self.variables)
        object.__setattr__(self, "variables", variables)
        names = [space.name for space in variables]
        if len(set(names)) != len(names):
            raise InvalidDistributionError(f"Duplicate variable names: {names}")
        weights = np.array(self.weights, dtype=float)
        expected = tuple(space.cardinality for space in variables)
        if weights.shape != expected:
            raise InvalidDistributionError(
                f"Tensor shape {weights.shape} does not match spaces {dict(zip(names, expected))}"
            )
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_weights(cls, variables: Sequence[FiniteSpace], weights) -> 'JointDistribution':
        dist = cls(variables=tuple(variables), weights=weights)
        problems = dist.normalization_problems()
        if problems:
            raise InvalidDistributionError("; ".join(problems))
        return dist

    @classmethod
    def uniform(cls, variables: Sequence[FiniteSpace]) -> 'JointDistribution':
        shape = tuple(space.cardinality for space in variables)
        size = int(np.prod(shape)) if shape else 1
        return cls(variables=tuple(variables), weights=np.full(shape, 1.0 / size))

    @classmethod
    def point_mass(cls, variables: Sequence[FiniteSpace], labels: Sequence[str]) -> 'JointDistribution':
        variables = tuple(variables)
        weights = np.zeros(tuple(space.cardinality for space in variables))
        weights[tuple(space.index(label) for space, label in zip(variables, labels))] = 1.0
        return cls(variables=variables, weights=weights)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(space.name for space in self.variables)

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariableError(name, self.names) from None

    def space(self, name: str) -> FiniteSpace:
        return self.variables[self.axis(name)]

    def normalization_problems(self, tolerance: float = NORMALIZATION_TOLERANCE) -> List[str]:
        problems = []
        if not np.all(np.isfinite(self.weights)):
            problems.append("non-finite weight")
            return problems
        if np.any(self.weights < 0):
            problems.append(f"negative weight (min {self.weights.min():.6g})")
        total = float(self.weights.sum())
        if abs(total - 1.0) > tolerance:
            problems.append(f"weights sum to {total:.12g}, not 1")
        return problems

    def is_normalized(self, tolerance: float = NORMALIZATION_TOLERANCE) -> bool:
        return not self.normalization_problems(tolerance)

    def allclose(self, other: 'JointDistribution', atol: float = NORMALIZATION_TOLERANCE) -> bool:
        return self.variables == other.variables and bool(np.allclose(self.weights, other.weights, rtol=0.0, atol=atol))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variables": [space.to_dict() for space in self.variables],
            "weights": self.weights.tolist(),
        }


@dataclass(frozen=True, eq=False)
class ConditionalTable:
    """p(targets | givens); slices[g] is None where p(g) = 0"""
    targets: Tuple[FiniteSpace, ...]
    givens: Tuple[FiniteSpace, ...]
    slices: Mapping[Tuple[str, ...], Optional[np.ndarray]]

    def slice(self, given_labels: Sequence[str]) -> Optional[np.ndarray]:
        key = tuple(str(label) for label in given_labels)
        if key not in self.slices:
            raise MissingEntryError(f"No conditioning context {key} for givens {[s.name for s in self.givens]}")
        return self.slices[key]

    def defined_contexts(self) -> List[Tuple[str, ...]]:
        return [key for key, value in self.slices.items() if value is not None]

    def undefined_contexts(self) -> List[Tuple[str, ...]]:
        return [key for key, value in self.slices.items() if value is None]


@dataclass(frozen=True)
class ContextDeviation:
    y: Tuple[str, ...]
    z: Tuple[str, ...]
    probability: float      # p(y, z)
    deviation: float        # tv(p(X|y,z), p(X|z))
    spread: float           # max over y' of tv(p(X|y,z), p(X|y',z))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "y": list(self.y),
            "z": list(self.z),
            "probability": self.probability,
            "deviation": self.deviation,
            "spread": self.spread,
        }


@dataclass(frozen=True)
class CIDeviation:
    x: Tuple[str, ...]
    y: Tuple[str, ...]
    z: Tuple[str, ...]
    max_dev: float
    weighted_dev: float
    per_context: Tuple[ContextDeviation, ...] = ()

    def worst_context(self) -> Optional[ContextDeviation]:
        if not self.per_context:
            return None
        return max(self.per_context, key=lambda record: (record.spread, record.deviation))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x": list(self.x),
            "y": list(self.y),
            "z": list(self.z),
            "max_dev": self.max_dev,
            "weighted_dev": self.weighted_dev,
        }


# ================================
# BEABLES MODELS
# ================================

@dataclass(frozen=True)
class SettingCoupling:
    """Which (a, b, c) setting triples can occur together"""
    allowed_triples: FrozenSet[Triple]
    function: Optional[Mapping[Tuple[str, str], str]] = field(default=None, compare=False)

    def __post_init__(self):
        triples = frozenset(tuple(str(label) for label in triple) for triple in self.allowed_triples)
        if not triples:
            raise BeablesError("A setting coupling needs at least one allowed triple")
        if any(len(triple) != 3 for triple in triples):
            raise BeablesError("Allowed triples must have exactly three labels (a, b, c)")
        object.__setattr__(self, "allowed_triples", triples)

    @classmethod
    def from_function(cls, mapping: Mapping[Tuple[str, str], str]) -> 'SettingCoupling':
        """Coupling c = f(a, b)"""
        mapping = {(str(a), str(b)): str(c) for (a, b), c in mapping.items()}
        return cls(
            allowed_triples=frozenset((a, b, c) for (a, b), c in mapping.items()),
            function=mapping,
        )

    def sorted_triples(self) -> List[Triple]:
        return sorted(self.allowed_triples)

    def full_product(self, a_labels, b_labels, c_labels) -> FrozenSet[Triple]:
        return frozenset(itertools.product(a_labels, b_labels, c_labels))

    def is_full_product(self, a_labels, b_labels, c_labels) -> bool:
        return self.allowed_triples == self.full_product(a_labels, b_labels, c_labels)

    def missing_triples(self, a_labels, b_labels, c_labels) -> List[Triple]:
        return sorted(self.full_product(a_labels, b_labels, c_labels) - self.allowed_triples)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"triples": [list(triple) for triple in self.sorted_triples()]}
        if self.function is not None:
            data["function"] = {f"{a},{b}": c for (a, b), c in sorted(self.function.items())}
        return data


@dataclass(frozen=True, eq=False)
class BeablesModel:
    """Per-context joints p(A,B,lambda,mu,nu | a,b,c) with outcome values.

    Null beables are spaces of cardinality 1. Which variables count as hidden
    is purely structural: lambda, mu and nu are summed out, a, b, c are
    conditioned on.
    """
    spaces: Mapping[str, FiniteSpace]
    context_joints: Mapping[Triple, JointDistribution]
    value_map_A: Mapping[str, float]
    value_map_B: Mapping[str, float]
    coupling: Optional[SettingCoupling] = None
    settings_prior: Optional[Mapping[Triple, float]] = None
    name: str = ""

    def __post_init__(self):
        missing = [role for role in ROLES if role not in self.spaces]
        if missing:
            raise BeablesError(f"Model is missing spaces for: {', '.join(missing)}")
        spaces = {role: self.spaces[role].renamed(role) for role in ROLES}
        object.__setattr__(self, "spaces", spaces)
        object.__setattr__(self, "context_joints", {
            tuple(str(label) for label in triple): joint for triple, joint in self.context_joints.items()
        })
        object.__setattr__(self, "value_map_A", {str(k): float(v) for k, v in self.value_map_A.items()})
        object.__setattr__(self, "value_map_B", {str(k): float(v) for k, v in self.value_map_B.items()})
        if self.settings_prior is not None:
            object.__setattr__(self, "settings_prior", {
                tuple(str(label) for label in triple): float(weight)
                for triple, weight in self.settings_prior.items()
            })

    def space(self, role: str) -> FiniteSpace:
        if role not in self.spaces:
            raise UnknownVariableError(role, ROLES)
        return self.spaces[role]

    def labels(self, role: str) -> Tuple[str, ...]:
        return self.space(role).labels

    def context_spaces(self) -> Tuple[FiniteSpace, ...]:
        return tuple(self.spaces[role] for role in CONTEXT_VARIABLES)

    def all_triples(self) -> List[Triple]:
        return list(itertools.product(self.labels("a"), self.labels("b"), self.labels("c")))

    def allowed_triples(self) -> List[Triple]:
        if self.coupling is None:
            return self.all_triples()
        order = {triple: i for i, triple in enumerate(self.all_triples())}
        return sorted(self.coupling.allowed_triples, key=lambda t: order.get(t, len(order)))

    def is_allowed(self, triple: Sequence[str]) -> bool:
        triple = tuple(str(label) for label in triple)
        if self.coupling is None:
            return (triple[0] in self.labels("a") and triple[1] in self.labels("b")
                    and triple[2] in self.labels("c"))
        return triple in self.coupling.allowed_triples

    def joint_for(self, triple: Sequence[str]) -> JointDistribution:
        triple = tuple(str(label) for label in triple)
        if not self.is_allowed(triple):
            raise ContextualityError(triple)
        if triple not in self.context_joints:
            raise MissingEntryError(f"No context joint for setting triple {triple}")
        return self.context_joints[triple]

    def outcome_values(self, role: str) -> np.ndarray:
        value_map = self.value_map_A if role == "A" else self.value_map_B
        return np.array([value_map[label] for label in self.labels(role)], dtype=float)

    def with_context_joints(self, context_joints: Mapping[Triple, JointDistribution], **changes) -> 'BeablesModel':
        return replace(self, context_joints=dict(context_joints), **changes)


class SignChoice(Enum):
    MINUS_PLUS = "-+"   # |M(a,b) - M(a,b')| + |M(a',b) + M(a',b')|
    PLUS_MINUS = "+-"   # |M(a,b) + M(a,b')| + |M(a',b) - M(a',b')|

    @property
    def first(self) -> float:
        return -1.0 if self is SignChoice.MINUS_PLUS else 1.0

    @property
    def second(self) -> float:
        return -self.first


@dataclass(frozen=True)
class CorrelatorTable:
    entries: Mapping[Triple, float]
    a_labels: Tuple[str, ...]
    b_labels: Tuple[str, ...]
    c_labels: Tuple[str, ...]
    coupled: bool = False

    def __post_init__(self):
        object.__setattr__(self, "entries", {
            tuple(str(label) for label in triple): float(value) for triple, value in self.entries.items()
        })
        for name in ("a_labels", "b_labels", "c_labels"):
            object.__setattr__(self, name, tuple(str(label) for label in getattr(self, name)))

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, a: str, b: str, c: str) -> float:
        key = (str(a), str(b), str(c))
        if key not in self.entries:
            raise MissingEntryError(f"Correlator table has no entry for {key}")
        return self.entries[key]

    def contexts_for(self, a: str, b: str) -> List[str]:
        return sorted(c for (ta, tb, c) in self.entries if ta == a and tb == b)

    def c_slice(self, c: str) -> np.ndarray:
        """M(., ., c) as an |a| x |b| matrix"""
        return np.array([[self.get(a, b, c) for b in self.b_labels] for a in self.a_labels])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a_labels": list(self.a_labels),
            "b_labels": list(self.b_labels),
            "c_labels": list(self.c_labels),
            "coupled": self.coupled,
            "entries": [
                {"settings": list(triple), "value": value} for triple, value in sorted(self.entries.items())
            ],
        }


@dataclass(frozen=True)
class ChshResult:
    a: str
    a_prime: str
    b: str
    b_prime: str
    c: str
    sign: SignChoice
    value: float
    contexts: Tuple[Triple, Triple, Triple, Triple] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a": self.a,
            "a_prime": self.a_prime,
            "b": self.b,
            "b_prime": self.b_prime,
            "c": self.c,
            "sign": self.sign.value,
            "value": self.value,
            "contexts": [list(triple) for triple in self.contexts],
        }


@dataclass(frozen=True)
class ProductFormFit:
    """Best M(a,b,c) ~ Abar(a,c) Bbar(b,c) found for one c-slice"""
    c: str
    a_factor: Tuple[float, ...]
    b_factor: Tuple[float, ...]
    residual: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "c": self.c,
            "a_factor": list(self.a_factor),
            "b_factor": list(self.b_factor),
            "residual": self.residual,
        }


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    context: Optional[Triple] = None

    def __str__(self) -> str:
        where = f" [context {self.context}]" if self.context is not None else ""
        return f"{self.kind}: {self.message}{where}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "message": self.message,
            "context": list(self.context) if self.context is not None else None,
        }


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def of_kind(self, kind: str) -> List[Violation]:
        return [violation for violation in self.violations if violation.kind == kind]

    def to_dict(self) -> Dict[str, Any]:
        return {"ok": self.ok, "violations": [violation.to_dict() for violation in self.violations]}


# ================================
# ASSUMPTIONS
# ================================

ASSUMPTION_NAMES = (
    "bell_factorization_A",
    "bell_factorization_B",
    "no_correlation",
    "no_nonlocal_conspiracy_A",
    "no_nonlocal_conspiracy_B",
    "no_conspiracy",
    "no_contextuality",
)


@dataclass(frozen=True)
class AssumptionSet:
    """True = enforced, False = relaxed"""
    bell_factorization_A: bool = True
    bell_factorization_B: bool = True
    no_correlation: bool = True
    no_nonlocal_conspiracy_A: bool = True
    no_nonlocal_conspiracy_B: bool = True
    no_conspiracy: bool = True
    no_contextuality: bool = True

    @classmethod
    def all_enforced(cls) -> 'AssumptionSet':
        return cls()

    @classmethod
    def parse(cls, text: str) -> 'AssumptionSet':
        """Parse 'all', 'none', or 'all,-no_conspiracy,-no_contextuality' style flag sets"""
        flags = {name: True for name in ASSUMPTION_NAMES}
        for token in (part.strip() for part in text.split(",")):
            if not token:
                continue
            if token == "all":
                flags = {name: True for name in ASSUMPTION_NAMES}
            elif token == "none":
                flags = {name: False for name in ASSUMPTION_NAMES}
            else:
                enforce = not token.startswith("-")
                name = token.lstrip("+-")
                if name not in flags:
                    raise BeablesError(f"Unknown assumption '{name}' (known: {', '.join(ASSUMPTION_NAMES)})")
                flags[name] = enforce
        return cls(**flags)

    def relax(self, *names: str) -> 'AssumptionSet':
        for name in names:
            if name not in ASSUMPTION_NAMES:
                raise BeablesError(f"Unknown assumption '{name}'")
        return replace(self, **{name: False for name in names})

    def relaxed(self) -> List[str]:
        return [name for name in ASSUMPTION_NAMES if not getattr(self, name)]

    def label(self) -> str:
        relaxed = self.relaxed()
        return "all" if not relaxed else "all," + ",".join(f"-{name}" for name in relaxed)

    def to_dict(self) -> Dict[str, bool]:
        return {name: getattr(self, name) for name in ASSUMPTION_NAMES}


@dataclass(frozen=True)
class AssumptionVerdict:
    name: str
    max_dev: float
    weighted_dev: float
    passed: bool
    worst_context: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_dev": self.max_dev,
            "weighted_dev": self.weighted_dev,
            "passed": self.passed,
            "worst_context": self.worst_context,
        }


@dataclass(frozen=True)
class AssumptionReport:
    verdicts: Mapping[str, AssumptionVerdict]
    tolerance: float
    bound: float
    settings_prior: Mapping[Triple, float]
    missing_triples: Tuple[Triple, ...] = ()
    c_null_deviation: Optional[float] = None
    local_causality: Optional[float] = None
    quantum_reference: float = QUANTUM_BOUND

    @property
    def passed(self) -> bool:
        return all(verdict.passed for verdict in self.verdicts.values())

    def failed(self) -> List[str]:
        return [name for name, verdict in self.verdicts.items() if not verdict.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tolerance": self.tolerance,
            "bound": self.bound,
            "quantum_reference": self.quantum_reference,
            "passed": self.passed,
            "verdicts": {name: verdict.to_dict() for name, verdict in self.verdicts.items()},
            "missing_triples": [list(triple) for triple in self.missing_triples],
            "c_null_deviation": self.c_null_deviation,
            "local_causality": self.local_causality,
            "settings_prior": [
                {"settings": list(triple), "weight": weight}
                for triple, weight in sorted(self.settings_prior.items())
            ],
        }


# ================================
# QUANTUM REFERENCE
# ================================

@dataclass(frozen=True)
class MeasurementDirection:
    angle: float

    def __post_init__(self):
        angle = float(self.angle) % (2.0 * math.pi)
        object.__setattr__(self, "angle", angle)


@dataclass(frozen=True)
class QuantumScenario:
    directions_A: Tuple[MeasurementDirection, ...]
    directions_B: Tuple[MeasurementDirection, ...]

    def __post_init__(self):
        object.__setattr__(self, "directions_A", tuple(
            d if isinstance(d, MeasurementDirection) else MeasurementDirection(d) for d in self.directions_A
        ))
        object.__setattr__(self, "directions_B", tuple(
            d if isinstance(d, MeasurementDirection) else MeasurementDirection(d) for d in self.directions_B
        ))
        if not self.directions_A or not self.directions_B:
            raise BeablesError("A quantum scenario needs at least one direction per side")

    @classmethod
    def from_angles(cls, angles_A: Sequence[float], angles_B: Sequence[float]) -> 'QuantumScenario':
        return cls(
            directions_A=tuple(MeasurementDirection(angle) for angle in angles_A),
            directions_B=tuple(MeasurementDirection(angle) for angle in angles_B),
        )


# ================================
# OPTIMIZATION
# ================================

class CertificateKind(Enum):
    ENUMERATION_EXACT = "enumeration-exact"
    ASCENT_LOCAL = "ascent-local"


def outcome_labels(cardinality: int) -> Tuple[str, ...]:
    """Binary outcomes are labelled -1/+1; larger spaces get evenly spaced values in [-1, 1]"""
    if cardinality == 1:
        return ("+1",)
    if cardinality == 2:
        return ("-1", "+1")
    return tuple(f"{value:+.6g}" for value in np.linspace(-1.0, 1.0, cardinality))


def outcome_value_map(labels: Sequence[str]) -> Dict[str, float]:
    return {label: float(label) for label in labels}


BINARY_CARDINALITIES = {"a": 2, "b": 2, "c": 1, "lambda": 2, "mu": 2, "nu": 4, "A": 2, "B": 2}


@dataclass(frozen=True)
class OptimizationProblem:
    cardinalities: Mapping[str, int]
    assumptions: AssumptionSet = field(default_factory=AssumptionSet)
    coupling: Optional[SettingCoupling] = None
    seed: int = 0
    restarts: int = 20
    max_sweeps: int = 200
    enumeration_cap: int = 10 ** 7
    seed_cardinality: int = 2

    def __post_init__(self):
        cards = {role: int(self.cardinalities.get(role, BINARY_CARDINALITIES[role])) for role in ROLES}
        bad = {role: n for role, n in cards.items() if n < 1}
        if bad:
            raise BeablesError(f"Cardinalities must be >= 1: {bad}")
        object.__setattr__(self, "cardinalities", cards)
        if self.restarts < 1 or self.max_sweeps < 1 or self.enumeration_cap < 1 or self.seed_cardinality < 1:
            raise BeablesError("Restart, sweep, cap and seed-cardinality budgets must be >= 1")
        if self.coupling is not None and self.assumptions.no_contextuality:
            raise BeablesError("A setting coupling requires no_contextuality to be relaxed")

    @classmethod
    def binary(cls, assumptions: Optional[AssumptionSet] = None,
               cardinalities: Optional[Mapping[str, int]] = None, **kwargs) -> 'OptimizationProblem':
        """Binary settings and outcomes, |lambda| = |mu| = 2, |nu| = 4.

        With no_contextuality relaxed, c gets one value per (a, b) pair
        unless |c| is given explicitly.
        """
        assumptions = assumptions or AssumptionSet()
        cards = dict(BINARY_CARDINALITIES)
        cards.update(cardinalities or {})
        if not assumptions.no_contextuality and "c" not in (cardinalities or {}):
            cards["c"] = max(cards["c"], cards["a"] * cards["b"])
        return cls(cardinalities=cards, assumptions=assumptions, **kwargs)

    @classmethod
    def from_cards_spec(cls, spec: str, assumptions: AssumptionSet, **kwargs) -> 'OptimizationProblem':
        """'binary' or 'a=2,b=2,c=1,lambda=2,mu=2,nu=4' (missing roles default to binary)"""
        spec = spec.strip()
        if spec in ("", "binary"):
            return cls.binary(assumptions, **kwargs)
        cards: Dict[str, int] = {}
        for token in spec.split(","):
            if "=" not in token:
                raise BeablesError(f"Bad cardinality token '{token}', expected role=N")
            role, value = (part.strip() for part in token.split("=", 1))
            if role not in ROLES:
                raise UnknownVariableError(role, ROLES)
            try:
                cards[role] = int(value)
            except ValueError:
                raise BeablesError(f"Cardinality for '{role}' is not an integer: '{value}'") from None
        return cls.binary(assumptions, cardinalities=cards, **kwargs)

    def labels(self, role: str) -> Tuple[str, ...]:
        if role in OUTCOME_ROLES:
            return outcome_labels(self.cardinalities[role])
        return tuple(str(i) for i in range(self.cardinalities[role]))

    def space(self, role: str) -> FiniteSpace:
        return FiniteSpace(name=role, labels=self.labels(role))

    def effective_coupling(self) -> Optional[SettingCoupling]:
        """Explicit coupling, or c = index(a, b) when no_contextuality is relaxed"""
        if self.coupling is not None or self.assumptions.no_contextuality:
            return self.coupling
        n_a, n_b, n_c = (self.cardinalities[role] for role in SETTING_ROLES)
        if n_c < n_a * n_b:
            raise BeablesError(
                f"Default coupling c = f(a, b) needs |c| >= |a||b| = {n_a * n_b}, got {n_c}"
            )
        return SettingCoupling.from_function({
            (str(i), str(j)): str(i * n_b + j) for i in range(n_a) for j in range(n_b)
        })

    def allowed_triples(self) -> List[Triple]:
        coupling = self.effective_coupling()
        triples = list(itertools.product(self.labels("a"), self.labels("b"), self.labels("c")))
        if coupling is None:
            return triples
        return [triple for triple in triples if triple in coupling.allowed_triples]

    def to_dict(self) -> Dict[str, Any]:
        coupling = self.effective_coupling()
        return {
            "cardinalities": dict(self.cardinalities),
            "assumptions": self.assumptions.to_dict(),
            "coupling": coupling.to_dict() if coupling is not None else None,
            "seed": self.seed,
            "restarts": self.restarts,
            "max_sweeps": self.max_sweeps,
            "enumeration_cap": self.enumeration_cap,
            "seed_cardinality": self.seed_cardinality,
        }


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    model: BeablesModel
    chsh: ChshResult
    certificate: CertificateKind
    trace: Tuple[float, ...]
    problem: OptimizationProblem
    strategies_examined: int = 0

    @property
    def value(self) -> float:
        return self.chsh.value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "certificate": self.certificate.value,
            "chsh": self.chsh.to_dict(),
            "trace": list(self.trace),
            "strategies_examined": self.strategies_examined,
            "problem": self.problem.to_dict(),
        }


OBSERVED_VARIABLES = ("A", "s_A", "B", "s_B")


@dataclass(frozen=True, eq=False)
class ObservedJoint:
    """Observed statistics p(A, s_A, B, s_B)"""
    distribution: JointDistribution
    value_map_A: Mapping[str, float]
    value_map_B: Mapping[str, float]

    def __post_init__(self):
        if self.distribution.names != OBSERVED_VARIABLES:
            raise BeablesError(
                f"Observed joint must be over {OBSERVED_VARIABLES}, got {self.distribution.names}"
            )
        problems = self.distribution.normalization_problems()
        if problems:
            raise InvalidDistributionError("; ".join(problems))
        object.__setattr__(self, "value_map_A", {str(k): float(v) for k, v in self.value_map_A.items()})
        object.__setattr__(self, "value_map_B", {str(k): float(v) for k, v in self.value_map_B.items()})

    def settings_marginal(self) -> np.ndarray:
        """p(s_A, s_B) as an |s_A| x |s_B| matrix"""
        return self.distribution.weights.sum(axis=(0, 2))


@dataclass(frozen=True)
class LocalRealizability:
    realizable: bool
    weights: Optional[Mapping[str, float]] = None
    witness: Optional[Mapping[str, Any]] = None
    facet_values: Tuple[float, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "realizable": self.realizable,
            "weights": dict(self.weights) if self.weights is not None else None,
            "witness": dict(self.witness) if self.witness is not None else None,
            "facet_values": list(self.facet_values),
        }


# Configuration
@dataclass
class AnalysisConfig:
    tolerance: float = 1e-9
    enumeration_cap: int = 10 ** 7
    seed: int = 0
    restarts: int = 20
    max_sweeps: int = 200
    factorization_restarts: int = 10
    seed_cardinality: int = 2

    @classmethod
    def from_env(cls) -> 'AnalysisConfig':
        """Defaults overridden by BELL_* environment variables, when set"""
        config = cls()
        overrides = {
            "tolerance": ("BELL_TOLERANCE", float),
            "enumeration_cap": ("BELL_ENUMERATION_CAP", int),
            "seed": ("BELL_SEED", int),
            "restarts": ("BELL_RESTARTS", int),
            "factorization_restarts": ("BELL_FACTORIZATION_RESTARTS", int),
        }
        for attribute, (variable, cast) in overrides.items():
            raw = os.getenv(variable)
            if raw:
                try:
                    setattr(config, attribute, cast(raw))
                except ValueError:
                    raise BeablesError(f"Environment variable {variable}={raw!r} is not a valid {cast.__name__}") from None
        return config
