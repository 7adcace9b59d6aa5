# ================================
# BEABLES MODEL OPERATIONS
# ================================

import itertools
import logging
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np

from models.errors import (
    InsufficientSettingsError,
    MissingEntryError,
)
from models.models import (
    BeablesModel,
    ChshResult,
    CorrelatorTable,
    NORMALIZATION_TOLERANCE,
    ROLES,
    SETTING_ROLES,
    SignChoice,
    Triple,
    ValidationReport,
    Violation,
)
from .utils import context_tensor

logger = logging.getLogger(__name__)


def validate(model: BeablesModel) -> ValidationReport:
    """Check every model invariant; each violation names the offending context"""
    report = ValidationReport()
    add = report.violations.append

    if model.coupling is not None:
        for triple in model.coupling.sorted_triples():
            for role, label in zip(SETTING_ROLES, triple):
                if label not in model.labels(role):
                    add(Violation("coupling", f"label '{label}' is not in space '{role}'", triple))

    expected_spaces = model.context_spaces()
    for triple in model.allowed_triples():
        joint = model.context_joints.get(triple)
        if joint is None:
            add(Violation("missing_context", "no context joint for allowed setting triple", triple))
            continue
        if tuple(joint.variables) != expected_spaces:
            add(Violation(
                "context_spaces",
                f"joint is over {[(s.name, list(s.labels)) for s in joint.variables]}, "
                f"expected {[(s.name, list(s.labels)) for s in expected_spaces]}",
                triple,
            ))
            continue
        for problem in joint.normalization_problems(NORMALIZATION_TOLERANCE):
            add(Violation("normalization", problem, triple))

    allowed = set(model.allowed_triples())
    for triple in sorted(model.context_joints):
        if triple not in allowed:
            add(Violation("contextuality", "context joint for a setting triple outside the allowed contexts", triple))

    for role, value_map in (("A", model.value_map_A), ("B", model.value_map_B)):
        for label in model.labels(role):
            if label not in value_map:
                add(Violation("value_map", f"no value for outcome {role}='{label}'"))
            elif not np.isfinite(value_map[label]) or abs(value_map[label]) > 1.0:
                add(Violation("value_bound", f"|{role}('{label}')| = {abs(value_map[label]):g} exceeds 1"))

    if model.settings_prior is not None:
        for triple in model.allowed_triples():
            if model.settings_prior.get(triple, 0.0) <= 0.0:
                add(Violation("settings_prior", "settings prior is not strictly positive", triple))

    if report.violations:
        logger.debug("Model '%s' has %d violation(s)", model.name, len(report.violations))
    return report


def mean_product(model: BeablesModel, a: str, b: str, c: str) -> float:
    """
    M(a, b, c): mean of the product of the outcome values, summed over the
    outcomes and all hidden beables of the context joint.

    Raises:
        ContextualityError: if (a, b, c) is not an allowed context
    """
    tensor = context_tensor(model.joint_for((a, b, c)))
    outcomes = tensor.reshape(tensor.shape[0], tensor.shape[1], -1).sum(axis=2)
    return float(model.outcome_values("A") @ outcomes @ model.outcome_values("B"))


def correlator_table(model: BeablesModel) -> CorrelatorTable:
    entries = {triple: mean_product(model, *triple) for triple in model.allowed_triples()}
    coupled = model.coupling is not None and not model.coupling.is_full_product(
        model.labels("a"), model.labels("b"), model.labels("c")
    )
    return CorrelatorTable(
        entries=entries,
        a_labels=model.labels("a"),
        b_labels=model.labels("b"),
        c_labels=model.labels("c"),
        coupled=coupled,
    )


def _quad_contexts(table: CorrelatorTable, a: str, a_prime: str, b: str, b_prime: str,
                   c: Optional[str]) -> Optional[Tuple[Triple, Triple, Triple, Triple]]:
    """The four contexts a CHSH combination reads, or None when one is absent.

    For coupled tables each (a, b) pair lives in its own c-context: a pair
    with a single context uses it, otherwise c picks among several.
    """
    contexts = []
    for x, y in ((a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime)):
        if table.coupled:
            candidates = table.contexts_for(x, y)
            if len(candidates) == 1:
                contexts.append((x, y, candidates[0]))
                continue
            if c is None or c not in candidates:
                return None
        if (x, y, c) not in table.entries:
            return None
        contexts.append((x, y, c))
    return tuple(contexts)


def _evaluate(table: CorrelatorTable, contexts, sign: SignChoice) -> float:
    m1, m2, m3, m4 = (table.entries[triple] for triple in contexts)
    return abs(m1 + sign.first * m2) + abs(m3 + sign.second * m4)


def chsh(table: CorrelatorTable, a: str, a_prime: str, b: str, b_prime: str,
         c: Optional[str] = None, sign: Union[SignChoice, str] = SignChoice.MINUS_PLUS) -> ChshResult:
    """
    |M(a,b,c) -/+ M(a,b',c)| + |M(a',b,c) +/- M(a',b',c)|.

    On a coupled table the four correlators come from the coupled contexts
    (a, b, f(a, b)) etc. and `c` only disambiguates pairs with several.
    """
    sign = SignChoice(sign)
    if c is None and not table.coupled:
        if len(table.c_labels) != 1:
            raise MissingEntryError("c must be given for a table with several c values")
        c = table.c_labels[0]
    contexts = _quad_contexts(table, str(a), str(a_prime), str(b), str(b_prime), None if c is None else str(c))
    if contexts is None:
        raise MissingEntryError(
            f"Correlator table lacks an entry needed for a={a}, a'={a_prime}, b={b}, b'={b_prime}, c={c}"
        )
    c_label = "/".join(sorted({triple[2] for triple in contexts}))
    return ChshResult(
        a=str(a), a_prime=str(a_prime), b=str(b), b_prime=str(b_prime), c=c_label,
        sign=sign, value=_evaluate(table, contexts, sign), contexts=contexts,
    )


def chsh_candidates(table: CorrelatorTable) -> Iterator[Tuple[str, str, str, str, Tuple[Triple, ...]]]:
    """
    Every distinct CHSH quadruple (a, a', b, b', contexts) of the table, in
    lexicographic label order. Only the table's keys are read, so a table of
    zeros serves as a skeleton for a given set of contexts.
    """
    a_labels = sorted({triple[0] for triple in table.entries})
    b_labels = sorted({triple[1] for triple in table.entries})
    if len(a_labels) < 2 or len(b_labels) < 2:
        raise InsufficientSettingsError(
            f"CHSH needs two settings per side, table has a={a_labels}, b={b_labels}"
        )
    c_options: List[Optional[str]] = sorted({triple[2] for triple in table.entries})
    if table.coupled:
        c_options = [None] + c_options

    seen = set()
    for a, a_prime in itertools.permutations(a_labels, 2):
        for b, b_prime in itertools.permutations(b_labels, 2):
            for c in c_options:
                contexts = _quad_contexts(table, a, a_prime, b, b_prime, c)
                if contexts is None or contexts in seen:
                    continue
                seen.add(contexts)
                yield a, a_prime, b, b_prime, contexts


def all_chsh(table: CorrelatorTable) -> List[ChshResult]:
    """Every CHSH combination of the table with both sign choices, in candidate order"""
    return [
        ChshResult(
            a=a, a_prime=a_prime, b=b, b_prime=b_prime,
            c="/".join(sorted({triple[2] for triple in contexts})),
            sign=sign, value=_evaluate(table, contexts, sign), contexts=contexts,
        )
        for a, a_prime, b, b_prime, contexts in chsh_candidates(table)
        for sign in (SignChoice.MINUS_PLUS, SignChoice.PLUS_MINUS)
    ]


def max_chsh(table: CorrelatorTable) -> ChshResult:
    """
    Largest CHSH combination over a != a', b != b', c and both sign choices.

    Candidates are visited in lexicographic label order and only a strictly
    larger value replaces the incumbent, so ties go to the smallest labels.
    """
    best = None
    for result in all_chsh(table):
        if best is None or result.value > best.value:
            best = result
    if best is None:
        raise MissingEntryError("No complete CHSH quadruple in the correlator table")
    return best


def model_max_chsh(model: BeablesModel) -> ChshResult:
    return max_chsh(correlator_table(model))


def describe_model(model: BeablesModel) -> str:
    """One-line summary of cardinalities, e.g. 'a=2 b=2 c=1 lambda=2 ...'"""
    return " ".join(f"{role}={model.space(role).cardinality}" for role in ROLES)
