# ================================
# MODEL DOCUMENTS
# ================================
# Canonical JSON: sorted keys, contexts in allowed-triple order, floats written with repr.
# Context weights are nested lists with axes (A, B, lambda, mu, nu).

import logging
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from models.errors import ModelFileError
from models.models import (
    BeablesModel,
    CONTEXT_VARIABLES,
    CorrelatorTable,
    FiniteSpace,
    JointDistribution,
    OBSERVED_VARIABLES,
    ObservedJoint,
    ROLES,
    SettingCoupling,
    Triple,
)
from .utils import (
    FORMAT_VERSION,
    check_header,
    dump_json,
    field,
    format_decimal,
    format_tensor,
    load_json,
    parse_decimal,
    parse_labels,
    parse_probability,
    parse_tensor,
    parse_triple,
    parse_value_map,
    require,
)

logger = logging.getLogger(__name__)

MODEL_KIND = "beables_model"
OBSERVED_KIND = "observed"
TABLE_KIND = "correlator_table"
PRIOR_KIND = "settings_prior"

PathLike = Union[str, Path]


def _read(path: PathLike) -> str:
    return Path(path).read_text(encoding="utf-8")


# ================================
# BEABLES MODELS
# ================================

def _parse_coupling(node: Any) -> Union[SettingCoupling, None]:
    if node is None:
        return None
    if not isinstance(node, dict):
        raise ModelFileError("expected null or an object", "coupling")
    if "function" in node:
        function = require(node, "function", "coupling", dict)
        mapping = {}
        for key, c in function.items():
            parts = key.split(",")
            if len(parts) != 2:
                raise ModelFileError("keys must read 'a,b'", field("coupling.function", key))
            mapping[(parts[0].strip(), parts[1].strip())] = str(c)
        return SettingCoupling.from_function(mapping)
    triples = require(node, "triples", "coupling", list)
    return SettingCoupling(allowed_triples=frozenset(
        parse_triple(item, field("coupling.triples", i)) for i, item in enumerate(triples)
    ))


def _parse_prior(node: Any) -> Dict[Triple, float]:
    if not isinstance(node, list):
        raise ModelFileError("expected a list of {settings, weight}", "settings_prior")
    prior = {}
    for i, item in enumerate(node):
        path = field("settings_prior", i)
        triple = parse_triple(require(item, "settings", path), field(path, "settings"))
        prior[triple] = parse_probability(require(item, "weight", path), field(path, "weight"))
    return prior


def model_from_document(document: Any) -> BeablesModel:
    check_header(document, MODEL_KIND)
    spaces_node = require(document, "spaces", "", dict)
    spaces = {}
    for role in ROLES:
        labels = parse_labels(require(spaces_node, role, "spaces"), field("spaces", role))
        spaces[role] = FiniteSpace(name=role, labels=labels)

    value_maps = require(document, "value_maps", "", dict)
    value_map_A = parse_value_map(require(value_maps, "A", "value_maps"), spaces["A"].labels, "value_maps.A")
    value_map_B = parse_value_map(require(value_maps, "B", "value_maps"), spaces["B"].labels, "value_maps.B")

    coupling = _parse_coupling(document.get("coupling"))
    context_spaces = tuple(spaces[role] for role in CONTEXT_VARIABLES)
    shape = tuple(space.cardinality for space in context_spaces)

    joints = {}
    for i, context in enumerate(require(document, "contexts", "", list)):
        path = field("contexts", i)
        triple = parse_triple(require(context, "settings", path), field(path, "settings"))
        if triple in joints:
            raise ModelFileError(f"duplicate context {list(triple)}", field(path, "settings"))
        weights = parse_tensor(require(context, "weights", path), shape, field(path, "weights"))
        joints[triple] = JointDistribution(variables=context_spaces, weights=weights)

    prior_node = document.get("settings_prior")
    settings_prior = _parse_prior(prior_node) if prior_node is not None else None

    return BeablesModel(
        spaces=spaces,
        context_joints=joints,
        value_map_A=value_map_A,
        value_map_B=value_map_B,
        coupling=coupling,
        settings_prior=settings_prior,
        name=str(document.get("name", "")),
    )


def model_to_document(model: BeablesModel) -> Dict[str, Any]:
    order = {triple: i for i, triple in enumerate(model.allowed_triples())}
    contexts = sorted(model.context_joints.items(), key=lambda item: (order.get(item[0], len(order)), item[0]))
    document: Dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "kind": MODEL_KIND,
        "name": model.name,
        "spaces": {role: list(model.labels(role)) for role in ROLES},
        "value_maps": {
            "A": {label: format_decimal(value) for label, value in model.value_map_A.items()},
            "B": {label: format_decimal(value) for label, value in model.value_map_B.items()},
        },
        "coupling": model.coupling.to_dict() if model.coupling is not None else None,
        "contexts": [
            {"settings": list(triple), "weights": format_tensor(np.asarray(joint.weights))}
            for triple, joint in contexts
        ],
        "settings_prior": None,
    }
    if model.settings_prior is not None:
        document["settings_prior"] = [
            {"settings": list(triple), "weight": format_decimal(weight)}
            for triple, weight in sorted(model.settings_prior.items(), key=lambda item: order.get(item[0], len(order)))
        ]
    return document


def loads_model(text: str) -> BeablesModel:
    return model_from_document(load_json(text))


def serialize_model(model: BeablesModel) -> str:
    return dump_json(model_to_document(model))


def parse_model(path: PathLike) -> BeablesModel:
    """
    Read a `.model` document.

    Raises:
        OSError: if the file cannot be read
        ModelFileError: on malformed content, with the offending field path
    """
    model = loads_model(_read(path))
    logger.debug("Parsed model '%s' from %s (%d contexts)", model.name, path, len(model.context_joints))
    return model


def write_model(model: BeablesModel, path: PathLike) -> None:
    Path(path).write_text(serialize_model(model), encoding="utf-8")


# ================================
# OBSERVED JOINTS
# ================================

def observed_from_document(document: Any) -> ObservedJoint:
    check_header(document, OBSERVED_KIND)
    spaces_node = require(document, "spaces", "", dict)
    spaces = tuple(
        FiniteSpace(name=name, labels=parse_labels(require(spaces_node, name, "spaces"), field("spaces", name)))
        for name in OBSERVED_VARIABLES
    )
    value_maps = require(document, "value_maps", "", dict)
    value_map_A = parse_value_map(require(value_maps, "A", "value_maps"), spaces[0].labels, "value_maps.A")
    value_map_B = parse_value_map(require(value_maps, "B", "value_maps"), spaces[2].labels, "value_maps.B")
    weights = parse_tensor(
        require(document, "weights"), tuple(space.cardinality for space in spaces), "weights"
    )
    distribution = JointDistribution(variables=spaces, weights=weights)
    problems = distribution.normalization_problems()
    if problems:
        raise ModelFileError("; ".join(problems), "weights")
    return ObservedJoint(distribution=distribution, value_map_A=value_map_A, value_map_B=value_map_B)


def observed_to_document(observed: ObservedJoint) -> Dict[str, Any]:
    dist = observed.distribution
    return {
        "format_version": FORMAT_VERSION,
        "kind": OBSERVED_KIND,
        "spaces": {space.name: list(space.labels) for space in dist.variables},
        "value_maps": {
            "A": {label: format_decimal(value) for label, value in observed.value_map_A.items()},
            "B": {label: format_decimal(value) for label, value in observed.value_map_B.items()},
        },
        "weights": format_tensor(np.asarray(dist.weights)),
    }


def parse_observed(path: PathLike) -> ObservedJoint:
    return observed_from_document(load_json(_read(path)))


def serialize_observed(observed: ObservedJoint) -> str:
    return dump_json(observed_to_document(observed))


# ================================
# CORRELATOR TABLES
# ================================

def table_from_document(document: Any) -> CorrelatorTable:
    check_header(document, TABLE_KIND)
    a_labels = parse_labels(require(document, "a_labels"), "a_labels")
    b_labels = parse_labels(require(document, "b_labels"), "b_labels")
    c_labels = parse_labels(document.get("c_labels", ["0"]), "c_labels")
    entries = {}
    for i, item in enumerate(require(document, "entries", "", list)):
        path = field("entries", i)
        triple = parse_triple(require(item, "settings", path), field(path, "settings"))
        for role, label, labels in zip("abc", triple, (a_labels, b_labels, c_labels)):
            if label not in labels:
                raise ModelFileError(f"label '{label}' is not in {role}_labels", field(path, "settings"))
        value = parse_decimal(require(item, "value", path), field(path, "value"))
        entries[triple] = value
    coupled = document.get("coupled", False)
    if not isinstance(coupled, bool):
        raise ModelFileError("expected true or false", "coupled")
    return CorrelatorTable(entries=entries, a_labels=a_labels, b_labels=b_labels, c_labels=c_labels, coupled=coupled)


def table_to_document(table: CorrelatorTable) -> Dict[str, Any]:
    document = table.to_dict()
    document.update(format_version=FORMAT_VERSION, kind=TABLE_KIND)
    for entry in document["entries"]:
        entry["value"] = format_decimal(entry["value"])
    return document


def parse_table(path: PathLike) -> CorrelatorTable:
    return table_from_document(load_json(_read(path)))


def serialize_table(table: CorrelatorTable) -> str:
    return dump_json(table_to_document(table))


# ================================
# SETTINGS PRIORS
# ================================

def parse_settings_prior(path: PathLike) -> Dict[Triple, float]:
    """A stand-alone settings prior: {"format_version": 1, "kind": "settings_prior", "settings_prior": [...]}"""
    document = load_json(_read(path))
    check_header(document, PRIOR_KIND)
    return _parse_prior(require(document, "settings_prior"))
