import json

import numpy as np
import pytest

from beables.beables_operations import correlator_table, validate
from model_files.model_document import (
    loads_model,
    observed_from_document,
    parse_model,
    parse_observed,
    parse_settings_prior,
    parse_table,
    serialize_model,
    serialize_observed,
    serialize_table,
    table_from_document,
    write_model,
)
from model_files.utils import format_decimal, parse_decimal
from models.errors import ModelFileError
from models.models import QuantumScenario
from quantum.quantum_reference import singlet_observed
from tests.utils import fixture_path, load_fixture, random_model

MODEL_FIXTURES = [
    "local_deterministic",
    "conspiracy_nu_ab",
    "contextual_coupled",
    "nonlocal_conspiracy",
    "correlated_lambda_mu",
    "singlet_completion",
]


def fixture_document(name):
    return json.loads(fixture_path(f"{name}.model").read_text())


@pytest.mark.parametrize("name", MODEL_FIXTURES)
def test_fixture_round_trip_is_stable(name):
    model = load_fixture(name)
    text = serialize_model(model)
    assert serialize_model(loads_model(text)) == text


def test_round_trip_keeps_weights_exactly():
    rng = np.random.default_rng(3)
    for _ in range(100):
        model = random_model(rng, {"nu": 3}, zero_fraction=0.3)
        parsed = loads_model(serialize_model(model))
        for triple, joint in model.context_joints.items():
            assert np.array_equal(parsed.joint_for(triple).weights, joint.weights)


def test_write_model(tmp_path):
    model = load_fixture("contextual_coupled")
    path = tmp_path / "copy.model"
    write_model(model, path)
    copy = parse_model(path)
    assert copy.coupling.allowed_triples == model.coupling.allowed_triples
    assert correlator_table(copy).entries == correlator_table(model).entries


def test_decimal_strings():
    assert parse_decimal("0.1", "x") == 0.1
    assert parse_decimal(" -2 ", "x") == -2.0
    assert format_decimal(0.1) == "0.1"
    with pytest.raises(ModelFileError):
        parse_decimal("one half", "x")
    with pytest.raises(ModelFileError):
        parse_decimal("NaN", "x")


def test_negative_probability_names_the_field():
    document = fixture_document("local_deterministic")
    document["contexts"][0]["weights"][0][0][0][0][0] = "-0.1"
    with pytest.raises(ModelFileError, match="negative probability") as error:
        loads_model(json.dumps(document))
    assert error.value.field_path == "contexts[0].weights[0][0][0][0][0]"


def test_unnormalized_context_is_parsed_then_flagged():
    document = fixture_document("local_deterministic")
    document["contexts"][2]["weights"][1][1][0][0][0] = "0.5"
    report = validate(loads_model(json.dumps(document)))
    assert [v.context for v in report.of_kind("normalization")] == [("1", "0", "0")]


def test_bad_json_reports_position():
    with pytest.raises(ModelFileError, match="line 1 column"):
        loads_model("{not json")


def test_missing_space():
    document = fixture_document("local_deterministic")
    del document["spaces"]["lambda"]
    with pytest.raises(ModelFileError) as error:
        loads_model(json.dumps(document))
    assert error.value.field_path == "spaces.lambda"


def test_wrong_tensor_shape():
    document = fixture_document("local_deterministic")
    document["contexts"][1]["weights"] = document["contexts"][1]["weights"][:1]
    with pytest.raises(ModelFileError) as error:
        loads_model(json.dumps(document))
    assert error.value.field_path == "contexts[1].weights"


def test_wrong_format_version():
    document = fixture_document("local_deterministic")
    document["format_version"] = 2
    with pytest.raises(ModelFileError, match="format_version"):
        loads_model(json.dumps(document))


def test_wrong_kind():
    document = fixture_document("local_deterministic")
    document["kind"] = "correlator_table"
    with pytest.raises(ModelFileError) as error:
        loads_model(json.dumps(document))
    assert error.value.field_path == "kind"


def test_duplicate_context():
    document = fixture_document("local_deterministic")
    document["contexts"][1]["settings"] = ["0", "0", "0"]
    with pytest.raises(ModelFileError, match="duplicate context"):
        loads_model(json.dumps(document))


def test_value_map_label_outside_space():
    document = fixture_document("local_deterministic")
    document["value_maps"]["A"]["0"] = "0"
    with pytest.raises(ModelFileError) as error:
        loads_model(json.dumps(document))
    assert error.value.field_path == "value_maps.A"


def test_observed_file():
    observed = parse_observed(fixture_path("singlet_optimal.observed"))
    expected = singlet_observed(QuantumScenario.from_angles([0.0, np.pi / 2], [np.pi / 4, 3 * np.pi / 4]))
    assert np.allclose(observed.distribution.weights, expected.distribution.weights, atol=1e-12)
    text = serialize_observed(observed)
    assert serialize_observed(observed_from_document(json.loads(text))) == text


def test_table_files():
    zero = parse_table(fixture_path("zero.table"))
    assert len(zero) == 4 and set(zero.entries.values()) == {0.0}

    quantum = parse_table(fixture_path("quantum_optimal.table"))
    assert quantum.get("0", "1", "0") == pytest.approx(np.sqrt(0.5), abs=1e-15)
    text = serialize_table(quantum)
    assert serialize_table(table_from_document(json.loads(text))) == text


def test_settings_prior_file():
    prior = parse_settings_prior(fixture_path("skewed.prior"))
    assert prior == {("0", "0", "0"): 0.4, ("0", "1", "0"): 0.3, ("1", "0", "0"): 0.2, ("1", "1", "0"): 0.1}
