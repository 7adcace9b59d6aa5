import numpy as np
import pytest

from assumptions.assumption_checks import (
    check_no_conspiracy,
    check_no_nonlocal_conspiracy,
    full_report,
)
from beables.beables_operations import correlator_table, model_max_chsh, validate
from beables.separations import (
    factorized_projection,
    merge_common_past_into_settings,
    merge_settings_into_common_past,
    mix_models,
)
from models.errors import BeablesError
from tests.utils import load_fixture, random_model


def test_merge_settings_averages_over_c():
    rng = np.random.default_rng(21)
    model = random_model(rng, {"c": 2})
    merged = merge_settings_into_common_past(model)
    assert validate(merged).ok
    assert merged.space("c").is_null
    assert merged.labels("nu") == ("0|0", "0|1", "1|0", "1|1")
    assert merged.coupling is None

    before, after = correlator_table(model), correlator_table(merged)
    for a in model.labels("a"):
        for b in model.labels("b"):
            expected = np.mean([before.get(a, b, c) for c in model.labels("c")])
            assert after.get(a, b, "0") == pytest.approx(expected, abs=1e-12)


def test_merge_settings_turns_contextuality_into_conspiracy():
    model = load_fixture("contextual_coupled")
    before = full_report(model)
    merged = merge_settings_into_common_past(model)
    after = full_report(merged)

    assert before.failed() == ["no_contextuality"]
    assert after.failed() == ["no_conspiracy"]
    assert model_max_chsh(merged).value == pytest.approx(4.0)


def test_merge_common_past_turns_conspiracy_into_contextuality():
    model = load_fixture("conspiracy_nu_ab")
    merged = merge_common_past_into_settings(model)
    assert validate(merged).ok
    assert merged.space("nu").is_null
    assert sorted(merged.coupling.allowed_triples) == [
        ("0", "0", "0|00"), ("0", "1", "0|01"), ("1", "0", "0|10"), ("1", "1", "0|11"),
    ]

    report = full_report(merged)
    assert report.failed() == ["no_contextuality"]
    assert len(report.missing_triples) == 12
    assert model_max_chsh(merged).value == pytest.approx(4.0)


def test_merge_common_past_keeps_full_product_when_nu_is_free():
    merged = merge_common_past_into_settings(load_fixture("local_deterministic"))
    assert merged.coupling is None
    assert full_report(merged).passed


def test_factorized_projection_passes_every_checker():
    rng = np.random.default_rng(31)
    for _ in range(20):
        model = random_model(rng, {"nu": 3}, zero_fraction=0.2)
        projection = factorized_projection(model)
        assert validate(projection).ok
        report = full_report(projection)
        assert report.passed, report.failed()
        assert max(v.max_dev for v in report.verdicts.values()) <= 1e-12
        assert model_max_chsh(projection).value <= 2.0 + 1e-9


@pytest.mark.parametrize("name, deviation", [
    ("conspiracy_nu_ab", lambda model: check_no_conspiracy(model).deviation.max_dev),
    ("nonlocal_conspiracy", lambda model: check_no_nonlocal_conspiracy(model)[0].max_dev),
])
def test_deviation_shrinks_when_mixing_toward_projection(name, deviation):
    model = load_fixture(name)
    projection = factorized_projection(model)
    values = [deviation(mix_models(model, projection, weight)) for weight in (1.0, 0.5, 0.0)]
    assert values[0] == pytest.approx(1.0)
    assert values[0] + 1e-12 >= values[1] >= values[2] - 1e-12
    assert values[2] <= 1e-12


def test_mix_models_rejects_bad_weight():
    model = load_fixture("local_deterministic")
    with pytest.raises(BeablesError):
        mix_models(model, model, 1.5)


def test_mix_models_rejects_different_spaces():
    with pytest.raises(BeablesError):
        mix_models(load_fixture("local_deterministic"), load_fixture("conspiracy_nu_ab"), 0.5)
