import json

import pytest
from click.testing import CliRunner

from app import cli
from assumptions.assumption_checks import full_report
from beables.beables_operations import correlator_table, model_max_chsh
from beables.factorization import product_form_deviation
from model_files.model_document import parse_model
from models.errors import BeablesError
from models.models import AnalysisConfig
from tests.utils import fixture_path, load_fixture


@pytest.fixture
def runner():
    return CliRunner()


def model_arg(name):
    return str(fixture_path(f"{name}.model"))


def test_validate_ok(runner):
    result = runner.invoke(cli, ["validate", model_arg("local_deterministic")])
    assert result.exit_code == 0
    assert "model is valid" in result.output
    assert "a=2 b=2 c=1 lambda=1 mu=1 nu=1 A=2 B=2" in result.output


def test_validate_invalid_model(runner, tmp_path):
    document = json.loads(fixture_path("local_deterministic.model").read_text())
    document["contexts"][0]["weights"][1][1][0][0][0] = "0.5"
    path = tmp_path / "broken.model"
    path.write_text(json.dumps(document))
    result = runner.invoke(cli, ["validate", str(path)])
    assert result.exit_code == 2
    assert "normalization" in result.output


def test_malformed_file_exits_two(runner, tmp_path):
    path = tmp_path / "bad.model"
    path.write_text("{")
    result = runner.invoke(cli, ["chsh", str(path)])
    assert result.exit_code == 2


def test_missing_file_exits_two(runner):
    result = runner.invoke(cli, ["chsh", "missing.model"])
    assert result.exit_code == 2


def test_check_passing_model(runner):
    result = runner.invoke(cli, ["check", model_arg("local_deterministic")])
    assert result.exit_code == 0
    assert "model max CHSH: 2.000000000" in result.output


def test_check_failing_model(runner):
    result = runner.invoke(cli, ["check", model_arg("conspiracy_nu_ab")])
    assert result.exit_code == 1
    assert "no_conspiracy" in result.output


def test_check_with_prior_file(runner):
    result = runner.invoke(cli, ["check", model_arg("local_deterministic"), "--prior", str(fixture_path("skewed.prior"))])
    assert result.exit_code == 0


def test_check_loose_tolerance(runner):
    result = runner.invoke(cli, ["check", model_arg("nonlocal_conspiracy"), "--tolerance", "1.5"])
    assert result.exit_code == 0


def test_chsh_quad_with_sign(runner):
    result = runner.invoke(cli, ["chsh", model_arg("conspiracy_nu_ab"), "--quad", "0", "1", "0", "1", "0", "--sign", "+-"])
    assert result.exit_code == 0
    assert "4.000000000" in result.output


def test_chsh_quad_missing_entry(runner):
    result = runner.invoke(cli, ["chsh", model_arg("conspiracy_nu_ab"), "--quad", "0", "1", "0", "2", "0"])
    assert result.exit_code == 2


def test_check_reports_product_form_residual(runner):
    result = runner.invoke(cli, ["check", model_arg("local_deterministic")])
    assert "product-form residual max|M - Abar Bbar|: 0.000e+00" in result.output


def test_chsh_product_form_residual_matches_library(runner, tmp_path):
    path = tmp_path / "chsh.json"
    result = runner.invoke(cli, ["chsh", model_arg("conspiracy_nu_ab"), "--json", str(path)])
    assert result.exit_code == 0
    assert "product-form residual" in result.output
    residual = json.loads(path.read_text())["product_form_residual"]
    table = correlator_table(load_fixture("conspiracy_nu_ab"))
    assert residual == pytest.approx(product_form_deviation(table, restarts=10, seed=0), abs=1e-12)
    # a table with CHSH 4 sits at least (4 - 2) / 4 away from every product form
    assert residual >= 0.5 - 1e-9


def test_coupled_table_has_no_product_form_residual(runner, tmp_path):
    path = tmp_path / "chsh.json"
    result = runner.invoke(cli, ["chsh", model_arg("contextual_coupled"), "--json", str(path)])
    assert result.exit_code == 0
    assert "product-form residual" not in result.output
    assert "product_form_residual" not in json.loads(path.read_text())


def test_chsh_all(runner):
    result = runner.invoke(cli, ["chsh", model_arg("local_deterministic"), "--all"])
    assert result.exit_code == 0
    assert result.output.count("2.000000000") >= 4


def test_optimize_enumerate(runner):
    result = runner.invoke(cli, ["optimize", "--flags", "all", "--cards", "binary", "--enumerate"])
    assert result.exit_code == 0
    assert "max CHSH = 2.000000000 (enumeration-exact)" in result.output


def test_optimize_relaxed_conspiracy(runner):
    result = runner.invoke(cli, ["optimize", "--flags", "all,-no_conspiracy", "--enumerate"])
    assert result.exit_code == 0
    assert "max CHSH = 4.000000000 (enumeration-exact)" in result.output


def test_optimize_over_cap_exits_two(runner):
    result = runner.invoke(cli, ["optimize", "--flags", "none", "--enumerate"])
    assert result.exit_code == 2
    assert "--ascend" in result.output


def test_optimize_ascend(runner):
    result = runner.invoke(cli, ["optimize", "--ascend", "--seed", "3", "--restarts", "5"])
    assert result.exit_code == 0
    assert "(ascent-local)" in result.output


def test_optimize_bad_flags(runner):
    result = runner.invoke(cli, ["optimize", "--flags", "all,-no_such_thing"])
    assert result.exit_code == 2


def test_optimize_ladder(runner, tmp_path):
    path = tmp_path / "ladder.json"
    result = runner.invoke(cli, ["optimize", "--ladder", "--enumerate", "--json", str(path)])
    assert result.exit_code == 0
    assert "no_contextuality" in result.output
    assert "quantum reference: 2.828427125" in result.output
    ladder = json.loads(path.read_text())["ladder"]
    assert ladder["none"]["value"] == pytest.approx(2.0)
    assert ladder["no_correlation"]["value"] == pytest.approx(2.0)
    assert ladder["no_conspiracy"]["value"] == pytest.approx(4.0)


def test_quantum_optimal_angles(runner):
    result = runner.invoke(cli, ["quantum", "--angles", "0", "1.5707963", "0.7853982", "2.3561945"])
    assert result.exit_code == 0
    assert "max CHSH = 2.828427" in result.output


def test_quantum_scan(runner):
    result = runner.invoke(cli, ["quantum", "--scan", "64"])
    assert result.exit_code == 0
    assert "grid scan (64 angles)" in result.output


def test_complete(runner, tmp_path):
    output = tmp_path / "completed.model"
    result = runner.invoke(cli, ["complete", str(fixture_path("singlet_optimal.observed")), "--output", str(output)])
    assert result.exit_code == 0
    assert "model max CHSH: 2.828427125" in result.output
    model = parse_model(output)
    assert not full_report(model).passed


def test_polytope_quantum_table(runner):
    result = runner.invoke(cli, ["polytope", str(fixture_path("quantum_optimal.table"))])
    assert result.exit_code == 1
    assert "NOT locally realizable" in result.output
    assert "chsh_facet" in result.output


def test_polytope_zero_table(runner):
    result = runner.invoke(cli, ["polytope", str(fixture_path("zero.table"))])
    assert result.exit_code == 0
    assert "locally realizable" in result.output


def test_json_report_is_deterministic(runner, tmp_path):
    first, second = tmp_path / "first.json", tmp_path / "second.json"
    for path in (first, second):
        runner.invoke(cli, ["check", model_arg("conspiracy_nu_ab"), "--json", str(path)])
    assert first.read_bytes() == second.read_bytes()


def test_check_json_matches_stored_report(runner, tmp_path, monkeypatch):
    for variable in ("BELL_TOLERANCE", "BELL_SEED", "BELL_FACTORIZATION_RESTARTS"):
        monkeypatch.delenv(variable, raising=False)
    path = tmp_path / "report.json"
    result = runner.invoke(cli, ["check", model_arg("local_deterministic"), "--json", str(path)])
    assert result.exit_code == 0
    assert path.read_bytes() == fixture_path("check_local_deterministic.json").read_bytes()


def test_json_report_matches_library(runner, tmp_path):
    path = tmp_path / "report.json"
    runner.invoke(cli, ["check", model_arg("nonlocal_conspiracy"), "--json", str(path)])
    document = json.loads(path.read_text())
    model = load_fixture("nonlocal_conspiracy")
    report = full_report(model)

    assert document["command"] == "check"
    assert document["assumptions"]["passed"] is False
    for name, verdict in report.verdicts.items():
        assert document["assumptions"]["verdicts"][name]["max_dev"] == pytest.approx(verdict.max_dev, abs=1e-12)
    assert document["max_chsh"]["value"] == pytest.approx(model_max_chsh(model).value, abs=1e-12)


def test_tolerance_from_environment(runner, monkeypatch):
    monkeypatch.setenv("BELL_TOLERANCE", "1.5")
    result = runner.invoke(cli, ["check", model_arg("nonlocal_conspiracy")])
    assert result.exit_code == 0


def test_factorization_restarts_from_environment(monkeypatch):
    monkeypatch.setenv("BELL_FACTORIZATION_RESTARTS", "3")
    assert AnalysisConfig.from_env().factorization_restarts == 3


def test_bad_environment_value(monkeypatch):
    monkeypatch.setenv("BELL_SEED", "seven")
    with pytest.raises(BeablesError, match="BELL_SEED"):
        AnalysisConfig.from_env()
