import orjson
import pytest
from click.testing import CliRunner

from verifier.cli import verify

CHART = """
name: chart
kind: chart-roundtrip
quadrature:
  samples: 20
"""

CONTROL = """
name: control
kind: asgeirsson-circle
solution:
  kind: polynomial
  terms:
    - {coeff: 1.0, powers: [2, 0, 0, 0]}
conic:
  center: [0.0, 0.0, 0.0, 0.0]
  plane:
    - [1.0, 0.0, 0.0, 0.0]
    - [0.0, 1.0, 0.0, 0.0]
  square_radius: 1.0
quadrature:
  circle_nodes: 128
"""


@pytest.fixture
def runner():
    return CliRunner()


def test_passing_run_prints_json(runner, write_config):
    result = runner.invoke(verify, ["run", "--config", write_config(CHART)])
    assert result.exit_code == 0, result.output
    document = orjson.loads(result.stdout)
    assert document["experiment"] == "chart"
    assert "✅ chart_roundtrip: pass" in result.stderr


def test_failing_check_exits_one(runner, write_config):
    result = runner.invoke(verify, ["asgeirsson", "--config", write_config(CONTROL)])
    assert result.exit_code == 1
    assert orjson.loads(result.stdout)["checks"][0]["status"] == "fail"


def test_invalid_config_exits_two(runner, write_config):
    result = runner.invoke(verify, ["run", "--config", write_config("name: x\nkind: nonsense\n")])
    assert result.exit_code == 2
    assert "kind" in result.stderr
    assert result.stdout == ""


def test_missing_config_exits_two(runner, tmp_path):
    result = runner.invoke(verify, ["run", "--config", str(tmp_path / "missing.yaml")])
    assert result.exit_code == 2


def test_subcommand_rejects_other_kinds(runner, write_config):
    result = runner.invoke(verify, ["xray-compare", "--config", write_config(CHART)])
    assert result.exit_code == 2
    assert "does not match" in result.stderr


def test_unknown_format_exits_two(runner, write_config):
    result = runner.invoke(verify, ["run", "--config", write_config(CHART), "--format", "xml"])
    assert result.exit_code == 2


def test_csv_to_file(runner, write_config, tmp_path):
    target = tmp_path / "report.csv"
    result = runner.invoke(
        verify, ["chart-roundtrip", "--config", write_config(CHART), "--format", "csv", "--out", str(target)]
    )
    assert result.exit_code == 0, result.output
    assert result.stdout == ""
    lines = target.read_text().splitlines()
    assert lines[0] == "# asgeirsson-report/1"
    assert lines[2].startswith("chart,chart_roundtrip,")


def test_unwritable_output_exits_one(runner, write_config, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    result = runner.invoke(verify, ["run", "--config", write_config(CHART), "--out", str(blocker / "r.json")])
    assert result.exit_code == 1


def test_dump_curves(runner, write_config, tmp_path):
    curves = tmp_path / "curves.csv"
    out = tmp_path / "report.json"
    result = runner.invoke(
        verify, ["asgeirsson", "--config", write_config(CONTROL), "--out", str(out), "--dump-curves", str(curves)]
    )
    assert result.exit_code == 1
    assert curves.read_text().startswith("side,branch,theta")


def test_invalid_config_never_runs(runner, write_config, mocker):
    run = mocker.patch("verifier.cli.experiment_service.run")
    result = runner.invoke(verify, ["run", "--config", write_config("name: x\nkind: ruled-surface\n")])
    assert result.exit_code == 2
    run.assert_not_called()


def test_bad_nongraphical_plane_exits_two_with_the_field(runner, write_config):
    text = "name: x\nkind: ruled-surface\nruled:\n  nongraphical:\n    - {theta: 1.0, phi: 0.0, H: 0.0}\n"
    result = runner.invoke(verify, ["ruled-surface", "--config", write_config(text)])
    assert result.exit_code == 2
    assert "ruled.nongraphical.0.H" in result.stderr
    assert result.stdout == ""


def test_empty_kballs_exits_two(runner, write_config):
    text = "name: x\nkind: xray-compare\nsolution:\n  kind: kballs\n  balls: []\n"
    result = runner.invoke(verify, ["run", "--config", write_config(text)])
    assert result.exit_code == 2
    assert "k-ball solutions need at least one ball" in result.stderr


def test_unknown_log_level_exits_two(runner, write_config):
    result = runner.invoke(verify, ["--log-level", "LOUD", "run", "--config", write_config(CHART)])
    assert result.exit_code == 2
