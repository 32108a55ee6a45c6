"""Collection of tests focused on the command line interface."""

import json

import pytest
from click.testing import CliRunner

from ahres.base import ConfigError
from ahres.cli import cli, csv_text, parse_seed_point, write_atomic

SMALL_RUN = {
    "model": {"type": "hyperbolic-plane"},
    "modes": [0],
    "grid": {"N": 48},
    "solver": {"window": {"re": [-0.5, 0.5], "im": [-2.0, -0.2]}, "n_nodes": 32},
    "seed": 1,
}


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def write_config(tmp_path):
    def writer(data, name="config.json"):
        path = tmp_path / name
        path.write_text(data if isinstance(data, str) else json.dumps(data))
        return str(path)

    return writer


class TestHelpers:
    def test_write_atomic(self, tmp_path):
        target = tmp_path / "sub" / "a.txt"

        write_atomic(target, "first")
        write_atomic(target, "second")

        assert target.read_text() == "second"
        assert [p.name for p in target.parent.iterdir()] == ["a.txt"]

    def test_csv_floats(self):
        text = csv_text(["a", "b"], [[0.1, 3]])

        assert text == "a,b\n0.1,3\n"

    def test_csv_provenance(self):
        provenance = {"config_hash": "ab12", "version": "0.1.0", "config": {}}

        text = csv_text(["a"], [[1.5]], provenance)

        assert text == "# config_hash=ab12\n# version=0.1.0\na\n1.5\n"

    def test_seed_point(self):
        point = parse_seed_point("0.5,0,0.25,-1,-1")

        assert (point.mu, point.nu, point.eta_hat, point.sgn) == (0.5, 0.25, -1.0, -1)

    @pytest.mark.parametrize("text", ["1,2,3", "a,0,0,0,1", "0,0,-1,0,1", "0,0,0,0,2"])
    def test_seed_point_invalid(self, text):
        with pytest.raises(ConfigError):
            parse_seed_point(text)


class TestErrors:
    def test_bad_config(self, runner, write_config):
        path = write_config('{"absorbtion": {}}')

        result = runner.invoke(cli, ["resonances", "--config", path])

        assert result.exit_code == 2
        assert "/absorbtion" in result.output
        assert "ConfigError" in result.output

    def test_no_suite(self, runner):
        result = runner.invoke(cli, ["check"])

        assert result.exit_code == 2

    def test_sweep_trapping(self, runner, write_config):
        path = write_config({"model": {"type": "cylinder"}})

        result = runner.invoke(cli, ["sweep", "--config", path])

        assert result.exit_code == 2
        assert "/absorption/interior_window" in result.output

    def test_plain_value_error(self, runner, monkeypatch):
        def fail(*args, **kwargs):
            raise ValueError("window is empty")

        monkeypatch.setattr("ahres.cli.resonances_in_window", fail)

        result = runner.invoke(cli, ["resonances"])

        assert result.exit_code == 2
        payload = json.loads(result.output.strip().split("\n")[-1])
        assert payload["error"] == "ValueError"
        assert payload["message"] == "window is empty"


class TestCheck:
    def test_phase_weight(self, runner):
        result = runner.invoke(cli, ["check", "--phase-weight"])

        assert result.exit_code == 0
        report = json.loads(result.output)
        assert report["passed"]
        assert list(report["suites"]) == ["phase-weight"]
        assert "config_hash" in report["provenance"]

    def test_out(self, runner, tmp_path):
        result = runner.invoke(cli, ["check", "--phase-weight", "--out", str(tmp_path)])

        assert result.exit_code == 0
        assert json.loads((tmp_path / "check.json").read_text())["passed"]


class TestFlow:
    def test_stdout(self, runner):
        result = runner.invoke(cli, ["flow", "--seed", "-0.2,0,0,0,1"])

        assert result.exit_code == 0
        lines = result.output.strip().split("\n")
        assert lines[0].startswith("# config_hash=")
        assert lines[1].startswith("# version=")
        assert lines[2] == "seed,time,mu,y,nu,eta_hat"
        assert lines[3].split(",")[:3] == ["0", "0.0", "-0.2"]

    def test_several_seeds(self, runner):
        args = ["flow", "--seed", "-0.2,0,0,0,1", "--seed", "-0.3,0,0,0,-1"]

        single = runner.invoke(cli, args)
        threaded = runner.invoke(cli, args + ["--threads", "2"])

        assert single.exit_code == 0
        assert single.output == threaded.output
        seeds = {line.split(",")[0] for line in single.output.strip().split("\n")[3:]}
        assert seeds == {"0", "1"}

    def test_out(self, runner, tmp_path):
        result = runner.invoke(cli, ["flow", "--seed", "-0.2,0,0,0,1", "--out", str(tmp_path), "--plot", "--animate"])

        assert result.exit_code == 0
        assert "seed,time," in (tmp_path / "trajectory.csv").read_text()
        assert (tmp_path / "trajectory.png").stat().st_size > 0
        assert (tmp_path / "trajectory.gif").stat().st_size > 0

    def test_bad_seed(self, runner):
        result = runner.invoke(cli, ["flow", "--seed", "0,0"])

        assert result.exit_code == 2
        assert "/flow/seed" in result.output


class TestSweep:
    def test_csv_provenance(self, runner, write_config, tmp_path):
        path = write_config({"sweep": {"im_sigma": -0.5, "re_range": [20.0, 30.0], "n_points": 3, "s": 1.5}})

        result = runner.invoke(cli, ["sweep", "--config", path, "--out", str(tmp_path)])

        assert result.exit_code == 0
        lines = (tmp_path / "sweep.csv").read_text().split("\n")
        fit = json.loads((tmp_path / "fit.json").read_text())
        assert lines[0] == "# config_hash={}".format(fit["provenance"]["config_hash"])
        assert lines[1] == "# version={}".format(fit["provenance"]["version"])
        assert lines[2] == "re_sigma,im_sigma,ratio,s,N"


class TestResonances:
    def test_reproducible(self, runner, write_config, tmp_path):
        path = write_config(SMALL_RUN)
        outputs = []
        for name in ("a", "b"):
            result = runner.invoke(cli, ["resonances", "--config", path, "--out", str(tmp_path / name)])
            assert result.exit_code == 0
            outputs.append((tmp_path / name / "resonances.json").read_bytes())

        assert outputs[0] == outputs[1]
        payload = json.loads(outputs[0].decode("utf-8"))
        assert len(payload["provenance"]["config_hash"]) == 64
        assert payload["provenance"]["N"] == 48
        assert payload["model"]["type"] == "hyperbolic-plane"
