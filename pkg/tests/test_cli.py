"""Command-line interface, exercised in-process through cli.main."""
import io
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

import specmix as sp
from specmix import cli


@pytest.fixture()
def data_file(tmp_path, blend_mix):
    ds = sp.draw_groups(blend_mix, 5, 3000, seed=100)
    path = tmp_path / "groups.txt"
    with open(path, "w") as fh:
        sp.write_groups(ds, fh)
    return str(path)


def run_cli(args):
    return cli.main(args)


class TestRecoverCommand:
    def test_stdout_json(self, data_file, capsys):
        code = run_cli(
            ["recover", "--data", data_file, "--m", "3",
             "--dominating", "fixed:9,4,1", "--probe", "singular", "--seed", "100"]
        )
        assert code == 0
        obj = json.loads(capsys.readouterr().out)
        assert np.array(obj["components"]).shape == (3, 3)
        assert_allclose(sum(obj["weights"]), 1.0, atol=1e-9)
        assert "tt_eigenvalues" in obj["diagnostics"]

    def test_out_file(self, data_file, tmp_path, capsys):
        out = tmp_path / "result.json"
        run_cli(["recover", "--data", data_file, "--m", "2", "--out", str(out)])
        assert capsys.readouterr().out == ""
        assert "weights" in json.loads(out.read_text())

    def test_group_size_check(self, data_file):
        with pytest.raises(SystemExit, match="group"):
            run_cli(["recover", "--data", data_file, "--m", "2", "--group-size", "4"])

    def test_group_size_match_passes(self, data_file):
        assert run_cli(["recover", "--data", data_file, "--m", "2", "--group-size", "5"]) == 0

    def test_stdin(self, blend_mix, capsys, monkeypatch):
        ds = sp.draw_groups(blend_mix, 5, 500, seed=1)
        buf = io.StringIO()
        sp.write_groups(ds, buf)
        monkeypatch.setattr("sys.stdin", io.StringIO(buf.getvalue()))
        assert run_cli(["recover", "--data", "-", "--m", "2"]) == 0
        assert "components" in json.loads(capsys.readouterr().out)


class TestExperimentCommand:
    @pytest.fixture()
    def config_file(self, tmp_path):
        cfg = {
            "mixture": {
                "weights": [0.5, 0.3, 0.2],
                "components": [
                    [0.64, 0.32, 0.04],
                    [0.04, 0.32, 0.64],
                    [0.24, 0.32, 0.44],
                ],
            },
            "group_size": 5,
            "n_groups": 2000,
            "reps": 2,
            "dominating": "fixed:9,4,1",
            "recovery": {"m": 3, "probe": "singular"},
            "seed": 0,
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg))
        return str(path)

    def test_stdout_report(self, config_file, capsys):
        assert run_cli(["experiment", "--config", config_file]) == 0
        captured = capsys.readouterr()
        obj = json.loads(captured.out)
        assert len(obj["errors"]) == 2
        assert "mean=" in captured.err

    def test_out_file_silences_stdout(self, config_file, tmp_path, capsys):
        out = tmp_path / "report.csv"
        assert run_cli(["experiment", "--config", config_file, "--out", str(out)]) == 0
        captured = capsys.readouterr()
        assert captured.out == ""
        assert out.read_text().startswith("scheme,")


class TestCounterexampleCommand:
    def test_identifiability(self, capsys):
        assert run_cli(["counterexample", "--m", "2", "--kind", "identifiability"]) == 0
        obj = json.loads(capsys.readouterr().out)
        assert obj["t"] == 4 and obj["eq_order"] == 2
        assert obj["verification"]["max_diff_at_eq_order"] < 1e-9

    def test_determinedness(self, capsys):
        assert run_cli(["counterexample", "--m", "2", "--kind", "determinedness"]) == 0
        obj = json.loads(capsys.readouterr().out)
        assert obj["t"] == 5 and obj["eq_order"] == 3
        assert len(obj["p"]["weights"]) == 2
        assert len(obj["p_prime"]["weights"]) == 3

    def test_custom_eps_and_out(self, tmp_path, capsys):
        out = tmp_path / "pair.json"
        code = run_cli(
            ["counterexample", "--m", "2", "--kind", "identifiability",
             "--eps", "0.05,0.35,0.6,0.92", "--out", str(out)]
        )
        assert code == 0 and capsys.readouterr().out == ""
        obj = json.loads(out.read_text())
        assert_allclose(obj["epsilons"], [0.05, 0.35, 0.6, 0.92])


class TestMultinomialCheckCommand:
    @staticmethod
    def _write_mix(path, n, comps):
        path.write_text(
            json.dumps(
                {
                    "n": n,
                    "q": 2,
                    "components": [{"weight": w, "p": p} for w, p in comps],
                }
            )
        )

    def test_equal_pair_exits_zero(self, tmp_path, capsys):
        pair = sp.build_pair(2, 4)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        self._write_mix(a, 2, zip(pair.p.weights.tolist(), pair.p.components.tolist()))
        self._write_mix(b, 2, zip(pair.p_prime.weights.tolist(), pair.p_prime.components.tolist()))
        assert run_cli(["multinomial-check", "--a", str(a), "--b", str(b)]) == 0
        assert capsys.readouterr().out.strip() == "equal"

    def test_different_pair_exits_one(self, tmp_path, capsys):
        pair = sp.build_pair(2, 4)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        self._write_mix(a, 3, zip(pair.p.weights.tolist(), pair.p.components.tolist()))
        self._write_mix(b, 3, zip(pair.p_prime.weights.tolist(), pair.p_prime.components.tolist()))
        assert run_cli(["multinomial-check", "--a", str(a), "--b", str(b)]) == 1
        assert capsys.readouterr().out.strip() == "different"


class TestRankCommand:
    def test_prints_rank(self, data_file, capsys):
        assert run_cli(["rank", "--data", data_file, "--power", "1", "--tol", "0.01"]) == 0
        assert capsys.readouterr().out.strip() == "2"


class TestBaselineCommand:
    def test_prints_stats(self, tmp_path, blend_mix, capsys):
        truth = tmp_path / "truth.json"
        truth.write_text(blend_mix.to_json())
        code = run_cli(
            ["baseline", "--d", "3", "--m", "3", "--trials", "100",
             "--truth", str(truth), "--seed", "42"]
        )
        assert code == 0
        obj = json.loads(capsys.readouterr().out)
        assert 0.3 < obj["mean"] < 0.8 and obj["variance"] > 0.0

    def test_rejects_mismatched_truth(self, tmp_path, blend_mix):
        truth = tmp_path / "truth.json"
        truth.write_text(blend_mix.to_json())
        with pytest.raises(SystemExit, match="truth"):
            run_cli(["baseline", "--d", "2", "--m", "3", "--trials", "5", "--truth", str(truth)])


class TestParser:
    def test_requires_subcommand(self, capsys):
        with pytest.raises(SystemExit):
            run_cli([])
        assert "command" in capsys.readouterr().err

    def test_console_script_entry(self):
        import importlib.metadata as md

        eps = md.entry_points(group="console_scripts")
        names = {ep.name: ep.value for ep in eps}
        assert names.get("specmix") == "specmix.cli:main"
