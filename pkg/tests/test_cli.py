import csv
import json

import pytest

from garchvb.cli import main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def returns(tmp_path):
    path = tmp_path / "r.csv"
    assert run("simulate", "--model", "skewt", "--length", 1000, "--seed", 7, "--out", path) == 0
    return path


class TestCommands:
    def test_simulate_then_fit(self, tmp_path, returns):
        out = tmp_path / "post.json"
        assert run("fit", "--method", "rt", "--samples", 5, "--input", returns,
                   "--out", out) == 0
        doc = json.loads(out.read_text())
        for key in ("schema_version", "state", "elbo_trace", "seed"):
            assert key in doc
        assert doc["state"]["factorization"] == "covariance"
        manifest = json.loads((tmp_path / "post.manifest.json").read_text())
        assert manifest["command"] == "fit" and "numpy" in manifest["versions"]
        assert manifest["seed"] == doc["seed"]

    def test_missing_input_named(self, tmp_path, capsys):
        assert run("fit", "--input", tmp_path / "missing.csv", "--out", tmp_path / "p.json") != 0
        assert "missing.csv" in capsys.readouterr().err

    def test_parse_error_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("return\n0.1\nx\n0.2\n")
        assert run("fit", "--input", bad, "--out", tmp_path / "p.json") == 1
        assert "row 3" in capsys.readouterr().err

    def test_usage_error(self, capsys):
        assert run("fit", "--method", "bogus", "--input", "x.csv") == 2
        assert "usage:" in capsys.readouterr().err
        assert run() == 2

    def test_config_file_and_flag_precedence(self, tmp_path, returns):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"max-iters": 40, "samples": 3, "eta0": 0.5}))
        out = tmp_path / "c.json"
        assert run("fit", "--input", returns, "--config", cfg, "--eta0", 0.01,
                   "--seed", 1, "--out", out) == 0
        opt = json.loads(out.read_text())["optimizer"]
        assert (opt["max_iters"], opt["n_samples"], opt["eta0"]) == (40, 3, 0.01)

    def test_unknown_config_key(self, tmp_path, returns):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"nonsense": 1}))
        assert run("fit", "--input", returns, "--config", cfg) == 2

    def test_output_dir_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GARCHVB_OUTPUT_DIR", str(tmp_path / "env"))
        assert run("simulate", "--length", 20, "--seed", 1) == 0
        assert (tmp_path / "env" / "returns.csv").is_file()
        assert (tmp_path / "env" / "returns.manifest.json").is_file()

    def test_mcmc_accuracy_density(self, tmp_path, returns):
        samples, acc, grid = tmp_path / "m.csv", tmp_path / "a.csv", tmp_path / "d.csv"
        assert run("mcmc", "--input", returns, "--model", "skewt", "--iterations", 3000,
                   "--seed", 2, "--out", samples) == 0
        assert samples.read_text().splitlines()[0] == "omega,alpha,beta,nu,xi"
        assert run("accuracy", "--q-samples", samples, "--reference", samples,
                   "--out", acc) == 0
        rows = list(csv.DictReader(acc.open()))
        assert [r["parameter"] for r in rows] == ["omega", "alpha", "beta", "nu", "xi"]
        assert all(float(r["accuracy"]) > 99 for r in rows)
        assert run("density-grid", "--q-samples", samples, "--column", "nu",
                   "--grid-size", 100, "--out", grid) == 0
        assert grid.read_text().splitlines()[0] == "x,density"

    def test_accuracy_parameter_mismatch(self, tmp_path, returns):
        post, samples = tmp_path / "p.json", tmp_path / "m.csv"
        run("fit", "--input", returns, "--max-iters", 30, "--out", post)
        run("mcmc", "--input", returns, "--model", "skewt", "--iterations", 1000,
            "--out", samples)
        assert run("accuracy", "--posterior", post, "--reference", samples,
                   "--out", tmp_path / "a.csv") == 1

    def test_ic_arithmetic(self, tmp_path):
        out = tmp_path / "ic.csv"
        assert run("ic", "--loglik", -1077.72, "--k", 5, "--n-obs", 1000, "--out", out) == 0
        row = next(csv.DictReader(out.open()))
        assert float(row["aic"]) == pytest.approx(2165.44)
        assert float(row["bic"]) == pytest.approx(2189.98, abs=0.01)

    def test_ic_from_data(self, tmp_path, returns):
        out = tmp_path / "ic.csv"
        assert run("ic", "--input", returns, "--models", "gaussian,skewt", "--out", out) == 0
        rows = list(csv.DictReader(out.open()))
        assert [r["model"] for r in rows] == ["gaussian", "skewt"]

    def test_sequential_with_init(self, tmp_path, returns):
        post, seq = tmp_path / "p.json", tmp_path / "s.json"
        assert run("fit", "--input", returns, "--model", "skewt", "--max-iters", 100,
                   "--out", post) == 0
        assert run("sequential", "--input", returns, "--initial", 900, "--updates", 2,
                   "--init", post, "--max-iters", 150, "--out", seq) == 0
        doc = json.loads(seq.read_text())
        assert [u["window"] for u in doc["updates"]] == [[900, 950], [950, 1000]]
        assert doc["mode"] == "uvb" and "final_state" in doc

    def test_replicate_table(self, tmp_path):
        out = tmp_path / "rep.csv"
        assert run("replicate", "--replicates", 5, "--length", 300, "--mcmc-iterations", 2000,
                   "--methods", "rt", "--max-iters", 200, "--draws", 2000, "--seed", 3,
                   "--out", out) == 0
        rows = list(csv.DictReader(out.open()))
        assert list(rows[0]) == ["method", "S", "parameter", "mean_accuracy", "mean_seconds"]
        rt = [r for r in rows if r["method"] == "rt"]
        assert [r["parameter"] for r in rt] == ["omega", "alpha", "beta"]
        assert all(0 <= float(r["mean_accuracy"]) <= 100 for r in rt)

    def test_rerun(self, tmp_path, returns):
        out = tmp_path / "p.json"
        run("fit", "--input", returns, "--max-iters", 50, "--seed", 4, "--out", out)
        assert run("rerun", tmp_path / "p.manifest.json", "--out-dir", tmp_path / "again") == 0
        a = json.loads(out.read_text())
        b = json.loads((tmp_path / "again" / "p.json").read_text())
        a.pop("wall_time"), b.pop("wall_time")
        assert a == b
