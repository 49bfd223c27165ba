import csv
import json
import subprocess
import sys

import pytest

from egl import cli
from egl.config import DEFAULTS, ConfigError, resolve
from egl.sim import write_graph

SMALL = {
    "kappa_grid": {"start": 2.0, "stop": 4.0, "step": 0.5},
    "tau_grid": {"start": 0.0, "stop": 1.0, "step": 0.05},
    "compare": {"trials": 40, "tau_step": 0.25, "batch": 16},
    "celegans": {"x_grid": {"start": 0.0, "stop": 1.0, "step": 0.5},
                 "y_grid": {"start": 0.5, "stop": 1.0, "step": 0.5},
                 "curve_grid": {"start": 0.25, "stop": 0.75, "step": 0.5},
                 "q_list": [3], "trials": 2},
    "simulate": {"trials": 500, "classifiers": ["gamma", "plugin"],
                 "designs": [{"kappa": 3.5, "tau": 0.6}, {"kappa": 2.0, "tau": 0.5}]},
}


def write_config(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def read_csv(path):
    lines = path.read_text().splitlines()
    return lines[0], list(csv.DictReader(lines[1:]))


class TestResolve:
    def test_defaults(self):
        cfg = resolve({})
        assert cfg == DEFAULTS
        assert cfg is not DEFAULTS

    def test_deep_merge(self):
        cfg = resolve({"compare": {"trials": 7}})
        assert cfg["compare"]["trials"] == 7
        assert cfg["compare"]["tau_step"] == DEFAULTS["compare"]["tau_step"]

    @pytest.mark.parametrize("user,pointer", [
        ({"seed": -1}, "/seed"),
        ({"kappa_grid": {"start": 2, "stop": 3}}, "/kappa_grid"),
        ({"model": {"n": 51, "B": [[0.9, 0.1], [0.1, 1.4]], "pi": [0.5, 0.5]}}, "/model/B/1/1"),
        ({"evaluator": "magic"}, "/evaluator"),
        ({"colour": "blue"}, "/"),
        ({"simulate": {"designs": [{"kappa": 3.0, "tau": 2.0}]}}, "/simulate/designs/0/tau"),
    ])
    def test_schema_errors_carry_pointer(self, user, pointer):
        with pytest.raises(ConfigError) as exc:
            resolve(user)
        assert exc.value.path == pointer or (pointer == "/" and exc.value.path == "")

    @pytest.mark.parametrize("user,pointer", [
        ({"model": {"n": 51, "B": [[0.9, 0.1], [0.2, 0.9]], "pi": [0.5, 0.5]}}, "/model"),
        ({"kappa_grid": {"start": 1.0, "stop": 3.0, "step": 0.5}}, "/kappa_grid"),
        ({"tau_grid": {"start": 0.8, "stop": 0.2, "step": 0.1}}, "/tau_grid"),
        ({"kappa": 60.0}, "/kappa"),
    ])
    def test_semantic_errors(self, user, pointer):
        with pytest.raises(ConfigError) as exc:
            resolve(user)
        assert exc.value.path == pointer


class TestCli:
    def test_bad_config_exit_2(self, tmp_path, capsys):
        path = write_config(tmp_path, {"tau_grid": {"start": 0, "stop": 1, "step": -0.1}})
        assert cli.main(["surface", "--config", path, "--out", str(tmp_path / "o")]) == 2
        assert "/tau_grid/step" in capsys.readouterr().err
        assert not (tmp_path / "o").exists()

    def test_invalid_json_exit_2(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{nope")
        assert cli.main(["path", "--config", str(p), "--out", str(tmp_path / "o")]) == 2

    def test_runtime_error_exit_1(self, tmp_path):
        # 3 blocks are valid config but not a balanced two-block model
        cfg = {**SMALL, "model": {"n": 31, "B": [[0.5, 0.1, 0.1], [0.1, 0.5, 0.1], [0.1, 0.1, 0.5]],
                                  "pi": [0.4, 0.3, 0.3]}}
        assert cli.main(["path", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path), "--quiet"]) == 1

    def test_surface_outputs(self, tmp_path):
        out = tmp_path / "s"
        assert cli.main(["surface", "--config", write_config(tmp_path, SMALL), "--out", str(out), "--quiet"]) == 0
        head, rows = read_csv(out / "surface.csv")
        assert head.startswith("# egl surface config_digest=") and head.endswith("seed=0")
        assert len(rows) == 5 * 21
        assert all(float(r["L"]) == 0.5 for r in rows if float(r["kappa"]) == 2.0)
        d = json.loads((out / "argmin.json").read_text())
        assert d["meta"]["command"] == "surface" and d["grid_shape"] == [5, 21]
        _, per = read_csv(out / "per_kappa_tau.csv")
        assert [float(r["kappa"]) for r in per] == [2.0, 2.5, 3.0, 3.5, 4.0]

    def test_kappa2_only_grid(self, tmp_path):
        cfg = {**SMALL, "kappa_grid": {"start": 2.0, "stop": 2.0, "step": 0.05}}
        out = tmp_path / "k2"
        assert cli.main(["surface", "--config", write_config(tmp_path, cfg), "--out", str(out), "--quiet"]) == 0
        _, rows = read_csv(out / "surface.csv")
        assert {r["L"] for r in rows} == {"0.5"}
        d = json.loads((out / "argmin.json").read_text())
        assert d["argmin"]["tau_star"] == 0.0 and d["argmin"]["tau_bayes_at_kappa_star"] is None

    def test_compare_without_embedding(self, tmp_path):
        out = tmp_path / "c"
        assert cli.main(["compare", "--config", write_config(tmp_path, SMALL), "--out", str(out),
                         "--trials", "0", "--quiet"]) == 0
        _, rows = read_csv(out / "compare.csv")
        assert list(rows[0]) == ["tau", "L_exact", "L_normal"]
        opt = json.loads((out / "optima.json").read_text())["optima"]
        assert "tau_embedding_argmin" not in opt

    def test_compare_with_embedding(self, tmp_path):
        out = tmp_path / "c"
        assert cli.main(["compare", "--config", write_config(tmp_path, SMALL), "--out", str(out), "--quiet"]) == 0
        _, rows = read_csv(out / "compare.csv")
        assert list(rows[0]) == ["tau", "L_exact", "L_normal", "L_hat_embedding", "se"]
        filled = [r for r in rows if r["L_hat_embedding"]]
        assert [float(r["tau"]) for r in filled] == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_seed_changes_monte_carlo(self, tmp_path):
        cfg = write_config(tmp_path, SMALL)
        for s in (1, 2):
            assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / f"s{s}"),
                             "--seed", str(s), "--quiet"]) == 0
        a = json.loads((tmp_path / "s1" / "simulate.json").read_text())
        b = json.loads((tmp_path / "s2" / "simulate.json").read_text())
        assert a["meta"]["seed"] == 1 and b["meta"]["seed"] == 2
        assert [r["errors"] for r in a["reports"]] != [r["errors"] for r in b["reports"]]

    def test_simulate_loo_rejects_classifier(self, tmp_path):
        cfg = {**SMALL, "simulate": {"experiment": "loo", "classifiers": ["feature_bayes"], "trials": 1}}
        assert cli.main(["simulate", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path),
                         "--quiet"]) == 1

    def test_celegans_from_files(self, tmp_path, surrogate):
        e, l = tmp_path / "edges.csv", tmp_path / "labels.csv"
        write_graph(surrogate, e, l)
        cfg = {**SMALL, "celegans": {**SMALL["celegans"], "edges": str(e), "labels": str(l)}}
        out = tmp_path / "ce"
        assert cli.main(["celegans", "--config", write_config(tmp_path, cfg), "--out", str(out), "--quiet"]) == 0
        d = json.loads((out / "celegans.json").read_text())
        assert d["graph"]["source"] == "files" and d["graph"]["n"] == 279
        assert d["graph"]["edges"] == surrogate.n_edges
        _, rows = read_csv(out / "celegans.csv")
        assert len(rows) == 3 * 2 + 2

    def test_progress_on_stderr_only(self, tmp_path):
        r = subprocess.run([sys.executable, "-m", "egl.cli", "curves", "--config", write_config(tmp_path, SMALL),
                            "--out", str(tmp_path / "cv")], capture_output=True, text=True)
        assert r.returncode == 0
        assert r.stdout == ""
        assert "wrote" in r.stderr

    def test_block_counts(self):
        assert cli.block_counts(279, [118 / 279, 83 / 279, 78 / 279]) == [118, 83, 78]
        assert sum(cli.block_counts(10, [1 / 3] * 3)) == 10
