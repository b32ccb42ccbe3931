"""Config parsing, report schema, exit codes, and suite aggregation."""

import json
import re

import pytest

from demimart.cli import main, parse_config_text
from demimart.registry import PreconditionError

T31_CFG = """\
experiment_id = t31-rademacher-n3-exact
theorem_id = T3.1
mode = exact
seed = 42
generator.family = iid
generator.law = rademacher
generator.horizon = 3
stopping.kind = first_passage_up
stopping.threshold = 1
stopping.cap = 3
"""

ADVERSARIAL_CFG = """\
experiment_id = negative-control
theorem_id = Def1.2
mode = exact
seed = 7
generator.family = adversarial_sign_flip
generator.horizon = 4
"""

REPORT_FIELDS = {
    "experiment_id",
    "theorem_id",
    "generator",
    "params",
    "mode",
    "seed",
    "lhs",
    "rhs",
    "direction",
    "z_margin",
    "verdict",
    "exact",
    "runtime_ms",
}


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestConfigParsing:
    def test_dotted_keys_nest(self):
        doc = parse_config_text("a.b.c = 1\na.b.d = [1, 2]\nname = plain\n")
        assert doc == {"a": {"b": {"c": 1, "d": [1, 2]}}, "name": "plain"}

    def test_comments_and_blanks_skipped(self):
        doc = parse_config_text("# note\n\nx = 2\n")
        assert doc == {"x": 2}

    def test_duplicate_key_rejected(self):
        with pytest.raises(PreconditionError, match="duplicate"):
            parse_config_text("x = 1\nx = 2\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(PreconditionError, match="key = value"):
            parse_config_text("just words\n")


class TestVerifyCommand:
    def test_pass_exit_zero_and_schema(self, tmp_path, capsys):
        cfg = _write(tmp_path, "t31.cfg", T31_CFG)
        out = str(tmp_path / "report.json")
        assert main(["verify", "--config", cfg, "--out", out]) == 0
        report = json.loads(open(out).read())
        assert set(report) == REPORT_FIELDS
        assert set(report["lhs"]) == {"mean", "stderr"}
        assert report["verdict"] == "PASS"
        assert report["exact"] is True
        assert report["mode"] == "exact"
        assert report["z_margin"] is None
        assert report["theorem_id"] == "T3.1-OST-upper"

    def test_missing_seed_exits_three(self, tmp_path, capsys):
        cfg = _write(tmp_path, "bad.cfg", "theorem_id = T3.1\nmode = exact\n")
        assert main(["verify", "--config", cfg]) == 3
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["error"]["field"] == "seed"
        assert err["error"]["message"] == "required"

    def test_unknown_theorem_exits_three(self, tmp_path, capsys):
        cfg = _write(tmp_path, "bad.cfg", "theorem_id = T0.9\nseed = 1\n")
        assert main(["verify", "--config", cfg]) == 3

    def test_fail_exit_one(self, tmp_path, capsys):
        cfg = _write(tmp_path, "adv.cfg", ADVERSARIAL_CFG)
        assert main(["check-demi", "--config", cfg]) == 1

    def test_seed_override(self, tmp_path, capsys):
        cfg = _write(tmp_path, "t31.cfg", T31_CFG)
        out = str(tmp_path / "r.json")
        main(["verify", "--config", cfg, "--seed", "99", "--out", out])
        assert json.loads(open(out).read())["seed"] == 99

    def test_determinism_modulo_runtime(self, tmp_path):
        cfg = _write(tmp_path, "t31.cfg", T31_CFG)
        outs = []
        for name in ("a.json", "b.json"):
            out = str(tmp_path / name)
            main(["verify", "--config", cfg, "--out", out])
            text = re.sub(r'"runtime_ms": [0-9.e+-]+', '"runtime_ms": 0', open(out).read())
            outs.append(text)
        assert outs[0] == outs[1]


class TestBoundCommand:
    def test_prints_value_with_inputs(self, capsys):
        assert main(["bound", "bernstein_tail", "t=10", "V=100", "C=1"]) == 0
        line = capsys.readouterr().out.strip()
        assert line.startswith("bernstein_tail(t=10 V=100 C=1) = 0.616392731327")

    def test_unknown_bound(self, capsys):
        assert main(["bound", "nosuch", "x=1"]) == 3

    def test_domain_error(self, capsys):
        assert main(["bound", "phi_bound", "u=3"]) == 3


class TestDataCommands:
    def test_gen_summary(self, tmp_path, capsys):
        cfg = _write(
            tmp_path,
            "gen.cfg",
            "seed = 3\ntheorem_id = Def1.2\npaths = 500\n"
            "generator.family = iid\ngenerator.law = rademacher\ngenerator.horizon = 5\n",
        )
        assert main(["gen", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "paths: 500" in out
        assert "V_n (exact): 5" in out

    def test_gen_dump_paths_csv(self, tmp_path, capsys):
        cfg = _write(
            tmp_path,
            "gen.cfg",
            "seed = 3\ntheorem_id = Def1.2\npaths = 4\n"
            "generator.family = iid\ngenerator.law = rademacher\ngenerator.horizon = 3\n",
        )
        out = str(tmp_path / "paths.csv")
        assert main(["gen", "--config", cfg, "--dump-paths", "--out", out]) == 0
        lines = open(out).read().splitlines()
        assert lines[0] == "path_id,step,value"
        assert len(lines) == 1 + 4 * 3

    def test_stop_summary(self, tmp_path, capsys):
        cfg = _write(
            tmp_path,
            "stop.cfg",
            "seed = 3\ntheorem_id = T3.1\npaths = 2000\n"
            "generator.family = iid\ngenerator.law = rademacher\ngenerator.horizon = 6\n"
            "stopping.kind = first_passage_up\nstopping.threshold = 1\nstopping.cap = 6\n",
        )
        assert main(["stop", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "P(stopped): 1" in out

    def test_oracle_stats(self, tmp_path, capsys):
        cfg = _write(
            tmp_path,
            "oracle.cfg",
            "seed = 3\ntheorem_id = Def1.2\nparams.t = 1\n"
            "generator.family = iid\ngenerator.law = rademacher\ngenerator.horizon = 3\n",
        )
        assert main(["oracle", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "outcomes: 8" in out
        assert "total_probability: 1" in out
        assert "E[S_n^2]: 3" in out

    def test_clt_csv(self, tmp_path, capsys):
        cfg = _write(
            tmp_path,
            "clt.cfg",
            "seed = 3\ntheorem_id = Def1.2\npaths = 2000\nparams.n_grid = [16, 64]\n"
            "generator.family = shared_shock\ngenerator.horizon = 16\n"
            "generator.base.law = rademacher\ngenerator.shock.law = rademacher\n",
        )
        out = str(tmp_path / "clt.csv")
        assert main(["clt", "--config", cfg, "--out", out]) == 0
        lines = open(out).read().splitlines()
        assert lines[0].startswith("n,sigma_n,V_n,ratio_cubed")
        assert len(lines) == 3

    def test_slln_csv_and_exit(self, tmp_path, capsys):
        cfg = _write(
            tmp_path,
            "slln.cfg",
            "seed = 3\ntheorem_id = Def1.2\npaths = 20000\n"
            "params.r = 1\nparams.epsilon = 0.5\nparams.n_grid = [10, 20]\n"
            "generator.family = iid\ngenerator.law = rademacher\ngenerator.horizon = 10\n",
        )
        assert main(["slln", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0].startswith("n,tail,stderr,envelope")


class TestSuiteCommand:
    def test_empty_directory(self, tmp_path, capsys):
        d = tmp_path / "suite"
        d.mkdir()
        assert main(["suite", str(d)]) == 0

    def test_pass_plus_fail_exits_one(self, tmp_path, capsys):
        d = tmp_path / "suite"
        d.mkdir()
        (d / "a_pass.cfg").write_text(T31_CFG)
        (d / "b_fail.cfg").write_text(ADVERSARIAL_CFG)
        out = str(tmp_path / "agg.json")
        assert main(["suite", str(d), "--out", out]) == 1
        agg = json.loads(open(out).read())
        assert len(agg["experiments"]) == 2
        assert agg["counts"]["PASS"] == 1
        assert agg["counts"]["FAIL"] == 1

    def test_duplicate_experiment_id_is_error(self, tmp_path, capsys):
        d = tmp_path / "suite"
        d.mkdir()
        (d / "a.cfg").write_text(T31_CFG)
        (d / "b.cfg").write_text(T31_CFG)
        assert main(["suite", str(d)]) == 3
        out = capsys.readouterr().out
        assert "ERROR" in out

    def test_config_error_isolated_to_one_experiment(self, tmp_path, capsys):
        d = tmp_path / "suite"
        d.mkdir()
        (d / "a_pass.cfg").write_text(T31_CFG)
        (d / "broken.cfg").write_text("theorem_id = T3.1\n")  # no seed
        assert main(["suite", str(d)]) == 3
        out = capsys.readouterr().out
        assert "PASS" in out and "ERROR" in out
