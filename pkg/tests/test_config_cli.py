"""Config grammar, canonical echo, CLI exit codes, artifact determinism."""

import json
import os

import pytest

from gchlab import ConfigError
from gchlab.cli import main
from gchlab.config import KINDS, canonical_echo, default_config, parse_config

SIM_SMOKE = """
[grid]
n = 512
[run]
T = 0.2
[data]
amplitude = 0.5
width = 2.0
"""

BLOWUP_SMOKE = """
[grid]
L = 10.0
n = 512
[run]
T = 0.02
[data]
amplitude = 0.05
width = 0.2
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_artifacts(outdir, names=("report.json", "series.csv", "echo.cfg")):
    out = {}
    for n in names:
        with open(os.path.join(outdir, n), "rb") as fh:
            out[n] = fh.read()
    return out


class TestGrammar:
    def test_empty_config_gives_defaults(self):
        cfg = parse_config("", "simulate")
        assert cfg["grid"]["L"] == 40.0
        assert cfg["grid"]["n"] == 4096
        assert cfg["run"]["cfl_sigma"] == 0.3
        assert cfg["data"]["kind"] == "gaussian"
        assert cfg["output"]["timestamp"] is False

    def test_partial_override_keeps_other_defaults(self):
        cfg = parse_config("[grid]\nn = 256\n", "simulate")
        assert cfg["grid"]["n"] == 256
        assert cfg["grid"]["L"] == 40.0

    def test_comments_and_quoting(self):
        cfg = parse_config(
            '[data]\nkind = "random"  # trailing comment\n# full-line comment\n',
            "simulate",
        )
        assert cfg["data"]["kind"] == "random"

    def test_unknown_kind(self):
        with pytest.raises(ConfigError, match="unknown experiment kind"):
            parse_config("", "fourier-party")

    def test_unknown_section_names_line(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("\n[nope]\n", "simulate")

    def test_unknown_key_names_line_and_candidates(self):
        with pytest.raises(ConfigError, match="line 2.*known.*"):
            parse_config("[grid]\nm = 3\n", "simulate")

    def test_malformed_number_names_key(self):
        with pytest.raises(ConfigError, match="key 'n' expects an integer"):
            parse_config("[grid]\nn = twelve\n", "simulate")

    def test_bool_spelling_is_strict(self):
        with pytest.raises(ConfigError, match="expects true or false"):
            parse_config("[output]\nplot = True\n", "simulate")

    def test_key_outside_section(self):
        with pytest.raises(ConfigError, match="outside any"):
            parse_config("n = 3\n", "simulate")

    def test_string_must_be_quoted(self):
        with pytest.raises(ConfigError, match="quoted string"):
            parse_config("[data]\nkind = gaussian\n", "simulate")


class TestEcho:
    @pytest.mark.parametrize("kind", KINDS)
    def test_roundtrip_of_defaults(self, kind):
        cfg = default_config(kind)
        echoed = canonical_echo(cfg, kind)
        assert echoed.splitlines()[0] == f"# kind = {kind}"
        assert parse_config(echoed, kind) == cfg

    def test_roundtrip_with_overrides(self):
        cfg = parse_config(SIM_SMOKE, "simulate")
        again = parse_config(canonical_echo(cfg, "simulate"), "simulate")
        assert again == cfg
        # echo is a fixed point
        assert canonical_echo(again, "simulate") == canonical_echo(cfg, "simulate")

    def test_float_repr_survives(self):
        cfg = parse_config("[run]\nT = 0.30000000000000004\n", "simulate")
        again = parse_config(canonical_echo(cfg, "simulate"), "simulate")
        assert again["run"]["T"] == cfg["run"]["T"]


class TestCli:
    def test_missing_config_file(self, tmp_path, capsys):
        rc = main(["simulate", "--config", str(tmp_path / "absent.cfg")])
        assert rc == 2
        assert "not found" in capsys.readouterr().err

    def test_malformed_config(self, tmp_path, capsys):
        path = write(tmp_path, "bad.cfg", "[grid]\nn = twelve\n")
        rc = main(["simulate", "--config", path, "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "config error" in capsys.readouterr().err

    def test_simulate_smoke_passes(self, tmp_path, capsys):
        path = write(tmp_path, "sim.cfg", SIM_SMOKE)
        out = str(tmp_path / "out")
        rc = main(["simulate", "--config", path, "--out", out])
        assert rc == 0
        assert "simulate: PASS" in capsys.readouterr().out
        for name in ("report.json", "series.csv", "plot.svg", "echo.cfg"):
            assert os.path.exists(os.path.join(out, name))
        rep = json.loads(open(os.path.join(out, "report.json")).read())
        assert rep["passed"] is True
        header = open(os.path.join(out, "series.csv")).readline().strip()
        assert header == "t,E,w_linf,w_bound,ux_linf,ux_bound,B,min_uxx,xi"

    def test_zero_data_simulate_passes(self, tmp_path):
        path = write(tmp_path, "z.cfg", '[grid]\nn = 256\n[run]\nT = 0.1\n[data]\nkind = "zero"\n')
        rc = main(["simulate", "--config", path, "--out", str(tmp_path / "o")])
        assert rc == 0

    def test_failed_hard_assertion_exits_one(self, tmp_path, capsys):
        path = write(
            tmp_path, "tt.cfg", "[grid]\nn = 256\n[check]\norder_min = 9.9\n"
        )
        rc = main(["transport-test", "--config", path, "--out", str(tmp_path / "o")])
        assert rc == 1
        assert "transport-test: FAIL" in capsys.readouterr().out
        rep = json.loads(open(tmp_path / "o" / "report.json").read())
        assert rep["passed"] is False

    def test_shallow_blowup_smoke(self, tmp_path):
        path = write(tmp_path, "b.cfg", BLOWUP_SMOKE)
        out = str(tmp_path / "o")
        rc = main(["blowup-study", "--config", path, "--out", out])
        assert rc == 0
        rep = json.loads(open(os.path.join(out, "report.json")).read())
        assert rep["study"]["verdict"] is False
        assert rep["study"]["stop_reason"] == "horizon"


class TestDeterminism:
    def test_simulate_random_data_byte_identical(self, tmp_path):
        text = SIM_SMOKE + '\n[data]\nkind = "random"\nseed = 11\namplitude = 0.05\n'
        path = write(tmp_path, "r.cfg", text)
        outs = []
        for tag in ("a", "b"):
            out = str(tmp_path / tag)
            assert main(["simulate", "--config", path, "--out", out]) == 0
            outs.append(
                read_artifacts(out, ("report.json", "series.csv", "echo.cfg", "plot.svg"))
            )
        assert outs[0] == outs[1]

    def test_seed_override_changes_random_run(self, tmp_path):
        text = SIM_SMOKE + '\n[data]\nkind = "random"\nseed = 11\namplitude = 0.05\n'
        path = write(tmp_path, "r.cfg", text)
        out_a, out_b = str(tmp_path / "a"), str(tmp_path / "b")
        assert main(["simulate", "--config", path, "--out", out_a]) == 0
        assert main(["simulate", "--config", path, "--out", out_b, "--seed", "99"]) == 0
        a = read_artifacts(out_a, ("series.csv",))
        b = read_artifacts(out_b, ("series.csv",))
        assert a != b

    def test_besov_audit_byte_identical(self, tmp_path):
        path = write(tmp_path, "ba.cfg", "[grid]\nn = 256\n[corpus]\ncount = 12\n")
        outs = []
        for tag in ("a", "b"):
            out = str(tmp_path / tag)
            assert main(["besov-audit", "--config", path, "--out", out]) == 0
            outs.append(read_artifacts(out))
        assert outs[0] == outs[1]

    def test_sweep_threading_does_not_change_bytes(self, tmp_path):
        text = BLOWUP_SMOKE + "\n[sweep]\namplitudes = \"0.05,0.03\"\n"
        path = write(tmp_path, "bs.cfg", text)
        outs = []
        for tag, threads in (("a", "1"), ("b", "2")):
            out = str(tmp_path / tag)
            rc = main(
                ["blowup-study", "--config", path, "--out", out, "--threads", threads]
            )
            assert rc == 0
            outs.append(read_artifacts(out, ("report.json", "sweep.csv")))
        assert outs[0] == outs[1]
        header = outs[0]["sweep.csv"].decode().splitlines()[0]
        assert header == "A,C_T,verdict,T_est,bound,window_mean"
        # rows come out sorted by amplitude no matter the submission order
        rows = outs[0]["sweep.csv"].decode().splitlines()[1:]
        assert len(rows) == 2
        assert float(rows[0].split(",")[0]) < float(rows[1].split(",")[0])
