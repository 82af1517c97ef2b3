import csv
import json
from fractions import Fraction as F

import pytest

from limsup_lab.cli import (
    BUDGET_ENV,
    Command,
    RunManifest,
    emit_fixture_suite,
    main,
    parse_config,
    run,
)
from limsup_lab.errors import MissingRequired, ParseError, UnknownKey


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parse_dim_eval():
    cfg = parse_config("command=dim_eval\nsetting=padic\nm=2\nn=1\ntau=4")
    assert cfg.command is Command.DIM_EVAL
    assert cfg.get("tau") == (F(4),) and cfg.get("m") == 2


def test_parse_exact_fractions():
    cfg = parse_config("command=dim_eval\nsetting=real\ntau=3/2,5\n")
    assert cfg.get("tau") == (F(3, 2), F(5))
    assert all(isinstance(x, F) for x in cfg.get("tau"))


def test_parse_errors_carry_line_numbers():
    with pytest.raises(MissingRequired):
        parse_config("command=measure_scan\nspec.a=1/2,1/2\nsamples=100\nladder=8\n")
    with pytest.raises(UnknownKey) as e:
        parse_config("command=dim_eval\nsetting=real\n# note\ntau=2\ncolour=red\n")
    assert e.value.line == 5
    with pytest.raises(ParseError) as e:
        parse_config("command=dim_eval\nsetting=real\ntau=two\n")
    assert e.value.line == 3
    with pytest.raises(ParseError):
        parse_config("command=dim_eval\nsetting\n")
    with pytest.raises(ParseError):
        parse_config("command=dim_eval\ntau=1\ntau=2\nsetting=real\n")


def test_cli_seed_satisfies_requirement(tmp_path):
    cfg = parse_config("spec.a=1/2,1/2\nsamples=100\nladder=8\n", default_command="measure_scan", seed=3)
    assert cfg.seed == 3


def test_config_hash_ignores_order():
    a = parse_config("command=dim_eval\nsetting=real\ntau=2\n")
    b = parse_config("tau=2\nsetting=real\ncommand=dim_eval\n")
    assert a.hash == b.hash


def test_dim_eval_run(tmp_path):
    res = run(parse_config("command=dim_eval\nsetting=padic\nm=2\nn=1\ntau=4"), tmp_path)
    assert res.exit_code == 0
    (row,) = _rows(tmp_path / "dim_eval.csv")
    assert row["value"] == "7/4"
    assert RunManifest.verify(tmp_path, "dim_eval.manifest.json")
    man = json.loads((tmp_path / "dim_eval.manifest.json").read_text())
    assert man["schema_version"] == 1 and man["config_hash"]


def test_certify_run(tmp_path):
    text = "command=certify\nring=complex\nm=1\nn=1\nerror_bounds=1\nheight_bounds=1\ntrials=100\nseed=0\n"
    res = run(parse_config(text), tmp_path)
    assert res.exit_code == 0
    assert _rows(tmp_path / "certify.csv")[0]["summary"] == "100/100"


def test_box_dim_tiny_budget(tmp_path, monkeypatch):
    cfg = tmp_path / "b.cfg"
    cfg.write_text("command=box_dim\nsetting=two_dim\ntau=3,2\nQ=32\n")
    monkeypatch.setenv(BUDGET_ENV, "10")
    out = tmp_path / "out"
    assert main(["box_dim", "--config", str(cfg), "--out", str(out)]) == 3
    assert not out.exists() or not any(out.iterdir())


def test_hypothesis_exit_code(tmp_path):
    cfg = tmp_path / "h.cfg"
    cfg.write_text("command=dim_eval\nsetting=real\ntau=1/2\nstrict=true\n")
    out = tmp_path / "out"
    assert main(["dim_eval", "--config", str(cfg), "--out", str(out)]) == 2
    assert not out.exists()


def test_search_exhausted_exit_code(tmp_path, monkeypatch):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("command=solve\nring=real\nm=1\nn=2\nerror_bounds=1/100000,1/100000\nheight_bounds=100000\nseed=1\n")
    monkeypatch.setenv(BUDGET_ENV, "500")
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    assert _rows(tmp_path / "o" / "solve.csv")[0]["status"] == "SearchExhausted"


def test_solve_from_matrix_file(tmp_path):
    (tmp_path / "A.txt").write_text("real:32 1 1\n1/2\n")
    cfg = tmp_path / "s.cfg"
    cfg.write_text("command=solve\nring=real\nmatrix_file=A.txt\nerror_bounds=1/10\nheight_bounds=4\n")
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    row = _rows(tmp_path / "o" / "solve.csv")[0]
    assert row["status"] == "Found" and row["q1"] == "2" and row["p1"] == "1"


def test_command_mismatch(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("command=dim_eval\nsetting=real\ntau=2\n")
    assert main(["box_dim", "--config", str(cfg)]) == 1


@pytest.mark.parametrize(
    "cmd,text",
    [
        ("measure_scan", "spec.div=1/2,1/2\nspec.conv=3/5,3/5\nsamples=100\nladder=16,64\ntail_starts=16\n"),
        ("ubiquity", "ring=real\ntau=3/10,9/10\nk=5\nsamples=100\n"),
        ("certify", "ring=real\nm=1\nn=2\nerror_bounds=1/4,1/4\nheight_bounds=16\ntrials=20\n"),
        ("solve", "ring=complex\nm=1\nn=1\nerror_bounds=1/3\nheight_bounds=3\n"),
    ],
)
def test_seeded_reruns_identical(tmp_path, cmd, text):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(text)
    for d in ("a", "b"):
        assert main([cmd, "--config", str(cfg), "--seed", "7", "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a" / f"{cmd}.csv").read_bytes() == (tmp_path / "b" / f"{cmd}.csv").read_bytes()


def test_series_transition(tmp_path):
    text = "command=series\nfamily=cover\nsetting=padic\nm=2\ntau=4\ns_max=3\ns_step=1/20\nq_max=4096\n"
    assert run(parse_config(text), tmp_path).exit_code == 0
    rows = {r["s"]: r["verdict"] for r in _rows(tmp_path / "series_transition.csv")}
    assert rows["brackets"] == "true" and rows["closed_form"] == "7/4"


def test_fixture_suite(tmp_path):
    files = emit_fixture_suite(tmp_path)
    forms = {r["id"]: r["value"] for r in _rows(files["closed_forms.csv"])}
    assert forms["twodim_3_2"] == "1" and forms["padic_m2_n1_tau4"] == "7/4"
    shells = _rows(files["shell_counts.csv"])
    assert any(r["ring"] == "gaussian" and r["m"] == "1" and r["height"] == "2" and r["count"] == "16" for r in shells)
    assert len(_rows(files["hurwitz_units.csv"])) == 24
    assert _rows(files["certify.csv"])[0]["summary"] == "100/100"
