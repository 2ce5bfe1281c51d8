import json
from pathlib import Path

import pytest
import sympy as sp

from zcyclic.cli import RunConfig, emit_corpus, main, render_text, run
from zcyclic.corpus import builtin_entries, get_entry
from zcyclic.metricfile import MetricFileError, format_metric_file, parse_metric_file
from zcyclic.tensor import curvature

REPO_METRICS = Path(__file__).resolve().parent.parent / "metrics"

BASIC = """\
dim = 3
coords = x, y, z
assume x > 0
g[1,1] = x^2
g[2,2] = 1
g[3,3] = 1
"""


# -------------------------------------------------------------- metric files

def test_parse_minimal_file_has_no_phi():
    m = parse_metric_file(BASIC)
    assert m.dim == 3
    assert m.phi is None
    c = curvature(m)
    assert c.z().components == c.ricci.components


def test_symmetric_fill():
    m = parse_metric_file(BASIC + "g[1,2] = y\n")
    assert m.g[0][1] == m.g[1][0] == m.symbols.symbol("y")


def test_repeated_consistent_entry_is_accepted():
    m = parse_metric_file(BASIC + "g[1,2] = 1\ng[2,1] = 1\n")
    assert m.g[1][0] == 1


def test_asymmetric_declaration_is_an_error():
    with pytest.raises(MetricFileError) as info:
        parse_metric_file(BASIC + "g[1,2] = 1\ng[2,1] = 2\n")
    assert "symmetric" in str(info.value)
    assert info.value.line == 8


@pytest.mark.parametrize("text, line, fragment", [
    ("dim = 3\ncoords = x, y\n", 1, "coordinates"),
    (BASIC + "g[4,4] = 1\n", 7, "outside"),
    (BASIC + "phi = q*x\n", 7, "unknown symbol"),
    (BASIC + "g[1,3] = x +\n", 7, "line 7"),
    (BASIC + "metric is nice\n", 7, "unrecognized"),
    (BASIC + "oneform A = [1, 2]\n", 7, "components"),
])
def test_parse_errors_carry_location(text, line, fragment):
    with pytest.raises(MetricFileError) as info:
        parse_metric_file(text)
    assert info.value.line == line
    assert fragment in str(info.value)


def test_syntax_error_column():
    with pytest.raises(MetricFileError) as info:
        parse_metric_file(BASIC + "g[1,3] = x + * y\n")
    assert info.value.column == len("g[1,3] = x + ") + 1


def test_comments_and_oneforms():
    m = parse_metric_file(BASIC + "# note\noneform A = [exp(x), (x+y), 0]  # trailing\n")
    A = m.oneform("A")
    assert A[0] == sp.exp(m.symbols.symbol("x"))
    assert A[2] == 0


@pytest.mark.parametrize("entry", builtin_entries(include_flagged=True), ids=lambda e: e.name)
def test_metric_file_round_trip(entry):
    text = format_metric_file(entry.metric, entry.note)
    assert parse_metric_file(text, name=entry.name) == entry.metric


@pytest.mark.parametrize("entry", builtin_entries(include_flagged=True), ids=lambda e: e.name)
def test_shipped_metric_files_match_builtins(entry):
    path = REPO_METRICS / f"{entry.name}.metric"
    m = parse_metric_file(path.read_text(encoding="utf-8"), name=entry.name)
    assert m == entry.metric


def test_emit_corpus(tmp_path):
    written = emit_corpus(tmp_path)
    assert {p.name for p in written} == {f"{e.name}.metric"
                                         for e in builtin_entries(include_flagged=True)}


# --------------------------------------------------------------------- runs

def test_run_e1_wcrs_verify():
    report, status = run(RunConfig("@E1", structure="wcrs"))
    assert status == 0
    assert report["results"][0]["verdict"] == "holds"


def test_run_e2_wzs_solve_inconsistent():
    report, status = run(RunConfig("@E2", structure="wzs", solve=True))
    assert status == 1
    assert report["results"][0]["witness"]["status"] == "inconsistent"


def test_run_e3_wcrs_solve_json(capsys):
    status = main(["check", "@E3", "--structure", "wcrs", "--solve", "--json"])
    out = json.loads(capsys.readouterr().out)
    assert status == 0
    res = out["results"][0]
    assert res["family_dimension"] == 2
    assert res["witness"]["status"] == "family"
    assert len(res["witness"]["basis"]) == 2


def test_run_flat_file_solve_is_degenerate(tmp_path):
    path = tmp_path / "flat.metric"
    path.write_text("dim = 3\ncoords = x, y, z\ng[1,1] = 1\ng[2,2] = 1\ng[3,3] = 1\n")
    report, status = run(RunConfig(str(path), structure="wcrs", solve=True))
    assert status == 0
    assert report["results"][0]["verdict"] == "degenerate"


def test_run_missing_file_is_error(tmp_path):
    report, status = run(RunConfig(str(tmp_path / "nope.metric")))
    assert status == 2
    assert "error" in report


def test_run_wczs_without_phi_is_not_applicable():
    report, status = run(RunConfig("@E1", structure="wczs", solve=True))
    assert report["results"][0]["verdict"] == "not-applicable"
    assert status == 2


def test_verify_without_witness_is_error(tmp_path):
    path = tmp_path / "m.metric"
    path.write_text(BASIC)
    report, status = run(RunConfig(str(path), structure="wcrs"))
    assert status == 2
    assert report["results"][0]["verdict"] == "error"


@pytest.mark.parametrize("kwargs", [{"tol": 0}, {"points": 0}, {"structure": "bogus"}])
def test_run_config_validation(kwargs):
    with pytest.raises(ValueError):
        RunConfig("@E1", **kwargs)


def test_cli_rejects_bad_tolerance(capsys):
    assert main(["check", "@E1", "--tol", "-1"]) == 2


def test_list_command(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "@E1" in out and "@E4-phi1 (flagged transcription)" in out


# --------------------------------------------------------------- invariants

def _verdict_lines(report):
    return [f"[{r['structure']}] {r['verdict']}" for r in report["results"]]


@pytest.mark.parametrize("source, structure, solve", [
    ("@E2", "all", False),
    ("@E3", "all", True),
    ("@E1", "wrs", True),
])
def test_json_and_text_agree(capsys, source, structure, solve):
    argv = ["check", source, "--structure", structure] + (["--solve"] if solve else [])
    s1 = main(argv + ["--json"])
    report = json.loads(capsys.readouterr().out)
    s2 = main(argv)
    text = capsys.readouterr().out
    assert s1 == s2 == report["exit_status"]
    for line in _verdict_lines(report):
        assert line in text
    for r in report["results"]:
        w = r.get("witness") or {}
        for name, comps in (w.get("particular") or {}).items():
            assert f"{name} = [{', '.join(comps)}]" in text
        for idx, val in r["residual_nonzero_components"].items():
            assert f"residual {idx}: {val}" in text
    for key in ("proper_wczs", "proper_wcrs"):
        if key in report:
            assert f"{key}: {report[key]}" in text
    assert f"exit status: {report['exit_status']}" in text


def test_report_embeds_seed_and_tolerances():
    report, _ = run(RunConfig("@E2", structure="wczs", seed=17, tol=1e-7))
    assert report["seed"] == 17
    tol = report["tolerances"]
    assert tol["numeric_validation_rel"] == 1e-7
    assert tol["zero_probe_rel"] > 0 and tol["eigen_cluster_rel"] > 0
    assert "seed: 17" in render_text(report)


def test_numeric_validation_in_report():
    report, status = run(RunConfig("@E3", structure="wcrs", validate_numeric=True,
                                   points=2, seed=3))
    nv = report["numeric_validation"]
    assert status == 0
    assert nv["seed"] == 3 and nv["points"] == 2
    assert nv["max_rel_error"] < 1e-6 and nv["passed"]


def test_reports_are_deterministic():
    a, _ = run(RunConfig("@E3", solve=True))
    b, _ = run(RunConfig("@E3", solve=True))
    assert a == b
