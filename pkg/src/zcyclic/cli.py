"""Command-line front end.

Exit status: 0 when every requested check passes, 1 when a structure fails
(or a system is inconsistent), 2 on input or solver errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from . import symexpr
from .corpus import builtin_entries, get_entry
from .metricfile import MetricFileError, format_metric_file, parse_metric_file
from .numeric import validate
from .structures import (
    CONDITIONS,
    EIGEN_TOL,
    ConditionResult,
    run_condition,
    verify_witness,
    witness_forms,
)
from .tensor import MetricSpec, curvature

log = logging.getLogger("zcyclic")

WITNESS_CONDITIONS = {"wczs", "wcrs", "wzs", "wrs", "recurrent", "ricci-recurrent"}


@dataclass
class RunConfig:
    source: str
    structure: str = "all"
    solve: bool = False
    json: bool = False
    validate_numeric: bool = False
    seed: int = 0
    points: int = 8
    tol: float = 1e-6

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.points < 1:
            raise ValueError("point count must be at least 1")
        if self.structure != "all" and self.structure not in CONDITIONS:
            raise ValueError(f"unknown structure {self.structure!r}")


def load_metric(source: str) -> MetricSpec:
    if source.startswith("@"):
        return get_entry(source[1:]).metric
    path = Path(source)
    return parse_metric_file(path.read_text(encoding="utf-8"), name=path.stem)


def _verify(m: MetricSpec, name: str) -> ConditionResult:
    """Check candidate 1-forms stored with the metric against one condition."""
    c = curvature(m)
    if name in ("recurrent", "ricci-recurrent"):
        pi = m.oneform("pi")
        if pi is None:
            return ConditionResult(name, "error", error="no candidate 1-form 'pi'; use --solve")
        t = c.riemann if name == "recurrent" else c.ricci
        dt = c.nabla(t)
        bad = {}
        for idx in t.symmetry.representatives(m.dim):
            for l in range(m.dim):
                r = dt[idx + (l,)] - pi[l] * t[idx]
                if not symexpr.is_zero(r, m.symbols):
                    bad[idx + (l,)] = symexpr.normalize(r)
        return ConditionResult(name, "fails" if bad else "holds", residual=bad,
                               detail={"witness": {"pi": [symexpr.to_string(x) for x in pi]}})
    forms = witness_forms(m)
    if forms is None:
        return ConditionResult(name, "error", error="no candidate 1-forms A, B, D; use --solve")
    if name in ("wczs", "wzs") and m.phi is None:
        return ConditionResult(name, "not-applicable", detail={"note": "no phi given"})
    t = c.z() if name in ("wczs", "wzs") else c.ricci
    res = verify_witness(m, t, forms, cyclic=name in ("wczs", "wcrs"))
    res.structure = name
    return res


def _has_witness(m: MetricSpec, name: str) -> bool:
    if name in ("recurrent", "ricci-recurrent"):
        return m.oneform("pi") is not None
    return witness_forms(m) is not None


def run(config: RunConfig) -> tuple[dict, int]:
    try:
        m = load_metric(config.source)
    except (OSError, KeyError, MetricFileError) as exc:
        return {"input": config.source, "error": str(exc)}, 2

    wanted = CONDITIONS if config.structure == "all" else (config.structure,)
    results = []
    for name in wanted:
        if name in WITNESS_CONDITIONS and not config.solve:
            if _has_witness(m, name) or config.structure != "all":
                results.append(_verify(m, name))
                continue
        results.append(run_condition(m, name, config.seed))

    report = {
        "input": config.source,
        "dimension": m.dim,
        "coords": list(m.chart.coords),
        "params": list(m.symbols.params),
        "phi": None if m.phi is None else symexpr.to_string(m.phi),
        "mode": "solve" if config.solve else "verify",
        "seed": config.seed,
        "tolerances": {
            "zero_probe_rel": symexpr.PROBE_ZERO_TOL,
            "zero_probe_points": symexpr.PROBE_POINTS,
            "eigen_cluster_rel": EIGEN_TOL,
            "numeric_validation_rel": config.tol,
        },
        "results": [r.to_dict() for r in results],
        "numeric_validation": None,
    }
    by_name = {r.structure: r.verdict for r in results}
    for cyc, weak in (("wczs", "wzs"), ("wcrs", "wrs")):
        if cyc in by_name and weak in by_name and {by_name[cyc], by_name[weak]} <= {"holds", "fails"}:
            report[f"proper_{cyc}"] = by_name[cyc] == "holds" and by_name[weak] == "fails"

    status = 0
    verdicts = [r.verdict for r in results]
    if any(v in ("fails",) for v in verdicts):
        status = 1
    if config.validate_numeric:
        try:
            nv = validate(m, seed=config.seed, points=config.points).to_dict()
            nv["tol"] = config.tol
            nv["passed"] = nv["max_rel_error"] <= config.tol
            report["numeric_validation"] = nv
            if not nv["passed"]:
                status = max(status, 1)
        except symexpr.ExprError as exc:
            report["numeric_validation"] = {"seed": config.seed, "points": config.points,
                                            "error": str(exc)}
            status = 2
    explicit_na = config.structure != "all" and "not-applicable" in verdicts
    if any(v in ("error", "indeterminate") for v in verdicts) or explicit_na:
        status = 2
    report["exit_status"] = status
    return report, status


def render_text(report: dict) -> str:
    if "error" in report and "results" not in report:
        return f"error: {report['error']}\n"
    out = [
        f"input: {report['input']}",
        f"dimension: {report['dimension']}  coords: {', '.join(report['coords'])}",
    ]
    if report["params"]:
        out.append(f"params: {', '.join(report['params'])}")
    if report["phi"] is not None:
        out.append(f"phi: {report['phi']}")
    tol = report["tolerances"]
    out.append(f"mode: {report['mode']}  seed: {report['seed']}  "
               f"zero-probe rel tol: {tol['zero_probe_rel']:g} "
               f"({tol['zero_probe_points']} points)  "
               f"eigen cluster rel tol: {tol['eigen_cluster_rel']:g}")
    for r in report["results"]:
        head = f"[{r['structure']}] {r['verdict']}"
        w = r.get("witness")
        if r.get("family_dimension") is not None and w and w.get("status"):
            head += f"  ({w['status']}, family dimension {r['family_dimension']})"
        out.append(head)
        if r.get("error"):
            out.append(f"    error: {r['error']}")
        if w:
            if "particular" in w:
                if w["particular"]:
                    for name, comps in w["particular"].items():
                        out.append(f"    {name} = [{', '.join(comps)}]")
                for k, b in enumerate(w["basis"], 1):
                    for name, comps in b.items():
                        out.append(f"    basis {k}: {name} = [{', '.join(comps)}]")
                out.append(f"    zero test: {w['zero_test']}")
            else:
                for name, comps in w.items():
                    out.append(f"    {name} = [{', '.join(comps)}]")
        for key in ("forces_A_eq_B_eq_D", "F", "note"):
            if key in r:
                val = r[key]
                val = f"[{', '.join(val)}]" if isinstance(val, list) else val
                out.append(f"    {key}: {val}")
        if "rank_one" in r:
            ro = r["rank_one"]
            out.append(f"    rank-one split: {ro['kind']}")
            for key in ("a", "b", "causal"):
                if ro[key] is not None:
                    out.append(f"    {key}: {ro[key]}")
            if ro["eta"] is not None:
                out.append(f"    eta: [{', '.join(ro['eta'])}]")
            if ro["eigenvalue_multiplicities"]:
                pats = "; ".join(",".join(map(str, p)) for p in ro["eigenvalue_multiplicities"])
                out.append(f"    eigenvalue multiplicities: {pats}")
            if ro["note"]:
                out.append(f"    {ro['note']}")
        for idx, val in r["residual_nonzero_components"].items():
            out.append(f"    residual {idx}: {val}")
    for key in ("proper_wczs", "proper_wcrs"):
        if key in report:
            out.append(f"{key}: {report[key]}")
    nv = report.get("numeric_validation")
    if nv:
        if "error" in nv:
            out.append(f"numeric validation: error: {nv['error']}")
        else:
            out.append(
                f"numeric validation: seed {nv['seed']}, {nv['points']} points, "
                f"max rel error {nv['max_rel_error']:.3g} (tol {nv['tol']:g}): "
                f"{'pass' if nv['passed'] else 'FAIL'}")
    out.append(f"exit status: {report['exit_status']}")
    return "\n".join(out) + "\n"


def emit_corpus(directory: Path) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for entry in builtin_entries(include_flagged=True):
        path = directory / f"{entry.name}.metric"
        header = f"{entry.name}: {entry.note}"
        path.write_text(format_metric_file(entry.metric, header), encoding="utf-8")
        written.append(path)
    return written


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zcyclic", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="verify or solve structure conditions for a metric")
    p.add_argument("source", help="metric file, or @NAME for a builtin (e.g. @E2)")
    p.add_argument("--structure", default="all", choices=("all",) + CONDITIONS)
    p.add_argument("--solve", action="store_true", help="solve for the 1-forms")
    p.add_argument("--json", action="store_true")
    p.add_argument("--validate-numeric", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-6)

    sub.add_parser("list", help="list builtin metrics")
    e = sub.add_parser("emit-corpus", help="write builtin metrics as metric files")
    e.add_argument("directory", type=Path)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list":
        for entry in builtin_entries(include_flagged=True):
            flag = " (flagged transcription)" if entry.flagged else ""
            print(f"@{entry.name}{flag}: {entry.note}")
        return 0
    if args.command == "emit-corpus":
        for path in emit_corpus(args.directory):
            print(path)
        return 0
    try:
        config = RunConfig(args.source, args.structure, args.solve, args.json,
                           args.validate_numeric, args.seed, args.points, args.tol)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report, status = run(config)
    if config.json:
        print(json.dumps(report, indent=2))
    else:
        sys.stdout.write(render_text(report))
    return status


if __name__ == "__main__":
    sys.exit(main())
