"""Command-line front end.

    tiknest run CONFIG
    tiknest check CONFIG
    tiknest reproduce {fig1,fig2,fig3a,fig3b} --out DIR

Exit codes: 0 success, 1 check failure, 2 divergence, 3 config or I/O error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .experiment import (
    AUTO_STEP_FACTOR,
    ConfigError,
    ExperimentConfig,
    load_config,
    write_table_csv,
    write_trace_csv,
)
from .problems import paper_quadratic
from .schedules import (
    ConditionSError,
    PolyScheduleParams,
    b_coef,
    bp_closed_form,
    c_coef,
    check_growth_hypotheses,
    cp_closed_form,
    find_k2,
    k0_poly,
    polynomial_schedule,
)
from .solver import DivergenceError, SolverConfig, run, run_matrix
from .svg import line_chart

EXIT_OK, EXIT_CHECK_FAILED, EXIT_DIVERGED, EXIT_CONFIG = 0, 1, 2, 3

FIG1_P = (0.3, 0.6, 0.9, 1.2, 1.5)
FIG1_ITERS = 20
LATE_FIG_ITERS = 10**4
START = ([1.0, -1.0], [-1.0, 1.0])
SCHED_A, SCHED_Q, SCHED_C = 1.0, 0.8, 1.0
ABLATION_P = 1.5
CLOSED_FORM_RTOL = 1e-10


class _Console:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def info(self, msg: str = ""):
        if not self.quiet:
            print(msg)

    def warn(self, msg: str):
        print(f"warning: {msg}", file=sys.stderr)

    def error(self, msg: str):
        print(f"error: {msg}", file=sys.stderr)


def _resolve(base: Path, p):
    p = Path(p)
    return p if p.is_absolute() else base / p


def _trace_summary(trace, obj) -> list:
    last = trace[len(trace) - 1]
    out = [
        f"records: {len(trace)} (last k = {last.k})",
        f"f(x_k) - min f at last record: {last.f_x - (obj.oracle.min_value if obj.oracle else 0.0):.6g}",
        f"velocity at last record: {last.velocity:.6g}",
    ]
    if obj.oracle is not None:
        out.append(f"|x_k - x*| at last record: {last.dist_xstar:.6g}")
    return out


def _report_text(cfg: SolverConfig, trace, extra=()) -> str:
    lines = ["# run report", f"config: {cfg.summary()}"]
    lines += [f"warning: {w}" for w in trace.warnings]
    lines += _trace_summary(trace, cfg.objective)
    if cfg.objective.oracle is not None and len(trace) >= diag.MIN_RECORDS and trace.diverged_at is None:
        rr = diag.rate_report(trace, cfg.schedule, cfg.objective)
        lines += rr.lines()
    lines += list(extra)
    return "\n".join(lines) + "\n"


def cmd_run(args, con: _Console) -> int:
    path = Path(args.config)
    try:
        exp = load_config(path)
        cfg = exp.build(args.iters)
    except (ConfigError, ValueError) as exc:
        con.error(str(exc))
        return EXIT_CONFIG
    base = path.parent
    csv_path = _resolve(base, exp.outputs.csv_path)
    report_path = _resolve(base, exp.outputs.report_path)
    code = EXIT_OK
    try:
        trace = run(cfg)
    except DivergenceError as exc:
        con.error(str(exc))
        trace = exc.trace
        code = EXIT_DIVERGED
    for w in trace.warnings:
        con.warn(w)
    try:
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        write_trace_csv(trace, csv_path)
        report_path.parent.mkdir(parents=True, exist_ok=True)
        report_path.write_text(_report_text(cfg, trace))
        svg = exp.outputs.svg_path
        if svg and args.format != "csv":
            line_chart({"f(x_k) - min f": (trace.k, trace.columns["f_x"] - cfg.objective.oracle.min_value
                                           if cfg.objective.oracle else trace.columns["f_x"]),
                        "|x_k - x_(k-1)|": (trace.k, trace.columns["velocity"])},
                       _resolve(base, svg), title="run", logy=True)
    except OSError as exc:
        con.error(f"cannot write outputs: {exc}")
        return EXIT_CONFIG
    con.info(f"wrote {csv_path} ({len(trace)} rows) and {report_path}")
    return code


def _closed_form_gap(params: PolyScheduleParams, s: float, horizon: int) -> float:
    sched = polynomial_schedule(params, s)
    ks = np.unique(np.rint(np.geomspace(2, max(horizon, 3), 100)).astype(np.int64))
    worst = 0.0
    for mine, ref in ((bp_closed_form(params, s, ks), b_coef(sched, ks)),
                      (cp_closed_form(params, s, ks), c_coef(sched, ks))):
        den = np.maximum(np.abs(ref), 1e-14)
        worst = max(worst, float(np.max(np.abs(mine - ref) / den)))
    return worst


def cmd_check(args, con: _Console) -> int:
    try:
        exp = load_config(Path(args.config))
        cfg = exp.build(args.iters)
    except (ConfigError, ValueError) as exc:
        con.error(str(exc))
        return EXIT_CONFIG
    obj, sched = cfg.objective, cfg.schedule
    s, L = sched.s, obj.lipschitz
    horizon = cfg.max_iter
    rows = []  # (status, text); status in PASS/FAIL/INFO

    params = sched.params
    if params is not None:
        cert = params.certification(s)
        rows.append(("PASS" if cert == "rate_certified" else "INFO",
                     f"rate_certified: {'yes' if cert == 'rate_certified' else 'no'} (0<p<2q)"
                     f"  [q={params.q_exp:g}, p={params.p_exp:g}]"))
        if params.q_exp == 1:
            ok = params.a < s / 2
            rows.append(("PASS" if ok else "FAIL",
                         f"q1_mode: a < s/2 {'holds' if ok else 'fails'} (a={params.a:g}, s/2={s / 2:g})"))
        elif cert == "uncertified":
            rows.append(("FAIL", "uncertified parameters: need 0<q<1 and 0<p<2q"))
        try:
            rows.append(("PASS", f"k0 = {k0_poly(params, s, L)} (condition S)"))
        except ConditionSError as exc:
            rows.append(("FAIL", f"condition S: step size exceeds 1/L ({exc})"))
    elif sched.k0 is None:
        rows.append(("FAIL", f"condition S: step size exceeds 1/L (s*L = {s * L:.6g})"))
    else:
        rows.append(("PASS", f"k0 = {sched.k0} (condition S)"))
    rows.append(("INFO", f"k1 = {sched.k1}"))
    if horizon >= sched.k1:
        k2 = find_k2(sched, horizon)
        rows.append(("INFO", f"k2 = {k2}" if k2 is not None
                     else f"k2: (Q) not satisfied throughout any tail within horizon {horizon}"))
        if k2 is not None:
            sched = replace(sched, k2=k2, kbar=k2 + 1)

    if horizon > sched.generic_start:
        hyp = check_growth_hypotheses(sched, horizon)
        labels = {
            "ratio_bounded": f"q_k eps_k / (q_(k-1) eps_(k-1)) bounded (sup {hyp.ratio_sup:.6g})",
            "q2eps_increasing": "q_k^2 eps_k increasing" + (
                "" if hyp.q2eps_increasing else f" (first decrease at k={hyp.q2eps_first_decrease})"),
            "q2eps_divergent": f"q_k^2 eps_k growing ({hyp.q2eps_mid:.6g} -> {hyp.q2eps_end:.6g})",
            "drift_to_zero": f"q_k (eps_k - eps_(k+1)) / eps_k -> 0 "
                             f"(first-decade max {hyp.drift_head_max:.6g}, tail max {hyp.drift_tail_max:.6g})",
        }
        for name, ok in hyp.verdicts.items():
            rows.append(("PASS" if ok else "FAIL", f"hypothesis {name}: {labels[name]}"))
        for note in hyp.notes:
            rows.append(("INFO", note))

    if params is not None:
        gap = _closed_form_gap(params, s, horizon)
        rows.append(("PASS" if gap <= CLOSED_FORM_RTOL else "FAIL",
                     f"closed forms match generic coefficients (max rel diff {gap:.3g})"))

    lem = diag.check_lemmas(obj)
    rows.append(("PASS" if lem.passed else "FAIL",
                 f"descent / co-coercivity lemmas (max violation {max(lem.max_violation.values()):.3g})"))
    if s * L <= 1:
        md = diag.check_modified_descent(obj, s)
        rows.append(("PASS" if md.passed else "FAIL",
                     f"modified descent at s (max violation {max(md.max_violation.values()):.3g})"))
    else:
        rows.append(("FAIL", "modified descent: step size exceeds 1/L"))
    e_hi = float(sched.eps(1))
    e_lo = float(sched.eps(max(horizon, 2)))
    path = diag.check_path_bounds(obj, np.geomspace(e_hi, min(e_lo, e_hi / 2), 50))
    rows.append(("PASS" if path.passed else "FAIL", "regularization path bounds"))

    width = max(len(t) for _, t in rows)
    con.info(f"{'status':<6}  check")
    con.info("-" * (width + 8))
    for status, text in rows:
        con.info(f"{status:<6}  {text}")
    failed = any(st == "FAIL" for st, _ in rows)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


# -- figure reproduction ------------------------------------------------------

def _figure_config(a: float, b: float, p: float, variant: str, iters: int, step) -> SolverConfig:
    obj = paper_quadratic(a, b)
    s = AUTO_STEP_FACTOR / obj.lipschitz if step is None else float(step)
    sched = polynomial_schedule(PolyScheduleParams(SCHED_A, SCHED_Q, SCHED_C, p), s, obj.lipschitz)
    return SolverConfig(obj, sched, np.array(START[0]), np.array(START[1]), iters, variant, record_every=1)


def _run_lenient(cfg):
    try:
        return run(cfg)
    except DivergenceError as exc:
        return exc.trace


def _fig1(out: Path, iters, step, svg: bool) -> list:
    base = _figure_config(0.1, 100.0, FIG1_P[0], "full", iters or FIG1_ITERS, step)
    traces = run_matrix(base, FIG1_P)
    names = [f"p{p:g}" for p in FIG1_P] + ["baseline"]
    obj = base.objective
    fmin = obj.oracle.min_value
    for name, tr in zip(names, traces):
        write_trace_csv(tr, out / f"fig1_{name}.csv")
    k = traces[0].k
    f1 = float(obj.value(base.x1) - fmin)
    vel = {"k": k}
    en = {"k": k}
    for name, tr in zip(names, traces):
        n = len(tr)
        vel[name] = np.r_[tr.columns["velocity"], np.full(k.size - n, np.nan)]
        en[name] = np.r_[tr.columns["f_x"] - fmin, np.full(k.size - n, np.nan)]
    vel["ref_1_over_k"] = 1.0 / k
    en["ref_f1_over_k2"] = f1 / k.astype(float) ** 2
    write_table_csv(out / "fig1_velocity.csv", vel)
    write_table_csv(out / "fig1_energy.csv", en)
    if svg:
        line_chart({n: (k, vel[n]) for n in names + ["ref_1_over_k"]}, out / "fig1_velocity.svg",
                   title="discrete velocity |x_k - x_(k-1)|", ylabel="velocity", logy=True,
                   dashed=("ref_1_over_k",))
        line_chart({n: (k, en[n]) for n in names + ["ref_f1_over_k2"]}, out / "fig1_energy.svg",
                   title="potential energy f(x_k) - min f", ylabel="energy", logy=True,
                   dashed=("ref_f1_over_k2",))
    kk = int(k[-1])
    lines = [f"# fig1: paper_quadratic(0.1, 100), s = {base.s:.6g}, q_k = k^0.8, {kk} iterations"]
    lines += [f"warning: {w}" for w in traces[0].warnings if w.startswith("step size")]
    lines.append(f"f(x_1) - min f = {f1:.17g}")
    for name, tr in zip(names, traces):
        e_last = float(tr.columns["f_x"][-1] - fmin)
        mark = "below" if e_last < f1 else "NOT below"
        lines.append(f"{name}: energy at k={int(tr.k[-1])} = {e_last:.17g} ({mark} f(x_1))")
    return lines


def _components_table(named_traces) -> dict:
    k = named_traces[0][1].k
    cols = {"k": k}
    for name, tr in named_traces:
        cols[f"{name}_x1"] = tr.x[:, 0]
        cols[f"{name}_x2"] = tr.x[:, 1]
    return cols


def _components_svg(named_traces, path, title):
    series = {}
    for name, tr in named_traces:
        series[f"{name} x(1)"] = (tr.k, tr.x[:, 0])
        series[f"{name} x(2)"] = (tr.k, tr.x[:, 1])
    line_chart(series, path, title=title, ylabel="component")


def _verdict_lines(name, tr, obj) -> list:
    dist = float(np.linalg.norm(tr.x[-1] - obj.oracle.x_star))
    ok = dist <= diag.DEFAULT_DIST_TOL
    return [f"{name}: |x_final - x*| = {dist:.6g}; min-norm verdict "
            f"{'PASS' if ok else 'FAIL'} (threshold {diag.DEFAULT_DIST_TOL:g})"]


def _fig2(out: Path, iters, step, svg: bool) -> list:
    cfg = _figure_config(1.0, 5.0, ABLATION_P, "drop_both", iters or LATE_FIG_ITERS, step)
    tr = _run_lenient(cfg)
    write_trace_csv(tr, out / "fig2_trace.csv")
    write_table_csv(out / "fig2_components.csv", _components_table([("drop_both", tr)]))
    if svg:
        _components_svg([("drop_both", tr)], out / "fig2_components.svg", "no Tikhonov terms")
    dist = float(np.linalg.norm(tr.x[-1]))
    thr = diag.DEFAULT_DIST_TOL
    return [f"# fig2: paper_quadratic(1, 5), drop_both, s = {cfg.s:.6g}, {cfg.max_iter} iterations",
            f"final distance to the origin: {dist:.6g}",
            f"threshold: {thr:g}; exceeds threshold: {'yes' if dist > thr else 'no'}"]


def _fig3(out: Path, tag: str, iters, step, svg: bool) -> list:
    variant = "drop_eps" if tag == "fig3a" else "drop_c"
    n = iters or LATE_FIG_ITERS
    ablated_cfg = _figure_config(1.0, 5.0, ABLATION_P, variant, n, step)
    full_cfg = replace(ablated_cfg, variant="full")
    named = [(variant, _run_lenient(ablated_cfg)), ("full", _run_lenient(full_cfg))]
    for name, tr in named:
        write_trace_csv(tr, out / f"{tag}_{name}.csv")
    write_table_csv(out / f"{tag}_components.csv", _components_table(named))
    if svg:
        _components_svg(named, out / f"{tag}_components.svg", f"{variant} vs full")
    obj = full_cfg.objective
    lines = [f"# {tag}: paper_quadratic(1, 5), eps_k = 1/k^1.5, s = {full_cfg.s:.6g}, {n} iterations"]
    for name, tr in named:
        lines += _verdict_lines(name, tr, obj)
    return lines


def cmd_reproduce(args, con: _Console) -> int:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        con.error(f"cannot create {out}: {exc}")
        return EXIT_CONFIG
    svg = args.format != "csv"
    if args.step is not None and args.step * 1.0 <= 0:
        con.error("--step must be positive")
        return EXIT_CONFIG
    try:
        if args.figure == "fig1":
            lines = _fig1(out, args.iters, args.step, svg)
        elif args.figure == "fig2":
            lines = _fig2(out, args.iters, args.step, svg)
        else:
            lines = _fig3(out, args.figure, args.iters, args.step, svg)
        report = out / f"{args.figure}_report.txt"
        report.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        con.error(f"cannot write outputs: {exc}")
        return EXIT_CONFIG
    for line in lines:
        if line.startswith("warning: "):
            con.warn(line[len("warning: "):])
        else:
            con.info(line)
    return EXIT_OK


FIGURES = ("fig1", "fig2", "fig3a", "fig3b")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--iters", type=int, default=argparse.SUPPRESS,
                        help="override the iteration budget")
    common.add_argument("--format", choices=("csv", "csv+svg"), default=argparse.SUPPRESS,
                        help="csv only, or csv plus SVG plots")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="suppress informational output")
    parser = argparse.ArgumentParser(prog="tiknest", parents=[common],
                                     description="Nesterov-type method with two Tikhonov terms")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", parents=[common], help="run one experiment config")
    p_run.add_argument("config")
    p_check = sub.add_parser("check", parents=[common], help="validate schedule and lemma conditions")
    p_check.add_argument("config")
    p_rep = sub.add_parser("reproduce", parents=[common], help="regenerate a figure's data")
    p_rep.add_argument("figure")
    p_rep.add_argument("--out", required=True)
    p_rep.add_argument("--step", type=float, default=None,
                       help="step size (default 0.9/L); e.g. 0.1 for the fixed-step setting")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    args.iters = getattr(args, "iters", None)
    args.format = getattr(args, "format", None)
    con = _Console(getattr(args, "quiet", False))
    if args.iters is not None and args.iters < 1:
        con.error("--iters must be positive")
        return EXIT_CONFIG
    if args.command == "run":
        return cmd_run(args, con)
    if args.command == "check":
        return cmd_check(args, con)
    if args.figure not in FIGURES:
        con.error(f"unknown figure {args.figure!r}; expected one of {FIGURES}")
        return EXIT_CONFIG
    return cmd_reproduce(args, con)
