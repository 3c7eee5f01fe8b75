"""Command-line interface.

Subcommands: theory {mixture|joint}, simulate {mixture|joint},
sweep {beta-w|sigma-w|schedule|joint-schedule}, validate.

Global flags: --seed, --workers, --out-dir, --emit-plot, --quick, --config.
Flag precedence: command line > JSON config file > built-in defaults; the
resolved parameter set is recorded in a manifest written next to every
output, and re-running with the same parameters reproduces the CSV outputs
byte for byte (the manifest's duration field aside).

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 validation
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import CfgLabError, DomainError
from .joint_gaussian import (
    Lambda_coeff,
    Lambda_coeff_linear,
    guided_moments,
    guided_score_batch,
    lambda_coeff,
    lambda_coeff_linear,
    random_model,
)
from .mixture_theory import (
    MixtureTheoryParams,
    assemble_trajectory,
    delta_estimators_constant,
    delta_estimators_linear,
    guided_moments_linear_schedule,
    speciation_time,
)
from .schedule import Constant, GuidanceSchedule, Linear
from .simulator import (
    SimConfig,
    integrate_backward,
    make_mixture_score_fn,
    measure_distortion,
    mode_count,
    sample_centroids,
)
from .sweeps import AxisSpec, GridSpec, SweepRow, sweep_beta_w, sweep_schedule_phase_diagram, sweep_joint_gaussian_schedule, sweep_sigma_w

_USAGE_EXIT = 1
_NUMERICAL_EXIT = 2
_VALIDATION_EXIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse default exits with 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(_USAGE_EXIT)


def _fmt(x: object) -> str:
    """CSV cell: 17 significant digits for reals, empty for absent values."""
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _write_manifest(primary_out: str, subcommand: str, params: dict, seed: int,
                    duration_s: float, outputs: list[str]) -> str:
    manifest = {
        "tool_version": __version__,
        "subcommand": subcommand,
        "parameters": params,
        "seed": seed,
        "duration_s": duration_s,
        "outputs": outputs,
    }
    path = primary_out + ".manifest.json"
    with open(path, "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


_PLOT_TEMPLATE = """# gnuplot heatmap for {csv}
# usage: gnuplot {script}
set datafile separator comma
set terminal pngcairo size 900,700
set output '{png}'
set key off
set view map
set xlabel '{xlabel}'
set ylabel '{ylabel}'
set title '{title}'
splot '{csv}' every ::1 using 1:2:{zcol} with points pt 5 ps 2 palette
"""


def _write_plot_script(csv_path: str, xlabel: str, ylabel: str, title: str, zcol: int) -> str:
    script = csv_path[:-4] + ".gp" if csv_path.endswith(".csv") else csv_path + ".gp"
    png = os.path.basename(script)[:-3] + ".png"
    with open(script, "w", newline="\n") as fh:
        fh.write(
            _PLOT_TEMPLATE.format(
                csv=os.path.basename(csv_path),
                script=os.path.basename(script),
                png=png,
                xlabel=xlabel,
                ylabel=ylabel,
                title=title,
                zcol=zcol,
            )
        )
    return script


def _parse_times(text: str) -> list[float]:
    try:
        ts = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise DomainError(f"bad time list {text!r}") from exc
    if not ts:
        raise DomainError("empty time list")
    return ts


def _schedule_from(ns: argparse.Namespace) -> GuidanceSchedule:
    if ns.w is not None and (ns.w0 is not None or ns.omega is not None):
        raise DomainError("give either --w or the pair --w0/--omega, not both")
    if ns.w is not None:
        return Constant(ns.w)
    if ns.w0 is None or ns.omega is None:
        raise DomainError("need --w, or both --w0 and --omega")
    return Linear(ns.w0, ns.omega)


def _add_schedule_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--w", type=float, default=None, help="constant guidance level")
    p.add_argument("--w0", type=float, default=None, help="ramp intercept w(t) = w0 + omega*t")
    p.add_argument("--omega", type=float, default=None, help="ramp slope")


def _add_axis_flags(p: argparse.ArgumentParser, name: str, lo: float, hi: float,
                    points: int, scale: str) -> None:
    p.add_argument(f"--{name}-min", type=float, default=lo)
    p.add_argument(f"--{name}-max", type=float, default=hi)
    p.add_argument(f"--{name}-points", type=int, default=points)
    p.add_argument(f"--{name}-scale", choices=["linear", "log"], default=scale)


def _axis_from(ns: argparse.Namespace, name: str) -> AxisSpec:
    g = lambda suffix: getattr(ns, f"{name.replace('-', '_')}_{suffix}")
    return AxisSpec(name, g("min"), g("max"), g("points"), g("scale"))


def _add_global_flags(p: argparse.ArgumentParser, top: bool) -> None:
    # accepted both before and after the subcommand; the later position wins
    d = {} if top else {"default": argparse.SUPPRESS}
    p.add_argument("--seed", type=int, **({"default": None} if top else d))
    p.add_argument("--workers", type=int, **({"default": None} if top else d))
    p.add_argument("--out-dir", dest="out_dir", **({"default": None} if top else d))
    p.add_argument("--emit-plot", dest="emit_plot", action="store_true", **({} if top else d))
    p.add_argument("--quick", action="store_true", **({} if top else d))
    p.add_argument("--config", help="JSON file with flag defaults",
                   **({"default": None} if top else d))


def build_parser() -> _Parser:
    parser = _Parser(prog="cfglab", description=__doc__)
    _add_global_flags(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True)

    theory = sub.add_parser("theory", help="closed-form guided moments and distortion")
    tsub = theory.add_subparsers(dest="target", required=True)
    tm = tsub.add_parser("mixture")
    tm.add_argument("--sigma2", type=float, required=True)
    tm.add_argument("--beta", type=float, required=True)
    _add_schedule_flags(tm)
    tm.add_argument("--t", default="0", help="comma-separated evaluation times")
    _add_global_flags(tm, top=False)
    tm.add_argument("--out", default="theory_mixture.csv")
    tj = tsub.add_parser("joint")
    tj.add_argument("--r", type=float, required=True)
    tj.add_argument("--s", type=float, required=True)
    _add_schedule_flags(tj)
    tj.add_argument("--t", default="0")
    _add_global_flags(tj, top=False)
    tj.add_argument("--out", default="theory_joint.csv")

    simulate = sub.add_parser("simulate", help="Monte Carlo guided backward SDE")
    ssub = simulate.add_subparsers(dest="target", required=True)
    sm = ssub.add_parser("mixture")
    sm.add_argument("--d", type=int, required=True)
    sm.add_argument("--beta", type=float, required=True)
    sm.add_argument("--sigma2", type=float, required=True)
    _add_schedule_flags(sm)
    sm.add_argument("--n", type=int, required=True)
    sm.add_argument("--T", type=float, default=500.0)
    sm.add_argument("--steps", type=int, default=2000)
    sm.add_argument("--grid", choices=["log_spaced", "uniform"], default="log_spaced")
    sm.add_argument("--checkpoints", default="0")
    sm.add_argument("--dump-samples", action="store_true")
    sm.add_argument("--normalize-target", action="store_true",
                    help="rescale the conditioning centroid to norm sqrt(d)")
    _add_global_flags(sm, top=False)
    sm.add_argument("--out", default="simulate_mixture.csv")
    sj = ssub.add_parser("joint")
    sj.add_argument("--d2", type=int, required=True)
    _add_schedule_flags(sj)
    sj.add_argument("--n", type=int, required=True)
    sj.add_argument("--model-seed", type=int, default=0)
    sj.add_argument("--T", type=float, default=500.0)
    sj.add_argument("--steps", type=int, default=2000)
    _add_global_flags(sj, top=False)
    sj.add_argument("--out", default="simulate_joint.csv")

    sweep = sub.add_parser("sweep", help="phase-diagram grids as CSV tables")
    wsub = sweep.add_subparsers(dest="kind", required=True)
    bw = wsub.add_parser("beta-w")
    bw.add_argument("--sigma2", type=float, required=True)
    _add_axis_flags(bw, "beta", 0.01, 1.0, 40, "log")
    _add_axis_flags(bw, "w", 0.0, 1.0, 40, "linear")
    _add_global_flags(bw, top=False)
    bw.add_argument("--out", default="sweep_beta_w.csv")
    sw = wsub.add_parser("sigma-w")
    sw.add_argument("--beta", type=float, required=True)
    _add_axis_flags(sw, "sigma2", 0.1, 1.0, 40, "linear")
    _add_axis_flags(sw, "w", 0.0, 1.0, 40, "linear")
    _add_global_flags(sw, top=False)
    sw.add_argument("--out", default="sweep_sigma_w.csv")
    sc = wsub.add_parser("schedule")
    sc.add_argument("--sigma2", type=float, required=True)
    _add_axis_flags(sc, "w0", -1.0, 1.0, 40, "linear")
    _add_axis_flags(sc, "omega", 0.125, 5.0, 40, "linear")
    _add_global_flags(sc, top=False)
    sc.add_argument("--out", default="sweep_schedule.csv")
    js = wsub.add_parser("joint-schedule")
    js.add_argument("--r", type=float, required=True)
    js.add_argument("--s", type=float, required=True)
    _add_axis_flags(js, "w0", -1.0, 1.0, 40, "linear")
    _add_axis_flags(js, "omega", 0.125, 5.0, 40, "linear")
    _add_global_flags(js, top=False)
    js.add_argument("--out", default="sweep_joint_schedule.csv")

    val = sub.add_parser("validate", help="run the acceptance criteria")
    _add_global_flags(val, top=False)
    val.add_argument("--criteria", default=None,
                     help="comma-separated criterion numbers (default: all)")
    return parser


def _resolve_globals(ns: argparse.Namespace) -> None:
    config = {}
    if ns.config:
        with open(ns.config) as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise DomainError("config file must hold a JSON object")
    defaults = {"seed": 0, "workers": os.cpu_count() or 1, "out_dir": "."}
    for dest, builtin in defaults.items():
        if getattr(ns, dest) is None:
            setattr(ns, dest, config.get(dest.replace("_", "-"), config.get(dest, builtin)))


def _resolved_params(ns: argparse.Namespace) -> dict:
    skip = {"command", "target", "kind", "config"}
    return {k: v for k, v in sorted(vars(ns).items()) if k not in skip}


def _theory_rows_mixture(ns: argparse.Namespace) -> list[list[object]]:
    sched = _schedule_from(ns)
    times = sorted(_parse_times(ns.t))
    rows: list[list[object]] = []
    if isinstance(sched, Constant):
        params = MixtureTheoryParams(ns.sigma2, ns.beta, sched)
        moments, _ = assemble_trajectory(params, times)
        t_s = speciation_time(params)
        for m in moments:
            dm, dv = delta_estimators_constant(m.t, ns.sigma2, sched.w, t_s)
            rows.append([m.t, m.mean_coeff, m.variance, dm, dv, m.phase])
    else:
        for t in times:
            m = guided_moments_linear_schedule(t, ns.sigma2, sched)
            dm, dv = delta_estimators_linear(t, ns.sigma2, sched)
            rows.append([t, m.mean_coeff, m.variance, dm, dv, m.phase])
    return rows


def _theory_rows_joint(ns: argparse.Namespace) -> list[list[object]]:
    sched = _schedule_from(ns)
    times = sorted(_parse_times(ns.t))
    rows: list[list[object]] = []
    for t in times:
        if isinstance(sched, Constant):
            lam = lambda_coeff(ns.s, ns.r, sched.w, t)
            big = Lambda_coeff(ns.s, ns.r, sched.w, t)
        else:
            lam = lambda_coeff_linear(ns.s, ns.r, sched, t)
            big = Lambda_coeff_linear(ns.s, ns.r, sched, t)
        rows.append([t, lam, big, lam - 1.0, big - 1.0, ""])
    return rows


def _cmd_theory(ns: argparse.Namespace) -> list[str]:
    header = ["t", "mean_coeff", "variance", "delta_mu", "delta_sigma2", "phase"]
    rows = _theory_rows_mixture(ns) if ns.target == "mixture" else _theory_rows_joint(ns)
    out = os.path.join(ns.out_dir, ns.out)
    _write_csv(out, header, rows)
    return [out]


def _cmd_simulate_mixture(ns: argparse.Namespace) -> list[str]:
    sched = _schedule_from(ns)
    checkpoints = tuple(_parse_times(ns.checkpoints))
    n = max(2, ns.n // 4) if ns.quick else ns.n
    M = mode_count(ns.beta, ns.d)
    inst = sample_centroids(
        ns.d, M, ns.seed, sigma2=ns.sigma2, normalize_target=ns.normalize_target
    )
    config = SimConfig(
        dim=ns.d,
        n_samples=n,
        seed=ns.seed,
        schedule=sched,
        horizon_T=ns.T,
        n_steps=ns.steps,
        grid=ns.grid,
        checkpoints=checkpoints,
    )
    score = make_mixture_score_fn(inst, sched, softmax_dtype=np.float32 if M > 4096 else np.float64)
    samples = integrate_backward(config, score, grid_offset=ns.sigma2, workers=ns.workers)
    rows = []
    outputs = []
    out = os.path.join(ns.out_dir, ns.out)
    for t in config.checkpoints:
        emp = measure_distortion(samples[t], inst.target, ns.sigma2, seed=ns.seed)
        rows.append([t, emp.delta_mu_hat, emp.delta_mu_se, emp.delta_sigma2_hat,
                     emp.delta_sigma2_se, emp.n_samples])
        if ns.dump_samples:
            dump = out[:-4] + f"_samples_t{_fmt(float(t))}.csv"
            _write_csv(dump, [f"x_{j + 1}" for j in range(ns.d)], samples[t].tolist())
            outputs.append(dump)
    _write_csv(out, ["t", "delta_mu_hat", "delta_mu_se", "delta_sigma2_hat",
                     "delta_sigma2_se", "n_samples"], rows)
    return [out] + outputs


def _cmd_simulate_joint(ns: argparse.Namespace) -> list[str]:
    sched = _schedule_from(ns)
    n = max(2, ns.n // 4) if ns.quick else ns.n
    model = random_model(ns.d2, ns.model_seed)
    config = SimConfig(
        dim=ns.d2, n_samples=n, seed=ns.seed, schedule=sched,
        horizon_T=ns.T, n_steps=ns.steps,
    )
    samples = integrate_backward(
        config,
        lambda x, t: guided_score_batch(model, sched, x, t),
        grid_offset=float(np.min(model.s)),
        init_mean=model.mu,
        workers=ns.workers,
    )[0.0]
    mean_th, cov_eigs = guided_moments(model, sched, 0.0)
    y = samples @ model.basis
    mean_sim = model.basis @ y.mean(axis=0)
    mean_se = samples.std(axis=0, ddof=1) / math.sqrt(n)
    var_sim = y.var(axis=0, ddof=1)
    rows = [
        [i, mean_th[i], mean_sim[i], mean_se[i], cov_eigs[i], var_sim[i]]
        for i in range(ns.d2)
    ]
    out = os.path.join(ns.out_dir, ns.out)
    _write_csv(out, ["eig_index", "mean_theory", "mean_sim", "mean_se",
                     "var_eig_theory", "var_eig_sim"], rows)
    return [out]


def _sweep_rows_to_csv(rows: list[SweepRow], a1: str, a2: str) -> tuple[list[str], list[list[object]]]:
    header = [a1, a2, "t_speciation", "delta_mu", "delta_sigma2", "region_label", "error"]
    body = [
        [r.axis1_value, r.axis2_value, r.t_speciation, r.delta_mu, r.delta_sigma2,
         r.region_label, r.error]
        for r in rows
    ]
    return header, body


def _cmd_sweep(ns: argparse.Namespace) -> list[str]:
    if ns.kind == "beta-w":
        grid = GridSpec(_axis_from(ns, "beta"), _axis_from(ns, "w"), {"sigma2": ns.sigma2})
        rows = sweep_beta_w(ns.sigma2, grid, workers=ns.workers)
        names = ("beta", "w")
    elif ns.kind == "sigma-w":
        grid = GridSpec(_axis_from(ns, "sigma2"), _axis_from(ns, "w"), {"beta": ns.beta})
        rows = sweep_sigma_w(ns.beta, grid, workers=ns.workers)
        names = ("sigma2", "w")
    elif ns.kind == "schedule":
        grid = GridSpec(_axis_from(ns, "w0"), _axis_from(ns, "omega"), {"sigma2": ns.sigma2})
        rows = sweep_schedule_phase_diagram(ns.sigma2, grid, workers=ns.workers)
        names = ("w0", "omega")
    else:
        grid = GridSpec(_axis_from(ns, "w0"), _axis_from(ns, "omega"), {"r": ns.r, "s": ns.s})
        rows = sweep_joint_gaussian_schedule(ns.r, ns.s, grid, workers=ns.workers)
        names = ("w0", "omega")
    out = os.path.join(ns.out_dir, ns.out)
    header, body = _sweep_rows_to_csv(rows, *names)
    _write_csv(out, header, body)
    outputs = [out]
    if ns.emit_plot:
        outputs.append(_write_plot_script(out, names[0], names[1], f"sweep {ns.kind}", 4))
    return outputs


def _cmd_validate(ns: argparse.Namespace) -> int:
    from .acceptance import run_criteria

    numbers = None
    if ns.criteria:
        numbers = [int(tok) for tok in ns.criteria.split(",")]
    results = run_criteria(numbers=numbers, quick=ns.quick)
    failures = [r for r in results if not r.passed]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] criterion {r.number}: {r.name} ({r.runtime_s:.1f}s) {r.detail}")
    print(f"{len(results) - len(failures)}/{len(results)} criteria passed")
    return 0 if not failures else _VALIDATION_EXIT


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        _resolve_globals(ns)
        os.makedirs(ns.out_dir, exist_ok=True)
        started = time.perf_counter()
        if ns.command == "validate":
            return _cmd_validate(ns)
        if ns.command == "theory":
            outputs = _cmd_theory(ns)
        elif ns.command == "simulate":
            outputs = (
                _cmd_simulate_mixture(ns) if ns.target == "mixture" else _cmd_simulate_joint(ns)
            )
        else:
            outputs = _cmd_sweep(ns)
        duration = time.perf_counter() - started
        _write_manifest(outputs[0], f"{ns.command} {getattr(ns, 'target', getattr(ns, 'kind', ''))}".strip(),
                        _resolved_params(ns), ns.seed, duration, [os.path.basename(o) for o in outputs])
        for o in outputs:
            print(o)
        return 0
    except CfgLabError as exc:
        print(f"cfglab: numerical failure in {ns.command}: {exc}", file=sys.stderr)
        return _NUMERICAL_EXIT


if __name__ == "__main__":
    raise SystemExit(main())
