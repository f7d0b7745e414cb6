"""Command-line interface: sample, transform, flow, simulate, verify.

Relative output paths land in --out-dir. The master seed comes from the
global --seed flag (default 0xC0FFEE, never wall-clock); replica r always
uses substream r of that seed, so outputs are reproducible bit-for-bit at
any thread count. `verify` exits 0 exactly when every check passes.
"""
from __future__ import annotations

import csv
import sys
from pathlib import Path

import click
import numpy as np

from . import fileio
from .ensembles import EnsembleSpec, build_ensemble
from .flows import FlowSpec, model_flow
from .mkt import imkt_moments, mkt_moments
from .rng import DEFAULT_SEED, RandomStream
from .sde import (
    ScalingSpec,
    SimConfig,
    empirical_moment_paths,
    simulate_companion,
    simulate_dyson,
    simulate_jacobi,
    simulate_laguerre,
    simulate_local_scaling,
)
from .tridiagonal import tridiag_eigen
from .verify import REGIMES, verify_flow_mkt, verify_local_scaling, verify_theorem1

_SIM_MODELS = ("dyson", "laguerre", "jacobi")
_COMPANIONS = ("companion-gaussian", "companion-laguerre", "companion-jacobi")


def _resolve(ctx: click.Context, path: str) -> Path:
    out = Path(path)
    if not out.is_absolute():
        out = Path(ctx.obj["out_dir"]) / out
    out.parent.mkdir(parents=True, exist_ok=True)
    return out


def _seed(ctx: click.Context, override: int | None) -> int:
    return ctx.obj["seed"] if override is None else override


@click.group()
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True, help="Master RNG seed.")
@click.option("--threads", type=int, default=1, show_default=True, help="Replica-level threads.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
@click.version_option(package_name="mkt-ensembles")
@click.pass_context
def main(ctx: click.Context, seed: int, threads: int, out_dir: str) -> None:
    """Tridiagonal beta ensembles at high temperature: sampling, moment
    transforms, moment flows, particle simulation, verification."""
    ctx.obj = {"seed": seed, "threads": threads, "out_dir": out_dir}


@main.command()
@click.option("--model", type=click.Choice(["gaussian", "laguerre", "jacobi"]), required=True)
@click.option("--n", type=int, required=True, help="Matrix size N.")
@click.option("--c", type=float, required=True, help="Coupling c (beta = 2c/N).")
@click.option("--alpha", type=float, default=None, help="Laguerre shape (> 0).")
@click.option("--a", type=float, default=None, help="Jacobi exponent a (> -1).")
@click.option("--b", type=float, default=None, help="Jacobi exponent b (> -1).")
@click.option("--reps", type=int, default=1, show_default=True)
@click.option("--seed", "seed_override", type=int, default=None)
@click.option("--weights", is_flag=True, help="Also emit squared first-component weights.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def sample(ctx, model, n, c, alpha, a, b, reps, seed_override, weights, out) -> None:
    """Draw tridiagonal ensemble spectra; one CSV row per replica."""
    spec = EnsembleSpec(model=model, n=n, c=c, alpha=alpha, a=a, b=b)
    seed = _seed(ctx, seed_override)
    eigs = np.empty((reps, n))
    w = np.empty((reps, n)) if weights else None
    for r in range(reps):
        matrix = build_ensemble(spec, RandomStream(seed, r))
        lam, wsq = tridiag_eigen(matrix)
        eigs[r] = lam
        if weights:
            w[r] = wsq
    path = _resolve(ctx, out)
    fileio.write_sample_csv(path, eigs, w)
    click.echo(f"wrote {reps} replicas to {path}")


@main.command()
@click.argument("kind", type=click.Choice(["mkt", "imkt"]))
@click.option("--c", type=float, required=True)
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def transform(ctx, kind, c, in_path, out) -> None:
    """Apply the moment-level transform (mkt) or its inverse (imkt)."""
    moments = fileio.read_moments_csv(in_path)
    result = mkt_moments(moments, c) if kind == "mkt" else imkt_moments(moments, c)
    path = _resolve(ctx, out)
    fileio.write_moments_csv(path, result)
    click.echo(f"wrote {kind}(moments) up to order {len(result) - 1} to {path}")


@main.command()
@click.option("--model", type=click.Choice(["gaussian", "laguerre", "jacobi"]), required=True)
@click.option("--c", type=float, required=True)
@click.option("--sigma", type=float, default=1.0, show_default=True)
@click.option("--alpha", type=float, default=None)
@click.option("--a", type=float, default=None)
@click.option("--b", type=float, default=None)
@click.option("--init", "init_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Initial moments CSV (n,value).")
@click.option("--t-grid", default="0:0.1:2", show_default=True)
@click.option("--n-max", type=int, default=8, show_default=True)
@click.option("--dt-grid", type=float, default=1e-3, show_default=True,
              help="Internal step for the Jacobi integrator.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def flow(ctx, model, c, sigma, alpha, a, b, init_path, t_grid, n_max, dt_grid, out) -> None:
    """Integrate the limiting moment hierarchy; long CSV t,n,m_n."""
    times = fileio.parse_time_grid(t_grid)
    init = fileio.read_moments_csv(init_path)
    spec = FlowSpec(
        model=model, c=c, init=init, n_max=n_max, horizon=float(times.max()),
        sigma=sigma, alpha=alpha, a=a, b=b,
    )
    result = model_flow(spec, dt_grid=dt_grid)
    table = result.table(times)
    path = _resolve(ctx, out)
    fileio.write_flow_csv(path, times, table)
    click.echo(f"wrote flow table ({times.size} times, n <= {n_max}) to {path}")


@main.command()
@click.option("--model", type=click.Choice(_SIM_MODELS + _COMPANIONS), required=True)
@click.option("--n", type=int, default=50, show_default=True, help="Particles per replica.")
@click.option("--c", type=float, required=True)
@click.option("--dt", type=float, default=1e-3, show_default=True)
@click.option("--t", "horizon", type=float, default=1.0, show_default=True)
@click.option("--reps", type=int, default=1, show_default=True)
@click.option("--seed", "seed_override", type=int, default=None)
@click.option("--sigma", type=float, default=1.0, show_default=True)
@click.option("--alpha", type=float, default=None)
@click.option("--a", type=float, default=None)
@click.option("--b", type=float, default=None)
@click.option("--n-max", type=int, default=6, show_default=True, help="Moment orders to extract.")
@click.option("--init-point", type=float, default=None,
              help="Start every particle/path at this point (model default otherwise).")
@click.option("--delta-min", type=float, default=1e-8, show_default=True,
              help="Pairwise-gap floor in the interaction. Raise it (e.g. 3e-4 "
                   "at dt=1e-3) when all particles start coincident, or the "
                   "first steps overshoot.")
@click.option("--scaling", default=None, help="gamma,tau,E window for laguerre/jacobi bases.")
@click.option("--regime", type=click.Choice(["gaussian", "laguerre"]), default=None)
@click.option("--full", is_flag=True, help="Emit positions instead of moment extracts.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def simulate(ctx, model, n, c, dt, horizon, reps, seed_override, sigma, alpha, a, b,
             n_max, init_point, delta_min, scaling, regime, full, out) -> None:
    """Run the particle SDE systems or the 1-d companion diffusions."""
    seed = _seed(ctx, seed_override)
    path_out = _resolve(ctx, out)
    cfg = SimConfig(
        n=n, c=c, dt=dt, horizon=horizon, reps=reps, seed=seed, sigma=sigma,
        alpha=alpha, a=a, b=b, init=init_point, delta_min=delta_min,
    )
    if model in _COMPANIONS:
        if scaling or full:
            raise click.UsageError("--scaling/--full do not apply to companion models")
        target = model.removeprefix("companion-")
        default_init = {"gaussian": 0.0, "laguerre": 0.0, "jacobi": 0.5}[target]
        init_law = default_init if init_point is None else init_point
        est = simulate_companion(target, cfg, init_law, n_max)
        fileio.write_sim_moments_csv(path_out, est.times, est.mean, rep="mean")
        click.echo(f"wrote companion moment means ({cfg.reps} paths) to {path_out}")
        return
    if scaling is not None:
        try:
            gamma, tau, e = (float(p) for p in scaling.split(","))
        except ValueError as exc:
            raise click.UsageError("--scaling expects gamma,tau,E") from exc
        if model == "dyson":
            raise click.UsageError("--scaling needs a laguerre or jacobi base")
        window = ScalingSpec(gamma=gamma, tau=tau, e=e)
        paths = [
            simulate_local_scaling(model, window, cfg, regime=regime,
                                   stream=RandomStream(seed, r))
            for r in range(reps)
        ]
    else:
        sim = {"dyson": simulate_dyson, "laguerre": simulate_laguerre,
               "jacobi": simulate_jacobi}[model]
        paths = [sim(cfg, RandomStream(seed, r)) for r in range(reps)]
    if full:
        with open(path_out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rep", "t"] + [f"x_{i}" for i in range(1, n + 1)])
            for r, p in enumerate(paths):
                for i, t in enumerate(p.times):
                    writer.writerow([r, repr(float(t))] + [repr(float(v)) for v in p.positions[i]])
    else:
        with open(path_out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rep", "t", "n", "S_n"])
            for r, p in enumerate(paths):
                table = empirical_moment_paths(p, n_max)
                for i, t in enumerate(p.times):
                    for k in range(n_max + 1):
                        writer.writerow([r, repr(float(t)), k, repr(float(table[i, k]))])
    frac = max(p.reflected_fraction for p in paths)
    click.echo(f"wrote {reps} replicas to {path_out} (max reflected fraction {frac:.4f})")


@main.group()
def verify() -> None:
    """Verification experiments with JSON reports; exit 0 iff all pass."""


def _finish(ctx: click.Context, reports, report_path: str | None, default_name: str) -> None:
    ok = True
    for suffix, report in reports:
        target = report_path or default_name
        path = Path(target)
        if suffix and len(reports) > 1:
            path = path.with_name(f"{path.stem}-{suffix}{path.suffix}")
        resolved = _resolve(ctx, str(path))
        report.write_json(resolved)
        for line in report.summary_lines():
            click.echo(f"{suffix + ': ' if suffix else ''}{line}")
        click.echo(f"report: {resolved}")
        ok = ok and report.overall_pass
    sys.exit(0 if ok else 1)


@verify.command("theorem1")
@click.option("--model", type=click.Choice(["gaussian", "laguerre", "jacobi", "all"]),
              default="all", show_default=True)
@click.option("--n", type=int, default=200, show_default=True)
@click.option("--c", type=float, default=1.0, show_default=True)
@click.option("--alpha", type=float, default=2.0, show_default=True)
@click.option("--a", type=float, default=0.0, show_default=True)
@click.option("--b", type=float, default=0.0, show_default=True)
@click.option("--reps", type=int, default=10_000, show_default=True)
@click.option("--limit-n", type=int, default=400, show_default=True)
@click.option("--limit-reps", type=int, default=200, show_default=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def verify_theorem1_cmd(ctx, model, n, c, alpha, a, b, reps, limit_n, limit_reps, report_path):
    """Finite-N transform identity and limiting moments."""
    models = ["gaussian", "laguerre", "jacobi"] if model == "all" else [model]
    reports = []
    for m in models:
        kwargs = {"alpha": alpha} if m == "laguerre" else {}
        if m == "jacobi":
            kwargs = {"a": a, "b": b}
        rep = verify_theorem1(
            m, n, c, reps=reps, seed=ctx.obj["seed"], threads=ctx.obj["threads"],
            limit_n=limit_n, limit_reps=limit_reps, **kwargs,
        )
        reports.append((m, rep))
    _finish(ctx, reports, report_path, "report-theorem1.json")


@verify.command("flow-mkt")
@click.option("--model", type=click.Choice(["gaussian", "laguerre", "jacobi", "all"]),
              default="all", show_default=True)
@click.option("--c", type=float, default=1.0, show_default=True)
@click.option("--sigma", type=float, default=1.0, show_default=True)
@click.option("--alpha", type=float, default=2.0, show_default=True)
@click.option("--a", type=float, default=0.0, show_default=True)
@click.option("--b", type=float, default=0.0, show_default=True)
@click.option("--init", "init_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Initial moments CSV; default is a point mass at 0.")
@click.option("--t-grid", default="0.25,0.5,1,2", show_default=True)
@click.option("--n-max", type=int, default=8, show_default=True)
@click.option("--tol", type=float, default=None, help="Override the per-model default tolerance.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def verify_flow_mkt_cmd(ctx, model, c, sigma, alpha, a, b, init_path, t_grid, n_max, tol,
                        report_path):
    """Moment flow composed with the transform vs the companion flow."""
    models = ["gaussian", "laguerre", "jacobi"] if model == "all" else [model]
    times = fileio.parse_time_grid(t_grid)
    if init_path is not None:
        init = fileio.read_moments_csv(init_path)
    else:
        init = [1.0] + [0.0] * n_max
    reports = []
    for m in models:
        kwargs = {"sigma": sigma}
        if m == "laguerre":
            kwargs["alpha"] = alpha
        if m == "jacobi":
            kwargs = {"a": a, "b": b}
        rep = verify_flow_mkt(
            m, c, init=init, t_grid=times, tol=tol, n_max=n_max, seed=ctx.obj["seed"], **kwargs
        )
        reports.append((m, rep))
    _finish(ctx, reports, report_path, "report-flow-mkt.json")


@verify.command("local-scaling")
@click.option("--regime", type=click.Choice(list(REGIMES) + ["all"]), default="all",
              show_default=True, help="base-target pair.")
@click.option("--n-list", default="50,100,200", show_default=True)
@click.option("--c", type=float, default=1.0, show_default=True)
@click.option("--sigma", type=float, default=None,
              help="Window sigma (default 0.5; 0.4 for jacobi-laguerre).")
@click.option("--reps", type=int, default=150, show_default=True)
@click.option("--dt", type=float, default=1e-3, show_default=True)
@click.option("--t", "horizon", type=float, default=1.0, show_default=True)
@click.option("--budget", type=float, default=0.1, show_default=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def verify_local_scaling_cmd(ctx, regime, n_list, c, sigma, reps, dt, horizon, budget,
                             report_path):
    """Windowed Laguerre/Jacobi dynamics against the regime-target flow."""
    regimes = list(REGIMES) if regime == "all" else [regime]
    try:
        sizes = tuple(int(p) for p in n_list.split(","))
    except ValueError as exc:
        raise click.UsageError("--n-list expects comma-separated integers") from exc
    reports = []
    for key in regimes:
        base, target = key.rsplit("-", 1)
        sig = sigma if sigma is not None else (0.4 if key == "jacobi-laguerre" else 0.5)
        rep = verify_local_scaling(
            base, target, sizes, c=c, sigma=sig, reps=reps, dt=dt, horizon=horizon,
            budget=budget, seed=ctx.obj["seed"], threads=ctx.obj["threads"],
        )
        reports.append((key, rep))
    _finish(ctx, reports, report_path, "report-local-scaling.json")


if __name__ == "__main__":
    main()
