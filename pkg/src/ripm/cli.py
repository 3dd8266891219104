"""Command line: instance files, the solve command, benches, and generators.

Instance files are JSON: ``kind`` is "standard" (A, b, c, blocks, metadata)
or "erm" (data, offsets, losses, R).  Solutions and bench summaries are JSON
and CSV respectively; iteration logs stream one CSV row per iteration and are
flushed as they go, so a crashed run keeps its partial log.  Every randomized
choice is a pure function of --seed.
"""
from __future__ import annotations

import json
import logging
import math
import os
import sys
import time
from pathlib import Path
from typing import Optional, Union

import click
import numpy as np

from . import problem as problem_mod
from .barriers import from_tag
from .cpm import CentralPathMaintenance
from .errors import Infeasible, IterationLimit, NumericalBreakdown, RipmError, Unbounded
from .oracle import MAX_VERTEX_VARS, vertex_lp_solve
from .problem import ErmInstance, StandardProblem, erm_to_standard, validate
from .rcp import PathParams, solve, step_direction

log = logging.getLogger(__name__)

LOG_HEADER = "iter,t,log_phi,max_gamma,h_norm,update_branch,r,rebuilds,wall_ms"
BENCH_HEADER = ("instance,n,d,m,iterations,rebuilds,wall_ms,"
                "update_ms,multiply_ms,step_ms,gap_bound,note")

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING,
               "info": logging.INFO, "debug": logging.DEBUG}


# ---------------------------------------------------------------------------
# instance files
# ---------------------------------------------------------------------------

def _dump(doc: dict, path: Path) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def save_instance(inst: Union[StandardProblem, ErmInstance], path) -> None:
    """Write an instance as canonical JSON (stable key order, one trailing
    newline) so identical instances produce byte-identical files."""
    path = Path(path)
    if isinstance(inst, ErmInstance):
        doc = {
            "kind": "erm",
            "data": inst.data.tolist(),
            "offsets": inst.offsets.tolist(),
            "losses": [list(sp) for sp in inst.losses],
            "R": inst.box_radius,
            "z_cap": inst.z_cap,
            "metadata": {"name": inst.name},
        }
    else:
        blocks = []
        for bar in inst.barriers:
            if bar.kind == "custom":
                raise ValueError("custom barriers have no file representation")
            params = dict(bar.params)
            if bar.kind == "ball":
                params["dim"] = bar.dim
            blocks.append({"size": bar.dim, "barrier": bar.kind,
                           "params": params})
        doc = {
            "kind": "standard",
            "A": inst.A.tolist(),
            "b": inst.b.tolist(),
            "c": inst.c.tolist(),
            "blocks": blocks,
            "metadata": {"R": inst.R_diam, "L": inst.L_lip, "name": inst.name},
        }
    _dump(doc, path)


def load_instance(path) -> Union[StandardProblem, ErmInstance]:
    """Read an instance file; raises ValueError on malformed documents."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"not valid JSON: {exc}") from exc
    try:
        kind = doc["kind"]
        if kind == "erm":
            losses = [tuple(sp) for sp in doc["losses"]]
            return ErmInstance(
                data=np.asarray(doc["data"], dtype=float),
                offsets=np.asarray(doc["offsets"], dtype=float),
                losses=losses, box_radius=float(doc["R"]),
                z_cap=doc.get("z_cap"),
                name=doc.get("metadata", {}).get("name", ""))
        if kind == "standard":
            barriers = []
            for blk in doc["blocks"]:
                bar = from_tag(blk["barrier"], blk.get("params"))
                if bar.dim != int(blk["size"]):
                    raise ValueError(
                        f"block size {blk['size']} does not match barrier "
                        f"'{blk['barrier']}' (dim {bar.dim})")
                barriers.append(bar)
            meta = doc.get("metadata", {})
            lip = meta.get("L")
            return StandardProblem(
                A=np.asarray(doc["A"], dtype=float),
                b=np.asarray(doc["b"], dtype=float),
                c=np.asarray(doc["c"], dtype=float),
                barriers=barriers, R_diam=float(meta["R"]),
                L_lip=None if lip is None else float(lip),
                name=meta.get("name", ""))
        raise ValueError(f"unknown instance kind '{kind}'")
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed instance file: {exc!r}") from exc


# ---------------------------------------------------------------------------
# shared option plumbing
# ---------------------------------------------------------------------------

def _run_options(f):
    opts = [
        click.option("--delta", default=1e-2, show_default=True,
                     help="Target accuracy of the certified solve."),
        click.option("--mode", type=click.Choice(["practical", "paper"]),
                     default="practical", show_default=True,
                     help="Constant regime for the path parameters."),
        click.option("--seed", default=0, show_default=True,
                     help="Seed for every randomized choice."),
        click.option("--sketch", default=None, metavar="{N|identity}",
                     help="Sketch rows per draw, or 'identity' for exact "
                          "queries.  Default: width chosen from n."),
        click.option("--batch-exp", default=0.31, show_default=True,
                     help="Batch exponent a: updates touching fewer than n^a "
                          "blocks stay lazy."),
        click.option("--eps-mp", default=None, type=float,
                     help="Scaling drift tolerance (default chosen from n)."),
        click.option("--max-iters", default=None, type=int,
                     help="Hard iteration budget (default: schedule length)."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _parse_sketch(sketch: Optional[str]) -> tuple[bool, Optional[int]]:
    if sketch is None:
        return False, None
    if sketch == "identity":
        return True, None
    try:
        width = int(sketch)
    except ValueError:
        raise click.UsageError(
            f"--sketch must be a positive integer or 'identity', got {sketch!r}")
    if width < 1:
        raise click.UsageError("--sketch must be >= 1")
    return False, width


def _check_run_config(delta: float, batch_exp: float) -> None:
    if not (0.0 < delta < 1.0):
        raise click.UsageError(f"--delta must lie in (0, 1), got {delta}")
    if not (0.0 < batch_exp < 1.0):
        raise click.UsageError(f"--batch-exp must lie in (0, 1), got {batch_exp}")


def _load_standard(path: Path) -> tuple[StandardProblem, Optional[ErmInstance]]:
    inst = load_instance(path)
    if isinstance(inst, ErmInstance):
        return erm_to_standard(inst), inst
    return inst, None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

@click.group()
def main() -> None:
    """Certified interior-point solves for block-structured problems."""
    level = os.environ.get("RIPM_LOG_LEVEL", "warn").lower()
    if level not in _LOG_LEVELS:
        raise click.UsageError(
            f"RIPM_LOG_LEVEL must be one of {sorted(_LOG_LEVELS)}, got '{level}'")
    logging.basicConfig(level=_LOG_LEVELS[level],
                        format="%(levelname)s %(name)s: %(message)s")


@main.command("solve")
@click.argument("instance", type=click.Path(exists=True, dir_okay=False,
                                            path_type=Path))
@_run_options
@click.option("--log", "log_path", type=click.Path(path_type=Path),
              default=None, help="Stream per-iteration CSV here.")
@click.option("--out", "out_path", type=click.Path(path_type=Path),
              default=None,
              help="Solution JSON path [default: INSTANCE.solution.json].")
@click.option("--check-oracle", is_flag=True,
              help="Verify the objective against brute-force vertex "
                   "enumeration when the instance is small enough.")
def solve_command(instance: Path, delta: float, mode: str, seed: int,
                  sketch: Optional[str], batch_exp: float,
                  eps_mp: Optional[float], max_iters: Optional[int],
                  log_path: Optional[Path], out_path: Optional[Path],
                  check_oracle: bool) -> None:
    """Solve one instance file to certified accuracy --delta."""
    _check_run_config(delta, batch_exp)
    identity, width = _parse_sketch(sketch)
    out_path = out_path or instance.with_suffix(".solution.json")

    try:
        std, erm = _load_standard(instance)
    except (ValueError, RipmError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    report = validate(std)
    if not report.ok:
        for msg in report.failures:
            click.echo(f"validation: {msg}", err=True)
        sys.exit(2)

    stream = None
    callback = None
    if log_path is not None:
        stream = open(log_path, "w")
        stream.write(LOG_HEADER + "\n")
        stream.flush()

        def callback(rec):
            stream.write(f"{rec.iteration},{rec.t!r},{rec.log_phi!r},"
                         f"{rec.max_gamma!r},{rec.h_norm!r},{rec.branch},"
                         f"{rec.r},{rec.rebuilds},{rec.wall_ms:.3f}\n")
            stream.flush()

    try:
        sol = solve(std, delta=delta, mode=mode, eps_mp=eps_mp,
                    batch_exponent=batch_exp, sketch_width=width,
                    identity_sketch=identity, seed=seed, max_iters=max_iters,
                    callback=callback, keep_log=False)
    except NumericalBreakdown as exc:
        _dump({"status": "numerical-breakdown", "error": str(exc),
               "snapshot": exc.snapshot}, out_path)
        click.echo(f"numerical breakdown: {exc} (snapshot in {out_path})",
                   err=True)
        sys.exit(3)
    except IterationLimit as exc:
        _dump({"status": "iteration-limit", "error": str(exc)}, out_path)
        click.echo(f"stopped: {exc}", err=True)
        sys.exit(1)
    finally:
        if stream is not None:
            stream.close()

    _dump(_solution_doc(sol, erm), out_path)
    click.echo(f"{sol.status}: objective {sol.objective:.6g} "
               f"(gap bound {sol.gap_bound:.3g}) in {sol.iterations} "
               f"iterations; solution in {out_path}")

    if check_oracle:
        _run_oracle_check(std, sol)


def _solution_doc(sol, erm: Optional[ErmInstance]) -> dict:
    doc = {
        "status": sol.status,
        "x": sol.x.tolist(),
        "objective": sol.objective,
        "gap_bound": sol.gap_bound,
        "infeasibility": sol.primal_infeas,
        "objective_excess_bound": sol.objective_excess_bound,
        "infeas_bound": sol.infeas_bound,
        "tau": sol.tau,
        "t_final": sol.t_final,
        "iterations": sol.iterations,
        "rebuilds": sol.rebuilds,
        "certificate_valid": sol.certificate_valid,
    }
    if erm is not None:
        decision = problem_mod.erm_decision(erm, sol)
        doc["erm_decision"] = decision.tolist()
        doc["erm_objective"] = problem_mod.erm_objective(erm, decision)
    return doc


def _box_bounds(problem: StandardProblem) -> Optional[np.ndarray]:
    bounds = []
    for bar in problem.barriers:
        if bar.kind == "log_box":
            bounds.append((bar.params["lo"], bar.params["hi"]))
        elif bar.kind == "log_positive":
            bounds.append((0.0, math.inf))
        else:
            return None
    return np.asarray(bounds)


def _run_oracle_check(std: StandardProblem, sol) -> None:
    bounds = _box_bounds(std)
    if bounds is None or std.structure.n > MAX_VERTEX_VARS:
        click.echo("oracle check skipped: instance outside the vertex "
                   "enumeration range")
        return
    try:
        ref = vertex_lp_solve(std.A, std.b, std.c, bounds)
    except (ValueError, Infeasible, Unbounded) as exc:
        click.echo(f"oracle check skipped: {exc}")
        return
    excess = sol.objective - ref.objective
    limit = sol.objective_excess_bound + 1e-9 * (1.0 + abs(ref.objective))
    if excess <= limit:
        click.echo(f"oracle check passed: excess {excess:.3e} "
                   f"<= bound {sol.objective_excess_bound:.3e}")
    else:
        click.echo(f"oracle check FAILED: excess {excess:.3e} "
                   f"> bound {sol.objective_excess_bound:.3e}", err=True)
        sys.exit(1)


@main.command("bench")
@click.argument("suite", type=click.Path(exists=True, file_okay=False,
                                         path_type=Path))
@_run_options
@click.option("--out", "out_path", type=click.Path(path_type=Path),
              default=None, help="Summary CSV path (default: stdout).")
@click.option("--sample-iters", default=200, show_default=True,
              help="Reference-loop iterations timed to split the per-phase "
                   "costs; the full run itself uses the fastest engine.")
def bench_command(suite: Path, delta: float, mode: str, seed: int,
                  sketch: Optional[str], batch_exp: float,
                  eps_mp: Optional[float], max_iters: Optional[int],
                  out_path: Optional[Path], sample_iters: int) -> None:
    """Run every *.json instance in a directory and tabulate the results."""
    _check_run_config(delta, batch_exp)
    identity, width = _parse_sketch(sketch)
    lines = [BENCH_HEADER]
    for path in sorted(suite.glob("*.json")):
        try:
            std, _ = _load_standard(path)
            report = validate(std)
            if not report.ok:
                raise ValueError("; ".join(report.failures))
        except (ValueError, RipmError) as exc:
            log.warning("skipping %s: %s", path.name, exc)
            note = str(exc).replace('"', "'").replace("\n", " ")
            lines.append(f'{path.name},,,,,,,,,,,"{note}"')
            continue
        started = time.perf_counter()
        phases = _phase_sample(std, delta, mode, seed, identity, width,
                               batch_exp, eps_mp, sample_iters)
        try:
            sol = solve(std, delta=delta, mode=mode, eps_mp=eps_mp,
                        batch_exponent=batch_exp, sketch_width=width,
                        identity_sketch=identity, seed=seed,
                        max_iters=max_iters, keep_log=False)
        except (RipmError, IterationLimit) as exc:
            log.warning("%s did not converge: %s", path.name, exc)
            note = str(exc).replace('"', "'").replace("\n", " ")
            lines.append(f'{path.name},,,,,,,,,,,"{note}"')
            continue
        wall = 1e3 * (time.perf_counter() - started)
        d, n = std.A.shape
        lines.append(
            f"{path.name},{n},{d},{std.structure.m},{sol.iterations},"
            f"{sol.rebuilds},{wall:.1f},{phases[0]:.1f},{phases[1]:.1f},"
            f"{phases[2]:.1f},{sol.gap_bound!r},")
    text = "\n".join(lines) + "\n"
    if out_path is None:
        click.echo(text, nl=False)
    else:
        out_path.write_text(text)
        click.echo(f"summary in {out_path}")


def _phase_sample(std: StandardProblem, delta: float, mode: str, seed: int,
                  identity: bool, width: Optional[int], batch_exp: float,
                  eps_mp: Optional[float], iters: int) -> tuple[float, float, float]:
    """Time (update, multiply, direction) over a short reference-loop run.

    The bench's full solve may run compiled, which leaves nothing to time
    per phase, so the split comes from this instrumented sample instead.
    Returns milliseconds spent in each phase.
    """
    if iters <= 0:
        return 0.0, 0.0, 0.0
    modified = problem_mod.build_modified(std, delta)
    emb = modified.problem
    factory = PathParams.paper if mode == "paper" else PathParams.practical
    params = factory(emb.m, emb.nu, delta)
    if params.delta != delta:
        modified = problem_mod.build_modified(std, params.delta)
        emb = modified.problem
    bb = emb.block_barriers
    maint = CentralPathMaintenance(
        emb.A, modified.x0, modified.s0, bb.hessian_inverse(modified.x0),
        eps_mp=eps_mp, a=batch_exp, b=width, seed=seed,
        identity_sketch=identity)
    t = 1.0
    upd = mul = stp = 0.0
    for _ in range(iters):
        t0 = time.perf_counter()
        x_bar, s_bar = maint.query()
        h, w_bar = step_direction(x_bar, s_bar, t, params, bb)
        t1 = time.perf_counter()
        maint.update(w_bar)
        t2 = time.perf_counter()
        maint.multiply_move(h, t)
        t3 = time.perf_counter()
        stp += t1 - t0
        upd += t2 - t1
        mul += t3 - t2
        t *= params.shrink
    return 1e3 * upd, 1e3 * mul, 1e3 * stp


@main.command("gen")
@click.argument("outdir", type=click.Path(file_okay=False, path_type=Path))
@click.option("--kind", type=click.Choice(["random_lp", "l1_regression",
                                           "quantile"]),
              default="random_lp", show_default=True)
@click.option("--n", "sizes", multiple=True, type=int, default=(16,),
              show_default=True,
              help="Problem size; repeat the flag for a family.")
@click.option("--d", default=None, type=int,
              help="Constraint rows for random_lp (default n//3).")
@click.option("--terms", default=None, type=int,
              help="ERM term count (default 3n).")
@click.option("--theta", default=0.5, show_default=True,
              help="Quantile level for kind=quantile.")
@click.option("--seed", default=0, show_default=True)
def gen_command(outdir: Path, kind: str, sizes: tuple[int, ...],
                d: Optional[int], terms: Optional[int], theta: float,
                seed: int) -> None:
    """Write reproducible synthetic instances (feasible by construction)."""
    outdir.mkdir(parents=True, exist_ok=True)
    for n in sizes:
        if kind == "random_lp":
            inst: Union[StandardProblem, ErmInstance] = problem_mod.random_lp(
                n=n, d=d, seed=seed)
        elif kind == "l1_regression":
            inst = problem_mod.l1_regression(p=n, terms=terms or 3 * n,
                                             seed=seed)
        else:
            inst = problem_mod.quantile_regression(
                p=n, terms=terms or 3 * n, theta=theta, seed=seed)
        path = outdir / f"{kind}_n{n}_seed{seed}.json"
        save_instance(inst, path)
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
