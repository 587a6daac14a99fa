"""Command-line entry point: ``construal-sim <command> ...``.

Exit codes: 0 success, 1 I/O or environment failure, 2 domain or validation
error. Failures print one JSON object to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

from . import analysis, jit as jitmod
from .baselines import load_probes
from .errors import ConstrualSimError, DataFileError, InvalidWorld
from .params import ModelSettings, format_params, load_grid, load_params
from .physics import TABLE_NOISE, run_rollout
from .planner import PlannerParams
from .render import render_svg
from .rng import stream
from .vgc import VgcParams, construal_weights
from .worldgen import gen_gridworld, gen_plinko
from .worlds import GridWorld, load_world, serialize_world

CONSTRUAL_COLUMNS = ("world_id", "object_id", "weight", "n_rollouts", "seed", "failures")
MANIFEST_COLUMNS = ("seed", "world_id", "kind", "n_objects")
SWEEP_COLUMNS = ("alpha", "beta", "model", "mean_V", "winner")
TRAJECTORY_COLUMNS = ("step", "x", "y", "vx", "vy", "event")


class UsageError(ConstrualSimError):
    pass


# -- output helpers -----------------------------------------------------------------

def _num(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_bytes(header, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        vals = [row[c] for c in header] if isinstance(row, dict) else row
        w.writerow([_num(v) for v in vals])
    return buf.getvalue().encode("utf-8")


def write_atomic(path, data: bytes) -> None:
    """Write via a temp file in the target directory, then rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("list is empty")
    return vals


def _settings(world, params_path) -> ModelSettings:
    """Table defaults for the world's domain, overridden by a parameter file."""
    if isinstance(world, GridWorld):
        base = ModelSettings(planner=PlannerParams(0.0, 1.0), vgc=VgcParams(luce_alpha=0.1))
    else:
        base = ModelSettings(noise=TABLE_NOISE, vgc=VgcParams(luce_alpha=20.0))
    values = load_params(params_path) if params_path else {}
    return ModelSettings.from_dict(values, base)


def _load_corpus(directory) -> dict:
    paths = sorted(Path(directory).glob("*.json"))
    return {p.stem: load_world(p) for p in paths}


# -- commands ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.count < 0:
        raise UsageError("--count must be >= 0")
    out = Path(args.out)
    rows = []
    for i in range(args.count):
        seed = args.seed + i
        if args.kind == "grid":
            world = gen_gridworld(seed, args.width or 10, args.height or 10)
            n = len(world.objects)
        else:
            world = gen_plinko(seed, width=float(args.width or 600), height=float(args.height or 600),
                               buckets=args.buckets)
            n = len(world.obstacles)
        wid = f"{args.kind}-{seed:05d}"
        write_atomic(out / f"{wid}.json", serialize_world(world))
        rows.append((seed, wid, args.kind, n))
    write_atomic(out / "manifest.csv", _csv_bytes(MANIFEST_COLUMNS, rows))
    print(f"wrote {len(rows)} {args.kind} worlds to {out}")
    return 0


def cmd_construal(args) -> int:
    world = load_world(args.world)
    wid = Path(args.world).stem
    s = _settings(world, args.params)
    if args.model == "jit":
        est = jitmod.estimate_construal(world, s.jit, planner=s.planner, noise=s.noise, config=s.config,
                                        n_rollouts=args.rollouts, seed=args.seed)
        weights, failures, extra, header = est.weights, est.failures, {}, CONSTRUAL_COLUMNS
    else:
        vgc = VgcParams(s.vgc.luce_alpha, args.rollouts, s.vgc.failure_value, s.vgc.max_objects)
        res = construal_weights(world, vgc, args.seed, planner=s.planner, noise=s.noise, config=s.config,
                                utility=s.extra.get("utility", "w1"), tv_scale=s.extra.get("tv_scale", 1.0))
        weights, failures = res.marginals, 0
        extra = {"utility": res.best.utility, "vor": res.best.vor}
        header = CONSTRUAL_COLUMNS + ("utility", "vor")
    rows = [
        {"world_id": wid, "object_id": oid, "weight": float(w), "n_rollouts": args.rollouts,
         "seed": args.seed, "failures": failures, **extra}
        for oid, w in sorted(weights.items())
    ]
    write_atomic(args.out, _csv_bytes(header, rows))
    size = sum(weights.values())
    mean = size / len(weights) if weights else 0.0
    print(f"{args.model} {wid}: mean weight {mean:.4f}, construal size {size:.4f}")
    return 0


def cmd_efficiency(args) -> int:
    corpus = {k: w for k, w in _load_corpus(args.worlds).items() if isinstance(w, GridWorld)}
    if not corpus:
        raise UsageError(f"no grid worlds in {args.worlds}")
    values = load_params(args.params) if args.params else {}
    base = analysis.SweepSettings()
    s = ModelSettings.from_dict(values, ModelSettings(planner=base.planner, jit=base.jit, vgc=base.vgc))
    vgc = VgcParams(s.vgc.luce_alpha, args.value_rollouts, s.vgc.failure_value, s.vgc.max_objects)
    settings = analysis.SweepSettings(s.planner, s.jit, vgc, args.rollouts,
                                      s.extra.get("inclusion_p", base.inclusion_p))
    res = analysis.regime_sweep(sorted(corpus.items()), analysis.MODEL_ORDER, args.alphas, args.betas,
                                (args.seed,), settings)
    write_atomic(args.out, _csv_bytes(SWEEP_COLUMNS, list(res.rows())))
    for m in res.models:
        print(f"{m}: utility {res.mean_cost(m, 'plan_utility'):.3f} "
              f"compute {res.mean_cost(m, 'compute_cost'):.1f} "
              f"representation {res.mean_cost(m, 'representation_cost'):.3f}")
    print("alpha\\beta " + " ".join(f"{b:>8g}" for b in args.betas))
    for a in args.alphas:
        print(f"{a:>10g} " + " ".join(f"{res.winner(a, b):>8}" for b in args.betas))
    return 0


def cmd_fit(args) -> int:
    data = analysis.load_human_data(args.data)
    grids = load_grid(args.grid)
    worlds = _load_corpus(args.worlds)
    if not worlds:
        raise UsageError(f"no worlds in {args.worlds}")
    first = next(iter(worlds.values()))
    s = _settings(first, args.params)
    probes = load_probes(args.probes) if args.probes else []
    if args.model in ("signal", "reconstructive") and not probes:
        raise UsageError(f"--probes is required for the {args.model} model")
    measure = args.measure
    if measure is None:
        kinds = sorted({r.measure for r in data})
        measure = kinds[0] if len(kinds) == 1 else "recall"
    runner = analysis.ModelRunner(
        args.model, worlds, measure, args.rollouts, args.seed, s.planner, s.jit, s.noise, s.config,
        s.vgc, probes,
    )
    res = analysis.grid_search_fit(runner, data, grids, args.objective, measure)
    body = f"objective={res.objective}\nobjective_value={res.objective_value!r}\n" + format_params(res.best_params)
    write_atomic(args.out, body.encode("utf-8"))
    print(f"{res.objective} at optimum: {res.objective_value:.6f} "
          + " ".join(f"{k}={v:g}" for k, v in res.best_params.items()))
    return 0


def _read_weights(path, world_id, world) -> dict[str, float]:
    out = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"world_id", "object_id", "weight"} <= set(reader.fieldnames):
            raise DataFileError(f"{path}: header must contain world_id, object_id, weight")
        for lineno, row in enumerate(reader, start=2):
            if row["world_id"] != world_id:
                raise DataFileError(f"{path}: row {lineno}: world_id {row['world_id']!r} is not {world_id!r}")
            if row["object_id"] not in world.object_ids:
                raise DataFileError(f"{path}: row {lineno}: unknown object {row['object_id']!r}")
            try:
                out[row["object_id"]] = float(row["weight"])
            except ValueError:
                raise DataFileError(f"{path}: row {lineno}: weight is not a number") from None
    return out


def cmd_render(args) -> int:
    world = load_world(args.world)
    weights = _read_weights(args.weights, Path(args.world).stem, world) if args.weights else None
    write_atomic(args.out, render_svg(world, weights))
    return 0


def cmd_simulate(args) -> int:
    world = load_world(args.world)
    if isinstance(world, GridWorld):
        raise InvalidWorld("simulate needs a plinko world", str(args.world))
    s = _settings(world, args.params)
    rng = stream(args.seed, "rollout", args.index, "physics")
    if args.jit:
        traj, _ = jitmod.run_jit_physics(world, s.noise, s.config, s.jit, rng,
                                         stream(args.seed, "rollout", args.index, "memory"))
    else:
        traj = run_rollout(world, s.noise, s.config, rng)
    events: dict[int, list[str]] = {}
    for step, oid in traj.collision_events:
        events.setdefault(step, []).append(f"collision:{oid}")
    for step, oid in traj.teleport_events:
        events.setdefault(step, []).append(f"teleport:{oid}")
    if traj.landed:
        events.setdefault(len(traj.states) - 1, []).append("land")
    rows = [(i, st.q[0], st.q[1], st.v[0], st.v[1], ";".join(sorted(events.get(i, ()))))
            for i, st in enumerate(traj.states)]
    write_atomic(args.out, _csv_bytes(TRAJECTORY_COLUMNS, rows))
    print(f"{len(rows)} states, landed={traj.landed}, landing_x={traj.landing_x}")
    return 0


# -- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="construal-sim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a corpus of worlds")
    g.add_argument("--kind", choices=("grid", "plinko"), required=True)
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--width", type=int)
    g.add_argument("--height", type=int)
    g.add_argument("--buckets", type=int, default=5)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("construal", help="per-object construal weights for one world")
    c.add_argument("--model", choices=("jit", "vgc"), required=True)
    c.add_argument("--world", required=True)
    c.add_argument("--rollouts", type=int, default=500)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--params")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_construal)

    e = sub.add_parser("efficiency", help="algorithmic-utility winner map over a grid corpus")
    e.add_argument("--worlds", required=True)
    e.add_argument("--alphas", type=_float_list, default=list(analysis.DEFAULT_ALPHAS))
    e.add_argument("--betas", type=_float_list, default=list(analysis.DEFAULT_BETAS))
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--rollouts", type=int, default=20, help="episodes per model and world")
    e.add_argument("--value-rollouts", type=int, default=50, help="VGC value samples per construal")
    e.add_argument("--params")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_efficiency)

    f = sub.add_parser("fit", help="grid-search model parameters against a data table")
    f.add_argument("--model", choices=("jit", "vgc", "signal", "reconstructive"), required=True)
    f.add_argument("--data", required=True)
    f.add_argument("--grid", required=True)
    f.add_argument("--objective", choices=("pearson", "rmse", "loglik"), default="pearson")
    f.add_argument("--worlds", required=True)
    f.add_argument("--measure", choices=analysis.MEASURES)
    f.add_argument("--probes")
    f.add_argument("--rollouts", type=int, default=200)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--params")
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fit)

    r = sub.add_parser("render", help="draw a world as SVG")
    r.add_argument("--world", required=True)
    r.add_argument("--weights")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_render)

    s = sub.add_parser("simulate", help="export one rollout trajectory as CSV")
    s.add_argument("--world", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--index", type=int, default=0, help="rollout index within the seed")
    s.add_argument("--jit", action="store_true", help="simulate with just-in-time construal")
    s.add_argument("--params")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)
    return p


def _fail(exc: BaseException, code: int) -> int:
    print(json.dumps({"error": type(exc).__name__, "exit_code": code, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConstrualSimError as exc:
        return _fail(exc, exc.exit_code)
    except ValueError as exc:
        return _fail(exc, 2)
    except OSError as exc:
        return _fail(exc, 1)


if __name__ == "__main__":
    sys.exit(main())
