"""Command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 runtime or numeric failure.
Tables go to ``--out`` (stdout when omitted); summaries go to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import export as ex
from .contextual_kick import (
    CONTEXT_RANGE,
    PolicyModel,
    SurrogateKick,
    TrainLog,
    eval_policy,
    policy_mean,
    train_contextual,
)
from .model_core import (
    DEFAULT_CONFIG_PATH,
    GaitCommand,
    ValidationError,
    load_config,
)
from .optimizers import ALGORITHMS, optimize
from .pipeline import SOLVERS, PipelineError, generate_gait
from .problems import PROBLEMS, make_problem
from .run_features import (
    STATE_LAYOUT,
    SensorFrame,
    assemble_state,
    fit_orientation_predictor,
    load_orientation_dataset,
    update_counter,
)
from .simulator import Disturbance, simulate_walk


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _impulse(text: str) -> Disturbance:
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad impulse {text!r}; expected t,dvx[,dvy]")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"bad impulse {text!r}; expected t,dvx[,dvy]")
    return Disturbance(*parts)


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=argparse.SUPPRESS,
                        help="robot JSON (default: bundled config)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", type=Path, default=argparse.SUPPRESS)
    common.add_argument("--format", choices=ex.FORMATS, default=argparse.SUPPRESS)

    ap = _Parser(prog="bipedkit", description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path, default=DEFAULT_CONFIG_PATH)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=None)
    ap.add_argument("--format", choices=ex.FORMATS, default="csv")
    verbs = ap.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def cmd_args(p):
        p.add_argument("--vx", type=float, default=0.1)
        p.add_argument("--vy", type=float, default=0.0)
        p.add_argument("--omega", type=float, default=0.0)
        p.add_argument("--solver", "--model", dest="solver", choices=SOLVERS, default="pendulum")

    gait = verbs.add_parser("gait", help="offline gait generation")
    gsub = gait.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("plan", "solve", "joints"):
        g = gsub.add_parser(name, parents=[common])
        cmd_args(g)
        g.add_argument("--steps", type=int, default=4)
        g.add_argument("--no-clamp", action="store_true",
                       help="reject commands over the step limits instead of clamping")

    walk = verbs.add_parser("walk", help="closed-loop simulation")
    wsub = walk.add_subparsers(dest="action", required=True, parser_class=_Parser)
    w = wsub.add_parser("simulate", parents=[common])
    cmd_args(w)
    w.add_argument("--duration", type=float, default=10.0)
    w.add_argument("--impulse", type=_impulse, action="append", default=[],
                   metavar="T,DVX[,DVY]")
    w.add_argument("--balance", type=_on_off, default=True, metavar="on|off")
    w.add_argument("--no-joints", action="store_true")

    o = verbs.add_parser("optimize", parents=[common], help="black-box optimisation")
    o.add_argument("--algo", choices=sorted(ALGORITHMS), default="cmaes")
    o.add_argument("--problem", choices=PROBLEMS, default="sphere")
    o.add_argument("--dim", type=int, default=5)
    o.add_argument("--budget", type=int, default=5000)
    o.add_argument("--workers", type=int, default=1)
    o.add_argument("--distance", type=float, default=7.5, help="kick-surrogate context")

    kick = verbs.add_parser("kick", help="contextual kick policy")
    ksub = kick.add_subparsers(dest="action", required=True, parser_class=_Parser)
    kt = ksub.add_parser("train", parents=[common])
    kt.add_argument("--iterations", "--iters", dest="iterations", type=int, default=300)
    kt.add_argument("--samples", type=int, default=64)
    kt.add_argument("--rbfs", type=int, default=15)
    kt.add_argument("--bandwidth-sq", type=float, default=0.5)
    ke = ksub.add_parser("eval", parents=[common])
    ke.add_argument("--model", type=Path, required=True)
    ke.add_argument("--contexts", type=int, default=100,
                    help="number of random held-out distances")
    ke.add_argument("--distance", type=float, action="append", default=None,
                    help="evaluate at this distance instead (repeatable)")

    feat = verbs.add_parser("features", help="running-skill observation tools")
    fsub = feat.add_subparsers(dest="action", required=True, parser_class=_Parser)
    fa = fsub.add_parser("assemble", parents=[common])
    fa.add_argument("input", type=Path, help="sensor CSV (timestamp, z_coord, ...)")
    fo = fsub.add_parser("fit-orientation", parents=[common])
    fo.add_argument("input", type=Path)
    fo.add_argument("--columns", nargs="+", default=None)
    fo.add_argument("--crosses", action="store_true", help="add pairwise products")
    return ap


def _emit(args, columns, kind="table", dt=None, meta=None) -> None:
    target = args.out if args.out is not None else sys.stdout
    ex.write_table(target, columns, args.format, kind, dt, meta)


def _emit_json(args, doc: dict) -> None:
    text = json.dumps(doc, indent=1) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        try:
            args.out.write_text(text)
        except OSError as exc:
            raise ex.ExportError(f"cannot write {args.out}: {exc.strerror or exc}") from exc


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def run_gait(args, params, balance):
    cmd = GaitCommand(args.vx, args.vy, args.omega)
    traj = generate_gait(cmd, params, args.steps, solver=args.solver,
                         with_joints=args.action == "joints", clamp=not args.no_clamp)
    table = {"plan": ex.plan_table, "solve": ex.solve_table, "joints": ex.joints_table}[args.action]
    _emit(args, table(traj), f"gait-{args.action}", params.dt)


def run_walk(args, params, balance):
    log = simulate_walk(GaitCommand(args.vx, args.vy, args.omega), params, args.solver,
                        args.impulse, args.balance, args.duration, args.seed, balance,
                        with_joints=not args.no_joints)
    _emit(args, ex.log_table(log), "simlog", log.dt, log.meta)
    _note(f"samples={len(log)} min_margin={log.min_margin:.4f} fallen={log.fallen}")


def run_optimize(args, params, balance):
    obj = make_problem(args.problem, args.dim, params, balance, args.distance)
    res = optimize(args.algo, obj, args.budget, args.seed, workers=args.workers)
    if args.format == "json":
        _emit_json(args, {"problem": args.problem, **res.to_dict()})
    else:
        _emit(args, {"iteration": np.arange(len(res.history)), "best_cost": np.array(res.history)})
    _note(f"{res.algo}: best_cost={res.best_cost:.6g} evals={res.evals_used}")


def run_kick(args, params, balance):
    task = SurrogateKick()
    if args.action == "train":
        model0 = PolicyModel.initial(K=args.rbfs, bandwidth_sq=args.bandwidth_sq)
        model = train_contextual(task, model0, args.iterations, args.samples, args.seed,
                                 log=TrainLog())
        _emit_json(args, model.to_dict())
        mean, _ = eval_policy(model, task, np.linspace(*CONTEXT_RANGE, 100))
        _note(f"trained: mean |achieved - desired| = {mean:.4f} m")
        return
    try:
        model = PolicyModel.load(args.model)
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot load model {args.model}: {exc}") from exc
    rng = np.random.default_rng(args.seed)
    if args.distance:
        s = np.asarray(args.distance, dtype=float)
    else:
        s = np.sort(rng.uniform(*model.context_range, args.contexts))
    mean, err = eval_policy(model, task, s)
    achieved = task.achieved(policy_mean(model, s))
    _emit(args, {"desired": s, "achieved": achieved, "error": err})
    _note(f"mean |achieved - desired| = {mean:.4f} m over {len(s)} contexts")


def run_features(args, params, balance):
    if args.action == "fit-orientation":
        X, y, names = load_orientation_dataset(args.input, args.columns)
        pred = fit_orientation_predictor(X, y, names, crosses=args.crosses)
        _emit_json(args, {"columns": list(pred.columns), "crosses": [list(c) for c in pred.crosses],
                          "weights": pred.weights.tolist(), "bias": pred.bias, "rmse": pred.rmse,
                          "rank_deficient": pred.rank_deficient})
        _note(f"rmse={pred.rmse:.3g}")
        return
    cols, _ = ex.read_table(args.input)
    n = len(cols.get("timestamp", ()))
    try:
        frames = [SensorFrame.from_row({k: v[i] for k, v in cols.items()}) for i in range(n)]
    except KeyError as exc:
        raise ValidationError(f"{args.input}: missing column {exc}") from exc
    stopped = cols.get("stopped", np.zeros(n))
    counter, rows = 0, []
    for i in range(1, n):
        counter = update_counter(counter, bool(stopped[i]), i)
        rows.append(assemble_state(frames[i], frames[i - 1], counter))
    data = np.array(rows).reshape(-1, len(STATE_LAYOUT))
    _emit(args, {name: data[:, j] for j, name in enumerate(STATE_LAYOUT)}, "features")


HANDLERS = {"gait": run_gait, "walk": run_walk, "optimize": run_optimize,
            "kick": run_kick, "features": run_features}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        try:
            params, balance = load_config(args.config)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
        HANDLERS[args.verb](args, params, balance)
    except PipelineError as exc:
        _note(f"error: {exc}")
        return 1 if isinstance(exc.cause, ValidationError) else 2
    except ValidationError as exc:
        _note(f"error: {exc}")
        return 1
    except (ArithmeticError, OSError, RuntimeError) as exc:
        _note(f"error: {exc}")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
