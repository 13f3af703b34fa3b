"""Command-line pipeline: generate, stats, featurize, split, train,
evaluate, predict, verdict, gr, verify.

Every subcommand that writes outputs also writes a resolved-config
snapshot next to them, all randomness derives from --seed, logs go to
standard error and data to files or standard output.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import learn, tomo
from .errors import (FormatError, NumericalError, PreconditionError,
                     QutritmlError, SearchError, SolverError)
from .sampler import SeedSpec
from .stateio import load_state, save_state
from .witness import DEFAULT_EPSILON, gr_decomposable, gr_eps_oew

SNAPSHOT_NAME = "run_config.txt"
TRAIN_CSV = "train.csv"
TEST_CSV = "test.csv"


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read_config(path: str) -> dict[str, str]:
    cfg: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise PreconditionError(f"cannot read config file {path}: {exc}") from exc
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{ln}: expected KEY=VALUE")
        key, val = line.split("=", 1)
        cfg[key.strip().replace("-", "_")] = val.strip()
    return cfg


def _apply_config(parser: argparse.ArgumentParser, cfg: dict[str, str]) -> None:
    """Use config values as defaults for matching options of one subparser."""
    for action in parser._actions:
        if action.dest in cfg and action.dest != "help":
            raw = cfg[action.dest]
            if action.type is not None:
                try:
                    value = action.type(raw)
                except ValueError as exc:
                    raise FormatError(
                        f"config value {action.dest}={raw!r} is invalid: {exc}"
                    ) from exc
            elif isinstance(action, argparse.BooleanOptionalAction):
                value = raw.lower() in ("1", "true", "yes", "on")
            else:
                value = raw
            parser.set_defaults(**{action.dest: value})


def _write_snapshot(args: argparse.Namespace, where: Path) -> None:
    """Resolved flag values of this run, next to its outputs."""
    skip = {"func", "config"}
    lines = [f"subcommand={args.subcommand}"]
    for key in sorted(vars(args)):
        if key in skip or key == "subcommand":
            continue
        lines.append(f"{key}={getattr(args, key)}")
    where.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _seedspec(args: argparse.Namespace) -> SeedSpec:
    return SeedSpec(args.seed, 0)


def _rows_for(in_dir: str, preferred: str) -> list:
    """Load preferred CSV from a directory, falling back to dataset.csv."""
    d = Path(in_dir)
    for name in (preferred, ds.DATASET_CSV):
        p = d / name
        if p.is_file():
            _log(f"reading rows from {p}")
            return ds.load_rows(p)
    raise PreconditionError(f"no {preferred} or {ds.DATASET_CSV} in {in_dir}")


def _cmd_generate(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reject_log: list[str] = []
    t0 = time.time()
    states, manifest = ds.generate_balanced(
        args.per_class,
        artificial_fraction=args.artificial_fraction,
        seed=_seedspec(args),
        epsilon=args.epsilon,
        draw_budget=args.draw_budget,
        artificial_budget=args.artificial_budget,
        workers=args.workers,
        reject_log=reject_log,
    )
    rows = ds.rows_from_states(states)
    ds.save_dataset(rows, manifest, out, rejections=reject_log)
    _write_snapshot(args, out / SNAPSHOT_NAME)
    dt = time.time() - t0
    _log(f"generated {len(rows)} states in {dt:.0f}s "
         f"(raw draws {manifest.raw_draws}, ppt fraction {manifest.ppt_fraction:.2e})")
    if manifest.partial:
        _log("warning: budgets exhausted before quotas were met; "
             "manifest is flagged partial")
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    _, manifest = ds.load_dataset(args.in_dir)
    sys.stdout.write(ds.manifest_to_text(manifest))
    return 0


def _cmd_featurize(args: argparse.Namespace) -> int:
    rows, manifest = ds.load_dataset(args.in_dir)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.expand:
        rows = [ds.FeatureRow(features=ds.expand_features(r.features).ravel(),
                              label=r.label, gr=r.gr) for r in rows]
    ds.save_dataset(rows, manifest, out)
    _write_snapshot(args, out / SNAPSHOT_NAME)
    _log(f"wrote {len(rows)} rows of width "
         f"{rows[0].features.size if rows else 0} to {out / ds.DATASET_CSV}")
    return 0


def _cmd_split(args: argparse.Namespace) -> int:
    if not 0.0 < args.train < 1.0:
        raise PreconditionError("--train must lie strictly between 0 and 1")
    rows = _rows_for(args.in_dir, ds.DATASET_CSV)
    train, test = ds.split(rows, args.train, _seedspec(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds.save_rows(train, out / TRAIN_CSV)
    ds.save_rows(test, out / TEST_CSV)
    _write_snapshot(args, out / SNAPSHOT_NAME)
    _log(f"split {len(rows)} rows into {len(train)} train / {len(test)} test")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    rows = _rows_for(args.in_dir, TRAIN_CSV)
    t0 = time.time()
    model = learn.auto_search(args.task, rows, args.budget, seed=_seedspec(args))
    learn.save_model(model, args.model_out)
    _write_snapshot(args, Path(str(args.model_out) + ".config.txt"))
    rank = "none" if model.components is None else str(model.components.shape[0])
    _log(f"searched {args.budget} candidates in {time.time() - t0:.0f}s; "
         f"best: {model.kind} rank={rank} cv_score={model.cv_score:.6f}")
    _log(f"model written to {args.model_out}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    model = learn.load_model(args.model)
    rows = _rows_for(args.in_dir, TEST_CSV)
    report = learn.evaluate(model, rows)
    if args.report:
        path = Path(args.report)
        if path.suffix == ".csv":
            path.write_text(learn.report_csv(report), encoding="utf-8")
        else:
            path.write_text(learn.report_text(report), encoding="utf-8")
        _write_snapshot(args, Path(str(path) + ".config.txt"))
        _log(f"report written to {path}")
    if args.json:
        json.dump(learn.report_json(report), sys.stdout, sort_keys=True)
        sys.stdout.write("\n")
    elif not args.report:
        sys.stdout.write(learn.report_text(report))
    return 0


def _load_model_tomogram(model_path: str, state_path: str) -> tuple:
    model = learn.load_model(model_path)
    rho = load_state(state_path)
    return model, tomo.encode(rho)


def _cmd_predict(args: argparse.Namespace) -> int:
    if (args.state is None) == (args.csv is None):
        raise PreconditionError("give exactly one of --state or --csv")
    model = learn.load_model(args.model)
    if args.state:
        out = learn.predict_tomogram(model, tomo.encode(load_state(args.state)))
        print(out if isinstance(out, str) else f"{out:.17g}")
        return 0
    rows = ds.load_rows(args.csv)
    for value in learn.predict(model, rows):
        print(value if isinstance(value, str) else f"{value:.17g}")
    return 0


def _cmd_verdict(args: argparse.Namespace) -> int:
    model, c = _load_model_tomogram(args.model, args.state)
    if model.task != learn.TASK_REGRESS:
        raise PreconditionError(
            f"verdict needs a regression model, got task={model.task}")
    mae = args.mae
    if mae is None:
        if model.cv_score is None:
            raise PreconditionError(
                "model carries no cross-validation MAE; pass --mae")
        mae = -model.cv_score
    gr_est = learn.predict_tomogram(model, c)
    verdict, threshold = learn.entanglement_verdict(gr_est, mae)
    print(f"gr_estimate={gr_est:.6f}")
    print(f"threshold={threshold:.6f}")
    print(f"verdict={verdict}")
    return 0


def _cmd_gr(args: argparse.Namespace) -> int:
    rho = load_state(args.state)
    if args.method == "eps-oew":
        res = gr_eps_oew(rho, epsilon=args.epsilon, seed=_seedspec(args))
    else:
        res = gr_decomposable(rho)
    print(f"gr={res.gr:.12g} status={res.report.status} method={args.method}")
    for attr, path in (("edge", args.edge_out), ("sigma", args.sigma_out),
                       ("witness", args.witness_out)):
        if path:
            save_state(path, getattr(res, attr))
            _log(f"wrote {attr} to {path}")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    rows, manifest = ds.load_dataset(args.in_dir)
    problems = ds.verify_rows(rows, manifest.epsilon)
    counts: dict[str, int] = {}
    for r in rows:
        counts[r.label] = counts.get(r.label, 0) + 1
    for label, n in manifest.counts.items():
        if counts.get(label, 0) != n:
            problems.append(
                f"manifest count mismatch for {label}: "
                f"manifest says {n}, file has {counts.get(label, 0)}")
    if problems:
        for p in problems:
            _log(f"verify: {p}")
        _log(f"verify failed with {len(problems)} problem(s)")
        return 1
    _log(f"verified {len(rows)} rows: all label/PPT/GR invariants hold")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qutritml",
        description="Two-qutrit entanglement dataset generation and learning")
    parser.add_argument("--config", help="KEY=VALUE defaults file")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("generate", help="generate a balanced labeled dataset")
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--artificial-fraction", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--draw-budget", type=int, default=None)
    p.add_argument("--artificial-budget", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("stats", help="print the manifest of a dataset")
    p.add_argument("--in", dest="in_dir", required=True)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("featurize", help="expand tomogram rows to 3400 features")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--expand", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=_cmd_featurize)

    p = sub.add_parser("split", help="stratified train/test split")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--train", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("train", help="search pipelines and fit the best")
    p.add_argument("--task", choices=list(learn.TASKS), required=True)
    p.add_argument("--budget", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--model-out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="score a model on labeled rows")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("predict", help="predict for a state or a CSV of rows")
    p.add_argument("--model", required=True)
    p.add_argument("--state", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("verdict", help="conservative entanglement call")
    p.add_argument("--model", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--mae", type=float, default=None)
    p.set_defaults(func=_cmd_verdict)

    p = sub.add_parser("gr", help="generalized robustness of one state")
    p.add_argument("--state", required=True)
    p.add_argument("--method", choices=["eps-oew", "decomposable"],
                   default="eps-oew")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--edge-out", default=None)
    p.add_argument("--sigma-out", default=None)
    p.add_argument("--witness-out", default=None)
    p.set_defaults(func=_cmd_gr)

    p = sub.add_parser("verify", help="revalidate a dataset's invariants")
    p.add_argument("--in", dest="in_dir", required=True)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    try:
        if known.config:
            cfg = _read_config(known.config)
            for action in parser._subparsers._group_actions:
                for sp in action.choices.values():
                    _apply_config(sp, cfg)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return 0 if exc.code in (0, None) else 1
        return args.func(args)
    except FileNotFoundError as exc:
        _log(f"error: file not found: {exc}")
        return 1
    except (SolverError, NumericalError, SearchError) as exc:
        _log(f"numerical failure: {exc}")
        return 2
    except QutritmlError as exc:
        _log(f"error: {exc}")
        return 1
    except OSError as exc:
        _log(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
