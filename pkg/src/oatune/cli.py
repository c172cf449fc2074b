"""Command-line entry point: design, run, analyze, train-best, predict.

Every command resolves its settings into a manifest so a run can be
reproduced exactly. Exit codes: 0 success, 1 internal failure, 2 usage or
input error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    load_responses,
    main_effects,
    main_effects_to_csv,
    per_component_metrics,
    save_responses,
    select_optimum,
)
from .design import (
    DesignError,
    Factor,
    FactorSpace,
    HyperConfig,
    build_array,
    build_l27,
    decode_run,
    design_to_csv,
    paper_space,
    verify_strength2,
)
from .mechanics import MechanicsError, engineering_constants
from .network import forward, load_model, save_model
from .pipeline import (
    ALL_COLUMNS,
    INPUT_COLUMNS,
    N_INPUTS,
    OUTPUT_COLUMNS,
    TWO_PI,
    SplitSpec,
    aspect_ratio,
    generate_synthetic,
    load_dataset,
)
from .training import (
    TrainSettings,
    prepare_splits,
    run_design,
    run_log_record,
    run_seed,
    save_loss_history,
    train_model,
)

PRESETS = ("paper",)


class InputError(ValueError):
    """Bad command-line input (maps to exit code 2)."""


def _resolve_seed(value) -> int:
    if value is not None:
        return value
    env = os.environ.get("OATUNE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"OATUNE_SEED={env!r} is not an integer") from None
    return 0


def _load_factor_space(args) -> FactorSpace:
    if getattr(args, "factors", None):
        path = Path(args.factors)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read factor config {path}: {exc}") from exc
        entries = doc["factors"] if isinstance(doc, dict) else doc
        try:
            return FactorSpace(
                tuple(Factor(e["name"], tuple(e["levels"])) for e in entries)
            )
        except (KeyError, TypeError) as exc:
            raise InputError(
                f"{path}: factor entries need 'name' and 3 'levels'"
            ) from exc
    if args.preset != "paper":
        raise InputError(f"unknown preset {args.preset!r}, available: {PRESETS}")
    return paper_space()


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_input_dataset(args):
    if args.data is not None:
        return load_dataset(args.data, strict=args.strict, omega=args.omega)
    if args.synthetic is not None:
        if args.synthetic < 1:
            raise InputError("--synthetic requires a positive sample count")
        return generate_synthetic(args.synthetic, seed=args.seed, omega=args.omega)
    raise InputError("provide a dataset with --data PATH or --synthetic N")


def _split_spec(args) -> SplitSpec:
    try:
        ratios = tuple(float(r) for r in args.split.split(","))
        if len(ratios) != 3:
            raise ValueError
    except ValueError:
        raise InputError(
            f"--split expects three comma-separated ratios, got {args.split!r}"
        ) from None
    return SplitSpec(ratios=ratios, seed=args.seed)


def _train_settings(args) -> TrainSettings:
    return TrainSettings(
        max_epochs=args.max_epochs,
        patience=args.patience,
        batch_size=args.batch_size,
        base_seed=args.seed,
        criterion=args.criterion,
    )


def _manifest(args, command: str, extra: dict) -> dict:
    doc = {
        "tool": "oatune",
        "version": __version__,
        "command": command,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "seed": args.seed,
    }
    doc.update(extra)
    return doc


def _write_json(doc: dict, path: Path) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _space_manifest(space: FactorSpace) -> list[dict]:
    return [{"name": f.name, "levels": list(f.levels)} for f in space.factors]


# ---------------------------------------------------------------- commands


def cmd_design(args) -> int:
    space = _load_factor_space(args)
    array = build_l27(space) if len(space) == 5 else build_array(space)
    report = verify_strength2(array)
    if not report.ok:
        print(f"internal error: generated array failed balance check", file=sys.stderr)
        return 1
    out = Path(args.out) if args.out else _out_dir(args) / "design.csv"
    design_to_csv(array, space, out)
    print(
        f"{array.n_runs} of {space.full_factorial_size} full-factorial cases",
        file=sys.stderr,
    )
    print(f"wrote {out}")
    return 0


def cmd_run(args) -> int:
    args.seed = _resolve_seed(args.seed)
    space = _load_factor_space(args)
    array = build_l27(space) if len(space) == 5 else build_array(space)
    dataset = _load_input_dataset(args)
    split = _split_spec(args)
    settings = _train_settings(args)
    data, _scaler = prepare_splits(dataset, split, args.scaler_fit)

    out = _out_dir(args)
    results, responses = run_design(array, space, data, settings, workers=args.workers)

    save_responses(responses, out / "responses.csv")
    with open(out / "run_log.jsonl", "w", encoding="utf-8") as fh:
        for i, result in enumerate(results):
            fh.write(json.dumps(run_log_record(i, result)) + "\n")
    losses_dir = out / "losses"
    losses_dir.mkdir(exist_ok=True)
    for i, result in enumerate(results):
        save_loss_history(result, losses_dir / f"run_{i + 1:02d}.csv")
    manifest = _manifest(
        args,
        "run",
        {
            "dataset": {"provenance": dataset.provenance, "rows": len(dataset)},
            "split": {"ratios": list(split.ratios), "seed": split.seed},
            "scaler_fit": args.scaler_fit,
            "omega": args.omega,
            "settings": {
                "max_epochs": settings.max_epochs,
                "patience": settings.patience,
                "batch_size": settings.batch_size,
                "criterion": settings.criterion,
            },
            "workers": args.workers,
            "factors": _space_manifest(space),
        },
    )
    _write_json(manifest, out / "manifest.json")

    n_failed = sum(r.failed for r in results)
    print(f"completed {len(results)} runs ({n_failed} flagged failed)")
    print(f"responses written to {out / 'responses.csv'}")
    return 0


def cmd_analyze(args) -> int:
    space = _load_factor_space(args)
    array = build_l27(space) if len(space) == 5 else build_array(space)
    responses = load_responses(args.responses, expected_runs=array.n_runs)
    table = main_effects(array, responses, with_sn=args.sn)
    optimum = select_optimum(table, space)

    out = _out_dir(args)
    main_effects_to_csv(table, space, out / "main_effects.csv")
    _write_json(
        {
            "factors": optimum,
            "level_indices": [int(l) for l in table.selected_levels],
            "level_means": [list(map(float, row)) for row in table.level_means],
            "responses_file": str(args.responses),
        },
        out / "optimum.json",
    )
    if not args.no_plots:
        from .plots import save_main_effects_plot

        save_main_effects_plot(table, space, out / "main_effects.svg")
    print("selected optimum: " + ", ".join(f"{k}={v}" for k, v in optimum.items()))
    return 0


def cmd_train_best(args) -> int:
    args.seed = _resolve_seed(args.seed)
    try:
        optimum_doc = json.loads(Path(args.optimum).read_text(encoding="utf-8"))
        config = HyperConfig.from_mapping(optimum_doc["factors"])
    except (OSError, json.JSONDecodeError, KeyError, DesignError) as exc:
        raise InputError(f"cannot read optimum config {args.optimum}: {exc}") from exc
    dataset = _load_input_dataset(args)
    split = _split_spec(args)
    settings = _train_settings(args)
    data, scaler = prepare_splits(dataset, split, args.scaler_fit)

    result = train_model(config, data, settings, seed=run_seed(args.seed, 0))
    if result.failed:
        print("training diverged (non-finite loss); no model written", file=sys.stderr)
        return 1

    out = _out_dir(args)
    save_model(result.model, out / "model.json", scaler=scaler)
    save_loss_history(result, out / "loss_history.csv")

    with open(out / "metrics_pooled.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["split", "r2", "mae", "mse", "rmse"])
        for split_name in ("train", "val", "test"):
            m = result.metrics[split_name]
            writer.writerow([split_name, m.r2, m.mae, m.mse, m.rmse])

    split_arrays = {
        "train": (data.y_train, forward(result.model, data.x_train)),
        "val": (data.y_val, forward(result.model, data.x_val)),
        "test": (data.y_test, forward(result.model, data.x_test)),
    }
    with open(out / "metrics_components.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["component", "split", "r2", "mae", "mse", "rmse"])
        for j, name in enumerate(OUTPUT_COLUMNS):
            for split_name, (y, y_pred) in split_arrays.items():
                m = per_component_metrics(y, y_pred, j)
                writer.writerow([name, split_name, m.r2, m.mae, m.mse, m.rmse])

    if not args.no_plots:
        from .plots import save_loss_plot, save_scatter_plot

        save_loss_plot(result.train_losses, result.val_losses, out / "loss_convergence.svg")
        y_test, y_test_pred = split_arrays["test"]
        save_scatter_plot(
            y_test, y_test_pred, out / "scatter_test.svg", "Test set (normalized)"
        )

    manifest = _manifest(
        args,
        "train-best",
        {
            "config": config.as_dict(),
            "dataset": {"provenance": dataset.provenance, "rows": len(dataset)},
            "split": {"ratios": list(split.ratios), "seed": split.seed},
            "scaler_fit": args.scaler_fit,
            "omega": args.omega,
            "settings": {
                "max_epochs": settings.max_epochs,
                "patience": settings.patience,
                "batch_size": settings.batch_size,
                "criterion": settings.criterion,
            },
            "stopped_epoch": result.stopped_epoch,
            "best_epoch": result.best_epoch,
        },
    )
    _write_json(manifest, out / "manifest.json")

    m = result.metrics["test"]
    print(
        f"trained {config.as_dict()} | stopped epoch {result.stopped_epoch}, "
        f"best epoch {result.best_epoch} | test R2 {m.r2:.3f}%"
    )
    print(f"model written to {out / 'model.json'}")
    return 0


def _read_prediction_inputs(path) -> np.ndarray:
    """Read the 12 input columns; accepts l_f (fiber length) in place of
    lambda_f and converts through the aspect ratio."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InputError(f"{path}: empty file")
        header = [h.strip() for h in header]
        names = set(header)
        uses_length = "l_f" in names and "lambda_f" not in names
        expected = set(INPUT_COLUMNS)
        if uses_length:
            expected = (expected - {"lambda_f"}) | {"l_f"}
        missing = sorted(expected - names)
        extra = sorted(names - expected)
        if missing or extra:
            raise InputError(
                f"{path}: input schema mismatch "
                f"(missing: {missing or 'none'}, unexpected: {extra or 'none'}); "
                f"expected columns: {','.join(INPUT_COLUMNS)}"
            )
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                rec_map = {h: float(v) for h, v in zip(header, rec)}
            except ValueError:
                raise InputError(f"{path}:{lineno}: unparsable cell") from None
            if uses_length:
                rec_map["lambda_f"] = aspect_ratio(rec_map["l_f"], rec_map["d_f"])
            rows.append([rec_map[c] for c in INPUT_COLUMNS])
    if not rows:
        raise InputError(f"{path}: no input rows")
    return np.array(rows)


def cmd_predict(args) -> int:
    model, scaler = load_model(args.model)
    if scaler is None:
        raise InputError(f"{args.model}: model file carries no scaler; cannot denormalize")
    if scaler.n_columns != len(ALL_COLUMNS):
        raise InputError(
            f"{args.model}: scaler covers {scaler.n_columns} columns, expected {len(ALL_COLUMNS)}"
        )
    x = _read_prediction_inputs(args.inputs)
    x_norm = scaler.slice(0, N_INPUTS).transform(x)
    y_norm = forward(model, x_norm)
    y = scaler.slice(N_INPUTS, len(ALL_COLUMNS)).inverse_transform(y_norm)

    out = Path(args.out) if args.out else Path("predictions.csv")
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(ALL_COLUMNS) + ["E11", "E22", "E33"])
        for xi, yi in zip(x, y):
            try:
                e11, e22, e33 = engineering_constants(yi)
            except MechanicsError:
                e11 = e22 = e33 = float("nan")  # prediction not SPD; flagged as NaN
            writer.writerow(list(xi) + list(yi) + [e11, e22, e33])
    print(f"wrote {out} ({len(x)} rows)")
    return 0


# ---------------------------------------------------------------- parser


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None,
                        help="base seed (default: $OATUNE_SEED or 0)")
    parser.add_argument("--out-dir", default=".", help="output directory")
    parser.add_argument("--preset", default="paper", help="factor-space preset")
    parser.add_argument("--factors", default=None,
                        help="JSON factor config (overrides --preset)")


def _add_dataset(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", default=None, help="dataset CSV (33 columns)")
    parser.add_argument("--synthetic", type=int, default=None,
                        help="generate a synthetic dataset of N samples instead")
    parser.add_argument("--strict", action="store_true",
                        help="validate every loaded row against the input bounds")
    parser.add_argument("--omega", type=float, default=TWO_PI,
                        help="upper bound of the rotation angles (default 2*pi)")
    parser.add_argument("--split", default="0.8,0.15,0.05",
                        help="train,val,test ratios")
    parser.add_argument("--scaler-fit", choices=("full", "train"), default="full",
                        help="fit normalization on the full data or train split only")


def _add_training(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-epochs", type=int, default=5000)
    parser.add_argument("--patience", type=int, default=200)
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--criterion", choices=("train-r2", "val-r2"),
                        default="train-r2", help="response criterion")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oatune",
        description="Orthogonal-array (Taguchi) hyperparameter tuning for MLP regressors",
    )
    parser.add_argument("--version", action="version", version=f"oatune {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="write the decoded orthogonal-array design")
    _add_common(p)
    p.add_argument("--out", default=None, help="design CSV path (default <out-dir>/design.csv)")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("run", help="train every design run and record responses")
    _add_common(p)
    _add_dataset(p)
    _add_training(p)
    p.add_argument("--workers", type=int, default=1, help="concurrent training processes")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="main-effects analysis of a responses file")
    _add_common(p)
    p.add_argument("--responses", required=True, help="responses CSV (run,response)")
    p.add_argument("--sn", action="store_true",
                   help="add larger-is-better S/N ratios to the report")
    p.add_argument("--no-plots", action="store_true", help="skip the SVG figure")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("train-best", help="train the selected optimum and write the model")
    _add_common(p)
    _add_dataset(p)
    _add_training(p)
    p.add_argument("--optimum", required=True, help="optimum JSON from analyze")
    p.add_argument("--no-plots", action="store_true", help="skip the SVG figures")
    p.set_defaults(func=cmd_train_best)

    p = sub.add_parser("predict", help="predict stiffness and engineering constants")
    p.add_argument("--model", required=True, help="model JSON from train-best")
    p.add_argument("--inputs", required=True, help="CSV with the 12 input columns")
    p.add_argument("--out", default=None, help="predictions CSV (default predictions.csv)")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if hasattr(args, "seed"):
        try:
            args.seed = _resolve_seed(args.seed)
        except InputError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        # covers schema/parse/validation/design/input errors
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - internal failure path
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
