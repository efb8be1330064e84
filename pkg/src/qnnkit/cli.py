"""Command-line front end.

Five subcommands: ``check`` (junction feasibility, no simulation),
``train`` / ``eval`` (experiment runs with CSV + checkpoint output),
``verify`` (factorized-vs-circuit deviation report) and ``sweep``
(accuracy vs v-block repetition count).

Every run writes a ``manifest.json`` (full config, seed, package
version, CSV schema version) next to its outputs; re-running with the
same manifest reproduces the metrics bit-identically. Exit codes:
0 success / feasible, 1 infeasible or failed run, 2 bad usage or
unparseable input files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .arch import ArchitectureParseError, ArchitectureSpec, load_architecture
from .data import make_xor_dataset, mnist_task
from .model import (
    TrainConfig,
    accuracy,
    circuit_inference,
    forward,
    init_parameters,
    load_checkpoint,
    path6_demo,
    predict_probs,
    save_checkpoint,
    train,
)
from .rules import validate_architecture
from .statevec import ResourceLimitError

CSV_SCHEMA_VERSION = 1

RESULTS_COLUMNS = [
    "schema",
    "architecture",
    "dataset",
    "classes",
    "resolution",
    "seed",
    "epochs",
    "train_accuracy",
    "test_accuracy",
    "final_loss",
]


def _write_manifest(out_dir: Path, command: str, config: dict) -> None:
    plain = {
        k: v
        for k, v in config.items()
        if isinstance(v, (str, int, float, bool, dict, list, type(None)))
    }
    manifest = {
        "command": command,
        "package_version": __version__,
        "csv_schema": CSV_SCHEMA_VERSION,
        "config": plain,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True))


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def _load_arch(path: str) -> ArchitectureSpec:
    return load_architecture(path)


def _dataset(args):
    """Resolve the dataset selection into (train, test, label)."""
    if args.dataset == "xor":
        return (
            make_xor_dataset(240, seed=args.seed),
            make_xor_dataset(120, seed=args.seed + 1),
            "xor",
        )
    classes = [int(c) for c in args.classes.split(",")]
    train_ds, test_ds = mnist_task(classes, args.resolution, args.data_dir)
    return train_ds, test_ds, f"mnist-{len(classes)}"


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        lr=args.lr,
        momentum=args.momentum,
        temperature=args.temperature,
        lr_decay=args.lr_decay,
        keep_best=args.keep_best,
        seed=args.seed,
        verbose=args.verbose,
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    try:
        arch = _load_arch(args.arch)
    except ArchitectureParseError as exc:
        print(f"error: {args.arch}: {exc}", file=sys.stderr)
        return 2
    report = validate_architecture(arch)
    print(report.render_text())
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "check_report.json").write_text(json.dumps(report.to_dict(), indent=1))
    _write_manifest(out_dir, "check", {"arch": str(args.arch), "seed": args.seed})
    return 0 if report.passed else 1


def _run_training(args):
    arch = _load_arch(args.arch)
    if args.r is not None:
        for layer in arch.layers:
            if layer.kind == "v":
                layer.repeat = args.r
    report = validate_architecture(arch)
    if not report.passed:
        print(report.render_text(), file=sys.stderr)
        print("error: infeasible architecture, refusing to train", file=sys.stderr)
        return None
    train_ds, test_ds, label = _dataset(args)
    config = _train_config(args)
    params, metrics = train(
        arch,
        init_parameters(arch, args.seed),
        train_ds.images,
        train_ds.labels,
        config,
        test_ds.images,
        test_ds.labels,
    )
    return arch, params, metrics, train_ds, test_ds, label, config


def cmd_train(args) -> int:
    try:
        result = _run_training(args)
    except ArchitectureParseError as exc:
        print(f"error: {args.arch}: {exc}", file=sys.stderr)
        return 2
    if result is None:
        return 1
    arch, params, metrics, train_ds, test_ds, label, config = result

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out_dir / "metrics.csv",
        ["epoch", "train_loss", "train_accuracy", "test_accuracy"],
        [{k: row.get(k, "") for k in ("epoch", "train_loss", "train_accuracy", "test_accuracy")} for row in metrics],
    )
    test_acc = accuracy(arch, params, test_ds.images, test_ds.labels)
    row = {
        "schema": CSV_SCHEMA_VERSION,
        "architecture": arch.name,
        "dataset": label,
        "classes": args.classes if args.dataset == "mnist" else "0,1",
        "resolution": args.resolution if args.dataset == "mnist" else "",
        "seed": args.seed,
        "epochs": args.epochs,
        "train_accuracy": metrics[-1]["train_accuracy"],
        "test_accuracy": test_acc,
        "final_loss": metrics[-1]["train_loss"],
    }
    _write_csv(out_dir / "results.csv", RESULTS_COLUMNS, [row])
    save_checkpoint(out_dir / "checkpoint.json", arch, params)
    _write_manifest(out_dir, "train", {**vars(args), "train_config": config.to_dict()})
    print(
        f"{row['architecture']},{row['dataset']},{row['resolution']},"
        f"test_accuracy={test_acc:.4f}"
    )
    return 0


def cmd_eval(args) -> int:
    arch, params = load_checkpoint(args.checkpoint)
    train_ds, test_ds, label = _dataset(args)
    test_acc = accuracy(arch, params, test_ds.images, test_ds.labels)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    row = {
        "schema": CSV_SCHEMA_VERSION,
        "architecture": arch.name,
        "dataset": label,
        "classes": args.classes if args.dataset == "mnist" else "0,1",
        "resolution": args.resolution if args.dataset == "mnist" else "",
        "seed": args.seed,
        "epochs": "",
        "train_accuracy": "",
        "test_accuracy": test_acc,
        "final_loss": "",
    }
    _write_csv(out_dir / "results.csv", RESULTS_COLUMNS, [row])
    _write_manifest(out_dir, "eval", vars(args))
    print(f"{arch.name},{label},test_accuracy={test_acc:.4f}")
    return 0


def cmd_verify(args) -> int:
    try:
        arch = _load_arch(args.arch)
    except ArchitectureParseError as exc:
        print(f"error: {args.arch}: {exc}", file=sys.stderr)
        return 2
    if args.checkpoint:
        arch, params = load_checkpoint(args.checkpoint)
    else:
        params = init_parameters(arch, args.seed)

    rng = np.random.default_rng(args.seed)
    rows = []
    worst = 0.0
    agree = 0
    try:
        for i in range(args.samples):
            x = rng.uniform(0.01, 1.0, size=arch.input_dim)
            factorized = forward(arch, params, x).probs[0]
            exact = circuit_inference(arch, params, x, max_qubits=args.max_qubits)
            deviation = float(np.max(np.abs(factorized - exact)))
            match = int(np.argmax(factorized) == np.argmax(exact))
            rows.append(
                {"sample": i, "max_abs_deviation": deviation, "argmax_agree": match}
            )
            worst = max(worst, deviation)
            agree += match
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out_dir / "verify.csv", ["sample", "max_abs_deviation", "argmax_agree"], rows
    )
    _write_manifest(out_dir, "verify", vars(args))
    print(
        f"verify: {args.samples} samples, max deviation {worst:.3e}, "
        f"argmax agreement {agree}/{args.samples}"
    )
    if args.demo_path6:
        demo = path6_demo()
        (out_dir / "path6_demo.json").write_text(json.dumps(demo, indent=1))
        print(
            "path-6 counterexample: factorized "
            f"{demo['factorized']:.3f} vs exact {demo['exact']:.3f} "
            f"(deviation {demo['deviation']:.3f})"
        )
    return 0


def cmd_sweep(args) -> int:
    if args.r_min > args.r_max:
        print("error: --r-min must be <= --r-max", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    status = 0
    for r in range(args.r_min, args.r_max + 1):
        args.r = r
        try:
            result = _run_training(args)
        except ArchitectureParseError as exc:
            print(f"error: {args.arch}: {exc}", file=sys.stderr)
            return 2
        except Exception as exc:  # abort but keep partial results
            print(f"error: run r={r} failed: {exc}", file=sys.stderr)
            status = 1
            break
        if result is None:
            status = 1
            break
        arch, params, metrics, train_ds, test_ds, label, config = result
        test_acc = accuracy(arch, params, test_ds.images, test_ds.labels)
        rows.append(
            {
                "r": r,
                "train_accuracy": metrics[-1]["train_accuracy"],
                "test_accuracy": test_acc,
                "epochs": args.epochs,
                "seed": args.seed,
            }
        )
        print(f"r={r}: test_accuracy={test_acc:.4f}")
    _write_csv(
        out_dir / "sweep.csv",
        ["r", "train_accuracy", "test_accuracy", "epochs", "seed"],
        rows,
    )
    _write_manifest(out_dir, "sweep", vars(args))
    return status


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="runs", help="output directory")


def _add_dataset(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", choices=["mnist", "xor"], default="mnist")
    p.add_argument("--classes", default="3,6", help="comma-separated digits")
    p.add_argument("--resolution", type=int, default=4, choices=[4, 8, 16])
    p.add_argument("--data-dir", default=None, help="MNIST cache directory")


def _add_training(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--temperature", type=float, default=0.25)
    p.add_argument("--lr-decay", type=float, default=1.0)
    p.add_argument("--keep-best", action="store_true")
    p.add_argument("--r", type=int, default=None, help="override v-layer repeats")
    p.add_argument("--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnnkit",
        description="mixed quantum neural networks: feasibility checks, "
        "training, circuit verification",
    )
    parser.add_argument("--version", action="version", version=f"qnnkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate an architecture's junctions")
    p.add_argument("--arch", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("train", help="train an architecture on a dataset")
    p.add_argument("--arch", required=True)
    _add_dataset(p)
    _add_training(p)
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--checkpoint", required=True)
    _add_dataset(p)
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="compare factorized model with the full circuit")
    p.add_argument("--arch", required=True)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--max-qubits", type=int, default=24)
    p.add_argument("--demo-path6", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="train across a range of v-block repeats")
    p.add_argument("--arch", required=True)
    p.add_argument("--r-min", type=int, default=1)
    p.add_argument("--r-max", type=int, default=3)
    _add_dataset(p)
    _add_training(p)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
