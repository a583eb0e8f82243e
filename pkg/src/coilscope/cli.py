"""Command-line front-end: generate, train, eval, predict.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
All randomness flows from --seed (default 0, never entropy).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import data, metrics, model, pgm, training

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


class CliError(Exception):
    pass


def parse_freq(text: str) -> float:
    """Parse a frequency with optional k/M suffix: '85k' -> 85e3, '6.78M' -> 6.78e6."""
    text = text.strip()
    mult = 1.0
    if text and text[-1] in "kK":
        mult, text = 1e3, text[:-1]
    elif text and text[-1] == "M":
        mult, text = 1e6, text[:-1]
    try:
        value = float(text) * mult
    except ValueError:
        raise CliError(f"cannot parse frequency {text!r}")
    if not value > 0.0:
        raise CliError(f"frequency must be positive, got {value}")
    return value


def _worker_cap() -> int:
    raw = os.environ.get("COILSCOPE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def cmd_generate(args) -> int:
    freqs = [parse_freq(f) for f in args.freqs.split(",")]
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {out_dir}: {exc}")
    samples, manifest, images = data.generate_dataset(
        num_coils=args.coils, freqs_hz=freqs, seed=args.seed)
    manifest_path = data.write_dataset(out_dir, samples, manifest, images)
    ls = [s.l_label_h for s in samples]
    qs = [s.q_label for s in samples]
    print(f"generated {args.coils} coils x {len(freqs)} frequencies = "
          f"{len(samples)} samples")
    print(f"L range: [{min(ls):.4g}, {max(ls):.4g}] H")
    print(f"Q range: [{min(qs):.4g}, {max(qs):.4g}]")
    print(f"manifest: {manifest_path}")
    return EXIT_OK


def cmd_train(args) -> int:
    try:
        samples = data.load_dataset(args.manifest)
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"invalid manifest {args.manifest}: {exc}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = training.TrainConfig(learning_rate=args.lr, epochs=args.epochs,
                               batch_size=args.batch_size, seed=args.seed,
                               shuffle=not args.no_shuffle)
    train_set, val_set = training.split_by_coil(samples, args.train_coils, args.seed)
    net = model.init(args.seed)
    net, report = training.train(net, train_set, val_set, cfg)
    ckpt_path = out_dir / "checkpoint.cnet"
    model.save(net, ckpt_path)
    report.write_csv(out_dir / "loss.csv")
    record = {
        "config": {"learning_rate": cfg.learning_rate, "epochs": cfg.epochs,
                   "batch_size": cfg.batch_size, "seed": cfg.seed,
                   "shuffle": cfg.shuffle, "train_coils": args.train_coils,
                   "worker_cap": _worker_cap()},
        "manifest": str(args.manifest),
        "manifest_sha256": _file_sha256(args.manifest),
        "train_coil_ids": sorted({s.coil_id for s in train_set}),
        "val_coil_ids": sorted({s.coil_id for s in val_set}),
        "final_train_loss": report.train_loss[-1],
        "final_val_loss": report.val_loss[-1] if report.val_loss else None,
    }
    (out_dir / "run.json").write_text(json.dumps(record, indent=2, sort_keys=True))
    print(f"trained {cfg.epochs} epochs; final train loss "
          f"{report.train_loss[-1]:.6g}")
    print(f"checkpoint: {ckpt_path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        samples = data.load_dataset(args.manifest)
        net = model.load(args.checkpoint)
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"cannot load inputs: {exc}")
    report = metrics.evaluate(net, samples)
    print(report.to_table())
    if args.out:
        Path(args.out).write_text(report.to_json())
        print(f"report: {args.out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    freq = parse_freq(args.freq)
    try:
        net = model.load(args.checkpoint)
        img = pgm.read_pgm(args.image)
        img = pgm.resize_to_64(img)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot load inputs: {exc}")
    pred = model.predict(net, img, freq)
    print(f"L = {_engineering(pred.inductance_h)}H, Q = {pred.quality:.4g}")
    if args.label:
        try:
            l_lab, q_lab = (float(v) for v in args.label.split(","))
        except ValueError:
            raise CliError(f"--label must be 'L_henries,Q', got {args.label!r}")
        if l_lab <= 0 or q_lab <= 0:
            raise CliError("--label values must be positive")
        rel_l = abs(pred.inductance_h - l_lab) / l_lab
        rel_q = abs(pred.quality - q_lab) / q_lab
        print(f"relative error: L {100 * rel_l:.2f}%, Q {100 * rel_q:.2f}%")
    return EXIT_OK


def _engineering(value: float) -> str:
    for exp, prefix in ((-3, "m"), (-6, "u"), (-9, "n"), (-12, "p")):
        if value >= 10.0 ** exp:
            return f"{value / 10.0 ** exp:.4g} {prefix}"
    return f"{value:.4g} "


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coilscope",
        description="Coil L/Q identification: synthetic data, training, evaluation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic coil dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--coils", type=int, default=data.DEFAULT_NUM_COILS)
    p.add_argument("--freqs", default="85k,200k,1M,6.78M,13.56M",
                   help="comma-separated frequencies (k/M suffixes allowed)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train a model on a dataset manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--train-coils", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=training.TrainConfig.epochs)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-shuffle", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="predict L and Q for one image")
    p.add_argument("--image", required=True, help="binary PGM, at least 64x64")
    p.add_argument("--freq", required=True, help="frequency in Hz (k/M suffixes)")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--label", help="optional 'L_henries,Q' ground truth")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except training.TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
