"""Command-line entry point.

Subcommands: transform, synth, train, eval, louo, report.  Every option can
also come from a key=value config file passed with --config; explicit flags
win over the file.  FLOWHAR_OUTPUT_DIR overrides any output directory
option.  Exit codes: 0 success, 1 configuration error, 2 data error, 3
runtime failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import dataset as ds
from .attitude import MahonyParams
from .errors import ConfigError, DataError, FlowError
from .globalview import mc_transform
from .harness import ExperimentConfig, MODES, emit_report, load_summary, run_louo
from .metrics import accuracy, confusion, weighted_f1
from .model import load_checkpoint, save_checkpoint
from .synth import SynthSpec, synth_generate
from .trainer import TrainConfig
from .views import GRANULARITIES


def _read_config_file(path):
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"config line without '=': {line!r}")
            key, val = (p.strip() for p in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def _apply_config_defaults(parser, argv):
    """Pre-scan argv for --config and feed its values to the parser.

    Options live on the subcommand parsers, so the defaults are applied to
    the subparser named by the first positional argument as well.
    """
    if "--config" not in argv:
        return
    path = argv[argv.index("--config") + 1]
    raw = _read_config_file(path)
    targets = [parser]
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for name, sub in action.choices.items():
                if argv and argv[0] == name:
                    targets.append(sub)
    for target in targets:
        defaults = {}
        for action in target._actions:
            if action.dest in raw:
                value = raw[action.dest]
                if action.type is not None:
                    value = action.type(value)
                elif isinstance(action.default, bool):
                    value = value.lower() in ("1", "true", "yes")
                defaults[action.dest] = value
        target.set_defaults(**defaults)


def _load_recordings(files, spec, max_gap):
    recordings = []
    for path in files:
        for rec in ds.load_recording(path, spec):
            rec = ds.interpolate_nans(rec, max_gap)
            rec = ds.decimate(rec, spec.decimate_factor)
            recordings.append(rec)
    return recordings


def cmd_transform(args):
    spec = ds.parse_spec_file(args.spec)
    params = MahonyParams(warmup_seconds=args.warmup)
    recordings = _load_recordings([args.input], spec, args.max_gap)
    with open(args.output, "w") as fh:
        fh.write(
            "# columns: subject label"
            + "".join(
                f" {name}:[ax ay az mx my mz gx gy gz"
                " a'x a'y a'z m'x m'y m'z g'x g'y g'z qw qx qy qz]"
                for name in recordings[0].sensors
            )
            + "\n"
        )
        for rec in recordings:
            results = {
                name: mc_transform(series, type(params)(
                    kp=params.kp, ki=params.ki,
                    sample_rate_hz=rec.sample_rate_hz,
                    warmup_seconds=params.warmup_seconds,
                ))
                for name, series in rec.sensors.items()
            }
            trim = next(iter(results.values())).trimmed
            length = next(iter(results.values())).local.shape[0]
            labels = rec.labels[trim:]
            for i in range(length):
                row = [rec.subject_id, str(labels[i])]
                for name in rec.sensors:
                    res = results[name]
                    row.extend(f"{v:.9g}" for v in res.local[i])
                    row.extend(f"{v:.9g}" for v in res.global_[i])
                fh.write(" ".join(row) + "\n")
    print(f"wrote {args.output}")
    return 0


def cmd_synth(args):
    axis = np.array([float(v) for v in args.mounting_axis.split(",")])
    norm = np.linalg.norm(axis)
    if norm == 0:
        raise ConfigError("mounting axis must be nonzero")
    half = math.radians(args.mounting_angle_deg) / 2.0
    mounting = (math.cos(half), *(math.sin(half) * axis / norm))
    spec = SynthSpec(
        duration_s=args.duration,
        rate_hz=args.rate,
        segments=((args.duration, (0.0, 0.0, args.yaw_rate)),) if args.yaw_rate else (),
        lin_acc_amp_ned=(args.accel_north, args.accel_east, args.accel_down),
        lin_acc_freq_hz=args.accel_freq,
        mounting=mounting,
        accel_noise_std=args.accel_noise,
        gyro_noise_std=args.gyro_noise,
        mag_noise_std=args.mag_noise,
        label=args.label,
    )
    rec, truth = synth_generate(spec, args.seed)
    data = rec.sensors["imu0"]
    rec_path = args.output + ".rec"
    truth_path = args.output + ".truth"
    with open(rec_path, "w") as fh:
        fh.write("# columns: label ax ay az mx my mz gx gy gz\n")
        for i in range(rec.length):
            fh.write(f"{rec.labels[i]} " + " ".join(f"{v:.9g}" for v in data[i]) + "\n")
    with open(truth_path, "w") as fh:
        fh.write("# columns: qw qx qy qz\n")
        for q in truth:
            fh.write(" ".join(f"{v:.12g}" for v in q) + "\n")
    print(f"wrote {rec_path} and {truth_path}")
    return 0


def _experiment_config(args, spec):
    return ExperimentConfig(
        mode=args.mode,
        granularity=args.granularity,
        win_len=args.win_len,
        stride=args.stride,
        label_map=spec.label_map,
        num_classes=spec.num_classes,
        target_subjects=tuple(args.target.split(",")) if args.target else (),
        train=TrainConfig(
            epochs=args.epochs, batch_size=args.batch, lr=args.lr, seed=args.seed
        ),
        mahony=MahonyParams(warmup_seconds=args.warmup),
        output_dir=args.out,
        resume=getattr(args, "resume", False),
    )


def cmd_train(args):
    spec = ds.parse_spec_file(args.spec)
    recordings = _load_recordings(args.data, spec, args.max_gap)
    cfg = _experiment_config(args, spec)
    if not args.target:
        raise ConfigError("train requires --target (the held-out subject)")
    report = run_louo(recordings, cfg)
    row = report.rows[0]
    if row.error:
        raise FlowError(row.error)
    print(f"target {row.subject}: accuracy={row.accuracy:.4f} f1={row.weighted_f1:.4f}")
    if args.checkpoint:
        from .harness import _layout_for, _model_config
        from .views import build_schema

        layout = _layout_for(cfg.mode, len(recordings[0].sensors))
        schema = build_schema(cfg.granularity, layout) if cfg.mode == "flow" else None
        save_checkpoint(args.checkpoint, _model_config(cfg, layout, schema),
                        row.params, cfg.train.seed)
        print(f"checkpoint written to {args.checkpoint}")
    if args.out:
        emit_report(report, args.out)
    return 0


def cmd_eval(args):
    spec = ds.parse_spec_file(args.spec)
    config, params, _seed = load_checkpoint(args.checkpoint)
    recordings = _load_recordings(args.data, spec, args.max_gap)
    mode = args.mode
    from .harness import _CHANNEL_MODE
    windows = ds.build_windows(
        recordings, _CHANNEL_MODE[mode], config.t, args.stride, spec.label_map,
        MahonyParams(warmup_seconds=args.warmup),
    )
    if args.target:
        windows = [w for w in windows if w.subject_id == args.target]
    if not windows:
        raise DataError("no evaluable windows")
    from .trainer import predict_batch, stack_windows

    data, labels = stack_windows(windows, config.dtype)
    preds, _ = predict_batch(data, params, config)
    cm = confusion(preds, labels, spec.num_classes)
    print(f"accuracy={accuracy(cm):.4f} weighted_f1={weighted_f1(cm):.4f}")
    return 0


def cmd_louo(args):
    spec = ds.parse_spec_file(args.spec)
    recordings = _load_recordings(args.data, spec, args.max_gap)
    cfg = _experiment_config(args, spec)
    report = run_louo(recordings, cfg)
    for row in report.rows:
        if row.error:
            print(f"subject {row.subject}: FAILED ({row.error})")
        else:
            print(f"subject {row.subject}: accuracy={row.accuracy:.4f} f1={row.weighted_f1:.4f}")
    print(f"average: accuracy={report.average_accuracy:.4f} f1={report.average_f1:.4f}")
    if args.out:
        emit_report(report, args.out)
        print(f"report written to {args.out}")
    return 0


def cmd_report(args):
    summary = load_summary(args.out)
    print(json.dumps(summary, indent=2))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="flowhar")
    sub = parser.add_subparsers(dest="command", required=True)

    def common_data(p):
        p.add_argument("--config", help="key=value option file")
        p.add_argument("--spec", required=True, help="dataset spec file")
        p.add_argument("--max-gap", dest="max_gap", type=int, default=10)
        p.add_argument("--warmup", type=float, default=1.0)

    def common_train(p):
        p.add_argument("--data", nargs="+", required=True)
        p.add_argument("--mode", choices=MODES, default="flow")
        p.add_argument("--granularity", choices=GRANULARITIES, default="medium")
        p.add_argument("--win-len", dest="win_len", type=int, default=64)
        p.add_argument("--stride", type=int, default=32)
        p.add_argument("--target", default="")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--epochs", type=int, default=300)
        p.add_argument("--batch", type=int, default=64)
        p.add_argument("--lr", type=float, default=1e-3)
        p.add_argument("--out", default=None)

    p = sub.add_parser("transform", help="append NED global-view columns to a recording")
    common_data(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("synth", help="generate a synthetic recording + ground truth")
    p.add_argument("--config", help="key=value option file")
    p.add_argument("--duration", type=float, default=20.0)
    p.add_argument("--rate", type=float, default=30.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--yaw-rate", dest="yaw_rate", type=float, default=0.0)
    p.add_argument("--accel-north", dest="accel_north", type=float, default=0.0)
    p.add_argument("--accel-east", dest="accel_east", type=float, default=0.0)
    p.add_argument("--accel-down", dest="accel_down", type=float, default=0.0)
    p.add_argument("--accel-freq", dest="accel_freq", type=float, default=1.0)
    p.add_argument("--mounting-angle-deg", dest="mounting_angle_deg", type=float, default=0.0)
    p.add_argument("--mounting-axis", dest="mounting_axis", default="0,0,1")
    p.add_argument("--accel-noise", dest="accel_noise", type=float, default=0.0)
    p.add_argument("--gyro-noise", dest="gyro_noise", type=float, default=0.0)
    p.add_argument("--mag-noise", dest="mag_noise", type=float, default=0.0)
    p.add_argument("--label", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train on all subjects but one")
    common_data(p)
    common_train(p)
    p.add_argument("--checkpoint", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    common_data(p)
    p.add_argument("--data", nargs="+", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--mode", choices=MODES, default="flow")
    p.add_argument("--stride", type=int, default=32)
    p.add_argument("--target", default="")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("louo", help="full leave-one-user-out sweep")
    common_data(p)
    common_train(p)
    p.add_argument("--resume", action="store_true")
    p.set_defaults(func=cmd_louo)

    p = sub.add_parser("report", help="print a previously written report")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_defaults(parser, argv)
        args = parser.parse_args(argv)
        override = os.environ.get("FLOWHAR_OUTPUT_DIR")
        if override and hasattr(args, "out"):
            args.out = override
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except FlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
