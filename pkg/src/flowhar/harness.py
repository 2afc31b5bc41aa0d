"""Experiment orchestration: leave-one-user-out sweeps over the ablation
modes (local-only, global-only, concatenation baseline, full fusion) and
report emission.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .attitude import MahonyParams
from .autodiff import Tensor, softmax_cross_entropy
from .dataset import build_windows, louo_split
from .errors import ConfigError, FlowError
from .metrics import accuracy, confusion, weighted_f1
from .model import (
    Adam,
    ModelConfig,
    backbone_forward,
    init_params,
    mvf_forward,
    params_by_prefix,
    set_normalization,
)
from .trainer import TrainConfig, TrainLog, EpochRecord, evaluate, fit, stack_windows
from .views import ChannelLayout, build_schema

MODES = ("vL_only", "vG_only", "vL_plus_vG", "flow")

# Channel assembly per mode (see dataset.assemble_channels).
_CHANNEL_MODE = {
    "vL_only": "local",
    "vG_only": "global",
    "vL_plus_vG": "concat",
    "flow": "concat",
}


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "flow"
    granularity: str = "medium"  # flow mode only
    win_len: int = 64
    stride: int = 32
    label_map: dict = field(default_factory=dict)
    num_classes: int = 0
    target_subjects: tuple = ()  # empty -> every subject in the data
    train: TrainConfig = field(default_factory=TrainConfig)
    mahony: MahonyParams = field(default_factory=MahonyParams)
    model_overrides: dict = field(default_factory=dict)  # ModelConfig kwargs
    output_dir: str | None = None
    resume: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")


@dataclass
class SubjectResult:
    subject: str
    accuracy: float | None
    weighted_f1: float | None
    confusion: np.ndarray | None
    log: TrainLog | None
    error: str | None = None
    params: dict | None = None


@dataclass
class ExperimentReport:
    mode: str
    seed: int
    rows: list
    average_accuracy: float
    average_f1: float
    wall_time_s: float
    config_echo: dict


def _layout_for(mode, num_sensors):
    return ChannelLayout(
        num_sensors=num_sensors,
        has_local=mode in ("vL_only", "vL_plus_vG", "flow"),
        has_global=mode in ("vG_only", "vL_plus_vG", "flow"),
    )


def _model_config(cfg, layout, schema):
    n = schema.n if schema is not None else 1
    return ModelConfig(
        t=cfg.win_len,
        c=layout.num_channels,
        k=cfg.num_classes,
        n=n,
        **cfg.model_overrides,
    )


def run_baseline(train_windows, test_windows, model_config, train_config):
    """Plain backbone + single k-way head, trained with cross-entropy only.

    Used for the three non-fusion ablation arms.  Returns (params, log).
    """
    data, labels = stack_windows(train_windows, model_config.dtype)
    test = stack_windows(test_windows, model_config.dtype) if test_windows else None
    params = init_params(model_config, train_config.seed)
    set_normalization(params, data)
    rng = np.random.default_rng(train_config.seed)
    opt = Adam(params_by_prefix(params, "backbone.", "mvf."), lr=train_config.lr)
    log = TrainLog()
    for epoch in range(train_config.epochs):
        order = rng.permutation(len(labels))
        loss_sum = 0.0
        batches = 0
        for start in range(0, len(labels), train_config.batch_size):
            ix = order[start:start + train_config.batch_size]
            feats = backbone_forward(
                Tensor(data[ix].astype(model_config.dtype)), params, model_config
            )
            logits = mvf_forward(feats, params, model_config).reshape(
                len(ix), model_config.k
            )
            loss = softmax_cross_entropy(logits, labels[ix])
            opt.zero_grad()
            loss.backward()
            opt.step()
            loss_sum += float(loss.data)
            batches += 1
        train_acc, _ = evaluate(data, labels, params, model_config, use_voting=False)
        record = EpochRecord(
            epoch=epoch,
            loss_mvf1=loss_sum / max(batches, 1),
            loss_mvf2=0.0,
            train_accuracy=train_acc,
        )
        if test is not None:
            record.test_accuracy, record.test_view_accuracy = evaluate(
                test[0], test[1], params, model_config, use_voting=False
            )
        log.records.append(record)
    return params, log


def _evaluate_split(train_windows, test_windows, cfg, model_config, schema):
    train_config = cfg.train
    if cfg.mode == "flow":
        params = init_params(model_config, train_config.seed)
        params, log = fit(
            train_windows, schema, params, model_config, train_config, test_windows
        )
    else:
        params, log = run_baseline(train_windows, test_windows, model_config, train_config)
    data, labels = stack_windows(test_windows, model_config.dtype)
    preds = []
    for start in range(0, len(labels), 256):
        sl = slice(start, start + 256)
        if cfg.mode == "flow":
            from .trainer import predict_batch

            p, _ = predict_batch(data[sl], params, model_config)
        else:
            feats = backbone_forward(Tensor(data[sl]), params, model_config)
            logits = mvf_forward(feats, params, model_config).reshape(-1, model_config.k)
            p = np.argmax(logits.data, axis=1)
        preds.append(p)
    preds = np.concatenate(preds)
    cm = confusion(preds, labels, cfg.num_classes)
    return accuracy(cm), weighted_f1(cm), cm, log, params


def run_louo(recordings, cfg):
    """Leave-one-user-out sweep over every target subject.

    A failure in one subject's pipeline records an error row and the sweep
    continues.  With cfg.resume and an output dir, completed subjects are
    skipped via on-disk marker files.
    """
    start_time = time.time()
    num_sensors = len(next(iter(recordings)).sensors)
    layout = _layout_for(cfg.mode, num_sensors)
    # Non-flow modes train a single plain head; no view schema is involved.
    schema = build_schema(cfg.granularity, layout) if cfg.mode == "flow" else None
    model_config = _model_config(cfg, layout, schema)
    windows = build_windows(
        recordings,
        _CHANNEL_MODE[cfg.mode],
        cfg.win_len,
        cfg.stride,
        cfg.label_map,
        cfg.mahony,
    )
    subjects = list(cfg.target_subjects) or sorted({w.subject_id for w in windows})

    rows = []
    for subject in subjects:
        marker = None
        if cfg.output_dir:
            import pathlib

            marker = pathlib.Path(cfg.output_dir) / f"subject_{subject}.done.json"
            if cfg.resume and marker.exists():
                saved = json.loads(marker.read_text())
                rows.append(
                    SubjectResult(
                        subject=subject,
                        accuracy=saved["accuracy"],
                        weighted_f1=saved["weighted_f1"],
                        confusion=np.asarray(saved["confusion"]),
                        log=None,
                    )
                )
                continue
        try:
            train_w, test_w = louo_split(windows, subject)
            acc, f1, cm, log, params = _evaluate_split(
                train_w, test_w, cfg, model_config, schema
            )
            rows.append(
                SubjectResult(
                    subject=subject, accuracy=acc, weighted_f1=f1,
                    confusion=cm, log=log, params=params,
                )
            )
            if marker is not None:
                marker.parent.mkdir(parents=True, exist_ok=True)
                marker.write_text(
                    json.dumps(
                        {"accuracy": acc, "weighted_f1": f1, "confusion": cm.tolist()}
                    )
                )
        except FlowError as exc:
            rows.append(
                SubjectResult(
                    subject=subject, accuracy=None, weighted_f1=None,
                    confusion=None, log=None, error=str(exc),
                )
            )
    ok = [r for r in rows if r.error is None]
    avg_acc = float(np.mean([r.accuracy for r in ok])) if ok else float("nan")
    avg_f1 = float(np.mean([r.weighted_f1 for r in ok])) if ok else float("nan")
    return ExperimentReport(
        mode=cfg.mode,
        seed=cfg.train.seed,
        rows=rows,
        average_accuracy=avg_acc,
        average_f1=avg_f1,
        wall_time_s=time.time() - start_time,
        config_echo={
            "mode": cfg.mode,
            "granularity": cfg.granularity,
            "win_len": cfg.win_len,
            "stride": cfg.stride,
            "epochs": cfg.train.epochs,
            "batch_size": cfg.train.batch_size,
            "lr": cfg.train.lr,
            "seed": cfg.train.seed,
        },
    )


def emit_report(report, out_dir):
    """Write summary.json, one confusion CSV per subject, and per-epoch curve
    files suitable for external plotting."""
    import pathlib

    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {
        "mode": report.mode,
        "seed": report.seed,
        "average_accuracy": report.average_accuracy,
        "average_f1": report.average_f1,
        "wall_time_s": report.wall_time_s,
        "config": report.config_echo,
        "rows": [
            {
                "subject": r.subject,
                "accuracy": r.accuracy,
                "weighted_f1": r.weighted_f1,
                "error": r.error,
            }
            for r in report.rows
        ],
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    written = [out / "summary.json"]
    for r in report.rows:
        if r.confusion is not None:
            path = out / f"confusion_{r.subject}.csv"
            np.savetxt(path, r.confusion, fmt="%d", delimiter=",")
            written.append(path)
        if r.log is not None:
            path = out / f"curves_{r.subject}.csv"
            with open(path, "w") as fh:
                fh.write("epoch,loss_mvf1,loss_mvf2,train_acc,test_acc,test_view_acc\n")
                for rec in r.log.records:
                    views = ";".join(f"{v:.6f}" for v in rec.test_view_accuracy)
                    test_acc = "" if rec.test_accuracy is None else f"{rec.test_accuracy:.6f}"
                    fh.write(
                        f"{rec.epoch},{rec.loss_mvf1:.6f},{rec.loss_mvf2:.6f},"
                        f"{rec.train_accuracy:.6f},{test_acc},{views}\n"
                    )
            written.append(path)
    return written


def load_summary(out_dir):
    import pathlib

    return json.loads((pathlib.Path(out_dir) / "summary.json").read_text())
