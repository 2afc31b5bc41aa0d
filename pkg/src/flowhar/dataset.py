"""Recording ingestion, cleaning, windowing, and leave-one-user-out splits.

Recordings are columnar text files (whitespace or comma separated), one row
per timestep, as shipped by the public activity datasets.  A DatasetSpec
describes where each sensor's accelerometer/magnetometer/gyroscope triplets
live, where the activity label and subject id come from, and how raw label
codes map onto contiguous class indices.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .attitude import MahonyParams
from .errors import (
    ChannelUnusableError,
    ConfigError,
    InvalidInputError,
    ParseError,
    SpecMismatchError,
)
from .globalview import mc_transform

# Channel order inside a 9-axis sensor block, matching the wire layout
# [ax ay az mx my mz gx gy gz].
SENSOR_GROUPS = ("accel", "mag", "gyro")


@dataclass(frozen=True)
class SensorColumns:
    accel: tuple[int, int, int]
    mag: tuple[int, int, int]
    gyro: tuple[int, int, int]

    def all_columns(self):
        return list(self.accel) + list(self.mag) + list(self.gyro)


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    sensors: dict[str, SensorColumns]
    label_col: int
    subject_source: str  # "col:<idx>" or "filename:<regex with one group>"
    native_rate_hz: float
    decimate_factor: int = 1
    gyro_unit: str = "rad/s"
    label_map: dict[int, int] = field(default_factory=dict)
    num_classes: int = 0

    def __post_init__(self):
        cols = []
        for sc in self.sensors.values():
            cols.extend(sc.all_columns())
        if len(cols) != len(set(cols)):
            raise ConfigError("sensor channel columns overlap")
        if self.decimate_factor < 1:
            raise ConfigError("decimate_factor must be >= 1")
        if self.native_rate_hz <= 0:
            raise ConfigError("native_rate_hz must be positive")
        if self.gyro_unit not in ("rad/s", "deg/s"):
            raise ConfigError("gyro_unit must be 'rad/s' or 'deg/s'")
        mapped = list(self.label_map.values())
        if len(mapped) != len(set(mapped)):
            raise ConfigError("label map must be injective")


@dataclass
class Recording:
    """One subject's continuous multi-sensor stream."""

    subject_id: str
    sensors: dict[str, np.ndarray]  # name -> (t, 9) float array
    labels: np.ndarray  # (t,) int raw label codes
    valid: np.ndarray  # (t,) bool, False inside unusable gaps
    sample_rate_hz: float

    def __post_init__(self):
        t = len(self.labels)
        for name, arr in self.sensors.items():
            if arr.shape != (t, 9):
                raise InvalidInputError(f"sensor {name} shape {arr.shape} != ({t}, 9)")
        if self.valid.shape != (t,):
            raise InvalidInputError("valid mask length mismatch")

    @property
    def length(self):
        return len(self.labels)


@dataclass(frozen=True)
class Window:
    data: np.ndarray  # (t, c)
    label: int  # class index in [0, k)
    subject_id: str


def parse_spec_file(path):
    """Read a DatasetSpec from a key=value file.

    Recognized keys: name, native_rate_hz, decimate, gyro_unit, label_col,
    subject, num_classes, sensor.<name> (three comma lists separated by ';'
    in accel;mag;gyro order) and label.<raw> = <class index>.  Lines starting
    with '#' are comments.
    """
    sensors = {}
    label_map = {}
    kv = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"expected key = value, got {line!r}", line_no)
            key, value = (part.strip() for part in line.split("=", 1))
            if key.startswith("sensor."):
                parts = value.split(";")
                if len(parts) != 3:
                    raise ParseError("sensor needs accel;mag;gyro column triplets", line_no)
                triplets = []
                for part in parts:
                    ix = tuple(int(v) for v in part.split(","))
                    if len(ix) != 3:
                        raise ParseError("each sensor group needs 3 columns", line_no)
                    triplets.append(ix)
                sensors[key[len("sensor."):]] = SensorColumns(*triplets)
            elif key.startswith("label."):
                label_map[int(key[len("label."):])] = int(value)
            else:
                kv[key] = value
    try:
        return DatasetSpec(
            name=kv.get("name", "unnamed"),
            sensors=sensors,
            label_col=int(kv["label_col"]),
            subject_source=kv.get("subject", "col:0"),
            native_rate_hz=float(kv["native_rate_hz"]),
            decimate_factor=int(kv.get("decimate", "1")),
            gyro_unit=kv.get("gyro_unit", "rad/s"),
            label_map=label_map,
            num_classes=int(kv.get("num_classes", str(len(set(label_map.values()))))),
        )
    except KeyError as exc:
        raise ParseError(f"missing required key {exc}") from exc


def _parse_rows(path):
    rows = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.replace(",", " ").split()
            try:
                rows.append([float(v) for v in fields])
            except ValueError as exc:
                raise ParseError(f"malformed row: {exc}", line_no) from exc
    return rows


def load_recording(path, spec):
    """Load a columnar recording file into one Recording per subject run.

    Gyroscope values are converted to rad/s.  Rows whose label code has no
    entry in the label map are kept (windowing drops them later).
    """
    rows = _parse_rows(path)
    if not rows:
        raise SpecMismatchError(f"{path}: file contains no data rows")
    ncols = len(rows[0])
    needed = [spec.label_col]
    for sc in spec.sensors.values():
        needed.extend(sc.all_columns())
    subj_col = None
    if spec.subject_source.startswith("col:"):
        subj_col = int(spec.subject_source.split(":", 1)[1])
        needed.append(subj_col)
    if max(needed) >= ncols:
        raise SpecMismatchError(
            f"{path}: spec needs column {max(needed)} but file has {ncols} columns"
        )
    for i, row in enumerate(rows):
        if len(row) != ncols:
            raise ParseError(f"row has {len(row)} fields, expected {ncols}", i + 1)

    data = np.asarray(rows, dtype=float)
    labels_raw = data[:, spec.label_col]
    if not np.all(np.isfinite(labels_raw)) or np.any(labels_raw != np.round(labels_raw)):
        raise SpecMismatchError(f"{path}: label column {spec.label_col} is not integral")
    labels = labels_raw.astype(int)

    if subj_col is not None:
        subj_values = data[:, subj_col]
        if np.any(subj_values != np.round(subj_values)):
            raise SpecMismatchError(f"{path}: subject column is not integral")
        subjects = [str(int(v)) for v in subj_values]
    else:
        m = re.search(spec.subject_source.split(":", 1)[1], str(path))
        if not m:
            raise SpecMismatchError(f"{path}: subject pattern did not match filename")
        subjects = [m.group(1)] * len(rows)

    gyro_scale = math.pi / 180.0 if spec.gyro_unit == "deg/s" else 1.0

    recordings = []
    start = 0
    for end in range(1, len(rows) + 1):
        if end == len(rows) or subjects[end] != subjects[start]:
            seg = slice(start, end)
            sensors = {}
            for name, sc in spec.sensors.items():
                block = np.empty((end - start, 9))
                block[:, 0:3] = data[seg, :][:, list(sc.accel)]
                block[:, 3:6] = data[seg, :][:, list(sc.mag)]
                block[:, 6:9] = data[seg, :][:, list(sc.gyro)] * gyro_scale
                sensors[name] = block
            recordings.append(
                Recording(
                    subject_id=subjects[start],
                    sensors=sensors,
                    labels=labels[seg].copy(),
                    valid=np.ones(end - start, dtype=bool),
                    sample_rate_hz=spec.native_rate_hz,
                )
            )
            start = end
    return recordings


def interpolate_nans(rec, max_gap):
    """Fill short NaN gaps per channel; flag longer ones as invalid.

    Interior gaps up to max_gap samples are linearly interpolated.  Leading
    and trailing gaps are filled with the nearest valid value.  Gaps longer
    than max_gap are still filled (so arrays stay finite) but the region is
    marked invalid and windows touching it will be dropped.
    """
    valid = rec.valid.copy()
    sensors = {}
    for name, arr in rec.sensors.items():
        out = arr.copy()
        for ch in range(arr.shape[1]):
            col = out[:, ch]
            bad = ~np.isfinite(col)
            if not bad.any():
                continue
            if bad.all():
                raise ChannelUnusableError(f"sensor {name} channel {ch} has no valid samples")
            good_ix = np.flatnonzero(~bad)
            col[:] = np.interp(np.arange(len(col)), good_ix, col[good_ix])
            # Mark over-long runs invalid.  Leading/trailing runs count too.
            run_start = None
            for i in range(len(bad) + 1):
                if i < len(bad) and bad[i]:
                    if run_start is None:
                        run_start = i
                elif run_start is not None:
                    if i - run_start > max_gap:
                        valid[run_start:i] = False
                    run_start = None
        sensors[name] = out
    return replace(rec, sensors=sensors, valid=valid)


def decimate(rec, factor):
    """Keep every factor-th sample and divide the sample rate accordingly."""
    if factor < 1:
        raise InvalidInputError("decimation factor must be >= 1")
    if factor == 1:
        return rec
    return Recording(
        subject_id=rec.subject_id,
        sensors={name: arr[::factor].copy() for name, arr in rec.sensors.items()},
        labels=rec.labels[::factor].copy(),
        valid=rec.valid[::factor].copy(),
        sample_rate_hz=rec.sample_rate_hz / factor,
    )


def _majority_label(raw_labels, label_map):
    codes, counts = np.unique(raw_labels, return_counts=True)
    best = counts.max()
    candidates = codes[counts == best]
    mapped = [label_map.get(int(c)) for c in candidates]
    known = [m for m in mapped if m is not None]
    if not known:
        return None
    return min(known)


def segment_windows(data, labels, valid, subject_id, win_len, stride, label_map):
    """Slide a window over an assembled (t, c) channel matrix.

    Windows overlapping invalid regions, or whose majority raw label is not
    in the label map, are dropped.  A stream shorter than win_len yields an
    empty list.
    """
    if stride < 1:
        raise InvalidInputError("stride must be >= 1")
    t = data.shape[0]
    out = []
    for start in range(0, t - win_len + 1, stride):
        seg = slice(start, start + win_len)
        if not valid[seg].all():
            continue
        label = _majority_label(labels[seg], label_map)
        if label is None:
            continue
        block = data[seg]
        if not np.all(np.isfinite(block)):
            continue
        out.append(Window(data=block.copy(), label=label, subject_id=subject_id))
    return out


def louo_split(windows, target_subject):
    """Exact partition into (train = everyone else, test = target subject)."""
    target = str(target_subject)
    test = [w for w in windows if w.subject_id == target]
    if not test:
        raise InvalidInputError(f"no windows for target subject {target!r}")
    train = [w for w in windows if w.subject_id != target]
    return train, test


def assemble_channels(rec, mode, mahony_params=None):
    """Build the per-timestep channel matrix for one recording.

    mode: "local" (9 per sensor), "global" (13 per sensor), or "concat"
    (local block then global block per sensor, 22 channels, sensor-major).
    Global modes run M&C per sensor and trim the shared warm-up prefix from
    labels and the validity mask as well.
    Returns (matrix, labels, valid, sample_rate_hz).
    """
    if mode not in ("local", "global", "concat"):
        raise ConfigError(f"unknown channel mode {mode!r}")
    names = list(rec.sensors)
    if mode == "local":
        matrix = np.concatenate([rec.sensors[n] for n in names], axis=1)
        return matrix, rec.labels.copy(), rec.valid.copy(), rec.sample_rate_hz

    if mahony_params is None:
        mahony_params = MahonyParams(sample_rate_hz=rec.sample_rate_hz)
    elif mahony_params.sample_rate_hz != rec.sample_rate_hz:
        mahony_params = replace(mahony_params, sample_rate_hz=rec.sample_rate_hz)
    blocks = []
    trim = None
    for n in names:
        res = mc_transform(rec.sensors[n], mahony_params)
        trim = res.trimmed
        if mode == "global":
            blocks.append(res.global_)
        else:
            blocks.append(np.concatenate([res.local, res.global_], axis=1))
    matrix = np.concatenate(blocks, axis=1)
    return matrix, rec.labels[trim:].copy(), rec.valid[trim:].copy(), rec.sample_rate_hz


def build_windows(recordings, mode, win_len, stride, label_map, mahony_params=None):
    """assemble_channels + segment_windows over a list of recordings.

    M&C runs on each full continuous recording before windowing, so windows
    never straddle recording boundaries.
    """
    windows = []
    for rec in recordings:
        matrix, labels, valid, _ = assemble_channels(rec, mode, mahony_params)
        windows.extend(
            segment_windows(matrix, labels, valid, rec.subject_id, win_len, stride, label_map)
        )
    return windows
