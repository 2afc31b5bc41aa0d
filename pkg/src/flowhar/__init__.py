"""Cross-user IMU activity recognition with NED global views and shuffled
multi-view fusion."""

from .attitude import (
    G0,
    MahonyParams,
    MahonyState,
    mahony_run,
    mahony_step,
    quat_from_accel_mag,
    quat_multiply,
)
from .dataset import (
    DatasetSpec,
    Recording,
    Window,
    build_windows,
    decimate,
    interpolate_nans,
    load_recording,
    louo_split,
    parse_spec_file,
    segment_windows,
)
from .globalview import mc_transform, rotation_from_quaternion, transform_sample
from .harness import ExperimentConfig, emit_report, run_baseline, run_louo
from .metrics import accuracy, confusion, weighted_f1
from .model import Adam, ModelConfig, init_params, load_checkpoint, save_checkpoint
from .synth import SynthSpec, synth_generate, synth_population
from .trainer import TrainConfig, fit, predict, train_phase1, train_phase2
from .views import ChannelLayout, ViewSchema, build_schema, gen_shuffle_matrix, shuffle_batch

__version__ = "0.1.0"
