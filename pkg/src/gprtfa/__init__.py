"""Stepped-frequency GPR processing and time-frequency enhancement.

The pipeline runs raw frequency-domain sweeps through an inverse FFT,
basic cleanup (zero-offset removal, time-zero alignment, SVD background
subtraction), per-trace spectrograms, a thresholded peak-frequency map,
automatic responsive-band estimation, and band-filtered B-scan
regeneration. A point-scatterer forward model provides synthetic surveys
with known ground truth.
"""

from .errors import (
    ConfigError,
    DataError,
    DegenerateDataError,
    FormatError,
    GprtfaError,
)
from .frd import (
    FrdMap,
    FrequencyBand,
    bandpass_regenerate,
    build_frd,
    estimate_band,
    filter_survey,
    row_max_extract,
)
from .ingest import (
    SurveyConfig,
    SurveyFrequencyDomain,
    SweepRecord,
    assemble_survey,
    emit_sweep_csv,
    emit_touchstone,
    load_survey,
    parse_sweep_csv,
    parse_touchstone,
    write_survey,
)
from .preprocess import (
    BScanTime,
    ComplexTrace,
    PipelineParams,
    PipelineResult,
    basic_pipeline,
    ifft_to_time,
    svd_background_removal,
    time_zero_correction,
    zero_offset_removal,
)
from .render import RenderSpec, render_pgm
from .synth import (
    PointScatterer,
    ScattererScene,
    SoilModel,
    synth_survey,
    travel_time,
)
from .tfa import Spectrogram, StftConfig, hamming_window, stack_stft, stft

__version__ = "0.1.0"

__all__ = [
    "BScanTime",
    "ComplexTrace",
    "ConfigError",
    "DataError",
    "DegenerateDataError",
    "FormatError",
    "FrdMap",
    "FrequencyBand",
    "GprtfaError",
    "PipelineParams",
    "PipelineResult",
    "PointScatterer",
    "RenderSpec",
    "ScattererScene",
    "SoilModel",
    "Spectrogram",
    "StftConfig",
    "SurveyConfig",
    "SurveyFrequencyDomain",
    "SweepRecord",
    "assemble_survey",
    "bandpass_regenerate",
    "basic_pipeline",
    "build_frd",
    "emit_sweep_csv",
    "emit_touchstone",
    "estimate_band",
    "filter_survey",
    "hamming_window",
    "ifft_to_time",
    "load_survey",
    "parse_sweep_csv",
    "parse_touchstone",
    "render_pgm",
    "row_max_extract",
    "stack_stft",
    "stft",
    "svd_background_removal",
    "synth_survey",
    "time_zero_correction",
    "travel_time",
    "write_survey",
    "zero_offset_removal",
]
