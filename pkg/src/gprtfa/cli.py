"""Command-line pipeline driver.

One subcommand per pipeline stage plus a run-all composite. Exit codes:
0 success, 2 usage or configuration errors (including unreadable files),
3 degenerate input data.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import frd as frd_mod
from . import synth as synth_mod
from .errors import ConfigError, DegenerateDataError, GprtfaError
from .ingest import SurveyConfig, load_survey, write_survey
from .preprocess import (
    PipelineParams,
    PipelineResult,
    basic_pipeline,
    bscan_sidecar,
    export_bscan_csv,
)
from .render import RenderSpec, render_pgm
from .tfa import (
    StftConfig,
    export_spectrogram_csv,
    iter_stft,
    spectrogram_sidecar,
    trace_spectrogram,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3

_CONFIG_FLAGS = (
    "f_start",
    "f_stop",
    "n_freq_points",
    "trace_step",
    "n_traces",
    "antenna_separation",
    "if_bandwidth",
    "source_power",
)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _survey_config(args) -> SurveyConfig:
    if args.survey_json:
        base = SurveyConfig.from_json(Path(args.survey_json).read_text())
    else:
        base = SurveyConfig()
    overrides = {
        name: getattr(args, name)
        for name in _CONFIG_FLAGS
        if getattr(args, name, None) is not None
    }
    if not overrides:
        return base
    merged = {name: getattr(base, name) for name in _CONFIG_FLAGS}
    merged.update(overrides)
    return SurveyConfig(**merged)


def _pipeline_params(args) -> PipelineParams:
    return PipelineParams.with_skips(
        args.skip_steps,
        svd_rank=args.svd_rank,
        time_zero_threshold=args.time_zero_threshold,
    )


def _stft_config(args) -> StftConfig:
    return StftConfig(fft_points=args.fft_points, window_fraction=args.window_frac, hop=args.hop)


def _render_spec(args) -> RenderSpec:
    return RenderSpec(
        normalization=args.normalization,
        db_floor=args.db_floor,
        crop_time=args.crop_time,
    )


def _parse_band(text: str) -> frd_mod.FrequencyBand:
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"band must look like LOW_HZ:HIGH_HZ, got {text!r}")
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"band edges must be numbers: {exc}") from exc
    return frd_mod.FrequencyBand(f_low=lo, f_high=hi)


def _write_bscan(out: Path, stem: str, bscan, spec: RenderSpec) -> None:
    (out / f"{stem}.csv").write_text(export_bscan_csv(bscan))
    _write_json(out / f"{stem}.json", bscan_sidecar(bscan))
    (out / f"{stem}.pgm").write_bytes(render_pgm(bscan.samples.T, spec, dt=bscan.dt))


def _build_frd(result: PipelineResult, args) -> frd_mod.FrdMap:
    frd = frd_mod.build_frd(iter_stft(result, _stft_config(args)), args.threshold_frac)
    if frd.degenerate:
        raise DegenerateDataError("all spectrograms are zero: no frequency response to map")
    return frd


def _write_frd(out: Path, result: PipelineResult, frd, band, args) -> None:
    freq_csv, mag_csv = frd_mod.export_frd_csv(frd)
    (out / "frd_peak_freq_hz.csv").write_text(freq_csv)
    (out / "frd_peak_mag.csv").write_text(mag_csv)
    _write_json(out / "frd.json", frd_mod.frd_sidecar(frd, band))
    # frequency values render linearly; dB of Hz is meaningless
    frd_spec = RenderSpec(normalization="linear", crop_time=args.crop_time)
    (out / "frd.pgm").write_bytes(render_pgm(frd.peak_freq.T, frd_spec, dt=result.bscan.dt))
    if args.all_bins:
        occupancy = frd_mod.threshold_occupancy(iter_stft(result, _stft_config(args)), frd.threshold)
    else:
        occupancy = frd_mod.occupancy_projection(frd)
    lines = [",".join(f"{v:.9e}" for v in row) for row in occupancy]
    (out / "frd_occupancy.csv").write_text("\n".join(lines) + "\n")


def cmd_synth(args) -> int:
    scene = synth_mod.load_scene(args.scene)
    survey = synth_mod.synth_survey(scene, _survey_config(args))
    out = write_survey(survey, args.out, fmt=args.format)
    print(f"wrote {survey.config.n_traces} sweeps to {out}")
    return EXIT_OK


def cmd_process(args) -> int:
    survey = load_survey(args.survey_dir)
    result = basic_pipeline(survey, _pipeline_params(args))
    out = _out_dir(args)
    _write_bscan(out, "bscan", result.bscan, _render_spec(args))
    print(f"wrote B-scan ({result.bscan.n_traces} traces x {result.bscan.n_time} samples) to {out}")
    return EXIT_OK


def cmd_stft(args) -> int:
    survey = load_survey(args.survey_dir)
    result = basic_pipeline(survey, _pipeline_params(args))
    spec = trace_spectrogram(result, args.trace, _stft_config(args))
    out = _out_dir(args)
    stem = f"spectrogram_{args.trace:04d}"
    (out / f"{stem}.csv").write_text(export_spectrogram_csv(spec))
    _write_json(out / f"{stem}.json", spectrogram_sidecar(spec))
    row_dt = float(spec.times[1] - spec.times[0]) if spec.times.shape[0] > 1 else None
    (out / f"{stem}.pgm").write_bytes(render_pgm(spec.magnitudes, _render_spec(args), dt=row_dt))
    print(f"wrote spectrogram of trace {args.trace} to {out}")
    return EXIT_OK


def cmd_frd(args) -> int:
    survey = load_survey(args.survey_dir)
    result = basic_pipeline(survey, _pipeline_params(args))
    frd = _build_frd(result, args)
    band = frd_mod.estimate_band(frd, args.coverage)
    out = _out_dir(args)
    _write_frd(out, result, frd, band, args)
    print(f"estimated band {band.f_low / 1e9:.3f}-{band.f_high / 1e9:.3f} GHz, wrote maps to {out}")
    return EXIT_OK


def cmd_bandpass(args) -> int:
    survey = load_survey(args.survey_dir)
    params = _pipeline_params(args)
    if args.band is not None:
        band = _parse_band(args.band)
    else:
        result = basic_pipeline(survey, params)
        band = frd_mod.estimate_band(_build_frd(result, args), args.coverage)
    filtered = frd_mod.bandpass_regenerate(survey, band, params, taper_bins=args.taper_bins)
    out = _out_dir(args)
    _write_bscan(out, "bscan_filtered", filtered, _render_spec(args))
    _write_json(out / "band.json", {"f_low_hz": band.f_low, "f_high_hz": band.f_high})
    print(f"wrote band-filtered B-scan ({band.f_low / 1e9:.3f}-{band.f_high / 1e9:.3f} GHz) to {out}")
    return EXIT_OK


def cmd_run_all(args) -> int:
    out = _out_dir(args)
    source = Path(args.input)
    if source.is_dir():
        survey = load_survey(source)
    else:
        scene = synth_mod.load_scene(source)
        survey = synth_mod.synth_survey(scene, _survey_config(args))
        write_survey(survey, out / "survey", fmt=args.format)
    params = _pipeline_params(args)
    result = basic_pipeline(survey, params)
    spec_render = _render_spec(args)
    _write_bscan(out, "bscan", result.bscan, spec_render)
    trace = args.trace if args.trace is not None else result.bscan.n_traces // 2
    spec = trace_spectrogram(result, trace, _stft_config(args))
    stem = f"spectrogram_{trace:04d}"
    (out / f"{stem}.csv").write_text(export_spectrogram_csv(spec))
    _write_json(out / f"{stem}.json", spectrogram_sidecar(spec))
    row_dt = float(spec.times[1] - spec.times[0]) if spec.times.shape[0] > 1 else None
    (out / f"{stem}.pgm").write_bytes(render_pgm(spec.magnitudes, spec_render, dt=row_dt))
    frd = _build_frd(result, args)
    band = frd_mod.estimate_band(frd, args.coverage)
    _write_frd(out, result, frd, band, args)
    filtered = frd_mod.bandpass_regenerate(survey, band, params, taper_bins=args.taper_bins)
    _write_bscan(out, "bscan_filtered", filtered, spec_render)
    _write_json(out / "band.json", {"f_low_hz": band.f_low, "f_high_hz": band.f_high})
    print(f"run-all complete: band {band.f_low / 1e9:.3f}-{band.f_high / 1e9:.3f} GHz, outputs in {out}")
    return EXIT_OK


def cmd_render(args) -> int:
    matrix = np.loadtxt(args.matrix_csv, delimiter=",", ndmin=2)
    data = render_pgm(matrix, _render_spec(args), dt=args.dt)
    Path(args.out).write_bytes(data)
    print(f"wrote {args.out}")
    return EXIT_OK


def _add_survey_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--survey-json", help="survey config JSON overriding the defaults")
    p.add_argument("--f-start", dest="f_start", type=float, help="sweep start (Hz)")
    p.add_argument("--f-stop", dest="f_stop", type=float, help="sweep stop (Hz)")
    p.add_argument("--n-freq-points", dest="n_freq_points", type=int, help="sweep points")
    p.add_argument("--trace-step", dest="trace_step", type=float, help="scan step (m)")
    p.add_argument("--n-traces", dest="n_traces", type=int, help="trace count")
    p.add_argument(
        "--antenna-separation", dest="antenna_separation", type=float, help="antenna spacing (m)"
    )
    p.add_argument("--if-bandwidth", dest="if_bandwidth", type=float, help="IF bandwidth (Hz)")
    p.add_argument("--source-power", dest="source_power", type=float, help="source power (dBm)")


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--svd-rank", type=int, default=1, help="background rank to remove")
    p.add_argument(
        "--skip-steps",
        default="none",
        help="comma list of zero_offset,time_zero,svd, or 'all'/'none'",
    )
    p.add_argument("--time-zero-threshold", type=float, default=0.05, help="first-break fraction")


def _add_stft_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window-frac", type=float, default=0.1, help="window length as trace fraction")
    p.add_argument("--fft-points", type=int, default=None, help="FFT length (default: trace length)")
    p.add_argument("--hop", type=int, default=1, help="rows every this many samples")


def _add_frd_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold-frac", type=float, default=0.25, help="fraction of global maximum")
    p.add_argument("--coverage", type=float, default=0.90, help="band mass coverage")
    p.add_argument(
        "--all-bins",
        action="store_true",
        help="occupancy from every above-threshold bin, not just row maxima",
    )


def _add_render_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--normalization", choices=("linear", "db"), default="db")
    p.add_argument("--db-floor", type=float, default=-40.0, help="dB mapped to black")
    p.add_argument("--crop-time", type=float, default=None, help="keep rows up to this time (s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gprtfa",
        description="Stepped-frequency GPR processing: sweeps to B-scans, "
        "spectrograms, peak-frequency maps, and band-filtered radargrams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="forward-model a survey from a scene file")
    p.add_argument("scene", help="scene JSON file")
    p.add_argument("--out", required=True, help="survey directory to write")
    p.add_argument("--format", choices=("s2p", "csv"), default="s2p")
    _add_survey_config_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("process", help="basic chain: IFFT, zero-offset, time-zero, SVD")
    p.add_argument("survey_dir")
    p.add_argument("--out", required=True)
    _add_pipeline_flags(p)
    _add_render_flags(p)
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("stft", help="spectrogram of one trace")
    p.add_argument("survey_dir")
    p.add_argument("--trace", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_pipeline_flags(p)
    _add_stft_flags(p)
    _add_render_flags(p)
    p.set_defaults(func=cmd_stft)

    p = sub.add_parser("frd", help="peak-frequency map and band estimate")
    p.add_argument("survey_dir")
    p.add_argument("--out", required=True)
    _add_pipeline_flags(p)
    _add_stft_flags(p)
    _add_frd_flags(p)
    _add_render_flags(p)
    p.set_defaults(func=cmd_frd)

    p = sub.add_parser("bandpass", help="regenerate the B-scan from a frequency band")
    p.add_argument("survey_dir")
    p.add_argument("--out", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--band", help="LOW_HZ:HIGH_HZ")
    group.add_argument("--auto", action="store_true", help="estimate the band first")
    p.add_argument("--taper-bins", type=int, default=5, help="roll-off width outside the band")
    _add_pipeline_flags(p)
    _add_stft_flags(p)
    _add_frd_flags(p)
    _add_render_flags(p)
    p.set_defaults(func=cmd_bandpass)

    p = sub.add_parser("run-all", help="synth (if given a scene), process, stft, frd, bandpass")
    p.add_argument("input", help="scene JSON file or survey directory")
    p.add_argument("--out", required=True)
    p.add_argument("--trace", type=int, default=None, help="spectrogram trace (default: middle)")
    p.add_argument("--format", choices=("s2p", "csv"), default="s2p")
    p.add_argument("--taper-bins", type=int, default=5)
    _add_survey_config_flags(p)
    _add_pipeline_flags(p)
    _add_stft_flags(p)
    _add_frd_flags(p)
    _add_render_flags(p)
    p.set_defaults(func=cmd_run_all)

    p = sub.add_parser("render", help="render a CSV matrix to 16-bit PGM")
    p.add_argument("matrix_csv")
    p.add_argument("--out", required=True)
    p.add_argument("--dt", type=float, default=None, help="row time step (s), needed for cropping")
    _add_render_flags(p)
    p.set_defaults(func=cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DegenerateDataError as exc:
        print(f"gprtfa: degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except GprtfaError as exc:
        print(f"gprtfa: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"gprtfa: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
