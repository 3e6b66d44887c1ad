"""Frequency-domain surveys to time-domain B-scans, plus the basic cleanup chain.

The sweep is treated as complex baseband: bin k of a sweep sits at
f_start + k * freq_step, and the inverse DFT of the S21 vector yields a
complex trace sampled every 1/(f_stop - f_start) seconds. Cleanup steps
(per-trace mean removal, global time-zero alignment, low-rank background
subtraction) operate on the complex trace stack so phase stays intact for
later time-frequency analysis; the magnitude radargram is derived last.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, DegenerateDataError
from .ingest import SurveyConfig, SurveyFrequencyDomain, SweepRecord

PIPELINE_STEPS = ("zero_offset", "time_zero", "svd")


@dataclass(frozen=True)
class ComplexTrace:
    """One time-domain A-scan kept complex (baseband relative to f_start)."""

    values: np.ndarray
    dt: float
    f_start: float


@dataclass(frozen=True)
class BScanTime:
    """A real-valued radargram: trace rows, time columns, axis metadata."""

    samples: np.ndarray
    dt: float
    t0_index: int
    positions: np.ndarray

    @property
    def n_traces(self) -> int:
        return self.samples.shape[0]

    @property
    def n_time(self) -> int:
        return self.samples.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_time) * self.dt


@dataclass(frozen=True)
class PipelineParams:
    """Knobs for the basic processing chain."""

    svd_rank: int = 1
    time_zero_threshold: float = 0.05
    skip_steps: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        unknown = self.skip_steps - set(PIPELINE_STEPS)
        if unknown:
            raise ConfigError(f"unknown pipeline steps: {sorted(unknown)}")

    def runs(self, step: str) -> bool:
        return step not in self.skip_steps

    @classmethod
    def with_skips(cls, spec: str, **kwargs) -> "PipelineParams":
        """Build params from a comma list of step names, or 'all'/'none'."""
        spec = spec.strip().lower()
        if spec in ("", "none"):
            skips: frozenset[str] = frozenset()
        elif spec == "all":
            skips = frozenset(PIPELINE_STEPS)
        else:
            skips = frozenset(part.strip() for part in spec.split(",") if part.strip())
        return cls(skip_steps=skips, **kwargs)


@dataclass(frozen=True)
class PipelineResult:
    """Output of the basic chain: the complex stack plus its magnitude B-scan."""

    complex_stack: np.ndarray = field(repr=False)
    bscan: BScanTime
    f_start: float


def ifft_to_time(sweep: SweepRecord, config: SurveyConfig) -> ComplexTrace:
    """Inverse-transform one sweep to the time domain.

    Uses the 1/N-normalized inverse DFT, so an all-ones spectrum becomes a
    unit impulse at index 0 and sum|s21|^2 == N * sum|trace|^2 (Parseval).
    """
    if sweep.s21.shape[0] != config.n_freq_points:
        raise ConfigError(
            f"trace {sweep.trace_index}: sweep has {sweep.s21.shape[0]} points, "
            f"config expects {config.n_freq_points}"
        )
    values = np.fft.ifft(np.asarray(sweep.s21, dtype=complex))
    return ComplexTrace(values=values, dt=config.dt, f_start=config.f_start)


def remove_trace_means(stack: np.ndarray) -> np.ndarray:
    """Subtract each trace's mean over time (rows are traces)."""
    return stack - stack.mean(axis=1, keepdims=True)


def first_break_index(stack: np.ndarray, threshold_frac: float) -> int:
    """First sample where the mean trace's magnitude reaches the threshold.

    The mean is taken across traces, which suppresses per-trace noise; the
    threshold is threshold_frac times the mean trace's peak magnitude.
    """
    if not 0.0 < threshold_frac < 1.0:
        raise ConfigError(f"threshold_frac must be in (0, 1), got {threshold_frac}")
    mean_trace = np.abs(stack.mean(axis=0))
    peak = mean_trace.max()
    if peak == 0.0:
        raise DegenerateDataError("all-zero B-scan: no first break to find")
    return int(np.argmax(mean_trace >= threshold_frac * peak))


def shift_time_zero(stack: np.ndarray, threshold_frac: float) -> tuple[np.ndarray, int]:
    """Circularly shift all traces so the detected first break lands at index 0."""
    t0 = first_break_index(stack, threshold_frac)
    if t0 == 0:
        return stack, 0
    return np.roll(stack, -t0, axis=1), t0


def svd_residual(stack: np.ndarray, rank: int) -> np.ndarray:
    """Remove the best rank-`rank` approximation of the trace stack.

    Works on real or complex matrices; the removed component holds the
    trace-invariant background (direct coupling, ground bounce).
    """
    max_rank = min(stack.shape)
    if not 1 <= rank < max_rank:
        raise ConfigError(f"svd rank must be in [1, {max_rank - 1}], got {rank}")
    u, s, vh = np.linalg.svd(stack, full_matrices=False)
    background = (u[:, :rank] * s[:rank]) @ vh[:rank]
    return stack - background


def zero_offset_removal(bscan: BScanTime) -> BScanTime:
    """Remove each trace's DC offset (mean over time)."""
    return replace(bscan, samples=remove_trace_means(bscan.samples))


def time_zero_correction(bscan: BScanTime, threshold_frac: float = 0.05) -> BScanTime:
    """Align time zero to the first break of the mean trace.

    All traces shift by the same amount (a circular shift, so record
    energy is preserved); the returned t0_index is 0.
    """
    shifted, _ = shift_time_zero(bscan.samples, threshold_frac)
    return replace(bscan, samples=shifted, t0_index=0)


def svd_background_removal(bscan: BScanTime, rank: int = 1) -> BScanTime:
    """Subtract the dominant rank-`rank` singular component of the radargram."""
    return replace(bscan, samples=svd_residual(bscan.samples, rank))


def time_stack(survey: SurveyFrequencyDomain) -> np.ndarray:
    """Inverse-transform every sweep into an (n_traces, n_time) complex stack."""
    traces = [ifft_to_time(sweep, survey.config) for sweep in survey.sweeps]
    return np.array([tr.values for tr in traces])


def basic_pipeline(
    survey: SurveyFrequencyDomain,
    params: PipelineParams | None = None,
) -> PipelineResult:
    """Run the basic chain: IFFT, zero-offset removal, time-zero, SVD.

    Steps act on the complex stack (identically on the real and imaginary
    planes) so the result feeds time-frequency analysis without phase
    damage. Returns the cleaned complex stack together with the magnitude
    B-scan; steps listed in params.skip_steps are left out.
    """
    params = params or PipelineParams()
    stack = time_stack(survey)
    if params.runs("zero_offset"):
        stack = remove_trace_means(stack)
    if params.runs("time_zero"):
        stack, _ = shift_time_zero(stack, params.time_zero_threshold)
    if params.runs("svd"):
        stack = svd_residual(stack, params.svd_rank)
    bscan = BScanTime(
        samples=np.abs(stack),
        dt=survey.config.dt,
        t0_index=0,
        positions=survey.positions,
    )
    return PipelineResult(complex_stack=stack, bscan=bscan, f_start=survey.config.f_start)


def export_bscan_csv(bscan: BScanTime) -> str:
    """B-scan as CSV text with time down the rows and traces across columns."""
    rows = []
    for row in bscan.samples.T:
        rows.append(",".join(f"{v:.9e}" for v in row))
    return "\n".join(rows) + "\n"


def bscan_sidecar(bscan: BScanTime) -> dict:
    return {
        "dt_s": bscan.dt,
        "t0_index": bscan.t0_index,
        "positions_m": [float(p) for p in bscan.positions],
    }
