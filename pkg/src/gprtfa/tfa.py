"""Short-time Fourier transform of complex A-scans.

A spectrogram row is produced for every hop-th time sample: the trace
segment centered on that sample is Hamming-windowed, zero-padded to the
FFT length, and transformed. With the default hop of 1 there is one row
per time sample, which downstream peak extraction relies on. Frequency
columns are labeled in true Hz by offsetting with the sweep's start
frequency, so a spectrogram of a 0.2-4.0 GHz sweep reads 0.2-4.0 GHz.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError
from .preprocess import ComplexTrace, PipelineResult

MIN_WINDOW = 4


@dataclass(frozen=True)
class StftConfig:
    """Transform settings: FFT length, window sizing, and hop.

    fft_points of None means "use the trace length", which keeps the
    frequency columns aligned with the sweep's own grid. The window holds
    window_fraction of the trace (floored), one tenth by default.
    """

    fft_points: int | None = None
    window_fraction: float = 0.1
    hop: int = 1
    window_kind: str = "hamming"

    def __post_init__(self) -> None:
        if self.fft_points is not None and self.fft_points < MIN_WINDOW:
            raise ConfigError(f"fft_points must be >= {MIN_WINDOW}, got {self.fft_points}")
        if not 0.0 < self.window_fraction <= 1.0:
            raise ConfigError(f"window_fraction must be in (0, 1], got {self.window_fraction}")
        if self.hop < 1:
            raise ConfigError(f"hop must be >= 1, got {self.hop}")
        if self.window_kind != "hamming":
            raise ConfigError(f"unsupported window kind {self.window_kind!r}")

    def resolve(self, n_time: int) -> tuple[int, int]:
        """Return (fft_points, window_length) for a trace of n_time samples."""
        n_fft = n_time if self.fft_points is None else self.fft_points
        length = int(np.floor(self.window_fraction * n_time))
        if length < MIN_WINDOW:
            raise ConfigError(
                f"window of {length} samples is too short (need >= {MIN_WINDOW}); "
                f"raise window_fraction or use longer traces"
            )
        if length > n_fft:
            raise ConfigError(f"window of {length} samples exceeds fft_points {n_fft}")
        return n_fft, length


@dataclass(frozen=True)
class Spectrogram:
    """STFT magnitudes for one trace: time rows, frequency columns."""

    magnitudes: np.ndarray
    times: np.ndarray
    freqs: np.ndarray
    trace_index: int


def hamming_window(length: int) -> np.ndarray:
    """Symmetric Hamming window: 0.54 - 0.46*cos(2*pi*n/(L-1))."""
    if length < 1:
        raise ConfigError(f"window length must be >= 1, got {length}")
    if length == 1:
        return np.ones(1)
    n = np.arange(length)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (length - 1))


def spectrogram_freqs(n_fft: int, n_time: int, dt: float, f_start: float) -> np.ndarray:
    """Frequency labels for the FFT columns, offset to physical Hz.

    A sweep bin k oscillates at k/n_time cycles per sample and sits at
    f_start + k * grid_step physically; mapping FFT bin m through the same
    rule keeps grid tones labeled exactly. With n_fft == n_time this is
    linspace(f_start, f_stop, n_fft).
    """
    grid_step = (1.0 / dt) / (n_time - 1)
    return f_start + np.arange(n_fft) * (n_time * grid_step) / n_fft


def stft_complex(values: np.ndarray, cfg: StftConfig) -> np.ndarray:
    """Complex STFT rows of a trace; row r is the hop*r-centered window.

    Edge windows reach past the record and are zero-padded so event times
    stay unbiased. Each windowed segment is zero-padded to fft_points and
    transformed with the unnormalized forward DFT, so per row
    sum|X|^2 == fft_points * sum|segment|^2.
    """
    values = np.asarray(values, dtype=complex)
    n_time = values.shape[0]
    n_fft, length = cfg.resolve(n_time)
    window = hamming_window(length)
    padded = np.zeros(n_time + length - 1, dtype=complex)
    padded[length // 2 : length // 2 + n_time] = values
    segments = sliding_window_view(padded, length)[:: cfg.hop]
    return np.fft.fft(segments * window, n=n_fft, axis=1)


def stft(trace: ComplexTrace, cfg: StftConfig | None = None, trace_index: int = 0) -> Spectrogram:
    """Magnitude spectrogram of one complex trace."""
    cfg = cfg or StftConfig()
    rows = stft_complex(trace.values, cfg)
    n_time = trace.values.shape[0]
    n_fft, _ = cfg.resolve(n_time)
    return Spectrogram(
        magnitudes=np.abs(rows),
        times=np.arange(0, n_time, cfg.hop) * trace.dt,
        freqs=spectrogram_freqs(n_fft, n_time, trace.dt, trace.f_start),
        trace_index=trace_index,
    )


def iter_stft(result: PipelineResult, cfg: StftConfig | None = None) -> Iterator[Spectrogram]:
    """Lazily transform each trace of a pipeline result, in trace order.

    One spectrogram of a long survey is a few MB; the lazy form lets
    reductions such as the peak-frequency map run without holding the
    whole stack of spectrograms at once.
    """
    cfg = cfg or StftConfig()
    dt = result.bscan.dt
    for index, row in enumerate(result.complex_stack):
        trace = ComplexTrace(values=row, dt=dt, f_start=result.f_start)
        yield stft(trace, cfg, trace_index=index)


def stack_stft(result: PipelineResult, cfg: StftConfig | None = None) -> list[Spectrogram]:
    """Spectrograms for every trace of a pipeline result, in trace order."""
    return list(iter_stft(result, cfg))


def trace_spectrogram(result: PipelineResult, index: int, cfg: StftConfig | None = None) -> Spectrogram:
    """Spectrogram of a single trace of a pipeline result."""
    n_traces = result.complex_stack.shape[0]
    if not 0 <= index < n_traces:
        raise ConfigError(f"trace {index} out of range 0..{n_traces - 1}")
    trace = ComplexTrace(values=result.complex_stack[index], dt=result.bscan.dt, f_start=result.f_start)
    return stft(trace, cfg or StftConfig(), trace_index=index)


def export_spectrogram_csv(spec: Spectrogram) -> str:
    """Spectrogram as CSV text: time down the rows, frequency across columns."""
    rows = []
    for row in spec.magnitudes:
        rows.append(",".join(f"{v:.9e}" for v in row))
    return "\n".join(rows) + "\n"


def spectrogram_sidecar(spec: Spectrogram) -> dict:
    dt = float(spec.times[1] - spec.times[0]) if spec.times.shape[0] > 1 else 0.0
    df = float(spec.freqs[1] - spec.freqs[0]) if spec.freqs.shape[0] > 1 else 0.0
    return {
        "dt_s": dt,
        "df_hz": df,
        "f_start_hz": float(spec.freqs[0]),
        "trace_index": spec.trace_index,
    }
