"""Peak-frequency response maps and band-selective B-scan regeneration.

For each trace's spectrogram, the strongest frequency of every time row is
extracted; entries whose magnitude falls below a fraction of the survey's
global spectrogram maximum are zeroed. The surviving (trace, time) ->
frequency map shows where and when buried targets respond, a weighted
quantile of it yields the responsive band, and masking the raw sweeps to
that band before rerunning the basic chain regenerates a cleaner B-scan.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .errors import ConfigError, DegenerateDataError
from .ingest import SurveyFrequencyDomain
from .preprocess import BScanTime, PipelineParams, basic_pipeline
from .tfa import Spectrogram


@dataclass(frozen=True)
class FrequencyBand:
    """A closed frequency interval in Hz."""

    f_low: float
    f_high: float

    def __post_init__(self) -> None:
        if not self.f_low < self.f_high:
            raise ConfigError(f"band must have f_low < f_high, got [{self.f_low}, {self.f_high}]")

    @property
    def width(self) -> float:
        return self.f_high - self.f_low


@dataclass(frozen=True)
class FrdMap:
    """Peak frequency and magnitude per (trace, time), zero where suppressed."""

    peak_freq: np.ndarray = field(repr=False)
    peak_mag: np.ndarray = field(repr=False)
    threshold: float
    freqs: np.ndarray = field(repr=False)
    degenerate: bool = False

    @property
    def n_traces(self) -> int:
        return self.peak_freq.shape[0]


def row_max_extract(spec: Spectrogram) -> tuple[np.ndarray, np.ndarray]:
    """Strongest magnitude and its frequency for every time row.

    Ties resolve to the lowest frequency bin.
    """
    if spec.magnitudes.size == 0:
        raise ConfigError("empty spectrogram")
    best = np.argmax(spec.magnitudes, axis=1)
    mags = spec.magnitudes[np.arange(best.shape[0]), best]
    return mags, spec.freqs[best]


def build_frd(specs: Iterable[Spectrogram], threshold_frac: float = 0.25) -> FrdMap:
    """Reduce per-trace spectrograms to a thresholded peak-frequency map.

    The threshold is threshold_frac times the global maximum over every
    spectrogram of the B-scan (not per trace). Entries below it are zeroed
    in both planes. An all-zero input yields an all-zero map flagged
    degenerate instead of an error so callers can decide how to report it.
    """
    if not 0.0 < threshold_frac < 1.0:
        raise ConfigError(f"threshold_frac must be in (0, 1), got {threshold_frac}")
    mag_rows = []
    freq_rows = []
    axis: np.ndarray | None = None
    for spec in specs:
        if axis is None:
            axis = spec.freqs
        elif spec.freqs.shape != axis.shape or not np.allclose(spec.freqs, axis):
            raise ConfigError(f"trace {spec.trace_index}: spectrogram axes differ across traces")
        mags, freqs = row_max_extract(spec)
        mag_rows.append(mags)
        freq_rows.append(freqs)
    if axis is None:
        raise ConfigError("no spectrograms given")
    peak_mag = np.array(mag_rows)
    peak_freq = np.array(freq_rows)
    global_max = peak_mag.max()
    if global_max == 0.0:
        return FrdMap(
            peak_freq=np.zeros_like(peak_freq),
            peak_mag=peak_mag,
            threshold=0.0,
            freqs=axis,
            degenerate=True,
        )
    threshold = threshold_frac * global_max
    keep = peak_mag >= threshold
    return FrdMap(
        peak_freq=np.where(keep, peak_freq, 0.0),
        peak_mag=np.where(keep, peak_mag, 0.0),
        threshold=threshold,
        freqs=axis,
    )


def occupancy_projection(frd: FrdMap) -> np.ndarray:
    """Magnitude mass per (trace, frequency bin) of the surviving entries.

    A secondary trace-versus-frequency view of the map; bins follow
    frd.freqs.
    """
    n_traces = frd.peak_freq.shape[0]
    out = np.zeros((n_traces, frd.freqs.shape[0]))
    for i in range(n_traces):
        kept = frd.peak_mag[i] > 0.0
        if not np.any(kept):
            continue
        bins = np.searchsorted(frd.freqs, frd.peak_freq[i][kept])
        bins = np.clip(bins, 0, frd.freqs.shape[0] - 1)
        np.add.at(out[i], bins, frd.peak_mag[i][kept])
    return out


def threshold_occupancy(specs: Iterable[Spectrogram], threshold: float) -> np.ndarray:
    """Above-threshold magnitude mass per (trace, frequency bin), all bins.

    Unlike the peak-frequency map this keeps every bin at or above the
    threshold, not just each row's maximum; the threshold is an absolute
    magnitude (take it from a built map to reuse its global rule).
    """
    rows = []
    for spec in specs:
        mags = spec.magnitudes
        rows.append(np.where(mags >= threshold, mags, 0.0).sum(axis=0))
    if not rows:
        raise ConfigError("no spectrograms given")
    return np.array(rows)


def estimate_band(frd: FrdMap, coverage: float = 0.90) -> FrequencyBand:
    """Tightest band holding at least `coverage` of the map's magnitude mass.

    Edges are the (1-coverage)/2 and 1-(1-coverage)/2 magnitude-weighted
    quantiles of the surviving peak frequencies, snapped outward to bin
    values; a degenerate-width result widens to one bin.
    """
    if not 0.0 < coverage <= 1.0:
        raise ConfigError(f"coverage must be in (0, 1], got {coverage}")
    mask = frd.peak_mag > 0.0
    if frd.degenerate or not np.any(mask):
        raise DegenerateDataError("peak-frequency map has no surviving entries")
    freqs = frd.peak_freq[mask]
    weights = frd.peak_mag[mask]
    order = np.argsort(freqs, kind="stable")
    freqs = freqs[order]
    cum = np.cumsum(weights[order])
    total = cum[-1]
    tail = (1.0 - coverage) / 2.0
    slack = 1e-12 * total
    lo = freqs[np.searchsorted(cum, tail * total - slack, side="left")]
    hi = freqs[np.searchsorted(cum, (1.0 - tail) * total - slack, side="left")]
    grid = frd.freqs
    f_low = grid[np.searchsorted(grid, lo + 1e-9, side="right") - 1]
    f_high = grid[min(np.searchsorted(grid, hi - 1e-9, side="left"), grid.shape[0] - 1)]
    if f_low >= f_high:
        step = grid[1] - grid[0] if grid.shape[0] > 1 else 1.0
        if f_high + step <= grid[-1] + 1e-9 * step:
            f_high = f_low + step
        else:
            f_low = f_high - step
    return FrequencyBand(f_low=float(f_low), f_high=float(f_high))


def band_gains(freqs: np.ndarray, band: FrequencyBand, taper_bins: int = 5) -> np.ndarray:
    """Per-bin gains of the band mask: 1 inside, cosine roll-off outside.

    The passband keeps unit gain exactly; taper_bins extra bins on each
    side ramp down with a raised cosine, zero beyond. taper_bins of 0 is a
    hard cut.
    """
    if taper_bins < 0:
        raise ConfigError(f"taper width must be >= 0 bins, got {taper_bins}")
    inside = (freqs >= band.f_low) & (freqs <= band.f_high)
    if not np.any(inside):
        raise ConfigError(
            f"band [{band.f_low}, {band.f_high}] Hz contains no sweep points "
            f"in [{freqs[0]}, {freqs[-1]}] Hz"
        )
    gains = inside.astype(float)
    if taper_bins > 0:
        first = int(np.argmax(inside))
        last = int(freqs.shape[0] - 1 - np.argmax(inside[::-1]))
        ramp = 0.5 * (1.0 + np.cos(np.pi * np.arange(1, taper_bins + 1) / (taper_bins + 1)))
        for step, gain in enumerate(ramp, start=1):
            if first - step >= 0 and not inside[first - step]:
                gains[first - step] = gain
            if last + step < freqs.shape[0] and not inside[last + step]:
                gains[last + step] = gain
    return gains


def filter_survey(
    survey: SurveyFrequencyDomain,
    band: FrequencyBand,
    taper_bins: int = 5,
) -> SurveyFrequencyDomain:
    """Zero every sweep's S21 outside the band (tapered), keeping the grid."""
    config = survey.config
    if band.f_low < config.f_start or band.f_high > config.f_stop:
        raise ConfigError(
            f"band [{band.f_low}, {band.f_high}] Hz lies outside the sweep span "
            f"[{config.f_start}, {config.f_stop}] Hz"
        )
    gains = band_gains(config.frequencies, band, taper_bins)
    sweeps = tuple(replace(sw, s21=sw.s21 * gains) for sw in survey.sweeps)
    return SurveyFrequencyDomain(config=config, sweeps=sweeps)


def bandpass_regenerate(
    survey: SurveyFrequencyDomain,
    band: FrequencyBand,
    params: PipelineParams | None = None,
    taper_bins: int = 5,
) -> BScanTime:
    """Rerun the basic chain on band-limited sweeps.

    Output axes match the unfiltered B-scan; with the full sweep span and
    any taper the result equals the unfiltered pipeline output exactly.
    """
    return basic_pipeline(filter_survey(survey, band, taper_bins), params).bscan


def export_frd_csv(frd: FrdMap) -> tuple[str, str]:
    """The two map planes as CSV text (time rows, trace columns)."""
    freq_rows = []
    mag_rows = []
    for row in frd.peak_freq.T:
        freq_rows.append(",".join(f"{v:.9e}" for v in row))
    for row in frd.peak_mag.T:
        mag_rows.append(",".join(f"{v:.9e}" for v in row))
    return "\n".join(freq_rows) + "\n", "\n".join(mag_rows) + "\n"


def frd_sidecar(frd: FrdMap, band: FrequencyBand | None) -> dict:
    return {
        "threshold": float(frd.threshold),
        "degenerate": frd.degenerate,
        "band_estimate_hz": None if band is None else [band.f_low, band.f_high],
    }
