"""Synthetic stepped-frequency forward model over buried point scatterers.

Each trace's S21 is built directly in the frequency domain: a shaped
source spectrum times the sum of a direct-coupling term and one complex
exponential per scatterer, delayed by the bistatic two-way travel time and
damped by frequency-proportional soil attenuation, plus seeded complex
Gaussian noise. Travel times are exact by construction, which makes these
surveys usable as ground truth for the processing chain.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, FormatError
from .frd import FrequencyBand
from .ingest import SurveyConfig, SurveyFrequencyDomain, SweepRecord

C_VACUUM = 2.998e8


@dataclass(frozen=True)
class SoilModel:
    """Homogeneous soil: relative permittivity plus an attenuation slope.

    attenuation_slope is in nepers per meter per Hz; one-way amplitude
    loss over a path R at frequency f is exp(-slope * f * R).
    """

    rel_permittivity: float = 4.0
    attenuation_slope: float = 0.0

    def __post_init__(self) -> None:
        if self.rel_permittivity < 1.0:
            raise ConfigError(f"relative permittivity must be >= 1, got {self.rel_permittivity}")
        if self.attenuation_slope < 0.0:
            raise ConfigError(f"attenuation slope must be >= 0, got {self.attenuation_slope}")

    @property
    def wave_speed(self) -> float:
        return C_VACUUM / math.sqrt(self.rel_permittivity)


@dataclass(frozen=True)
class PointScatterer:
    """A buried point target on the scan plane."""

    x: float
    depth: float
    reflectivity: float = 1.0

    def __post_init__(self) -> None:
        if self.depth <= 0.0:
            raise ConfigError(f"scatterer depth must be positive, got {self.depth}")


@dataclass(frozen=True)
class ScattererScene:
    """Ground truth for one synthetic survey.

    source_band of None means a flat source over the whole sweep;
    otherwise the source spectrum is a raised cosine: unit gain across the
    band except for half-cosine roll-offs of source_rolloff times the band
    width just inside each edge, zero outside.
    """

    scatterers: tuple[PointScatterer, ...] = ()
    soil: SoilModel = SoilModel()
    direct_coupling_amp: float = 0.0
    source_band: FrequencyBand | None = None
    source_rolloff: float = 0.05
    noise_rms: float = 0.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.source_rolloff <= 0.5:
            raise ConfigError(f"source_rolloff must be in [0, 0.5], got {self.source_rolloff}")
        if self.noise_rms < 0.0:
            raise ConfigError(f"noise_rms must be >= 0, got {self.noise_rms}")


def travel_time(
    x: float | np.ndarray,
    scatterer: PointScatterer,
    soil: SoilModel,
    antenna_separation: float = 0.0,
) -> float | np.ndarray:
    """Two-way travel time from a midpoint at x to the scatterer and back.

    Transmit and receive antennas sit on the surface at x -/+ half the
    separation; the time is (R_tx + R_rx) / wave speed. With zero
    separation this reduces to 2*sqrt((x - x0)^2 + d^2)/v.
    """
    half = antenna_separation / 2.0
    r_tx = np.hypot(np.asarray(x) - half - scatterer.x, scatterer.depth)
    r_rx = np.hypot(np.asarray(x) + half - scatterer.x, scatterer.depth)
    t = (r_tx + r_rx) / soil.wave_speed
    return float(t) if np.isscalar(x) else t


def mean_path_length(
    x: float,
    scatterer: PointScatterer,
    soil: SoilModel,
    antenna_separation: float = 0.0,
) -> float:
    """One-way mean of the transmit and receive path lengths."""
    return travel_time(x, scatterer, soil, antenna_separation) * soil.wave_speed / 2.0


def source_spectrum(freqs: np.ndarray, band: FrequencyBand | None, rolloff: float) -> np.ndarray:
    """Raised-cosine source gains over the band (flat when band is None)."""
    if band is None:
        return np.ones_like(freqs)
    width = band.width
    ramp = rolloff * width
    gains = np.zeros_like(freqs)
    inside = (freqs >= band.f_low) & (freqs <= band.f_high)
    gains[inside] = 1.0
    if ramp > 0.0:
        low_edge = inside & (freqs < band.f_low + ramp)
        gains[low_edge] = 0.5 * (1.0 - np.cos(np.pi * (freqs[low_edge] - band.f_low) / ramp))
        high_edge = inside & (freqs > band.f_high - ramp)
        gains[high_edge] = 0.5 * (1.0 - np.cos(np.pi * (band.f_high - freqs[high_edge]) / ramp))
    return gains


def synth_sweep(scene: ScattererScene, config: SurveyConfig, trace_index: int) -> np.ndarray:
    """S21 for one trace position; deterministic per (scene seed, trace)."""
    freqs = config.frequencies
    x = trace_index * config.trace_step
    sep = config.antenna_separation
    response = np.zeros(freqs.shape[0], dtype=complex)
    if scene.direct_coupling_amp != 0.0:
        response += scene.direct_coupling_amp * np.exp(-2j * np.pi * freqs * sep / C_VACUUM)
    for scatterer in scene.scatterers:
        t = travel_time(x, scatterer, scene.soil, sep)
        r_mean = t * scene.soil.wave_speed / 2.0
        damping = np.exp(-2.0 * scene.soil.attenuation_slope * freqs * r_mean)
        response += scatterer.reflectivity * damping * np.exp(-2j * np.pi * freqs * t)
    s21 = source_spectrum(freqs, scene.source_band, scene.source_rolloff) * response
    if scene.noise_rms > 0.0:
        # Per-trace seeded substream: determinism is independent of the
        # order traces are generated in.
        rng = np.random.default_rng([scene.rng_seed, trace_index])
        scale = scene.noise_rms / math.sqrt(2.0)
        noise = rng.standard_normal(freqs.shape[0]) + 1j * rng.standard_normal(freqs.shape[0])
        s21 = s21 + scale * noise
    return s21


def synth_survey(scene: ScattererScene, config: SurveyConfig | None = None) -> SurveyFrequencyDomain:
    """Forward-model a whole survey line."""
    config = config or SurveyConfig()
    sweeps = tuple(
        SweepRecord(
            trace_index=i,
            position=i * config.trace_step,
            s21=synth_sweep(scene, config, i),
        )
        for i in range(config.n_traces)
    )
    return SurveyFrequencyDomain(config=config, sweeps=sweeps)


def scene_to_json(scene: ScattererScene) -> str:
    payload = {
        "scatterers": [
            {"x": s.x, "depth": s.depth, "reflectivity": s.reflectivity}
            for s in scene.scatterers
        ],
        "soil": {
            "rel_permittivity": scene.soil.rel_permittivity,
            "attenuation_slope": scene.soil.attenuation_slope,
        },
        "direct_coupling_amp": scene.direct_coupling_amp,
        "source_band": None
        if scene.source_band is None
        else {"f_low": scene.source_band.f_low, "f_high": scene.source_band.f_high},
        "source_rolloff": scene.source_rolloff,
        "noise_rms": scene.noise_rms,
        "rng_seed": scene.rng_seed,
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def scene_from_json(text: str) -> ScattererScene:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"scene file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise FormatError("scene file must be a JSON object")
    known = {
        "scatterers",
        "soil",
        "direct_coupling_amp",
        "source_band",
        "source_rolloff",
        "noise_rms",
        "rng_seed",
    }
    unknown = set(raw) - known
    if unknown:
        raise FormatError(f"unknown scene keys: {sorted(unknown)}")
    try:
        scatterers = tuple(PointScatterer(**item) for item in raw.get("scatterers", []))
        soil = SoilModel(**raw.get("soil", {}))
        band_raw = raw.get("source_band")
        band = None if band_raw is None else FrequencyBand(**band_raw)
        return ScattererScene(
            scatterers=scatterers,
            soil=soil,
            direct_coupling_amp=raw.get("direct_coupling_amp", 0.0),
            source_band=band,
            source_rolloff=raw.get("source_rolloff", 0.05),
            noise_rms=raw.get("noise_rms", 0.0),
            rng_seed=raw.get("rng_seed", 0),
        )
    except TypeError as exc:
        raise FormatError(f"bad scene field: {exc}") from exc


def load_scene(path: str | Path) -> ScattererScene:
    return scene_from_json(Path(path).read_text())
