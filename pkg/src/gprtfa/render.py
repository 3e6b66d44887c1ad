"""Deterministic 16-bit grayscale PGM rendering of magnitude matrices.

PGM keeps the raster output dependency-free and byte-reproducible; anyone
wanting PNG can convert downstream. Linear normalization maps the matrix
maximum to white (65535); dB normalization maps 20*log10(v/max) clipped to
[db_floor, 0] onto the full range. An all-zero matrix renders black under
either rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

PGM_MAXVAL = 65535


@dataclass(frozen=True)
class RenderSpec:
    """How to map magnitudes onto gray levels."""

    normalization: str = "linear"
    db_floor: float = -40.0
    crop_time: float | None = None
    palette: str = "grayscale"

    def __post_init__(self) -> None:
        if self.normalization not in ("linear", "db"):
            raise ConfigError(f"unknown normalization {self.normalization!r}")
        if self.db_floor >= 0.0:
            raise ConfigError(f"db_floor must be negative, got {self.db_floor}")
        if self.palette != "grayscale":
            raise ConfigError(f"unsupported palette {self.palette!r}")


def render_pgm(matrix: np.ndarray, spec: RenderSpec | None = None, dt: float | None = None) -> bytes:
    """Render a real matrix as binary 16-bit PGM bytes (rows become scanlines).

    crop_time keeps only the leading rows whose time (row index times dt)
    does not exceed it; dt is required for cropping.
    """
    spec = spec or RenderSpec()
    mags = np.abs(np.asarray(matrix, dtype=float))
    if mags.ndim != 2 or mags.size == 0:
        raise ConfigError(f"expected a nonempty 2D matrix, got shape {mags.shape}")
    if spec.crop_time is not None:
        if dt is None or dt <= 0.0:
            raise ConfigError("crop_time needs the row time step dt")
        if spec.crop_time > (mags.shape[0] - 1) * dt:
            raise ConfigError(
                f"crop_time {spec.crop_time} s exceeds the record length "
                f"{(mags.shape[0] - 1) * dt:.3e} s"
            )
        n_rows = int(np.floor(spec.crop_time / dt)) + 1
        mags = mags[:n_rows]
    peak = mags.max()
    if peak == 0.0:
        levels = np.zeros_like(mags)
    elif spec.normalization == "linear":
        levels = mags / peak
    else:
        with np.errstate(divide="ignore"):
            db = 20.0 * np.log10(mags / peak)
        db = np.clip(db, spec.db_floor, 0.0)
        levels = (db - spec.db_floor) / (-spec.db_floor)
    pixels = np.round(levels * PGM_MAXVAL).astype(">u2")
    height, width = pixels.shape
    header = f"P5\n{width} {height}\n{PGM_MAXVAL}\n".encode("ascii")
    return header + pixels.tobytes()
