"""Sweep-file parsing and survey assembly.

A survey on disk is a directory with one sweep file per antenna position
(trace_0000.s2p or trace_0000.csv) plus a survey.json holding the
acquisition configuration. Only the S21 column of a sweep is retained:
for a two-antenna system it is the transmission coefficient.
"""

from __future__ import annotations

import cmath
import json
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError, FormatError

_FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_TOUCHSTONE_FORMATS = ("ri", "ma", "db")
_CSV_HEADER = "freq_hz,re,im"
_TRACE_FILE_RE = re.compile(r"^trace_(\d{4,})\.(s2p|csv)$")

# Relative tolerance when matching a sweep's frequency grid against the
# grid implied by the survey configuration.
GRID_RTOL = 1e-6


@dataclass(frozen=True)
class SurveyConfig:
    """Acquisition geometry and sweep settings for one survey line.

    Defaults describe a 0.2-4.0 GHz stepped sweep of 1001 points recorded
    every 3 cm over 71 positions with a 0.1 m antenna separation.
    if_bandwidth and source_power are carried as metadata only.
    """

    f_start: float = 0.2e9
    f_stop: float = 4.0e9
    n_freq_points: int = 1001
    trace_step: float = 0.03
    n_traces: int = 71
    antenna_separation: float = 0.1
    if_bandwidth: float = 1000.0
    source_power: float = -10.0

    def __post_init__(self) -> None:
        if not self.f_start < self.f_stop:
            raise ConfigError(f"f_start must be below f_stop, got {self.f_start} >= {self.f_stop}")
        if self.n_freq_points < 2:
            raise ConfigError(f"need at least 2 frequency points, got {self.n_freq_points}")
        if self.trace_step <= 0:
            raise ConfigError(f"trace_step must be positive, got {self.trace_step}")
        if self.n_traces < 1:
            raise ConfigError(f"need at least 1 trace, got {self.n_traces}")
        if self.antenna_separation < 0:
            raise ConfigError(f"antenna_separation must be >= 0, got {self.antenna_separation}")

    @property
    def span(self) -> float:
        """Swept bandwidth in Hz."""
        return self.f_stop - self.f_start

    @property
    def freq_step(self) -> float:
        """Spacing of the sweep grid in Hz."""
        return self.span / (self.n_freq_points - 1)

    @property
    def dt(self) -> float:
        """Time-domain sample interval in seconds (inverse of the swept bandwidth)."""
        return 1.0 / self.span

    @property
    def frequencies(self) -> np.ndarray:
        return np.linspace(self.f_start, self.f_stop, self.n_freq_points)

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.n_traces) * self.trace_step

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SurveyConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"survey config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise FormatError("survey config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise FormatError(f"unknown survey config keys: {sorted(unknown)}")
        return cls(**raw)


@dataclass(frozen=True)
class SweepRecord:
    """One frequency-domain A-scan: complex S21 per sweep point."""

    trace_index: int
    position: float
    s21: np.ndarray


@dataclass(frozen=True)
class SurveyFrequencyDomain:
    """An assembled survey: shared config plus S21 sweeps ordered by trace."""

    config: SurveyConfig
    sweeps: tuple[SweepRecord, ...] = field(repr=False)

    @property
    def s21_matrix(self) -> np.ndarray:
        """All sweeps stacked into an (n_traces, n_freq_points) complex matrix."""
        return np.array([sw.s21 for sw in self.sweeps])

    @property
    def positions(self) -> np.ndarray:
        return np.array([sw.position for sw in self.sweeps])


def _as_text(data: str | bytes) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8", errors="replace")
    return data


def _to_complex(fmt: str, a: float, b: float) -> complex:
    """Convert a Touchstone value pair to complex linear.

    RI: a=real, b=imag. MA: a=linear magnitude, b=angle in degrees.
    DB: a=20*log10(magnitude), b=angle in degrees.
    """
    if fmt == "ri":
        return complex(a, b)
    if fmt == "db":
        a = 10.0 ** (a / 20.0)
    rad = math.radians(b)
    return complex(a * math.cos(rad), a * math.sin(rad))


def _parse_option_line(line: str, lineno: int) -> tuple[float, str, float]:
    """Parse "# <unit> S <fmt> R <z0>" and return (unit scale, fmt, z0)."""
    tokens = line[1:].split()
    unit_scale = None
    fmt = None
    z0 = 50.0
    i = 0
    while i < len(tokens):
        tok = tokens[i].lower()
        if tok in _FREQ_UNITS:
            unit_scale = _FREQ_UNITS[tok]
        elif tok in _TOUCHSTONE_FORMATS:
            fmt = tok
        elif tok == "s":
            pass
        elif tok == "r":
            if i + 1 >= len(tokens):
                raise FormatError(f"line {lineno}: option line has R with no impedance value")
            try:
                z0 = float(tokens[i + 1])
            except ValueError as exc:
                raise FormatError(f"line {lineno}: bad reference impedance {tokens[i + 1]!r}") from exc
            i += 1
        elif tok in ("y", "z", "g", "h"):
            raise FormatError(f"line {lineno}: only S-parameter files are supported, got {tokens[i]!r}")
        else:
            raise FormatError(f"line {lineno}: unrecognized option token {tokens[i]!r}")
        i += 1
    if not tokens:
        raise FormatError(f"line {lineno}: empty option line")
    # Touchstone v1 defaults: GHz, S, MA.
    if unit_scale is None:
        unit_scale = _FREQ_UNITS["ghz"]
    if fmt is None:
        fmt = "ma"
    return unit_scale, fmt, z0


def parse_touchstone(data: str | bytes) -> tuple[np.ndarray, np.ndarray]:
    """Parse a Touchstone v1 two-port file and return (freqs_hz, s21).

    Supports RI/MA/DB data formats and Hz/kHz/MHz/GHz frequency units.
    Comment lines start with '!', the single option line with '#'. Data
    rows carry 9 columns: frequency then four (a, b) parameter pairs in
    S11 S21 S12 S22 order. Frequencies must be strictly ascending.
    """
    unit_scale = None
    fmt = None
    freqs: list[float] = []
    s21: list[complex] = []
    for lineno, raw in enumerate(_as_text(data).splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("#"):
            if unit_scale is not None:
                raise FormatError(f"line {lineno}: multiple option lines")
            unit_scale, fmt, _ = _parse_option_line(line, lineno)
            continue
        if unit_scale is None:
            raise FormatError(f"line {lineno}: data before the option line")
        tokens = line.split()
        if len(tokens) != 9:
            raise DataError(f"line {lineno}: expected 9 columns, got {len(tokens)}")
        try:
            values = [float(tok) for tok in tokens]
        except ValueError as exc:
            raise DataError(f"line {lineno}: non-numeric field ({exc})") from exc
        freq = values[0] * unit_scale
        if freqs and freq <= freqs[-1]:
            raise DataError(f"line {lineno}: frequencies must be strictly ascending")
        freqs.append(freq)
        s21.append(_to_complex(fmt, values[3], values[4]))
    if unit_scale is None:
        raise FormatError("no option line found")
    if not freqs:
        raise DataError("no data rows found")
    return np.array(freqs), np.array(s21)


def emit_touchstone(freqs: Sequence[float], s21: Sequence[complex], fmt: str = "ri") -> str:
    """Render (freqs_hz, s21) as a Touchstone v1 two-port file.

    Only S21 is meaningful; the other three parameters are written as
    zeros. Zero magnitudes in DB format are written as -999 dB.
    """
    fmt = fmt.lower()
    if fmt not in _TOUCHSTONE_FORMATS:
        raise ConfigError(f"unsupported touchstone format {fmt!r}")
    lines = ["! gprtfa sweep export, S21 only", f"# Hz S {fmt.upper()} R 50"]
    if fmt == "ri":
        zero = "0 0"
        pairs = [f"{v.real:.12e} {v.imag:.12e}" for v in s21]
    else:
        zero = "-999 0" if fmt == "db" else "0 0"
        pairs = []
        for v in s21:
            mag = abs(v)
            ang = math.degrees(cmath.phase(v))
            if fmt == "db":
                level = -999.0 if mag == 0.0 else 20.0 * math.log10(mag)
                pairs.append(f"{level:.12e} {ang:.12e}")
            else:
                pairs.append(f"{mag:.12e} {ang:.12e}")
    for f, pair in zip(freqs, pairs):
        lines.append(f"{f:.12e} {zero} {pair} {zero} {zero}")
    return "\n".join(lines) + "\n"


def parse_sweep_csv(data: str | bytes) -> tuple[np.ndarray, np.ndarray]:
    """Parse the 'freq_hz,re,im' sweep CSV and return (freqs_hz, s21)."""
    lines = _as_text(data).splitlines()
    if not lines or lines[0].strip() != _CSV_HEADER:
        raise FormatError(f"missing CSV header {_CSV_HEADER!r}")
    freqs: list[float] = []
    s21: list[complex] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise DataError(f"line {lineno}: expected 3 fields, got {len(fields)}")
        try:
            freq, re_part, im_part = (float(x) for x in fields)
        except ValueError as exc:
            raise DataError(f"line {lineno}: non-numeric field ({exc})") from exc
        if any(math.isnan(x) for x in (freq, re_part, im_part)):
            raise DataError(f"line {lineno}: NaN field")
        if freqs and freq <= freqs[-1]:
            raise DataError(f"line {lineno}: frequencies must be strictly ascending")
        freqs.append(freq)
        s21.append(complex(re_part, im_part))
    if not freqs:
        raise DataError("no data rows found")
    return np.array(freqs), np.array(s21)


def emit_sweep_csv(freqs: Sequence[float], s21: Sequence[complex]) -> str:
    lines = [_CSV_HEADER]
    for f, v in zip(freqs, s21):
        lines.append(f"{f:.12e},{v.real:.12e},{v.imag:.12e}")
    return "\n".join(lines) + "\n"


def assemble_survey(
    config: SurveyConfig,
    per_trace_inputs: Iterable[tuple[np.ndarray, np.ndarray]],
) -> SurveyFrequencyDomain:
    """Assemble parsed (grid, s21) pairs, in trace order, into a survey.

    Every grid must match the configuration's grid to within one part in
    1e6; the number of inputs must equal config.n_traces. Positions are
    assigned as trace_index * trace_step.
    """
    inputs = list(per_trace_inputs)
    if len(inputs) != config.n_traces:
        raise ConfigError(f"expected {config.n_traces} traces, got {len(inputs)}")
    expected = config.frequencies
    sweeps = []
    for index, (grid, s21) in enumerate(inputs):
        grid = np.asarray(grid, dtype=float)
        s21 = np.asarray(s21, dtype=complex)
        if grid.shape[0] != config.n_freq_points or s21.shape[0] != config.n_freq_points:
            raise ConfigError(
                f"trace {index}: sweep has {grid.shape[0]} points, config expects {config.n_freq_points}"
            )
        if not np.allclose(grid, expected, rtol=GRID_RTOL, atol=0.0):
            raise ConfigError(f"trace {index}: frequency grid does not match the survey config")
        sweeps.append(SweepRecord(trace_index=index, position=index * config.trace_step, s21=s21))
    return SurveyFrequencyDomain(config=config, sweeps=tuple(sweeps))


def write_survey(survey: SurveyFrequencyDomain, directory: str | Path, fmt: str = "s2p") -> Path:
    """Write survey.json plus one sweep file per trace; returns the directory."""
    if fmt not in ("s2p", "csv"):
        raise ConfigError(f"unsupported sweep file format {fmt!r}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "survey.json").write_text(survey.config.to_json() + "\n")
    freqs = survey.config.frequencies
    for sweep in survey.sweeps:
        name = f"trace_{sweep.trace_index:04d}.{fmt}"
        if fmt == "s2p":
            text = emit_touchstone(freqs, sweep.s21, fmt="ri")
        else:
            text = emit_sweep_csv(freqs, sweep.s21)
        (directory / name).write_text(text)
    return directory


def load_survey(directory: str | Path) -> SurveyFrequencyDomain:
    """Load a survey directory written by write_survey (or a VNA export)."""
    directory = Path(directory)
    config_path = directory / "survey.json"
    if not config_path.is_file():
        raise FormatError(f"{directory}: missing survey.json")
    config = SurveyConfig.from_json(config_path.read_text())
    found: dict[int, Path] = {}
    for path in directory.iterdir():
        m = _TRACE_FILE_RE.match(path.name)
        if not m:
            continue
        index = int(m.group(1))
        if index in found:
            raise FormatError(f"{directory}: duplicate sweep files for trace {index}")
        found[index] = path
    if sorted(found) != list(range(len(found))):
        raise FormatError(f"{directory}: trace files are not contiguous from 0")
    inputs = []
    for index in range(len(found)):
        path = found[index]
        text = path.read_text()
        if path.suffix == ".s2p":
            inputs.append(parse_touchstone(text))
        else:
            inputs.append(parse_sweep_csv(text))
    return assemble_survey(config, inputs)
