from pathlib import Path

import numpy as np
import pytest

from gprtfa import ConfigError, RenderSpec, render_pgm

DATA_DIR = Path(__file__).parent / "data"


def split_pgm(data: bytes):
    header, rest = data.split(b"\n", 1)
    dims, rest = rest.split(b"\n", 1)
    maxval, pixels = rest.split(b"\n", 1)
    width, height = (int(v) for v in dims.split())
    return header, width, height, int(maxval), pixels


class TestRenderPgm:
    def test_zero_matrix_renders_black(self):
        data = render_pgm(np.zeros((4, 6)))
        header, width, height, maxval, pixels = split_pgm(data)
        assert header == b"P5"
        assert (width, height) == (6, 4)
        assert maxval == 65535
        assert pixels == bytes(2 * 4 * 6)

    @pytest.mark.parametrize("normalization", ["linear", "db"])
    def test_constant_matrix_renders_white(self, normalization):
        data = render_pgm(np.full((3, 3), 7.5), RenderSpec(normalization=normalization))
        *_, pixels = split_pgm(data)
        values = np.frombuffer(pixels, dtype=">u2")
        assert np.all(values == 65535)

    def test_linear_mapping(self):
        data = render_pgm(np.array([[0.0, 1.0, 2.0]]), RenderSpec(normalization="linear"))
        *_, pixels = split_pgm(data)
        values = np.frombuffer(pixels, dtype=">u2")
        assert values.tolist() == [0, 32768, 65535]

    def test_db_floor_maps_to_black(self):
        spec = RenderSpec(normalization="db", db_floor=-40.0)
        data = render_pgm(np.array([[1.0, 1e-2, 1e-6, 0.0]]), spec)
        *_, pixels = split_pgm(data)
        values = np.frombuffer(pixels, dtype=">u2")
        assert values[0] == 65535
        assert values[1] == 0  # exactly at the floor
        assert values[2] == 0  # clipped below the floor
        assert values[3] == 0  # zero magnitude

    def test_db_midpoint(self):
        spec = RenderSpec(normalization="db", db_floor=-40.0)
        data = render_pgm(np.array([[1.0, 0.1]]), spec)  # -20 dB is halfway
        *_, pixels = split_pgm(data)
        values = np.frombuffer(pixels, dtype=">u2")
        assert values[1] == pytest.approx(32768, abs=1)

    def test_negative_values_use_magnitude(self):
        a = render_pgm(np.array([[-2.0, 1.0]]))
        b = render_pgm(np.array([[2.0, 1.0]]))
        assert a == b

    def test_crop_time_keeps_leading_rows(self):
        matrix = np.arange(50, dtype=float).reshape(10, 5)
        spec = RenderSpec(crop_time=3.5e-9)
        data = render_pgm(matrix, spec, dt=1e-9)
        _, width, height, _, _ = split_pgm(data)
        assert (width, height) == (5, 4)

    def test_crop_needs_dt(self):
        with pytest.raises(ConfigError):
            render_pgm(np.ones((4, 4)), RenderSpec(crop_time=1e-9))

    def test_crop_beyond_record_rejected(self):
        with pytest.raises(ConfigError):
            render_pgm(np.ones((4, 4)), RenderSpec(crop_time=1.0), dt=1e-9)

    def test_empty_matrix_rejected(self):
        with pytest.raises(ConfigError):
            render_pgm(np.zeros((0, 4)))

    @pytest.mark.parametrize(
        "kwargs",
        [{"normalization": "log"}, {"db_floor": 0.0}, {"db_floor": 10.0}, {"palette": "viridis"}],
    )
    def test_invalid_spec(self, kwargs):
        with pytest.raises(ConfigError):
            RenderSpec(**kwargs)

    def test_deterministic_bytes(self):
        rng = np.random.default_rng(77)
        matrix = rng.random((12, 9))
        spec = RenderSpec(normalization="db", db_floor=-30.0)
        assert render_pgm(matrix, spec) == render_pgm(matrix, spec)

    def test_golden_file(self):
        rng = np.random.default_rng(2024)
        matrix = rng.standard_normal((24, 36))
        data = render_pgm(matrix, RenderSpec(normalization="db", db_floor=-40.0))
        golden = (DATA_DIR / "render_golden.pgm").read_bytes()
        assert data == golden
