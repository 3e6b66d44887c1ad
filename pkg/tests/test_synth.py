import math

import numpy as np
import pytest

from gprtfa import ConfigError, FrequencyBand
from gprtfa.preprocess import ifft_to_time
from gprtfa.synth import (
    C_VACUUM,
    PointScatterer,
    ScattererScene,
    SoilModel,
    load_scene,
    mean_path_length,
    scene_from_json,
    scene_to_json,
    source_spectrum,
    synth_survey,
    travel_time,
)


def hand_travel_time(x, x0, depth, eps_r, sep):
    """Independent restatement of the bistatic two-way time."""
    v = C_VACUUM / math.sqrt(eps_r)
    r_tx = math.hypot(x - sep / 2 - x0, depth)
    r_rx = math.hypot(x + sep / 2 - x0, depth)
    return (r_tx + r_rx) / v


class TestTravelTime:
    def test_monostatic_shallow(self):
        sc = PointScatterer(x=0.0, depth=0.1)
        soil = SoilModel(rel_permittivity=4.0)
        t = travel_time(0.0, sc, soil, antenna_separation=0.0)
        assert t == pytest.approx(hand_travel_time(0.0, 0.0, 0.1, 4.0, 0.0), rel=1e-12)
        # rounded hand value 2*0.1/1.5e8
        assert t == pytest.approx(1.333e-9, abs=2e-12)

    def test_bistatic_shallow(self):
        sc = PointScatterer(x=0.0, depth=0.1)
        t = travel_time(0.0, sc, SoilModel(4.0), antenna_separation=0.1)
        assert t == pytest.approx(hand_travel_time(0.0, 0.0, 0.1, 4.0, 0.1), rel=1e-12)
        assert t == pytest.approx(1.491e-9, abs=2e-12)

    def test_bistatic_deep(self):
        sc = PointScatterer(x=0.0, depth=0.3)
        t = travel_time(0.0, sc, SoilModel(4.0), antenna_separation=0.1)
        assert t == pytest.approx(hand_travel_time(0.0, 0.0, 0.3, 4.0, 0.1), rel=1e-12)
        assert t == pytest.approx(4.055e-9, abs=5e-12)

    def test_vectorized_over_positions(self):
        sc = PointScatterer(x=1.0, depth=0.2)
        soil = SoilModel(9.0)
        xs = np.array([0.5, 1.0, 1.5])
        ts = travel_time(xs, sc, soil, 0.1)
        for x, t in zip(xs, ts):
            assert t == pytest.approx(hand_travel_time(x, 1.0, 0.2, 9.0, 0.1), rel=1e-12)

    def test_monotone_in_lateral_offset(self):
        sc = PointScatterer(x=1.0, depth=0.15)
        xs = np.linspace(1.0, 2.0, 21)
        ts = travel_time(xs, sc, SoilModel(4.0), 0.1)
        assert np.all(np.diff(ts) > 0)

    def test_mean_path_length_monostatic(self):
        sc = PointScatterer(x=0.3, depth=0.2)
        r = mean_path_length(0.7, sc, SoilModel(4.0), 0.0)
        assert r == pytest.approx(math.hypot(0.4, 0.2), rel=1e-12)


class TestSourceSpectrum:
    def test_none_band_is_flat(self):
        freqs = np.linspace(0.2e9, 4.0e9, 11)
        assert np.all(source_spectrum(freqs, None, 0.05) == 1.0)

    def test_zero_outside_band(self):
        freqs = np.linspace(0.2e9, 4.0e9, 1001)
        gains = source_spectrum(freqs, FrequencyBand(0.4e9, 2.5e9), 0.05)
        assert np.all(gains[freqs < 0.4e9] == 0.0)
        assert np.all(gains[freqs > 2.5e9] == 0.0)

    def test_flat_top_and_rolloff(self):
        freqs = np.linspace(0.2e9, 4.0e9, 1001)
        band = FrequencyBand(0.4e9, 2.5e9)
        gains = source_spectrum(freqs, band, 0.1)
        ramp = 0.1 * band.width
        flat = (freqs >= band.f_low + ramp) & (freqs <= band.f_high - ramp)
        assert np.all(gains[flat] == 1.0)
        rising = (freqs >= band.f_low) & (freqs < band.f_low + ramp)
        assert np.all(np.diff(gains[rising]) > 0)

    def test_zero_rolloff_is_rectangular(self):
        freqs = np.linspace(0.2e9, 4.0e9, 101)
        gains = source_spectrum(freqs, FrequencyBand(1.0e9, 2.0e9), 0.0)
        inside = (freqs >= 1.0e9) & (freqs <= 2.0e9)
        assert np.array_equal(gains, inside.astype(float))


class TestSynthSurvey:
    def test_coupling_only_traces_identical(self, small_config):
        survey = synth_survey(ScattererScene(direct_coupling_amp=1.0), small_config)
        m = survey.s21_matrix
        assert np.array_equal(m, np.broadcast_to(m[0], m.shape))

    def test_determinism_bit_identical(self, small_config):
        scene = ScattererScene(
            scatterers=(PointScatterer(x=0.06, depth=0.2),),
            direct_coupling_amp=0.7,
            noise_rms=0.05,
            rng_seed=2024,
        )
        a = synth_survey(scene, small_config).s21_matrix
        b = synth_survey(scene, small_config).s21_matrix
        assert np.array_equal(a, b)

    def test_two_scatterers_superpose(self, small_config):
        s1 = PointScatterer(x=0.03, depth=0.1, reflectivity=0.5)
        s2 = PointScatterer(x=0.09, depth=0.3, reflectivity=1.2)
        soil = SoilModel(4.0, 1e-10)
        both = synth_survey(ScattererScene(scatterers=(s1, s2), soil=soil), small_config)
        only1 = synth_survey(ScattererScene(scatterers=(s1,), soil=soil), small_config)
        only2 = synth_survey(ScattererScene(scatterers=(s2,), soil=soil), small_config)
        total = only1.s21_matrix + only2.s21_matrix
        err = np.abs(both.s21_matrix - total).max()
        assert err <= 1e-12 * np.abs(total).max()

    def test_attenuation_monotone_in_frequency(self, small_config):
        scene = ScattererScene(
            scatterers=(PointScatterer(x=0.06, depth=0.25),),
            soil=SoilModel(4.0, 2e-9),
        )
        survey = synth_survey(scene, small_config)
        mags = np.abs(survey.s21_matrix)
        assert np.all(np.diff(mags, axis=1) <= 1e-15)

    def test_hyperbola_matches_travel_time_every_trace(self, default_config):
        scatterer = PointScatterer(x=1.05, depth=0.2)
        scene = ScattererScene(scatterers=(scatterer,))
        survey = synth_survey(scene, default_config)
        for sweep in survey.sweeps[::7]:
            trace = ifft_to_time(sweep, default_config)
            peak = np.argmax(np.abs(trace.values))
            expected = travel_time(sweep.position, scatterer, scene.soil, 0.1)
            assert abs(peak * trace.dt - expected) <= trace.dt

    def test_direct_coupling_phase(self, small_config):
        survey = synth_survey(ScattererScene(direct_coupling_amp=2.0), small_config)
        freqs = small_config.frequencies
        expected = 2.0 * np.exp(-2j * np.pi * freqs * 0.1 / C_VACUUM)
        assert np.abs(survey.s21_matrix[0] - expected).max() <= 1e-12 * 2.0


class TestSceneValidation:
    def test_permittivity_below_one(self):
        with pytest.raises(ConfigError):
            SoilModel(rel_permittivity=0.5)

    def test_negative_attenuation(self):
        with pytest.raises(ConfigError):
            SoilModel(attenuation_slope=-1e-9)

    def test_non_positive_depth(self):
        with pytest.raises(ConfigError):
            PointScatterer(x=0.0, depth=0.0)

    def test_negative_noise(self):
        with pytest.raises(ConfigError):
            ScattererScene(noise_rms=-1.0)

    def test_rolloff_range(self):
        with pytest.raises(ConfigError):
            ScattererScene(source_rolloff=0.8)


class TestSceneJson:
    def test_round_trip(self):
        scene = ScattererScene(
            scatterers=(PointScatterer(x=1.0, depth=0.2, reflectivity=0.4),),
            soil=SoilModel(13.0, 1e-9),
            direct_coupling_amp=0.9,
            source_band=FrequencyBand(0.4e9, 2.0e9),
            source_rolloff=0.08,
            noise_rms=0.02,
            rng_seed=99,
        )
        assert scene_from_json(scene_to_json(scene)) == scene

    def test_round_trip_without_band(self):
        scene = ScattererScene(scatterers=(PointScatterer(x=0.0, depth=0.1),))
        assert scene_from_json(scene_to_json(scene)) == scene

    def test_unknown_key_rejected(self):
        from gprtfa.errors import FormatError

        with pytest.raises(FormatError):
            scene_from_json('{"wavelength": 1}')

    def test_bad_json_rejected(self):
        from gprtfa.errors import FormatError

        with pytest.raises(FormatError):
            scene_from_json("{not json")

    def test_load_scene_file(self, tmp_path):
        scene = ScattererScene(scatterers=(PointScatterer(x=0.5, depth=0.3),))
        path = tmp_path / "scene.json"
        path.write_text(scene_to_json(scene))
        assert load_scene(path) == scene
