"""Tests for correlation sounding, tap detection and aggregation."""

import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np
import numpy.testing as npt

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "scripts"))

from commands.common import sound_link  # noqa: E402
from dsp.channel import ChannelFrame, EmulatorConfig, TapSet, emulate  # noqa: E402
from dsp.sequences import CodeSequence, SequenceFamily, generate_glfsr, generate_golay  # noqa: E402
from dsp.sounder import (  # noqa: E402
    CorrelationMode,
    DetectedTap,
    SounderConfig,
    aggregate,
    correlate,
    covering_glfsr_degree,
    detect_taps,
    path_gains,
    report_to_csv,
    report_to_json,
    sound,
)
from dsp.waveform import IqWaveform, modulate_bpsk  # noqa: E402
from scenario import single_frame_scenario  # noqa: E402
from utils.errors import SoundingError  # noqa: E402

FOUR_TAP_DB = {0: -3.0, 128: -20.0, 200: -15.0, 400: -8.0}
BASE_LOSS_DB = 57.55


def four_tap_report(noise: bool, frames: int, seed: int = 0):
    scenario = single_frame_scenario({(0, 1): TapSet.from_db(FOUR_TAP_DB)})
    return sound_link(scenario, (0, 1), generate_glfsr(8), 50e6, frames, noise=noise,
                      base_loss_db=BASE_LOSS_DB, seed=seed,
                      config=SounderConfig(min_separation=1)).report


class TestCorrelate(unittest.TestCase):

    def test_linear_peak_spacing(self):
        for code in (generate_glfsr(8), generate_golay(128)):
            wave = modulate_bpsk(code, 1e6, repetitions=3)
            mag = correlate(wave, code, mode=CorrelationMode.LINEAR).magnitude
            peaks = np.flatnonzero(mag >= mag.max() - 1e-9)
            npt.assert_array_equal(np.diff(peaks), [code.length, code.length])

    def test_linear_peak_is_unit_gain(self):
        code = generate_glfsr(7)
        cir = correlate(modulate_bpsk(code, 1e6, repetitions=2), code)
        self.assertAlmostEqual(float(cir.magnitude.max()), 1.0)
        self.assertEqual(len(cir), 127 + 1)

    def test_periodic_two_valued(self):
        code = generate_glfsr(6)
        cir = correlate(modulate_bpsk(code, 1e6), code, mode=CorrelationMode.PERIODIC)
        self.assertEqual(cir.frame_count, 1)
        self.assertAlmostEqual(cir.h_i[0], 1.0)
        npt.assert_allclose(cir.h_i[1:], -1.0 / 63, atol=1e-12)

    def test_deconvolved_exact_on_steady_state(self):
        code = generate_glfsr(8)
        rate = 100e6
        wave = modulate_bpsk(code, rate, repetitions=3)
        frame = ChannelFrame(0, {(0, 1): TapSet.from_dict({0: 0.5, 17: 0.25j})})
        config = EmulatorConfig(sample_rate=rate, base_loss_db=0.0, noise_enabled=False)
        received = emulate({0: wave}, frame, config)[1]
        cir = correlate(received, code, mode=CorrelationMode.DECONVOLVED).drop_frames(1)
        h = cir.h_i[:255] + 1j * cir.h_q[:255]
        expected = np.zeros(255, dtype=complex)
        expected[0], expected[17] = 0.5, 0.25j
        npt.assert_allclose(h, expected, atol=1e-12)

    def test_spectral_null_rejected(self):
        flat = CodeSequence(SequenceFamily.GLFSR, np.ones(8))
        wave = IqWaveform(np.ones(16), 1e6)
        with self.assertRaises(SoundingError):
            correlate(wave, flat, mode=CorrelationMode.DECONVOLVED)

    def test_capture_shorter_than_period(self):
        code = generate_glfsr(8)
        with self.assertRaises(SoundingError):
            correlate(IqWaveform(np.ones(100), 1e6), code)


class TestDetectAndAggregate(unittest.TestCase):

    def test_min_separation_suppresses_neighbours(self):
        code = generate_glfsr(8)
        rate = 100e6
        frame = ChannelFrame(0, {(0, 1): TapSet.from_dict({0: 1.0, 1: 0.5, 60: 0.3})})
        config = EmulatorConfig(sample_rate=rate, base_loss_db=0.0, noise_enabled=False)
        received = emulate({0: modulate_bpsk(code, rate, repetitions=2)}, frame, config)[1]
        cir = correlate(received, code, mode=CorrelationMode.DECONVOLVED).drop_frames(1)
        every = detect_taps(cir, min_separation=1)[0]
        self.assertEqual([t.peak_lag for t in every], [0, 1, 60])
        spaced = detect_taps(cir, min_separation=3)[0]
        self.assertEqual([t.peak_lag for t in spaced], [0, 60])

    def test_periodic_shoulders_are_not_taps(self):
        code = generate_glfsr(8)
        wave = modulate_bpsk(code, 1e6, samples_per_chip=2, repetitions=2)
        cir = correlate(wave, code, samples_per_chip=2, mode=CorrelationMode.PERIODIC)
        self.assertAlmostEqual(float(cir.magnitude[1]), float(cir.magnitude[509]))
        for taps in detect_taps(cir, 40.0, 1):
            self.assertEqual([t.peak_lag % 510 for t in taps], [0])

    def test_linear_frames_report_local_maxima(self):
        code = generate_glfsr(7)
        wave = modulate_bpsk(code, 1e6, samples_per_chip=2, repetitions=3)
        cir = correlate(wave, code, samples_per_chip=2)
        lags = [t.peak_lag for taps in detect_taps(cir, 40.0, 1) for t in taps]
        self.assertEqual(lags, [0, 254, 508])

    def test_noise_only_frames_are_empty(self):
        code = generate_glfsr(8)
        rng = np.random.default_rng(5)
        noise = IqWaveform(rng.standard_normal(255 * 5) + 1j * rng.standard_normal(255 * 5), 1e6)
        cir = correlate(noise, code, mode=CorrelationMode.PERIODIC)
        frames = detect_taps(cir)
        self.assertEqual(len(frames), 5)
        self.assertTrue(all(taps == [] for taps in frames))

    def test_path_gains(self):
        taps = [DetectedTap(0, 0, 0.0, 0.1, -20.0), DetectedTap(0, 3, 3e-8, 0.0, -np.inf)]
        gains = path_gains(taps, p_t=10.0, g_t=2.0, g_r=1.0)
        self.assertAlmostEqual(gains[0], -33.0)
        self.assertEqual(gains[1], -np.inf)

    def test_aggregate_tracks_and_pairwise(self):
        frames = [
            [DetectedTap(f, 0, 0.0, 1.0, -3.0 + d), DetectedTap(f, 64, 1.28e-6, 0.1, -20.0 - d)]
            for f, d in enumerate((0.0, 0.2, -0.2))
        ]
        report = aggregate(frames, 255, 50e6)
        self.assertEqual([t.grid_index for t in report.tracks], [0, 128])
        self.assertEqual(report.tracks[0].count, 3)
        self.assertAlmostEqual(report.tracks[0].mean_gain_db, -3.0)
        mean, std = report.strongest_vs_weakest()
        self.assertAlmostEqual(mean, 17.0)
        self.assertGreater(std, 0.0)
        self.assertAlmostEqual(report.d_peak, 255 / 50e6)

    def test_aggregate_needs_frames(self):
        with self.assertRaises(SoundingError):
            aggregate([])


class TestSoundPipeline(unittest.TestCase):

    def test_four_tap_clean_recovery(self):
        report = four_tap_report(noise=False, frames=20)
        found = {t.grid_index: t for t in report.tracks}
        self.assertEqual(sorted(found), [0, 128, 200, 400])
        for index, gain_db in FOUR_TAP_DB.items():
            self.assertEqual(found[index].count, 20)
            for g in found[index].gains_db:
                self.assertAlmostEqual(g + BASE_LOSS_DB, gain_db, delta=1e-6)

    def test_four_tap_with_noise(self):
        report = four_tap_report(noise=True, frames=200, seed=11)
        found = {t.grid_index: t for t in report.tracks}
        self.assertEqual(sorted(found), [0, 128, 200, 400])
        for index, gain_db in FOUR_TAP_DB.items():
            self.assertAlmostEqual(found[index].mean_gain_db + BASE_LOSS_DB, gain_db, delta=0.5)
        self.assertGreater(found[128].std_gain_db, found[0].std_gain_db)

    def test_delay_beyond_code_period_rejected(self):
        scenario = single_frame_scenario({(0, 1): TapSet.from_db({0: -3.0, 300: -10.0, 510: -8.0})})
        with self.assertRaises(SoundingError) as ctx:
            sound_link(scenario, (0, 1), generate_glfsr(8), 50e6, 5, noise=False)
        self.assertEqual(ctx.exception.details["max_delay_samples"], 255)
        self.assertEqual(covering_glfsr_degree(255), 9)

    def test_last_grid_slot_recovered_with_longer_code(self):
        taps_db = {0: -3.0, 300: -10.0, 510: -8.0}
        scenario = single_frame_scenario({(0, 1): TapSet.from_db(taps_db)})
        report = sound_link(scenario, (0, 1), generate_glfsr(9), 50e6, 5, noise=False,
                            base_loss_db=BASE_LOSS_DB).report
        self.assertEqual(len(report.frames), 5)
        found = {t.grid_index: t for t in report.tracks}
        self.assertEqual(sorted(found), [0, 300, 510])
        for index, gain_db in taps_db.items():
            self.assertAlmostEqual(found[index].mean_gain_db + BASE_LOSS_DB, gain_db, delta=1e-6)

    def test_four_tap_at_100_msps(self):
        scenario = single_frame_scenario({(0, 1): TapSet.from_db(FOUR_TAP_DB)})
        with self.assertRaises(SoundingError):
            sound_link(scenario, (0, 1), generate_glfsr(8), 100e6, 5, noise=False)
        report = sound_link(scenario, (0, 1), generate_glfsr(9), 100e6, 5, noise=False,
                            base_loss_db=BASE_LOSS_DB).report
        found = {t.grid_index: t for t in report.tracks}
        self.assertEqual(sorted(found), [0, 128, 200, 400])
        for index, gain_db in FOUR_TAP_DB.items():
            self.assertEqual(found[index].count, 5)
            self.assertAlmostEqual(found[index].mean_gain_db + BASE_LOSS_DB, gain_db, delta=1e-6)

    def test_taps_two_cells_apart_resolved_at_50_msps(self):
        scenario = single_frame_scenario({(0, 1): TapSet.from_db({0: -3.0, 2: -6.0})})
        report = sound_link(scenario, (0, 1), generate_glfsr(8), 50e6, 4, noise=False,
                            base_loss_db=0.0, config=SounderConfig(min_separation=1)).report
        self.assertEqual([t.grid_index for t in report.tracks], [0, 2])
        self.assertAlmostEqual(report.tracks[1].mean_gain_db, -6.0, delta=1e-6)

    def test_warmup_needs_more_than_one_period(self):
        code = generate_glfsr(8)
        with self.assertRaises(SoundingError):
            sound(modulate_bpsk(code, 50e6, repetitions=1), code)

    def test_report_files(self):
        report = four_tap_report(noise=False, frames=3)
        with tempfile.TemporaryDirectory() as tmp:
            csv_path = report_to_csv(report, Path(tmp) / "taps.csv")
            lines = csv_path.read_text().splitlines()
            json_path = report_to_json(report, Path(tmp) / "taps.json")
            self.assertIn('"strongest_vs_weakest_db"', json_path.read_text())
        self.assertEqual(lines[0], "frame,tap_index,toa_s,gain_db")
        self.assertEqual(len(lines), 1 + 3 * 4)


if __name__ == '__main__':
    unittest.main()
