"""Tests for BPSK modulation, .iq files and AWGN."""

import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np
import numpy.testing as npt

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "scripts"))

from dsp.sequences import generate_glfsr, generate_golay  # noqa: E402
from dsp.waveform import (  # noqa: E402
    IqWaveform,
    add_awgn,
    export_csv,
    load_iq_file,
    modulate_bpsk,
    save_iq_file,
)
from utils.errors import IqFormatError, TwinError  # noqa: E402


class TestModulation(unittest.TestCase):

    def test_glfsr_three_repetitions(self):
        seq = generate_glfsr(8)
        wave = modulate_bpsk(seq, 1e6, samples_per_chip=1, repetitions=3)
        self.assertEqual(len(wave), 765)
        npt.assert_array_equal(wave.samples[:255].real, seq.chips)
        npt.assert_array_equal(wave.samples[255:510], wave.samples[:255])
        self.assertTrue(np.all(wave.samples.imag == 0))

    def test_samples_per_chip(self):
        seq = generate_golay(32)
        wave = modulate_bpsk(seq, 2e6, samples_per_chip=4)
        self.assertEqual(len(wave), 128)
        npt.assert_array_equal(wave.samples[:4].real, [seq.chips[0]] * 4)

    def test_unit_power(self):
        wave = modulate_bpsk(generate_glfsr(6), 1e6, 2, 2)
        self.assertEqual(wave.power, 1.0)
        self.assertAlmostEqual(wave.duration, len(wave) / 1e6)

    def test_invalid_arguments(self):
        seq = generate_glfsr(4)
        with self.assertRaises(TwinError):
            modulate_bpsk(seq, 1e6, samples_per_chip=0)
        with self.assertRaises(TwinError):
            modulate_bpsk(seq, 0.0)

    def test_non_finite_samples_rejected(self):
        with self.assertRaises(IqFormatError) as ctx:
            IqWaveform(np.array([1.0, np.nan, 2.0]), 1e6)
        self.assertEqual(ctx.exception.sample_index, 1)


class TestIqFiles(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_round_trip_bit_exact(self):
        rng = np.random.default_rng(3)
        samples = (rng.standard_normal(257) + 1j * rng.standard_normal(257)).astype(np.complex64)
        wave = IqWaveform(samples, 5e6)
        path = save_iq_file(wave, self.dir / "a.iq")
        self.assertEqual(path.stat().st_size, 257 * 8)
        loaded = load_iq_file(path, sample_rate=5e6)
        npt.assert_array_equal(loaded.samples, wave.samples)
        self.assertEqual(loaded.sample_rate, 5e6)

    def test_layout_is_interleaved_float32(self):
        wave = IqWaveform(np.array([1 + 2j, -3 - 4j]), 1.0)
        path = save_iq_file(wave, self.dir / "b.iq")
        raw = np.fromfile(path, dtype="<f4")
        npt.assert_array_equal(raw, [1, 2, -3, -4])

    def test_odd_float_count(self):
        path = self.dir / "odd.iq"
        np.array([1.0, 2.0, 3.0], dtype="<f4").tofile(path)
        with self.assertRaises(IqFormatError) as ctx:
            load_iq_file(path)
        self.assertIn("truncated", str(ctx.exception))

    def test_partial_float(self):
        path = self.dir / "partial.iq"
        path.write_bytes(b"\x00" * 10)
        with self.assertRaises(IqFormatError):
            load_iq_file(path)

    def test_non_finite_reports_sample_index(self):
        path = self.dir / "nan.iq"
        np.array([0, 0, 1, 1, np.inf, 0], dtype="<f4").tofile(path)
        with self.assertRaises(IqFormatError) as ctx:
            load_iq_file(path)
        self.assertEqual(ctx.exception.sample_index, 2)

    def test_export_csv(self):
        wave = IqWaveform(np.array([1 + 0j, -1 + 0.5j]), 1.0)
        path = export_csv(wave, self.dir / "w.csv")
        lines = path.read_text().splitlines()
        self.assertEqual(lines[0], "index,I,Q")
        self.assertEqual(len(lines), 3)


class TestAwgn(unittest.TestCase):

    def test_negligible_noise(self):
        wave = modulate_bpsk(generate_glfsr(8), 1e6)
        noisy = add_awgn(wave, -300.0, seed=1)
        npt.assert_allclose(noisy.samples, wave.samples, atol=1e-6)

    def test_deterministic(self):
        wave = modulate_bpsk(generate_glfsr(8), 1e6, repetitions=4)
        a = add_awgn(wave, -10.0, seed=42)
        b = add_awgn(wave, -10.0, seed=42)
        npt.assert_array_equal(a.samples, b.samples)
        c = add_awgn(wave, -10.0, seed=43)
        self.assertFalse(np.array_equal(a.samples, c.samples))

    def test_noise_power(self):
        wave = IqWaveform(np.zeros(200_000), 1e6)
        noisy = add_awgn(wave, -20.0, seed=7)
        self.assertAlmostEqual(noisy.power, 0.01, delta=0.0005)
        self.assertAlmostEqual(float(np.var(noisy.samples.real)), 0.005, delta=0.0003)


if __name__ == '__main__':
    unittest.main()
