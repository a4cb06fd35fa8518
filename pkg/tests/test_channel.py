"""Tests for the FIR channel emulator."""

import sys
import unittest
from pathlib import Path

import numpy as np
import numpy.testing as npt

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "scripts"))

from dsp.channel import (  # noqa: E402
    ChannelFrame,
    EmulatorConfig,
    TapSet,
    convolve_link,
    emulate,
    emulate_mobile,
    receiver_noise,
    tap_shift,
)
from dsp.waveform import IqWaveform  # noqa: E402
from utils.errors import ChannelError  # noqa: E402

RATE = 100e6


def clean(rate: float = RATE, base_loss_db: float = 0.0, workers: int = 1) -> EmulatorConfig:
    return EmulatorConfig(sample_rate=rate, base_loss_db=base_loss_db, noise_enabled=False,
                          max_workers=workers)


def random_wave(n: int, seed: int, rate: float = RATE) -> IqWaveform:
    rng = np.random.default_rng(seed)
    return IqWaveform(rng.standard_normal(n) + 1j * rng.standard_normal(n), rate)


class TestTapSet(unittest.TestCase):

    def test_sorted_and_dense(self):
        taps = TapSet.from_dict({400: 0.5, 0: 1.0})
        self.assertEqual(taps.indices, [0, 400])
        dense = taps.to_dense()
        self.assertEqual(dense.size, 512)
        self.assertEqual(dense[400], 0.5)
        self.assertEqual(np.count_nonzero(dense), 2)

    def test_four_tap_limit(self):
        TapSet.from_dict({0: 1, 1: 1, 2: 1, 3: 1})
        with self.assertRaises(ChannelError):
            TapSet.from_dict({0: 1, 1: 1, 2: 1, 3: 1, 4: 1})

    def test_index_range(self):
        TapSet.from_dict({511: 1.0})
        for index in (-1, 512):
            with self.assertRaises(ChannelError):
                TapSet.from_dict({index: 1.0})

    def test_duplicate_and_non_finite(self):
        with self.assertRaises(ChannelError):
            TapSet(((3, 1.0), (3, 0.5)))
        with self.assertRaises(ChannelError):
            TapSet.from_dict({3: complex(np.nan, 0)})

    def test_from_db(self):
        taps = TapSet.from_db({0: -3.0, 128: -20.0})
        npt.assert_allclose(taps.gains_db, [-3.0, -20.0])
        npt.assert_allclose(taps.delays, [0.0, 1.28e-6])

    def test_zero_gain_kept_as_position(self):
        taps = TapSet.from_dict({5: 0j, 6: 1.0})
        self.assertEqual(len(taps), 2)
        self.assertEqual(taps.nonzero_count, 1)


class TestConvolveLink(unittest.TestCase):

    def test_identity_tap_is_base_loss_only(self):
        wave = random_wave(1000, 1)
        out = convolve_link(wave, TapSet.identity(), clean(base_loss_db=20.0))
        self.assertEqual(len(out), 1000)
        npt.assert_allclose(out.samples, 0.1 * wave.samples, rtol=1e-12)

    def test_delay_and_gain(self):
        wave = random_wave(300, 2)
        out = convolve_link(wave, TapSet.from_dict({50: 0.5j}), clean())
        self.assertEqual(len(out), 350)
        npt.assert_array_equal(out.samples[:50], 0)
        npt.assert_allclose(out.samples[50:], 0.5j * wave.samples)

    def test_grid_at_50_msps(self):
        self.assertEqual(tap_shift(128, 50e6), (64, 0.0))
        self.assertEqual(tap_shift(400, 50e6), (200, 0.0))

    def test_off_grid_placement_is_labelled(self):
        wave = random_wave(100, 3, rate=30e6)
        with self.assertLogs("dsp.channel", level="WARNING"):
            out = convolve_link(wave, TapSet.from_dict({1: 1.0}), clean(rate=30e6))
        self.assertIn("warning", out.label)

    def test_rate_mismatch(self):
        with self.assertRaises(ChannelError):
            convolve_link(random_wave(10, 4, rate=50e6), TapSet.identity(), clean())


class TestEmulate(unittest.TestCase):

    def test_superposition(self):
        x1, x2 = random_wave(2000, 10), random_wave(2000, 11)
        frame = ChannelFrame(0, {
            (1, 3): TapSet.from_dict({0: 0.7, 40: 0.2 - 0.1j}),
            (2, 3): TapSet.from_dict({7: 0.4j, 300: 0.05}),
        })
        config = clean(base_loss_db=10.0)
        together = emulate({1: x1, 2: x2}, frame, config)[3].samples
        only1 = emulate({1: x1, 2: IqWaveform(np.zeros(2000), RATE)}, frame, config)[3].samples
        only2 = emulate({1: IqWaveform(np.zeros(2000), RATE), 2: x2}, frame, config)[3].samples
        err = np.linalg.norm(together - (only1 + only2)) / np.linalg.norm(together)
        self.assertLess(err, 1e-9)

    def test_output_length_uses_longest_delay(self):
        frame = ChannelFrame(0, {(0, 1): TapSet.from_dict({0: 1.0}),
                                 (0, 2): TapSet.from_dict({250: 1.0})})
        report = emulate({0: random_wave(500, 5)}, frame, clean())
        self.assertEqual(len(report[1]), 750)
        self.assertEqual(len(report[2]), 750)

    def test_missing_link_is_zero_channel(self):
        frame = ChannelFrame(0, {(0, 2): TapSet.identity()})
        inputs = {0: random_wave(100, 6), 1: random_wave(100, 7)}
        with self.assertLogs("dsp.channel", level="WARNING"):
            report = emulate(inputs, frame, clean(), receivers=[2])
        self.assertIn((1, 2), report.missing_links)
        npt.assert_allclose(report[2].samples, inputs[0].samples)

    def test_noise_deterministic_and_per_receiver(self):
        frame = ChannelFrame(0, {(0, 1): TapSet.identity(), (0, 2): TapSet.identity()})
        config = EmulatorConfig(sample_rate=RATE, noise_floor_db=-40.0, max_workers=2)
        inputs = {0: random_wave(4000, 8)}
        a = emulate(inputs, frame, config, noise_seed=9)
        b = emulate(inputs, frame, config, noise_seed=9)
        npt.assert_array_equal(a[1].samples, b[1].samples)
        self.assertFalse(np.array_equal(a[1].samples, a[2].samples))
        residual = a[1].samples - inputs[0].samples * config.base_loss_scale
        self.assertAlmostEqual(float(np.mean(np.abs(residual) ** 2)), 1e-4, delta=1e-5)

    def test_workers_do_not_change_output(self):
        frame = ChannelFrame(0, {(0, r): TapSet.from_dict({r: 1.0}) for r in (1, 2, 3)})
        inputs = {0: random_wave(500, 12)}
        serial = emulate(inputs, frame, clean(workers=1))
        threaded = emulate(inputs, frame, clean(workers=3))
        for rx in (1, 2, 3):
            npt.assert_array_equal(serial[rx].samples, threaded[rx].samples)

    def test_noise_single_floor_per_receiver(self):
        frame = ChannelFrame(0, {(0, 2): TapSet.identity(), (1, 2): TapSet.identity()})
        config = EmulatorConfig(sample_rate=RATE, noise_floor_db=-40.0, max_workers=1)
        silent = IqWaveform(np.zeros(3000), RATE)
        out = emulate({0: silent, 1: silent}, frame, config, noise_seed=9)[2].samples
        npt.assert_array_equal(out, receiver_noise(2, 3000, config, 9))
        self.assertAlmostEqual(float(np.mean(np.abs(out) ** 2)), 1e-4, delta=1e-5)

    def test_self_link_rejected(self):
        with self.assertRaises(ChannelError) as ctx:
            ChannelFrame(0, {(0, 1): TapSet.identity(), (2, 2): TapSet.identity()})
        self.assertEqual(ctx.exception.details["node"], 2)

    def test_inputs_must_match(self):
        frame = ChannelFrame(0, {(0, 1): TapSet.identity()})
        with self.assertRaises(ChannelError):
            emulate({0: random_wave(10, 1), 2: random_wave(11, 2)}, frame, clean())
        with self.assertRaises(ChannelError):
            emulate({}, frame, clean())


class TestLinearChannel(unittest.TestCase):

    FRAME = ChannelFrame(0, {(0, 1): TapSet.from_dict({0: 0.8, 50: 0.3 - 0.2j, 300: 0.1j})})

    def test_output_energy_follows_tap_power(self):
        x = random_wave(100_000, 21)
        y = emulate({0: x}, self.FRAME, clean())[1].samples
        gain_power = float(np.sum(np.abs(self.FRAME.links[(0, 1)].gains) ** 2))
        expected = gain_power * float(np.sum(np.abs(x.samples) ** 2))
        self.assertAlmostEqual(float(np.sum(np.abs(y) ** 2)) / expected, 1.0, delta=0.01)

    def test_complex_scaling_commutes(self):
        x = random_wave(3000, 22)
        a = 0.6 * np.exp(1j * 2.1)
        y = emulate({0: x}, self.FRAME, clean(base_loss_db=7.0))[1].samples
        scaled = IqWaveform(a * x.samples, RATE)
        ya = emulate({0: scaled}, self.FRAME, clean(base_loss_db=7.0))[1].samples
        npt.assert_allclose(ya, a * y, rtol=1e-12, atol=1e-12)

    def test_delayed_input_delays_output(self):
        x = random_wave(3000, 23)
        d = 137
        delayed = IqWaveform(np.concatenate([np.zeros(d), x.samples]), RATE)
        y = emulate({0: x}, self.FRAME, clean())[1].samples
        yd = emulate({0: delayed}, self.FRAME, clean())[1].samples
        npt.assert_allclose(yd[:d], 0.0, atol=1e-15)
        npt.assert_allclose(yd[d:], y, rtol=1e-12, atol=1e-12)


class TestEmulateMobile(unittest.TestCase):

    RATE = 1e6

    def test_two_frames_switch_taps(self):
        frames = [ChannelFrame(0, {(0, 1): TapSet.from_dict({0: 1.0})}),
                  ChannelFrame(1, {(0, 1): TapSet.from_dict({0: 0.5})})]
        wave = IqWaveform(np.ones(2000), self.RATE)
        out = emulate_mobile({0: wave}, frames, clean(rate=self.RATE))[1].samples
        npt.assert_allclose(out[:1000], 1.0)
        npt.assert_allclose(out[1000:], 0.5)

    def test_tail_carries_into_next_block(self):
        frames = [ChannelFrame(0, {(0, 1): TapSet.from_dict({200: 1.0})}),
                  ChannelFrame(1, {(0, 1): TapSet.from_dict({0: 0.0})})]
        wave = IqWaveform(np.ones(2000), self.RATE)
        out = emulate_mobile({0: wave}, frames, clean(rate=self.RATE))[1].samples
        self.assertEqual(out.size, 2002)
        npt.assert_allclose(out[1000:1002], 1.0)
        npt.assert_allclose(out[1002:], 0.0)

    def test_block_power_follows_gain_schedule(self):
        steps_db = [0.0, -1.5, -3.0, -4.5, -6.0]
        frames = [ChannelFrame(k, {(0, 1): TapSet.from_db({0: g})}) for k, g in enumerate(steps_db)]
        wave = IqWaveform(np.exp(1j * np.linspace(0.0, 40.0, 5000)), self.RATE)
        out = emulate_mobile({0: wave}, frames, clean(rate=self.RATE))[1].samples
        block_db = [10 * np.log10(np.mean(np.abs(out[k * 1000:(k + 1) * 1000]) ** 2)) for k in range(5)]
        npt.assert_allclose(block_db, steps_db, atol=1e-9)
        npt.assert_allclose(np.diff(block_db), -1.5, atol=1e-9)

    def test_last_frame_held(self):
        frames = [ChannelFrame(0, {(0, 1): TapSet.identity()}),
                  ChannelFrame(1, {(0, 1): TapSet.from_dict({0: 0.25})})]
        wave = IqWaveform(np.ones(2500), self.RATE)
        out = emulate_mobile({0: wave}, frames, clean(rate=self.RATE))[1].samples
        npt.assert_allclose(out[2000:], 0.25)

    def test_frames_must_be_one_ms_apart(self):
        frames = [ChannelFrame(0, {(0, 1): TapSet.identity()}),
                  ChannelFrame(2, {(0, 1): TapSet.identity()})]
        with self.assertRaises(ChannelError):
            emulate_mobile({0: IqWaveform(np.ones(3000), self.RATE)}, frames,
                           clean(rate=self.RATE))

    def test_input_shorter_than_frames(self):
        frames = [ChannelFrame(k, {(0, 1): TapSet.identity()}) for k in range(3)]
        with self.assertRaises(ChannelError):
            emulate_mobile({0: IqWaveform(np.ones(2500), self.RATE)}, frames,
                           clean(rate=self.RATE))


if __name__ == '__main__':
    unittest.main()
