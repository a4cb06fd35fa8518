"""End-to-end tests for the twin command line."""

import argparse
import contextlib
import io
import os
import sys
import tempfile
import unittest
from pathlib import Path
from unittest import mock

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "scripts"))

from dsp.channel import TapSet  # noqa: E402
from scenario import save_scenario, single_frame_scenario  # noqa: E402
from twin import build_parser, main  # noqa: E402
from utils.config import DEFAULT_SEED, OUTPUT_DIR_ENV, RunConfig  # noqa: E402
from utils.errors import ConfigError  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "data"


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def twin(self, *argv: str) -> int:
        return main(["--out", str(self.out), *argv])


class TestCommands(CliTestCase):

    def test_sequence(self):
        self.assertEqual(self.twin("sequence", "--family", "glfsr", "--degree", "5"), 0)
        self.assertTrue((self.out / "glfsr_31.txt").exists())
        lines = (self.out / "glfsr_31_autocorr.csv").read_text().splitlines()
        self.assertEqual(lines[0], "lag,value")
        self.assertEqual(lines[1], "0,31")
        self.assertEqual(len(lines), 32)

    def test_sequence_golay_is_aperiodic(self):
        self.assertEqual(self.twin("sequence", "--family", "golay-a", "--length", "32"), 0)
        self.assertTrue((self.out / "golay_a_32_autocorr.csv").exists())

    def test_unknown_family_is_usage_error(self):
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                self.twin("sequence", "--family", "kasami")
        self.assertEqual(ctx.exception.code, 2)

    def test_sound_clean_four_tap(self):
        code = self.twin("sound", str(DATA / "scenarios" / "four_tap.json"),
                         "--noise", "off", "--frames", "5", "--save-iq")
        self.assertEqual(code, 0)
        lines = (self.out / "sound_0_1.csv").read_text().splitlines()
        self.assertEqual(len(lines), 1 + 5 * 4)
        self.assertTrue((self.out / "sound_0_1_rx.iq").exists())

    def test_sound_delay_outside_code_period(self):
        path = save_scenario(single_frame_scenario({(0, 1): TapSet.from_db({0: -3.0, 510: -8.0})}),
                             self.out / "late.json")
        self.assertEqual(self.twin("sound", str(path), "--noise", "off", "--frames", "3"), 1)
        self.assertEqual(self.twin("sound", str(path), "--noise", "off", "--frames", "3",
                                   "--degree", "9"), 0)
        self.assertEqual(len((self.out / "sound_0_1.csv").read_text().splitlines()), 1 + 3 * 2)

    def test_sound_requires_scenario(self):
        self.assertEqual(self.twin("sound"), 2)

    def test_approximate(self):
        self.assertEqual(self.twin("approximate", str(DATA / "profiles" / "six_paths.csv")), 0)
        for name in ("six_paths_scenario.json", "six_paths.frames", "six_paths_energy.json",
                     "six_paths_taps.csv"):
            self.assertTrue((self.out / name).exists(), name)

    def test_approximate_sequence_of_profiles(self):
        profile = str(DATA / "profiles" / "six_paths.csv")
        self.assertEqual(self.twin("approximate", profile, profile, "--interval", "2e-3"), 0)
        self.assertEqual((self.out / "six_paths.frames").stat().st_size, 4 * (12 + 44))

    def test_malformed_profile_exit_code(self):
        bad = self.out / "bad.csv"
        bad.write_text("toa_s,amplitude_linear,phase_rad\n1e-7,x,0\n")
        self.assertEqual(self.twin("approximate", str(bad)), 2)

    def test_missing_and_malformed_inputs(self):
        self.assertEqual(self.twin("sound", str(self.out / "nope.json")), 1)
        self.assertEqual(self.twin("approximate", str(self.out / "nope.csv")), 2)
        bad = self.out / "p.json"
        bad.write_text("{not json")
        self.assertEqual(self.twin("approximate", str(bad)), 2)
        self.assertEqual(self.twin("plan", str(self.out / "nope.csv")), 1)

    def test_validate_clean(self):
        code = self.twin("validate", str(DATA / "scenarios" / "four_tap.json"),
                         "--noise", "off", "--frames", "5")
        self.assertEqual(code, 0)
        self.assertTrue((self.out / "validation.csv").exists())

    def test_heatmap_modeled(self):
        self.assertEqual(self.twin("heatmap", str(DATA / "scenarios" / "three_node.json")), 0)
        lines = (self.out / "heatmap.csv").read_text().splitlines()
        self.assertEqual(len(lines), 7)

    def test_plan_synthetic(self):
        self.assertEqual(self.twin("plan", "--synthetic", "24x52"), 0)
        lines = (self.out / "plan_scores.csv").read_text().splitlines()
        self.assertEqual(len(lines), 1 + 276)
        self.assertTrue((self.out / "synthetic_24x52.csv").exists())

    def test_plan_fixture_with_sweep(self):
        code = self.twin("plan", str(DATA / "planning" / "path_loss_4x6.csv"),
                         "--sidecar", str(DATA / "planning" / "sidecar.json"),
                         "--sweep", "--attenuations", "0,25")
        self.assertEqual(code, 0)
        self.assertEqual(len((self.out / "plan_sweep.csv").read_text().splitlines()), 3)

    def test_plan_deterministic(self):
        self.twin("plan", "--synthetic", "6x9")
        first = (self.out / "plan_scores.csv").read_text()
        self.twin("plan", "--synthetic", "6x9")
        self.assertEqual((self.out / "plan_scores.csv").read_text(), first)

    def test_repro(self):
        self.assertEqual(self.twin("repro", "--list"), 0)
        self.assertEqual(self.twin("repro", "golay", "m-sequence", "similarity"), 0)
        self.assertTrue((self.out / "repro_summary.json").exists())
        self.assertEqual(self.twin("repro", "no-such-recipe"), 2)

    def test_help(self):
        self.assertEqual(main(["help"]), 0)
        self.assertEqual(main([]), 0)


class TestRunConfig(CliTestCase):

    def args(self, *argv: str) -> argparse.Namespace:
        return build_parser().parse_args(list(argv))

    def write(self, text: str) -> Path:
        path = self.out / "twin.yaml"
        path.write_text(text)
        return path

    def test_defaults(self):
        with mock.patch.dict(os.environ, {}, clear=True):
            cfg = RunConfig.from_sources(self.args("sequence"))
        self.assertEqual(cfg.seed, DEFAULT_SEED)
        self.assertEqual(cfg.output_dir, Path("runs"))
        self.assertEqual(cfg["degree"], 8)

    def test_file_then_flag(self):
        path = self.write("seed: 7\nsequence:\n  degree: 6\n  family: gold\n")
        cfg = RunConfig.from_sources(self.args("sequence", "--degree", "5"), path)
        self.assertEqual(cfg.seed, 7)
        self.assertEqual(cfg["family"], "gold")
        self.assertEqual(cfg["degree"], 5)

    def test_yaml_on_off(self):
        path = self.write("sound:\n  noise: off\n  save-iq: yes\n")
        cfg = RunConfig.from_sources(self.args("sound"), path)
        self.assertEqual(cfg["noise"], "off")
        self.assertIs(cfg["save_iq"], True)

    def test_environment_output_dir(self):
        with mock.patch.dict(os.environ, {OUTPUT_DIR_ENV: str(self.out / "env")}):
            cfg = RunConfig.from_sources(self.args("plan"))
            self.assertEqual(cfg.output_dir, self.out / "env")
            flagged = RunConfig.from_sources(self.args("--out", "x", "plan"))
            self.assertEqual(flagged.output_dir, Path("x"))

    def test_unknown_keys_rejected(self):
        with self.assertRaises(ConfigError):
            RunConfig.from_sources(self.args("plan"), self.write("plan:\n  bogus: 1\n"))
        with self.assertRaises(ConfigError):
            RunConfig.from_sources(self.args("plan"), self.write("nonsense: {}\n"))
        with self.assertRaises(ConfigError):
            RunConfig.from_sources(self.args("plan"), self.out / "missing.yaml")

    def test_bad_value_type(self):
        path = self.write("plan:\n  workers: many\n")
        with self.assertRaises(ConfigError):
            RunConfig.from_sources(self.args("plan"), path)

    def test_config_file_through_main(self):
        path = self.write("sequence:\n  degree: 6\n")
        self.assertEqual(self.twin("--config", str(path), "sequence"), 0)
        self.assertTrue((self.out / "glfsr_63.txt").exists())
        self.assertEqual(self.twin("--config", str(self.write("plan:\n  bogus: 1\n")), "plan"), 2)


if __name__ == '__main__':
    unittest.main()
