"""
twin sound: software sounding loop-back over one scenario link.
"""
import argparse
import logging

from dsp import report_to_csv, report_to_json, save_iq_file
from scenario import load_scenario
from utils.config import RunConfig
from utils.ui import print_outputs, print_summary, print_table

from .common import (
    FAMILY_CHOICES,
    MODE_CHOICES,
    code_from_config,
    default_link,
    noise_enabled,
    require,
    sound_link,
    sounder_config,
)

logger = logging.getLogger(__name__)


def add_sounding_arguments(parser: argparse.ArgumentParser, frames_default: int) -> None:
    """Flags shared by sound, validate and heatmap --sounded."""
    parser.add_argument("--rate", type=float, default=None,
                        help="Sample rate in S/s (default: 50e6)")
    parser.add_argument("--family", choices=FAMILY_CHOICES, default=None,
                        help="Sounding code family (default: glfsr)")
    parser.add_argument("--degree", type=int, default=None,
                        help="Register degree of the sounding code (default: 8)")
    parser.add_argument("--length", type=int, default=None,
                        help="Golay/LS length of the sounding code (default: 128)")
    parser.add_argument("--frames", type=int, default=None,
                        help=f"Code periods to sound after warm-up (default: {frames_default})")
    parser.add_argument("--noise", choices=["on", "off"], default=None,
                        help="Receiver AWGN (default: on)")
    parser.add_argument("--noise-floor", type=float, default=None,
                        help="AWGN power in dB (default: -100)")
    parser.add_argument("--threshold", type=float, default=None,
                        help="Detection threshold in dB below the frame peak (default: 40)")
    parser.add_argument("--min-separation", type=int, default=None,
                        help="Minimum samples between taps; 1 keeps every sample above "
                             "the threshold (default: 1)")
    parser.add_argument("--mode", choices=MODE_CHOICES, default=None,
                        help="Correlation mode (default: deconvolved)")


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("scenario", nargs="?", default=None, help="Scenario JSON file")
    parser.add_argument("--link", default=None, help="Link as TX:RX (default: first link)")
    parser.add_argument("--base-loss", type=float, default=None,
                        help="Emulator base loss in dB (default: 57.55)")
    parser.add_argument("--save-iq", action="store_true", default=None,
                        help="Also write the transmitted and received .iq captures")
    add_sounding_arguments(parser, frames_default=1500)


def run(cfg: RunConfig) -> int:
    scenario = load_scenario(require(cfg, "scenario", "a scenario file"))
    link = default_link(scenario, cfg["link"])
    code = code_from_config(cfg)
    sounder = sounder_config(cfg)
    base_loss = cfg["base_loss"]

    result = sound_link(scenario, link, code, cfg["rate"], cfg["frames"],
                        noise=noise_enabled(cfg), noise_floor_db=cfg["noise_floor"],
                        base_loss_db=base_loss, seed=cfg.seed, config=sounder)
    report = result.report
    stem = f"sound_{link[0]}_{link[1]}"
    outputs = [report_to_csv(report, cfg.output_path(f"{stem}.csv")),
               report_to_json(report, cfg.output_path(f"{stem}.json"))]
    if cfg["save_iq"]:
        outputs.append(save_iq_file(result.transmitted, cfg.output_path(f"{stem}_tx.iq")))
        outputs.append(save_iq_file(result.received, cfg.output_path(f"{stem}_rx.iq")))

    print_table(
        f"Link {link[0]}->{link[1]} ({len(report.frames)} frames, D_peak {report.d_peak * 1e6:.2f} µs)",
        ["tap", "ToA (µs)", "gain (dB)", "gain + base loss (dB)", "std (dB)", "frames"],
        [(t.grid_index, t.mean_toa * 1e6, t.mean_gain_db, t.mean_gain_db + base_loss,
          t.std_gain_db, t.count) for t in report.tracks],
        numeric=["ToA (µs)", "gain (dB)", "gain + base loss (dB)", "std (dB)", "frames"],
    )
    sw = report.strongest_vs_weakest()
    if sw is not None:
        print_summary("Strongest vs weakest", {"mean difference (dB)": sw[0], "std (dB)": sw[1]})
    print_outputs(outputs)
    return 0
