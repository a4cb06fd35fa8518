"""
twin validate: sound scenario links in software and compare with the model.
"""
import argparse
import logging

from scenario import load_scenario, validate, validation_to_csv
from utils.config import RunConfig
from utils.ui import console, make_progress, print_outputs, print_table

from .common import code_from_config, noise_enabled, parse_link, require, sound_link, sounder_config
from .sound import add_sounding_arguments

logger = logging.getLogger(__name__)


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("scenario", nargs="?", default=None, help="Scenario JSON file")
    parser.add_argument("--link", default=None, help="Only this link, TX:RX (default: every link)")
    parser.add_argument("--frame", type=int, default=None, help="Scenario frame index (default: 0)")
    parser.add_argument("--base-loss", type=float, default=None,
                        help="Emulator base loss in dB (default: 57.55)")
    parser.add_argument("--tolerance", type=int, default=None,
                        help="Delay match tolerance in grid cells (default: 1)")
    add_sounding_arguments(parser, frames_default=100)


def run(cfg: RunConfig) -> int:
    scenario = load_scenario(require(cfg, "scenario", "a scenario file"))
    frame_index = cfg["frame"]
    if cfg["link"]:
        links = [parse_link(cfg["link"])]
    else:
        links = list(scenario.frame(frame_index).links)
    code = code_from_config(cfg)
    sounder = sounder_config(cfg)
    base_loss = cfg["base_loss"]

    results = []
    with make_progress() as progress:
        task = progress.add_task("Sounding links", total=len(links))
        for link in links:
            loop = sound_link(scenario, link, code, cfg["rate"], cfg["frames"],
                              noise=noise_enabled(cfg), noise_floor_db=cfg["noise_floor"],
                              base_loss_db=base_loss, seed=cfg.seed, frame_index=frame_index,
                              config=sounder)
            results.append(validate(scenario, loop.report, link, frame_index, base_loss,
                                    cfg["tolerance"]))
            progress.advance(task)

    path = validation_to_csv(results, cfg.output_path("validation.csv"))
    rows = []
    for res in results:
        s = res.summary()
        rows.append((s["link"], s["modeled_taps"], s["matched"], s["unmatched_sounded"],
                     s["max_abs_gain_error_db"]))
    print_table("Validation", ["link", "modeled", "matched", "extra sounded", "max |gain error| (dB)"],
                rows, numeric=["modeled", "matched", "extra sounded", "max |gain error| (dB)"], digits=6)
    print_outputs([path])

    failed = [r for r in results if not r.all_matched]
    if failed:
        console.print(f"[red]✗ {len(failed)} link(s) did not match the model[/red]")
        return 1
    console.print(f"[green]✓ all {len(results)} link(s) match[/green]")
    return 0
