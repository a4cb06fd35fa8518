"""
twin heatmap: link path-loss matrix of a scenario, modeled or sounded.
"""
import argparse
import logging

import numpy as np

from scenario import campaign_heatmap, heatmap, heatmap_to_csv, load_scenario, measure_base_loss
from utils.config import RunConfig
from utils.ui import make_progress, print_outputs, print_summary, print_table

from .common import code_from_config, noise_enabled, require, sound_link, sounder_config
from .sound import add_sounding_arguments

logger = logging.getLogger(__name__)


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("scenario", nargs="?", default=None, help="Scenario JSON file")
    parser.add_argument("--frame", type=int, default=None, help="Scenario frame index (default: 0)")
    parser.add_argument("--base-loss", type=float, default=None,
                        help="Base loss added to every link in dB (default: 57.55)")
    parser.add_argument("--sounded", action="store_true", default=None,
                        help="Sound every link and report measured path loss with its std")
    add_sounding_arguments(parser, frames_default=100)


def run(cfg: RunConfig) -> int:
    scenario = load_scenario(require(cfg, "scenario", "a scenario file"))
    frame_index = cfg["frame"]
    base_loss = cfg["base_loss"]

    if cfg["sounded"]:
        links = list(scenario.frame(frame_index).links)
        code = code_from_config(cfg)
        sounder = sounder_config(cfg)
        reports = {}
        with make_progress() as progress:
            task = progress.add_task("Sounding links", total=len(links))
            for link in links:
                reports[link] = sound_link(
                    scenario, link, code, cfg["rate"], cfg["frames"], noise=noise_enabled(cfg),
                    noise_floor_db=cfg["noise_floor"], base_loss_db=base_loss, seed=cfg.seed,
                    frame_index=frame_index, config=sounder).report
                progress.advance(task)
        result = campaign_heatmap(reports, scenario.node_ids)
        name = "heatmap_sounded.csv"
    else:
        result = heatmap(scenario, frame_index, base_loss)
        name = "heatmap.csv"

    path = heatmap_to_csv(result, cfg.output_path(name))
    columns = ["tx \\ rx"] + [str(n) for n in result.nodes]
    rows = [[str(tx)] + [float(v) for v in result.path_loss_db[a]] for a, tx in enumerate(result.nodes)]
    print_table(f"Path loss (dB), frame {frame_index}", columns, rows, numeric=columns[1:], digits=2)
    if np.isfinite(result.path_loss_db).any():
        mean, std = measure_base_loss(result)
        print_summary("Off-diagonal path loss", {"mean (dB)": mean, "std (dB)": std})
    print_outputs([path])
    return 0
