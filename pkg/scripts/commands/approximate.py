"""
twin approximate: reduce ray-traced multipath profiles to emulator tap sets.

One profile gives a single-frame scenario. Several profiles are successive
snapshots of the same link taken every ``--interval`` seconds and become a
frame sequence, each snapshot held for its interval.
"""
import argparse
import logging
from pathlib import Path

from dsp import ChannelFrame
from scenario import (
    Node,
    Scenario,
    ScenarioMetadata,
    approximate,
    build_frames,
    load_profile,
    save_frames,
    save_scenario,
)
from utils.config import RunConfig
from utils.errors import ConfigError
from utils.export import write_csv, write_json
from utils.ui import print_outputs, print_summary, print_table

from .common import parse_link

logger = logging.getLogger(__name__)


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("profiles", nargs="*", default=None,
                        help="Profile CSV/JSON file(s): toa_s, amplitude_linear|amplitude_db, phase_rad")
    parser.add_argument("--max-taps", type=int, default=None, help="Tap budget, 1..4 (default: 4)")
    parser.add_argument("--link", default=None, help="Link the profile describes, TX:RX (default: 0:1)")
    parser.add_argument("--refine", action=argparse.BooleanOptionalAction, default=None,
                        help="Coherent contiguous re-partition after k-means (default: on)")
    parser.add_argument("--interval", type=float, default=None,
                        help="Snapshot spacing in seconds for several profiles (default: 1e-3)")


def run(cfg: RunConfig) -> int:
    paths = [Path(p) for p in cfg["profiles"]]
    if not paths:
        raise ConfigError("approximate: at least one profile file is required")
    link = parse_link(cfg["link"])
    profiles = [load_profile(p) for p in paths]

    result = approximate(profiles[0], cfg["max_taps"], refine=cfg["refine"])
    if len(profiles) > 1:
        frames = build_frames({link: profiles}, cfg["interval"], cfg["max_taps"])
    else:
        frames = [ChannelFrame(0, {link: result.taps})]

    nodes = tuple(Node(n, f"node{n}") for n in sorted(set(link)))
    scenario = Scenario(nodes=nodes, frames=tuple(frames),
                        metadata=ScenarioMetadata(name=paths[0].stem,
                                                  duration=len(frames) * 1e-3))
    stem = paths[0].stem
    outputs = [
        save_scenario(scenario, cfg.output_path(f"{stem}_scenario.json")),
        save_frames(frames, cfg.output_path(f"{stem}.frames")),
        write_json(cfg.output_path(f"{stem}_energy.json"),
                   {**result.energy_report(), "clusters": result.clusters,
                    "folded": result.folded_components, "refined": result.refined,
                    "origin_toa_s": result.origin_toa}),
        write_csv(cfg.output_path(f"{stem}_taps.csv"),
                  ["tap_index", "delay_s", "re", "im", "gain_db"],
                  [(i, d, g.real, g.imag, db) for (i, g), d, db in
                   zip(result.taps.taps, result.taps.delays, result.taps.gains_db)]),
    ]

    print_table(
        f"{stem}: {len(profiles[0])} components -> {len(result.taps)} taps",
        ["tap", "delay (µs)", "gain (dB)", "components"],
        [(i, d * 1e6, db, len(c)) for (i, _), d, db, c in
         zip(result.taps.taps, result.taps.delays, result.taps.gains_db, result.clusters)],
        numeric=["delay (µs)", "gain (dB)", "components"],
    )
    report = result.energy_report()
    print_summary("Energy", {
        "input power": report["input_power"],
        "retained power": report["retained_power"],
        "retained vs input (dB)": report["retained_vs_input_db"],
        "folded components": report["folded_components"],
        "frames written": len(frames),
    })
    print_outputs(outputs)
    return 0
