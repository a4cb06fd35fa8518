"""
twin plan: exhaustive RU-pair placement on a path-loss matrix.
"""
import argparse
import logging

from planning import (
    load_gain_matrix,
    plan_exhaustive,
    plan_to_csv,
    save_path_loss_csv,
    sweep_attenuation,
    sweep_to_csv,
    synthetic_gain_matrix,
)
from utils.config import RunConfig
from utils.errors import ConfigError
from utils.export import write_csv
from utils.ui import print_outputs, print_summary, print_table

logger = logging.getLogger(__name__)


def parse_shape(text: str):
    """'24x52' -> (24, 52)."""
    try:
        r, u = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ConfigError(f"synthetic shape must look like RUSxUES, got {text!r}") from None
    return r, u


def parse_attenuations(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"attenuations must be comma-separated dB values, got {text!r}") from None


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("matrix", nargs="?", default=None,
                        help="Path-loss CSV (rows = RUs, columns = UEs, dB)")
    parser.add_argument("--sidecar", default=None, help="JSON sidecar with per-node parameters")
    parser.add_argument("--synthetic", default=None, metavar="RxU",
                        help="Use a seeded free-space matrix instead, e.g. 24x52")
    parser.add_argument("--workers", type=int, default=None,
                        help="Threads for pair scoring (default: 1)")
    parser.add_argument("--sweep", action="store_true", default=None,
                        help="Also re-plan over a uniform RU attenuation sweep")
    parser.add_argument("--attenuations", default=None,
                        help="Sweep values in dB (default: 0,10,20,30,40,50)")


def run(cfg: RunConfig) -> int:
    outputs = []
    if cfg["synthetic"]:
        ru, ue = parse_shape(cfg["synthetic"])
        matrix = synthetic_gain_matrix(ru, ue, seed=cfg.seed)
        outputs.append(save_path_loss_csv(matrix, cfg.output_path(f"synthetic_{ru}x{ue}.csv")))
    elif cfg["matrix"]:
        matrix = load_gain_matrix(cfg["matrix"], cfg["sidecar"])
    else:
        raise ConfigError("plan: a path-loss CSV or --synthetic RxU is required")

    result = plan_exhaustive(matrix, max_workers=cfg["workers"])
    outputs.append(plan_to_csv(result, cfg.output_path("plan_scores.csv")))
    table = result.score_matrix()
    outputs.append(write_csv(cfg.output_path("plan_score_matrix.csv"),
                             ["ru"] + [f"ru{q}" for q in range(result.ru_count)],
                             [[p] + table[p].tolist() for p in range(result.ru_count)]))

    print_summary("RU pair placement", {
        "RUs": matrix.ru_count,
        "UEs": matrix.ue_count,
        "pairs evaluated": result.pairs_evaluated,
        "best pair": f"({result.best_pair[0]}, {result.best_pair[1]})",
        "best score (dB)": result.best_score,
        "thermal noise (dBm)": matrix.thermal_noise_dbm,
    })
    top = sorted(result.scores.items(), key=lambda kv: (-kv[1], kv[0]))[:5]
    print_table("Top pairs", ["pair", "score (dB)"],
                [(f"({p}, {q})", s) for (p, q), s in top], numeric=["score (dB)"])

    if cfg["sweep"]:
        rows = sweep_attenuation(matrix, parse_attenuations(cfg["attenuations"]), cfg["workers"])
        outputs.append(sweep_to_csv(rows, cfg.output_path("plan_sweep.csv")))
        print_table("Attenuation sweep", ["A_RU (dB)", "best pair", "min score (dB)", "max score (dB)"],
                    [(r.attenuation_db, f"({r.best_pair[0]}, {r.best_pair[1]})", r.min_score, r.max_score)
                     for r in rows], numeric=["min score (dB)", "max score (dB)"])
    print_outputs(outputs)
    return 0
