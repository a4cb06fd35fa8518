"""
twin sequence: generate a sounding code and its autocorrelation profile.
"""
import argparse
import logging

from dsp import CorrelationKind, SequenceFamily, autocorrelation, save_chips, sequence_stats
from utils.config import RunConfig
from utils.export import write_csv
from utils.ui import console, print_outputs, print_summary

from .common import FAMILY_CHOICES, build_code, parse_family

logger = logging.getLogger(__name__)

# Golay and LS codes are used as one-shot (aperiodic) sounding bursts; m-sequence
# families are characterised cyclically.
APERIODIC_FAMILIES = {SequenceFamily.GOLAY_A, SequenceFamily.GOLAY_B, SequenceFamily.LS}


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", choices=FAMILY_CHOICES, default=None,
                        help="Code family (default: glfsr)")
    parser.add_argument("--degree", type=int, default=None,
                        help="Register degree for glfsr/gold (default: 8)")
    parser.add_argument("--mask", type=int, default=None,
                        help="GLFSR output mask as an integer bit vector (default: 0)")
    parser.add_argument("--state", type=int, default=None,
                        help="GLFSR seed state, nonzero (default: 1)")
    parser.add_argument("--poly1", default=None, help="Gold polynomial 1, e.g. 'z^6+z+1'")
    parser.add_argument("--poly2", default=None, help="Gold polynomial 2")
    parser.add_argument("--shift", type=int, default=None, help="Gold relative shift (default: 0)")
    parser.add_argument("--length", type=int, default=None,
                        help="Golay length / LS base pair length (default: 128)")
    parser.add_argument("--member", type=int, choices=[0, 1], default=None,
                        help="LS codeset member (default: 0)")
    parser.add_argument("--kind", choices=["auto", "periodic", "aperiodic"], default=None,
                        help="Autocorrelation kind (default: auto by family)")


def run(cfg: RunConfig) -> int:
    family = parse_family(cfg["family"])
    seq = build_code(cfg["family"], degree=cfg["degree"], length=cfg["length"],
                     mask=cfg["mask"], state=cfg["state"], poly1=cfg["poly1"],
                     poly2=cfg["poly2"], shift=cfg["shift"], member=cfg["member"])
    kind = cfg["kind"]
    if kind == "auto":
        kind = CorrelationKind.APERIODIC if family in APERIODIC_FAMILIES else CorrelationKind.PERIODIC
    else:
        kind = CorrelationKind(kind)

    profile = autocorrelation(seq, kind)
    stats = sequence_stats(seq, kind)
    stem = f"{family.value}_{seq.length}"
    chips_path = save_chips(seq, cfg.output_path(f"{stem}.txt"))
    csv_path = write_csv(cfg.output_path(f"{stem}_autocorr.csv"), ["lag", "value"],
                         enumerate(profile.tolist()))
    logger.debug(f"{stem}: {len(set(profile[1:].tolist()))} distinct sidelobe values")

    print_summary(f"{family.value} sequence", {
        "length": seq.length,
        **seq.params,
        "correlation": kind.value,
        "peak": stats["peak"],
        "max sidelobe": stats["max_sidelobe"],
        "peak/sidelobe (dB)": stats["psr_db"],
    })
    print_outputs([chips_path, csv_path])
    console.print()
    return 0
