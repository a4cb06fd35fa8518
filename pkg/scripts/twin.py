#!/usr/bin/env python3
"""
twin: software digital-twin channel emulation toolchain.

Generates sounding codes, emulates 512-tap FIR multipath channels, recovers
impulse responses by correlation sounding, approximates ray-traced
multipath into emulator tap sets and plans RU placement by SINR.
"""
import argparse
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv
from rich.logging import RichHandler

from commands import COMMANDS
from utils.config import DEFAULT_OUTPUT_DIR, DEFAULT_SEED, OUTPUT_DIR_ENV, RunConfig
from utils.errors import TwinError
from utils.ui import console

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2

EPILOG = f"""
Examples:
  twin sequence --family glfsr --degree 8
  twin sound data/scenarios/four_tap.json --noise off
  twin approximate data/profiles/six_paths.csv
  twin validate data/scenarios/four_tap.json
  twin heatmap data/scenarios/three_node.json --sounded
  twin plan --synthetic 24x52 --sweep
  twin repro four-tap planner

Global defaults: --seed {DEFAULT_SEED}, --out ${OUTPUT_DIR_ENV} or '{DEFAULT_OUTPUT_DIR}'.
Run 'twin help' for the full command reference.
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twin",
        description="Software digital-twin channel emulation toolchain",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=EPILOG,
    )
    parser.add_argument("--config", default=None, help="YAML/JSON config overlay")
    parser.add_argument("--seed", type=int, default=None,
                        help=f"Seed for noise and synthetic data (default: {DEFAULT_SEED})")
    parser.add_argument("--out", default=None,
                        help=f"Output directory (default: ${OUTPUT_DIR_ENV} or '{DEFAULT_OUTPUT_DIR}')")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")

    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.add_parser("help", help="Show the command reference")
    for name, (module, summary) in COMMANDS.items():
        cmd = sub.add_parser(name, help=summary, description=summary,
                             formatter_class=argparse.RawDescriptionHelpFormatter)
        module.add_arguments(cmd)
    return parser


def setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=verbose)],
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command in (None, "help"):
        from help import show_help
        show_help()
        return EXIT_OK

    try:
        cfg = RunConfig.from_sources(args, args.config)
        setup_logging(cfg.verbose)
        module, _ = COMMANDS[cfg.command]
        return module.run(cfg)
    except TwinError as e:
        console.print(f"[red]✗ {type(e).__name__}: {e}[/red]")
        return e.exit_code
    except OSError as e:
        console.print(f"[red]✗ {e.filename or 'I/O'}: {e.strerror or e}[/red]")
        return EXIT_ERROR
    except KeyboardInterrupt:
        console.print("[yellow]Interrupted[/yellow]")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
