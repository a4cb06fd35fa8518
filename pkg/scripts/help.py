#!/usr/bin/env python3
"""
Command reference for the twin CLI.
"""
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from utils.config import COMMAND_DEFAULTS, DEFAULT_OUTPUT_DIR, DEFAULT_SEED, OUTPUT_DIR_ENV

console = Console()


def _defaults(command: str, keys) -> str:
    values = COMMAND_DEFAULTS[command]
    return ", ".join(f"{k.replace('_', '-')}={values[k]}" for k in keys)


def show_help():
    """Display the full command reference."""

    console.print()
    console.print(Panel.fit(
        "[bold cyan]twin - software channel twin[/bold cyan]\n"
        "[dim]Sounding codes, 512-tap FIR emulation, correlation sounding, "
        "multipath approximation and RU placement[/dim]",
        border_style="cyan"
    ))
    console.print()

    signal_table = Table(title="Sounding", show_header=True, header_style="bold magenta")
    signal_table.add_column("Command", style="cyan", width=34)
    signal_table.add_column("Description", style="white")
    signal_table.add_column("Defaults", style="yellow")
    signal_table.add_row(
        "twin sequence [--family F]",
        "Generate a glfsr / gold / golay-a / golay-b / ls code\n"
        "Writes the chip file and the autocorrelation CSV",
        _defaults("sequence", ["family", "degree", "length", "kind"]),
    )
    signal_table.add_row(
        "twin sound <scenario>",
        "Modulate, emulate one link, correlate, detect taps\n"
        "Writes per-frame taps CSV and a summary JSON",
        _defaults("sound", ["rate", "frames", "noise", "mode", "min_separation"]),
    )
    console.print(signal_table)
    console.print()

    scenario_table = Table(title="Scenarios", show_header=True, header_style="bold green")
    scenario_table.add_column("Command", style="cyan", width=34)
    scenario_table.add_column("Description", style="white")
    scenario_table.add_column("Defaults", style="yellow")
    scenario_table.add_row(
        "twin approximate <profile...>",
        "Cluster ray-traced components into <= 4 grid taps\n"
        "Several profiles become a 1 ms frame sequence",
        _defaults("approximate", ["max_taps", "link", "interval"]),
    )
    scenario_table.add_row(
        "twin validate <scenario>",
        "Sound every link and match taps against the model\n"
        "Exit code 1 when a link does not match",
        _defaults("validate", ["frames", "tolerance", "base_loss"]),
    )
    scenario_table.add_row(
        "twin heatmap <scenario> [--sounded]",
        "Path-loss matrix from the model or from sounding",
        _defaults("heatmap", ["frame", "base_loss"]),
    )
    console.print(scenario_table)
    console.print()

    plan_table = Table(title="Planning", show_header=True, header_style="bold blue")
    plan_table.add_column("Command", style="cyan", width=34)
    plan_table.add_column("Description", style="white")
    plan_table.add_column("Defaults", style="yellow")
    plan_table.add_row(
        "twin plan <matrix.csv> [--sidecar J]",
        "Score every RU pair by mean best SINR (dB)\n"
        "--synthetic RxU for a seeded free-space matrix, --sweep for A_RU",
        _defaults("plan", ["workers", "attenuations"]),
    )
    plan_table.add_row("twin repro [recipe...]", "Run the reproduction recipes (--list)", "all")
    console.print(plan_table)
    console.print()

    console.print(Panel(
        "[bold yellow]Quick start[/bold yellow]\n\n"
        "[cyan]1. Sequence study:[/cyan]\n"
        "   twin sequence --family gold --degree 6\n\n"
        "[cyan]2. Four-tap loop-back without noise:[/cyan]\n"
        "   twin sound data/scenarios/four_tap.json --noise off\n\n"
        "[cyan]3. Ray-traced profile to emulator taps:[/cyan]\n"
        "   twin approximate data/profiles/six_paths.csv\n\n"
        "[cyan]4. Placement on a 24 x 52 matrix:[/cyan]\n"
        "   twin plan --synthetic 24x52\n",
        title="Examples",
        border_style="yellow"
    ))
    console.print()

    console.print(Panel(
        "[bold green]Global flags[/bold green] (before the command)\n\n"
        f"• [cyan]--config FILE[/cyan]  YAML/JSON overlay with a section per command\n"
        f"• [cyan]--seed N[/cyan]       noise and synthetic data seed (default {DEFAULT_SEED})\n"
        f"• [cyan]--out DIR[/cyan]      output directory (${OUTPUT_DIR_ENV}, default '{DEFAULT_OUTPUT_DIR}')\n"
        "• [cyan]--verbose[/cyan]      debug logging\n\n"
        "Exit codes: 0 success, 1 runtime or data error, 2 usage error.",
        title="Options",
        border_style="green"
    ))
    console.print()
