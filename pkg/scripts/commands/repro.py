"""
twin repro: run the named reproduction recipes and summarise them.
"""
import argparse

from utils.config import RunConfig
from utils.errors import ConfigError
from utils.export import write_json
from utils.ui import console, make_progress, print_outputs, print_table

from .recipes import RECIPES, ReproRunner


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("recipes", nargs="*", default=None,
                        help="Recipe names (default: all)")
    parser.add_argument("--list", action="store_true", default=None,
                        help="List recipes and exit")


def run(cfg: RunConfig) -> int:
    if cfg["list"]:
        print_table("Recipes", ["name", "checks"],
                    [(r.name, r.description) for r in RECIPES.values()])
        return 0

    names = list(cfg["recipes"]) or list(RECIPES)
    unknown = [n for n in names if n not in RECIPES]
    if unknown:
        raise ConfigError(f"unknown recipe(s): {', '.join(unknown)}; see `twin repro --list`")

    runner = ReproRunner(seed=cfg.seed)
    with make_progress() as progress:
        task = progress.add_task("Running recipes", total=len(names))

        def done(metrics):
            progress.advance(task)
            mark = "[green]✓[/green]" if metrics.passed else "[red]✗[/red]"
            progress.console.print(f"{mark} {metrics.name} ({metrics.duration:.2f} s)")

        passed = runner.run(names, on_done=done)

    runner.print_summary()
    print_outputs([write_json(cfg.output_path("repro_summary.json"), runner.get_summary())])
    if not passed:
        console.print("[red]✗ some recipes failed[/red]")
        return 1
    return 0
