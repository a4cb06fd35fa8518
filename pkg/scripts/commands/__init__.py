"""
Subcommands of the twin CLI. Each module exposes ``add_arguments(parser)``
and ``run(cfg) -> exit code``.
"""
from . import approximate, heatmap, plan, repro, sequence, sound, validate

# name -> (module, one-line summary), in help order
COMMANDS = {
    "sequence": (sequence, "Generate a sounding code and its autocorrelation profile"),
    "sound": (sound, "Sound one scenario link through the software emulator"),
    "approximate": (approximate, "Reduce a ray-traced multipath profile to emulator taps"),
    "validate": (validate, "Compare sounded taps with the scenario model"),
    "heatmap": (heatmap, "Path-loss matrix of a scenario, modeled or sounded"),
    "plan": (plan, "Exhaustive RU-pair placement on a path-loss matrix"),
    "repro": (repro, "Run the reproduction recipes"),
}

__all__ = ['COMMANDS']
