"""
Helpers shared by the subcommands: link parsing, code construction and the
software sounding loop (modulate -> emulate -> sound).
"""
import logging
from dataclasses import dataclass
from typing import Optional

from dsp import (
    ChannelFrame,
    CodeSequence,
    CorrelationMode,
    EmulatorConfig,
    IqWaveform,
    SequenceFamily,
    SounderConfig,
    SoundingReport,
    emulate,
    generate_glfsr,
    generate_gold,
    generate_golay,
    generate_ls,
    max_shift,
    modulate_bpsk,
    sound,
)
from dsp.channel import Link
from scenario import Scenario
from utils.config import RunConfig
from utils.errors import ConfigError, ScenarioError

logger = logging.getLogger(__name__)

FAMILY_CHOICES = ["glfsr", "gold", "golay-a", "golay-b", "ls"]
MODE_CHOICES = [m.value for m in CorrelationMode]


def parse_family(name: str) -> SequenceFamily:
    try:
        return SequenceFamily(name.replace("-", "_").lower())
    except ValueError:
        raise ConfigError(f"unknown sequence family {name!r}; choose from {', '.join(FAMILY_CHOICES)}") from None


def parse_link(text: str) -> Link:
    """'0:1' or '0->1' -> (0, 1)."""
    cleaned = text.replace("->", ":").replace(",", ":")
    parts = cleaned.split(":")
    try:
        tx, rx = (int(p) for p in parts)
    except ValueError:
        raise ConfigError(f"link must look like TX:RX, got {text!r}") from None
    return tx, rx


def build_code(family: str, degree: int = 8, length: int = 128, mask: int = 0, state: int = 1,
               poly1: Optional[str] = None, poly2: Optional[str] = None, shift: int = 0,
               member: int = 0) -> CodeSequence:
    kind = parse_family(family)
    if kind is SequenceFamily.GLFSR:
        return generate_glfsr(degree, mask, state)
    if kind is SequenceFamily.GOLD:
        if poly1 or poly2:
            return generate_gold(poly1, poly2, shift=shift)
        return generate_gold(shift=shift, degree=degree)
    if kind is SequenceFamily.GOLAY_A:
        return generate_golay(length, "A")
    if kind is SequenceFamily.GOLAY_B:
        return generate_golay(length, "B")
    return generate_ls(length, member)


def code_from_config(cfg: RunConfig) -> CodeSequence:
    return build_code(cfg["family"], degree=cfg["degree"], length=cfg["length"])


def sounder_config(cfg: RunConfig) -> SounderConfig:
    return SounderConfig(mode=CorrelationMode(cfg["mode"]), threshold_db=cfg["threshold"],
                         min_separation=cfg["min_separation"])


def noise_enabled(cfg: RunConfig) -> bool:
    value = cfg["noise"]
    if isinstance(value, bool):
        return value
    if str(value).lower() not in ("on", "off"):
        raise ConfigError(f"noise must be 'on' or 'off', got {value!r}")
    return str(value).lower() == "on"


def default_link(scenario: Scenario, link: Optional[str]) -> Link:
    if link:
        return parse_link(link)
    links = scenario.links()
    if not links:
        raise ScenarioError("scenario has no links to sound")
    return links[0]


@dataclass
class LoopbackResult:
    report: SoundingReport
    transmitted: IqWaveform
    received: IqWaveform
    link: Link


def sound_link(scenario: Scenario, link: Link, code: CodeSequence, sample_rate: float,
               periods: int, noise: bool = True, noise_floor_db: float = -100.0,
               base_loss_db: float = 57.55, seed: int = 0, frame_index: int = 0,
               config: SounderConfig = SounderConfig()) -> LoopbackResult:
    """
    Sound one link of a scenario in software: ``periods`` code periods (plus
    the sounder's warm-up) are emulated through the link's taps and the
    capture is run through :func:`dsp.sound`.

    Only the transmitted span of the receiver output is analysed; the
    convolution tail past it holds no complete code period.
    """
    taps = scenario.taps(link, frame_index)
    frame = ChannelFrame(scenario.frame(frame_index).timestamp_ms, {link: taps})
    longest = max_shift([frame], sample_rate)
    wave = modulate_bpsk(code, sample_rate, config.samples_per_chip,
                         repetitions=periods + config.warmup_frames)
    emulator = EmulatorConfig(sample_rate=sample_rate, base_loss_db=base_loss_db,
                              noise_floor_db=noise_floor_db, noise_enabled=noise)
    tx, rx = link
    output = emulate({tx: wave}, frame, emulator, noise_seed=seed, receivers=[rx])[rx]
    received = IqWaveform(output.samples[:len(wave)], sample_rate, output.label)
    logger.info(f"link {tx}->{rx}: {len(wave)} samples through {taps.nonzero_count} taps")
    report = sound(received, code, config, max_delay_samples=longest)
    return LoopbackResult(report=report, transmitted=wave, received=received, link=link)


def require(cfg: RunConfig, key: str, what: str):
    """Value of a mandatory option (positional or config file)."""
    value = cfg[key]
    if value in (None, ""):
        raise ConfigError(f"{cfg.command}: {what} is required", key=key)
    return value
