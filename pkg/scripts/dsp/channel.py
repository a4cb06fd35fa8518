"""
Software FIR channel emulator.

Each link (tx, rx) carries a sparse 512-slot tap vector on a 10 ns grid with
at most four nonzero taps. Every millisecond a new ChannelFrame may replace
the taps. A receiver's output is the superposition of every transmitter's
signal convolved with its link taps, scaled by the base loss, plus AWGN at
the noise floor.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from utils.errors import ChannelError

from .waveform import IqWaveform, awgn

logger = logging.getLogger(__name__)

GRID_SPACING_S = 10e-9
TAP_SLOTS = 512
MAX_NONZERO_TAPS = 4
FRAME_PERIOD_MS = 1
DEFAULT_BASE_LOSS_DB = 57.55
DEFAULT_NOISE_FLOOR_DB = -100.0

Link = Tuple[int, int]


@dataclass(frozen=True)
class TapSet:
    """
    Sparse FIR taps as sorted ``(grid_index, complex_gain)`` pairs.

    Explicit zero-gain entries are kept (a destructive coherent merge is
    still a tap position), but never more than four entries in total.
    """
    taps: Tuple[Tuple[int, complex], ...] = ()

    def __post_init__(self):
        entries: Dict[int, complex] = {}
        for index, gain in self.taps:
            index = int(index)
            if index in entries:
                raise ChannelError(f"duplicate tap index {index}", index=index)
            entries[index] = complex(gain)
        if len(entries) > MAX_NONZERO_TAPS:
            raise ChannelError(
                f"{len(entries)} taps exceed the emulator limit of {MAX_NONZERO_TAPS}",
                count=len(entries))
        for index, gain in entries.items():
            if not 0 <= index < TAP_SLOTS:
                raise ChannelError(f"tap index {index} outside 0..{TAP_SLOTS - 1}", index=index)
            if not (math.isfinite(gain.real) and math.isfinite(gain.imag)):
                raise ChannelError(f"tap {index} has non-finite gain", index=index)
        object.__setattr__(self, "taps", tuple(sorted(entries.items())))

    @classmethod
    def from_dict(cls, taps: Mapping[int, complex]) -> "TapSet":
        return cls(tuple(taps.items()))

    @classmethod
    def from_db(cls, taps: Mapping[int, float], phases: Optional[Mapping[int, float]] = None) -> "TapSet":
        """Build from gain in dB per index, with optional phase in radians."""
        phases = phases or {}
        return cls(tuple(
            (i, 10.0 ** (g / 20.0) * np.exp(1j * phases.get(i, 0.0))) for i, g in taps.items()
        ))

    @classmethod
    def identity(cls) -> "TapSet":
        return cls(((0, 1.0 + 0j),))

    def __len__(self) -> int:
        return len(self.taps)

    def as_dict(self) -> Dict[int, complex]:
        return dict(self.taps)

    @property
    def indices(self) -> List[int]:
        return [i for i, _ in self.taps]

    @property
    def gains(self) -> np.ndarray:
        return np.array([g for _, g in self.taps], dtype=np.complex128)

    @property
    def delays(self) -> np.ndarray:
        """Tap delays in seconds."""
        return np.array(self.indices, dtype=np.float64) * GRID_SPACING_S

    @property
    def gains_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(np.abs(self.gains))

    @property
    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.gains))

    def coherent_sum(self) -> complex:
        return complex(np.sum(self.gains)) if self.taps else 0j

    def to_dense(self) -> np.ndarray:
        """The full 512-slot tap vector."""
        dense = np.zeros(TAP_SLOTS, dtype=np.complex128)
        for i, g in self.taps:
            dense[i] = g
        return dense


@dataclass(frozen=True)
class ChannelFrame:
    """Tap sets for every link, valid for one millisecond."""
    timestamp_ms: int
    links: Mapping[Link, TapSet] = field(default_factory=dict)

    def __post_init__(self):
        links = dict(sorted(((int(tx), int(rx)), taps) for (tx, rx), taps in self.links.items()))
        loops = [tx for tx, rx in links if tx == rx]
        if loops:
            raise ChannelError(f"frame at {self.timestamp_ms} ms links node {loops[0]} to itself",
                               node=loops[0])
        object.__setattr__(self, "links", links)

    def nodes(self) -> List[int]:
        return sorted({n for link in self.links for n in link})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChannelFrame):
            return NotImplemented
        return self.timestamp_ms == other.timestamp_ms and self.links == other.links


@dataclass(frozen=True)
class EmulatorConfig:
    """Emulator hardware properties, defaulting to the measured testbed values."""
    sample_rate: float
    base_loss_db: float = DEFAULT_BASE_LOSS_DB
    noise_floor_db: float = DEFAULT_NOISE_FLOOR_DB
    noise_enabled: bool = True
    max_workers: int = 4

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ChannelError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def base_loss_scale(self) -> float:
        return 10.0 ** (-self.base_loss_db / 20.0)

    @property
    def samples_per_frame(self) -> int:
        exact = self.sample_rate * FRAME_PERIOD_MS * 1e-3
        n = int(round(exact))
        if n < 1 or abs(exact - n) > 1e-6:
            raise ChannelError(
                f"{self.sample_rate:g} S/s does not give a whole number of samples per ms")
        return n


@dataclass
class EmulationReport:
    """Per-receiver outputs plus what the emulator had to assume."""
    outputs: Dict[int, IqWaveform]
    missing_links: List[Link] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def __getitem__(self, node: int) -> IqWaveform:
        return self.outputs[node]

    def __contains__(self, node: int) -> bool:
        return node in self.outputs

    def __len__(self) -> int:
        return len(self.outputs)

    def keys(self):
        return self.outputs.keys()


def tap_shift(index: int, sample_rate: float) -> Tuple[int, float]:
    """Nearest-sample position of a grid index and the residual in samples."""
    exact = index * GRID_SPACING_S * sample_rate
    shift = int(math.floor(exact + 0.5))
    residual = exact - shift
    if abs(residual) < 1e-9:
        residual = 0.0
    return shift, residual


def _placement_warnings(taps: TapSet, sample_rate: float) -> List[str]:
    notes = []
    for index, _ in taps.taps:
        shift, residual = tap_shift(index, sample_rate)
        if residual:
            notes.append(f"tap {index} ({index * 10} ns) placed at sample {shift}, "
                         f"off-grid by {residual:+.3f} samples")
    return notes


def max_shift(frames: Iterable[ChannelFrame], sample_rate: float) -> int:
    longest = 0
    for frame in frames:
        for taps in frame.links.values():
            for index, _ in taps.taps:
                longest = max(longest, tap_shift(index, sample_rate)[0])
    return longest


def _convolve(samples: np.ndarray, taps: TapSet, scale: float, sample_rate: float,
              out: np.ndarray, offset: int = 0) -> None:
    """Accumulate the sparse convolution of ``samples`` into ``out``."""
    n = samples.size
    for index, gain in taps.taps:
        if gain == 0:
            continue
        shift, _ = tap_shift(index, sample_rate)
        out[offset + shift:offset + shift + n] += (gain * scale) * samples


def convolve_link(input: IqWaveform, taps: TapSet, config: EmulatorConfig) -> IqWaveform:
    """
    Apply one link's taps: sum of gain * base-loss scale * input delayed by the
    tap's nearest-sample position. Off-grid placements are noted in the label.
    """
    if not math.isclose(input.sample_rate, config.sample_rate, rel_tol=1e-12):
        raise ChannelError(
            f"input rate {input.sample_rate:g} S/s does not match emulator rate "
            f"{config.sample_rate:g} S/s")
    longest = max((tap_shift(i, config.sample_rate)[0] for i, _ in taps.taps), default=0)
    out = np.zeros(len(input) + longest, dtype=np.complex128)
    _convolve(input.samples, taps, config.base_loss_scale, config.sample_rate, out)
    notes = _placement_warnings(taps, config.sample_rate)
    for note in notes:
        logger.warning(note)
    label = input.label
    if notes:
        label = f"{label} [warning: {'; '.join(notes)}]"
    return IqWaveform(out, config.sample_rate, label)


def _check_inputs(inputs: Mapping[int, IqWaveform], config: EmulatorConfig) -> int:
    if not inputs:
        raise ChannelError("no transmitter inputs given")
    lengths = {len(w) for w in inputs.values()}
    if len(lengths) != 1:
        raise ChannelError(f"input waveforms differ in length: {sorted(lengths)}")
    for node, wave in inputs.items():
        if not math.isclose(wave.sample_rate, config.sample_rate, rel_tol=1e-12):
            raise ChannelError(
                f"node {node} rate {wave.sample_rate:g} S/s does not match emulator rate "
                f"{config.sample_rate:g} S/s", node=node)
    return lengths.pop()


def _receivers(frames: Sequence[ChannelFrame], receivers: Optional[Iterable[int]]) -> List[int]:
    if receivers is not None:
        return sorted(set(receivers))
    return sorted({rx for frame in frames for (_, rx) in frame.links})


def receiver_noise(rx: int, n: int, config: EmulatorConfig, noise_seed: int) -> np.ndarray:
    """
    Noise for one receiver at the configured floor.

    Drawn once per receiver however many links feed it, from a sub-stream
    keyed by (seed, receiver id); per-link streams would stack one floor per
    transmitter. Outputs do not depend on worker count or link order.
    """
    seq = np.random.SeedSequence([int(noise_seed), int(rx)])
    rng = np.random.Generator(np.random.PCG64(seq))
    return awgn(n, config.noise_floor_db, rng)


def _run_receivers(receivers: List[int], work, max_workers: int) -> Dict[int, np.ndarray]:
    """Evaluate ``work(rx)`` per receiver; results keyed by receiver id."""
    if max_workers <= 1 or len(receivers) <= 1:
        return {rx: work(rx) for rx in receivers}
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {rx: executor.submit(work, rx) for rx in receivers}
        return {rx: futures[rx].result() for rx in receivers}


def emulate(inputs: Mapping[int, IqWaveform], frame: ChannelFrame, config: EmulatorConfig,
            noise_seed: int = 0, receivers: Optional[Iterable[int]] = None) -> EmulationReport:
    """
    y_j = sum_i x_i * h_ij + AWGN for every receiver j.

    Receivers default to every rx node named in the frame. Output length is the
    input length plus the longest tap delay of the frame, for every receiver.
    """
    return emulate_mobile(inputs, [frame], config, noise_seed, receivers)


def emulate_mobile(inputs: Mapping[int, IqWaveform], frames: Sequence[ChannelFrame],
                   config: EmulatorConfig, noise_seed: int = 0,
                   receivers: Optional[Iterable[int]] = None) -> EmulationReport:
    """
    Time-varying emulation: the input is cut into 1 ms blocks, block k is
    convolved with frames[k] and the results are overlap-added, so each
    block's tail carries into the next. Samples past the last frame's span
    keep the last frame's taps.
    """
    if not frames:
        raise ChannelError("at least one frame is required")
    for prev, cur in zip(frames, frames[1:]):
        if cur.timestamp_ms - prev.timestamp_ms != FRAME_PERIOD_MS:
            raise ChannelError(
                f"frames at {prev.timestamp_ms} ms and {cur.timestamp_ms} ms are not "
                f"{FRAME_PERIOD_MS} ms apart")
    n = _check_inputs(inputs, config)
    block = config.samples_per_frame if len(frames) > 1 else n
    span = block * len(frames) if len(frames) > 1 else n
    if n < span:
        raise ChannelError(
            f"input has {n} samples but {len(frames)} frames span {span} samples",
            samples=n, span=span)

    rxs = _receivers(frames, receivers)
    out_len = n + max_shift(frames, config.sample_rate)
    scale = config.base_loss_scale
    rate = config.sample_rate

    report = EmulationReport(outputs={})
    seen_warnings = set()
    for frame in frames:
        for taps in frame.links.values():
            for note in _placement_warnings(taps, rate):
                if note not in seen_warnings:
                    seen_warnings.add(note)
                    report.warnings.append(note)
                    logger.warning(note)
    for rx in rxs:
        for tx in sorted(inputs):
            if tx != rx and any((tx, rx) not in f.links for f in frames):
                report.missing_links.append((tx, rx))
    for tx, rx in report.missing_links:
        logger.warning(f"no taps for link {tx}->{rx}; treated as a zero channel")

    def work(rx: int) -> np.ndarray:
        out = np.zeros(out_len, dtype=np.complex128)
        for k, frame in enumerate(frames):
            start = k * block
            stop = n if k == len(frames) - 1 else start + block
            for tx in sorted(inputs):
                taps = frame.links.get((tx, rx))
                if taps is None:
                    continue
                _convolve(inputs[tx].samples[start:stop], taps, scale, rate, out, offset=start)
        if config.noise_enabled:
            out += receiver_noise(rx, out_len, config, noise_seed)
        return out

    results = _run_receivers(rxs, work, config.max_workers)
    tag = "" if not report.warnings else f" [warning: {len(report.warnings)} off-grid taps]"
    for rx in rxs:
        report.outputs[rx] = IqWaveform(results[rx], rate, f"rx{rx}{tag}")
    return report
