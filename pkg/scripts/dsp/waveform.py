"""
Complex baseband waveforms: BPSK modulation of code sequences, `.iq` file
I/O and seeded AWGN.

`.iq` layout: interleaved I, Q samples as IEEE-754 binary32, little-endian,
no header (8 bytes per sample).

Noise uses numpy's PCG64 bit generator seeded with the given integer, drawn
through ``Generator.standard_normal`` (real parts first, then imaginary).
"""
import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from utils.errors import IqFormatError, TwinError

from .sequences import CodeSequence

logger = logging.getLogger(__name__)

IQ_DTYPE = np.dtype("<f4")


@dataclass(frozen=True, eq=False)
class IqWaveform:
    """Sampled complex baseband signal."""
    samples: np.ndarray
    sample_rate: float
    label: str = ""

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise TwinError(f"sample_rate must be positive, got {self.sample_rate}")
        samples = np.array(self.samples, dtype=np.complex128).reshape(-1)
        bad = np.flatnonzero(~np.isfinite(samples))
        if bad.size:
            raise IqFormatError(f"non-finite sample at index {int(bad[0])}",
                                sample_index=int(bad[0]))
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    @property
    def power(self) -> float:
        """Mean sample power."""
        if not len(self):
            return 0.0
        return float(np.mean(np.abs(self.samples) ** 2))

    def with_label(self, label: str) -> "IqWaveform":
        return IqWaveform(self.samples, self.sample_rate, label)


def modulate_bpsk(seq: CodeSequence, sample_rate: float, samples_per_chip: int = 1,
                  repetitions: int = 1) -> IqWaveform:
    """Hold each chip for ``samples_per_chip`` samples and repeat the code."""
    if samples_per_chip < 1:
        raise TwinError(f"samples_per_chip must be >= 1, got {samples_per_chip}")
    if repetitions < 1:
        raise TwinError(f"repetitions must be >= 1, got {repetitions}")
    one_period = np.repeat(seq.chips.astype(np.float64), samples_per_chip)
    samples = np.tile(one_period, repetitions).astype(np.complex128)
    label = f"bpsk:{seq.family.value}:N={seq.length}:spc={samples_per_chip}:reps={repetitions}"
    return IqWaveform(samples, sample_rate, label)


def save_iq_file(wave: IqWaveform, path: Union[str, Path]) -> Path:
    """
    Write interleaved little-endian float32 I/Q.

    Samples are stored at binary32 precision; waveforms whose components are
    float32-representable (BPSK, anything loaded from `.iq`) round-trip
    bit-exactly.
    """
    path = Path(path)
    interleaved = np.empty(2 * len(wave), dtype=IQ_DTYPE)
    with np.errstate(over="ignore"):
        interleaved[0::2] = wave.samples.real
        interleaved[1::2] = wave.samples.imag
    bad = np.flatnonzero(~np.isfinite(interleaved))
    if bad.size:
        raise IqFormatError(f"sample {int(bad[0]) // 2} overflows float32",
                            sample_index=int(bad[0]) // 2)
    path.parent.mkdir(parents=True, exist_ok=True)
    interleaved.tofile(path)
    return path


def load_iq_file(path: Union[str, Path], sample_rate: float = 1.0) -> IqWaveform:
    """Read a `.iq` capture. The format carries no rate; pass it in."""
    path = Path(path)
    try:
        size = path.stat().st_size
    except OSError as e:
        raise IqFormatError(f"{path}: cannot read capture ({e.strerror or e})", path=str(path)) from e
    if size % IQ_DTYPE.itemsize:
        raise IqFormatError(f"truncated: {size} bytes is not a whole number of floats",
                            path=str(path))
    raw = np.fromfile(path, dtype=IQ_DTYPE)
    if raw.size % 2:
        raise IqFormatError(f"truncated: {raw.size} floats", path=str(path))
    bad = np.flatnonzero(~np.isfinite(raw))
    if bad.size:
        index = int(bad[0]) // 2
        raise IqFormatError(f"non-finite value at sample {index}", sample_index=index,
                            path=str(path))
    samples = raw[0::2].astype(np.float64) + 1j * raw[1::2].astype(np.float64)
    return IqWaveform(samples, sample_rate, label=f"file:{path.name}")


def add_awgn(wave: IqWaveform, noise_power_db: float, seed: int) -> IqWaveform:
    """Add circularly-symmetric complex Gaussian noise of total power 10^(dB/10)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return IqWaveform(wave.samples + awgn(len(wave), noise_power_db, rng),
                      wave.sample_rate, wave.label)


def awgn(n: int, noise_power_db: float, rng: np.random.Generator) -> np.ndarray:
    """``n`` complex noise samples of total power 10^(noise_power_db/10)."""
    sigma = np.sqrt(10.0 ** (noise_power_db / 10.0) / 2.0)
    draws = rng.standard_normal((2, n))
    return sigma * (draws[0] + 1j * draws[1])


def export_csv(wave: IqWaveform, path: Union[str, Path]) -> Path:
    """Plot-ready CSV with columns index, I, Q."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "I", "Q"])
        for i, s in enumerate(wave.samples):
            writer.writerow([i, repr(float(s.real)), repr(float(s.imag))])
    return path
