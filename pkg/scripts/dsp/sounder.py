"""
Cross-correlation channel sounder.

Recovers the channel impulse response from a received capture of repeated
BPSK code periods, picks taps per code period, converts them to path gains
and aggregates statistics across periods.

Three correlation modes:
  LINEAR       sliding correlation  h[k] = sum_n r(n+k) s(n) / (s.s)
  PERIODIC     the same normalisation evaluated cyclically per code period
  DECONVOLVED  per-period spectrum divided by the code's periodic
               autocorrelation spectrum; removes code sidelobes, so a
               noiseless steady-state period returns the taps exactly
"""
import itertools
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import correlate as sliding_correlate
from scipy.signal import find_peaks

from utils.errors import SoundingError
from utils.export import write_csv, write_json

from .channel import GRID_SPACING_S
from .sequences import CodeSequence
from .waveform import IqWaveform

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD_DB = 40.0
DEFAULT_MIN_SEPARATION = 2
DEFAULT_NOISE_MARGIN_DB = 12.0


class CorrelationMode(Enum):
    LINEAR = "linear"
    PERIODIC = "periodic"
    DECONVOLVED = "deconvolved"


@dataclass(frozen=True, eq=False)
class CirEstimate:
    """Normalised correlation output, one code period per frame."""
    lags: np.ndarray
    h_i: np.ndarray
    h_q: np.ndarray
    sample_rate: float
    frame_length: int
    mode: CorrelationMode = CorrelationMode.LINEAR

    def __post_init__(self):
        if not (len(self.lags) == len(self.h_i) == len(self.h_q)):
            raise SoundingError("lags, h_i and h_q must have equal length")

    def __len__(self) -> int:
        return len(self.lags)

    @property
    def magnitude(self) -> np.ndarray:
        return np.hypot(self.h_i, self.h_q)

    @property
    def frame_count(self) -> int:
        return -(-len(self) // self.frame_length)

    def drop_frames(self, count: int) -> "CirEstimate":
        """Discard the first ``count`` code periods (e.g. the channel warm-up)."""
        start = min(count * self.frame_length, len(self))
        return CirEstimate(self.lags[start:] - start, self.h_i[start:], self.h_q[start:],
                           self.sample_rate, self.frame_length, self.mode)


@dataclass(frozen=True)
class DetectedTap:
    frame: int
    peak_lag: int
    toa: float
    magnitude: float
    gain_db: float

    @property
    def grid_index(self) -> int:
        return int(np.floor(self.toa / GRID_SPACING_S + 0.5))


@dataclass(frozen=True)
class SounderConfig:
    samples_per_chip: int = 1
    mode: CorrelationMode = CorrelationMode.DECONVOLVED
    threshold_db: float = DEFAULT_THRESHOLD_DB
    min_separation: int = DEFAULT_MIN_SEPARATION
    noise_margin_db: Optional[float] = DEFAULT_NOISE_MARGIN_DB
    p_t: float = 0.0
    g_t: float = 0.0
    g_r: float = 0.0
    warmup_frames: int = 1
    tolerance_cells: int = 1

    def echo(self) -> Dict[str, object]:
        return {"p_t_db": self.p_t, "g_t_dbi": self.g_t, "g_r_dbi": self.g_r,
                "threshold_db": self.threshold_db, "min_separation": self.min_separation,
                "mode": self.mode.value, "samples_per_chip": self.samples_per_chip,
                "warmup_frames": self.warmup_frames}


@dataclass
class TapStatistics:
    """One tap tracked across frames."""
    grid_index: int
    count: int
    mean_gain_db: float
    std_gain_db: float
    mean_toa: float
    frame_diff_mean_db: float
    frame_diff_std_db: float
    gains_db: List[float] = field(default_factory=list, repr=False)
    frames: List[int] = field(default_factory=list, repr=False)


@dataclass
class SoundingReport:
    frames: List[List[DetectedTap]]
    tracks: List[TapStatistics]
    pairwise: Dict[Tuple[int, int], Tuple[float, float]]
    frame_spacing_samples: int
    sample_rate: float
    config: Dict[str, object] = field(default_factory=dict)

    @property
    def strongest(self) -> Optional[TapStatistics]:
        return max(self.tracks, key=lambda t: t.mean_gain_db, default=None)

    @property
    def weakest(self) -> Optional[TapStatistics]:
        return min(self.tracks, key=lambda t: t.mean_gain_db, default=None)

    def strongest_vs_weakest(self) -> Optional[Tuple[float, float]]:
        """(mean, std) of the per-frame gain difference, strongest minus weakest."""
        s, w = self.strongest, self.weakest
        if s is None or s is w:
            return None
        return self.pairwise.get((s.grid_index, w.grid_index))

    @property
    def d_peak(self) -> float:
        """Peak spacing in seconds."""
        return self.frame_spacing_samples / self.sample_rate


def _reference_samples(reference: CodeSequence, samples_per_chip: int) -> np.ndarray:
    if samples_per_chip < 1:
        raise SoundingError(f"samples_per_chip must be >= 1, got {samples_per_chip}")
    return np.repeat(reference.chips.astype(np.float64), samples_per_chip)


def correlate(received: IqWaveform, reference: CodeSequence, samples_per_chip: int = 1,
              mode: CorrelationMode = CorrelationMode.LINEAR) -> CirEstimate:
    """
    Correlate I and Q of the capture with the real BPSK reference s^I.

    LINEAR returns one lag per sliding position; the block modes return one
    full code period of lags per complete period in the capture.
    """
    s = _reference_samples(reference, samples_per_chip)
    period = s.size
    r = received.samples
    if r.size < period:
        raise SoundingError(
            f"capture has {r.size} samples, shorter than one {period}-sample code period",
            samples=r.size, period=period)
    energy = float(s @ s)

    if mode is CorrelationMode.LINEAR:
        z = sliding_correlate(r, s, mode="valid") / energy
    else:
        blocks = r[:(r.size // period) * period].reshape(-1, period)
        spectrum = np.fft.fft(s)
        weight = np.conj(spectrum)
        if mode is CorrelationMode.PERIODIC:
            weight = weight / energy
        else:
            power = np.abs(spectrum) ** 2
            if power.min() < 1e-9 * power.mean():
                raise SoundingError(
                    f"{reference.family.value} code has a spectral null; "
                    f"use linear or periodic correlation")
            weight = weight / power
        z = np.fft.ifft(np.fft.fft(blocks, axis=1) * weight, axis=1).reshape(-1)

    return CirEstimate(
        lags=np.arange(z.size),
        h_i=np.ascontiguousarray(z.real),
        h_q=np.ascontiguousarray(z.imag),
        sample_rate=received.sample_rate,
        frame_length=period,
        mode=mode,
    )


def _frame_peaks(seg: np.ndarray, height: float, min_separation: int,
                 guards: Tuple[float, float], per_sample: bool) -> np.ndarray:
    if per_sample and min_separation <= 1:
        return np.flatnonzero(seg >= height)
    # guard samples let peaks on the frame edges qualify as local maxima
    padded = np.concatenate(([guards[0]], seg, [guards[1]]))
    peaks, _ = find_peaks(padded, height=height, distance=max(1, min_separation))
    return peaks - 1


def _frame_guards(mag: np.ndarray, start: int, stop: int, cyclic: bool) -> Tuple[float, float]:
    """Values just outside a frame: wrapped for block modes, neighbours for LINEAR."""
    if cyclic:
        return float(mag[stop - 1]), float(mag[start])
    left = float(mag[start - 1]) if start > 0 else 0.0
    right = float(mag[stop]) if stop < mag.size else 0.0
    return left, right


def detect_taps(cir: CirEstimate, threshold_db_below_peak: float = DEFAULT_THRESHOLD_DB,
                min_separation: int = DEFAULT_MIN_SEPARATION,
                noise_margin_db: Optional[float] = DEFAULT_NOISE_MARGIN_DB) -> List[List[DetectedTap]]:
    """
    Pick taps per code period.

    A tap is a local maximum of |h| no lower than the frame's strongest peak
    minus ``threshold_db_below_peak`` and at least ``min_separation`` samples
    from a stronger tap. PERIODIC and DECONVOLVED frames wrap around, so a
    frame's last sample neighbours its first. A DECONVOLVED estimate has no
    code sidelobes and each sample is one channel coefficient: with
    ``min_separation=1`` every sample above the threshold is a tap, which
    resolves taps on adjacent samples.

    A frame whose strongest peak is not ``noise_margin_db`` above the
    capture's noise floor (median |h|^2 / ln 2) yields an empty list. ToA is
    measured from the frame's strongest peak.
    """
    if len(cir) == 0:
        raise SoundingError("empty CIR estimate")
    mag = cir.magnitude
    floor = None
    if noise_margin_db is not None:
        floor = float(np.median(mag ** 2)) / np.log(2.0)
    cyclic = cir.mode is not CorrelationMode.LINEAR
    per_sample = cir.mode is CorrelationMode.DECONVOLVED

    frames: List[List[DetectedTap]] = []
    L = cir.frame_length
    for f in range(cir.frame_count):
        start, stop = f * L, min((f + 1) * L, mag.size)
        seg = mag[start:stop]
        strongest = int(np.argmax(seg))
        peak = float(seg[strongest])
        if peak <= 0.0 or (floor is not None and floor > 0.0
                           and 10.0 * np.log10(peak ** 2 / floor) < noise_margin_db):
            frames.append([])
            continue
        height = peak * 10.0 ** (-threshold_db_below_peak / 20.0)
        guards = _frame_guards(mag, start, stop, cyclic)
        taps = []
        for lag in _frame_peaks(seg, height, min_separation, guards, per_sample):
            m = float(seg[lag])
            taps.append(DetectedTap(
                frame=f,
                peak_lag=int(start + lag),
                toa=(int(lag) - strongest) / cir.sample_rate,
                magnitude=m,
                gain_db=20.0 * np.log10(m),
            ))
        frames.append(taps)
    return frames


def path_gains(taps: Sequence[DetectedTap], p_t: float = 0.0, g_t: float = 0.0,
               g_r: float = 0.0) -> np.ndarray:
    """G_p = 20 log10|h| - P_t - G_t - G_r; -inf where |h| is zero."""
    mags = np.array([t.magnitude for t in taps], dtype=np.float64)
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(mags) - p_t - g_t - g_r


def _match_tracks(frames: List[List[DetectedTap]], tolerance_cells: int) -> List[Dict[int, DetectedTap]]:
    tracks: List[Tuple[int, Dict[int, DetectedTap]]] = []
    for f, taps in enumerate(frames):
        claimed = set()
        for tap in sorted(taps, key=lambda t: (-t.magnitude, t.peak_lag)):
            g = tap.grid_index
            best = None
            for k, (anchor, members) in enumerate(tracks):
                dist = abs(anchor - g)
                if dist <= tolerance_cells and k not in claimed:
                    if best is None or dist < best[0]:
                        best = (dist, k)
            if best is None:
                tracks.append((g, {f: tap}))
                claimed.add(len(tracks) - 1)
            else:
                tracks[best[1]][1][f] = tap
                claimed.add(best[1])
    tracks.sort(key=lambda t: t[0])
    return [members for _, members in tracks]


def aggregate(frames: List[List[DetectedTap]], frame_spacing_samples: int = 0,
              sample_rate: float = 0.0, tolerance_cells: int = 1,
              config: Optional[Dict[str, object]] = None) -> SoundingReport:
    """
    Per-tap statistics across frames; taps are matched by nearest grid index
    within ``tolerance_cells``.
    """
    if not frames:
        raise SoundingError("aggregate needs at least one frame")
    matched = _match_tracks(frames, tolerance_cells)
    stats: List[TapStatistics] = []
    for members in matched:
        order = sorted(members)
        gains = np.array([members[f].gain_db for f in order])
        toas = np.array([members[f].toa for f in order])
        diffs = np.diff(gains)
        stats.append(TapStatistics(
            grid_index=int(np.floor(np.mean(toas) / GRID_SPACING_S + 0.5)),
            count=len(order),
            mean_gain_db=float(np.mean(gains)),
            std_gain_db=float(np.std(gains)),
            mean_toa=float(np.mean(toas)),
            frame_diff_mean_db=float(np.mean(diffs)) if diffs.size else 0.0,
            frame_diff_std_db=float(np.std(diffs)) if diffs.size else 0.0,
            gains_db=gains.tolist(),
            frames=order,
        ))

    pairwise: Dict[Tuple[int, int], Tuple[float, float]] = {}
    for a, b in itertools.permutations(range(len(stats)), 2):
        ga = dict(zip(stats[a].frames, stats[a].gains_db))
        gb = dict(zip(stats[b].frames, stats[b].gains_db))
        common = sorted(set(ga) & set(gb))
        if common:
            d = np.array([ga[f] - gb[f] for f in common])
            pairwise[(stats[a].grid_index, stats[b].grid_index)] = (float(d.mean()), float(d.std()))

    return SoundingReport(frames=frames, tracks=stats, pairwise=pairwise,
                          frame_spacing_samples=frame_spacing_samples,
                          sample_rate=sample_rate, config=dict(config or {}))


def covering_glfsr_degree(max_delay_samples: int, samples_per_chip: int = 1) -> int:
    """Smallest GLFSR degree whose code period exceeds ``max_delay_samples``."""
    degree = 2
    while (2 ** degree - 1) * samples_per_chip <= max_delay_samples:
        degree += 1
    return degree


def check_delay_window(max_delay_samples: int, reference: CodeSequence,
                       samples_per_chip: int = 1) -> None:
    """
    Block correlation folds every delay modulo the code period, so the
    channel's longest delay must stay below one period.
    """
    period = reference.length * samples_per_chip
    if max_delay_samples >= period:
        raise SoundingError(
            f"longest tap delay is {max_delay_samples} samples but the "
            f"{reference.family.value} code period is {period}; use a code of at least "
            f"{max_delay_samples + 1} samples (GLFSR degree "
            f"{covering_glfsr_degree(max_delay_samples, samples_per_chip)}) or a lower rate",
            max_delay_samples=max_delay_samples, period=period)


def sound(received: IqWaveform, reference: CodeSequence,
          config: SounderConfig = SounderConfig(),
          max_delay_samples: Optional[int] = None) -> SoundingReport:
    """
    correlate -> detect_taps -> path_gains -> aggregate.

    When the channel's longest delay is known, pass it as
    ``max_delay_samples`` so the block modes refuse delays they would fold.
    """
    if max_delay_samples is not None and config.mode is not CorrelationMode.LINEAR:
        check_delay_window(max_delay_samples, reference, config.samples_per_chip)
    cir = correlate(received, reference, config.samples_per_chip, config.mode)
    if config.warmup_frames:
        if cir.frame_count <= config.warmup_frames:
            raise SoundingError(
                f"capture holds {cir.frame_count} code periods, need more than "
                f"{config.warmup_frames} warm-up period(s)")
        cir = cir.drop_frames(config.warmup_frames)
    frames = detect_taps(cir, config.threshold_db, config.min_separation, config.noise_margin_db)
    frames = [
        [replace(t, gain_db=float(g)) for t, g in
         zip(taps, path_gains(taps, config.p_t, config.g_t, config.g_r))]
        for taps in frames
    ]
    logger.debug(f"sounded {len(frames)} frames, "
                 f"{sum(len(t) for t in frames)} taps at {received.sample_rate:g} S/s")
    return aggregate(frames, cir.frame_length, received.sample_rate,
                     config.tolerance_cells, config.echo())


def report_to_csv(report: SoundingReport, path: Union[str, Path]) -> Path:
    """Rows of (frame, tap_index, toa_s, gain_db)."""
    rows = [(tap.frame, tap.grid_index, tap.toa, tap.gain_db)
            for taps in report.frames for tap in taps]
    return write_csv(path, ["frame", "tap_index", "toa_s", "gain_db"], rows)


def report_summary(report: SoundingReport) -> Dict[str, object]:
    sw = report.strongest_vs_weakest()
    return {
        "frame_count": len(report.frames),
        "frame_spacing_samples": report.frame_spacing_samples,
        "sample_rate": report.sample_rate,
        "d_peak_s": report.d_peak if report.sample_rate else None,
        "config": report.config,
        "taps": [
            {"tap_index": t.grid_index, "count": t.count, "mean_toa_s": t.mean_toa,
             "mean_gain_db": t.mean_gain_db, "std_gain_db": t.std_gain_db,
             "frame_diff_mean_db": t.frame_diff_mean_db,
             "frame_diff_std_db": t.frame_diff_std_db}
            for t in report.tracks
        ],
        "strongest_vs_weakest_db": None if sw is None else {"mean": sw[0], "std": sw[1]},
    }


def report_to_json(report: SoundingReport, path: Union[str, Path]) -> Path:
    return write_json(path, report_summary(report))
