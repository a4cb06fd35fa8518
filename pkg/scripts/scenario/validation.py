"""
Scenario validation: path-loss heatmaps, modeled-vs-sounded tap comparison
and the normalised cross-correlation similarity metric.

Path loss of a modeled link is ``-20 log10 |sum of taps| + base_loss_db``
(coherent tap sum, i.e. the narrowband gain of the link).
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from dsp.channel import DEFAULT_BASE_LOSS_DB, Link
from dsp.sounder import SoundingReport, TapStatistics
from utils.errors import ScenarioError
from utils.export import write_csv

from .model import Scenario

logger = logging.getLogger(__name__)

DEFAULT_MAX_LAG = 10


@dataclass
class HeatmapResult:
    """Path loss in dB; rows are transmitters, columns receivers; NaN where absent."""
    nodes: List[int]
    path_loss_db: np.ndarray
    std_db: Optional[np.ndarray] = None

    def entry(self, tx: int, rx: int) -> float:
        return float(self.path_loss_db[self.nodes.index(tx), self.nodes.index(rx)])


def heatmap(scenario: Scenario, frame_index: int = 0,
            base_loss_db: float = DEFAULT_BASE_LOSS_DB) -> HeatmapResult:
    frame = scenario.frame(frame_index)
    nodes = scenario.node_ids
    pos = {n: k for k, n in enumerate(nodes)}
    matrix = np.full((len(nodes), len(nodes)), np.nan)
    for (tx, rx), taps in frame.links.items():
        magnitude = abs(taps.coherent_sum())
        loss = math.inf if magnitude == 0 else -20.0 * math.log10(magnitude)
        matrix[pos[tx], pos[rx]] = loss + base_loss_db
    return HeatmapResult(nodes, matrix)


def campaign_heatmap(reports: Dict[Link, SoundingReport],
                     nodes: Optional[Sequence[int]] = None) -> HeatmapResult:
    """Sounded path loss per link: minus the strongest tap's mean path gain."""
    nodes = sorted(set(nodes or []) | {n for link in reports for n in link})
    pos = {n: k for k, n in enumerate(nodes)}
    loss = np.full((len(nodes), len(nodes)), np.nan)
    std = np.full_like(loss, np.nan)
    for (tx, rx), report in reports.items():
        strongest = report.strongest
        if strongest is None or tx == rx:
            continue
        loss[pos[tx], pos[rx]] = -strongest.mean_gain_db
        std[pos[tx], pos[rx]] = strongest.std_gain_db
    return HeatmapResult(nodes, loss, std)


def measure_base_loss(result: HeatmapResult) -> Tuple[float, float]:
    """
    Mean and standard deviation of the off-diagonal path loss. Sounding a
    scenario whose links are all 0 dB identity taps measures the loop's
    base loss this way.
    """
    values = result.path_loss_db[np.isfinite(result.path_loss_db)]
    if not values.size:
        raise ScenarioError("heatmap has no finite off-diagonal entries")
    return float(values.mean()), float(values.std())


def heatmap_to_csv(result: HeatmapResult, path: Union[str, Path]) -> Path:
    rows = []
    for a, tx in enumerate(result.nodes):
        for b, rx in enumerate(result.nodes):
            if tx == rx or np.isnan(result.path_loss_db[a, b]):
                continue
            row = [tx, rx, float(result.path_loss_db[a, b])]
            if result.std_db is not None:
                row.append(float(result.std_db[a, b]))
            rows.append(row)
    header = ["tx", "rx", "path_loss_db"] + (["std_db"] if result.std_db is not None else [])
    return write_csv(path, header, rows)


@dataclass
class TapComparison:
    modeled_index: int
    modeled_gain_db: float
    sounded_index: Optional[int] = None
    sounded_toa: Optional[float] = None
    sounded_gain_db: Optional[float] = None
    delay_match: bool = False
    gain_error_db: Optional[float] = None


@dataclass
class ValidationResult:
    link: Link
    taps: List[TapComparison]
    unmatched_sounded: List[TapStatistics] = field(default_factory=list)
    base_loss_db: float = DEFAULT_BASE_LOSS_DB

    @property
    def all_matched(self) -> bool:
        return all(t.delay_match for t in self.taps) and not self.unmatched_sounded

    @property
    def max_abs_gain_error_db(self) -> float:
        errors = [abs(t.gain_error_db) for t in self.taps if t.gain_error_db is not None]
        return max(errors) if errors else math.nan

    def summary(self) -> Dict[str, object]:
        errors = [abs(t.gain_error_db) for t in self.taps if t.gain_error_db is not None]
        return {
            "link": f"{self.link[0]}->{self.link[1]}",
            "modeled_taps": len(self.taps),
            "matched": sum(t.delay_match for t in self.taps),
            "unmatched_modeled": sum(not t.delay_match for t in self.taps),
            "unmatched_sounded": len(self.unmatched_sounded),
            "max_abs_gain_error_db": max(errors) if errors else math.nan,
            "mean_abs_gain_error_db": float(np.mean(errors)) if errors else math.nan,
        }


def validate(scenario: Scenario, sounding: SoundingReport, link: Link, frame_index: int = 0,
             base_loss_db: float = DEFAULT_BASE_LOSS_DB, tolerance_cells: int = 1) -> ValidationResult:
    """
    Compare sounded taps with the modeled taps of ``link``.

    Sounded ToAs are relative to the strongest sounded tap; they are anchored
    at the strongest modeled tap's grid index before matching by nearest
    index within ``tolerance_cells``. Gain error is
    ``sounded + base_loss_db - modeled``.
    """
    modeled = scenario.taps(link, frame_index)
    nonzero = [(i, g) for i, g in modeled.taps if g != 0]
    result = ValidationResult(link=(int(link[0]), int(link[1])), taps=[], base_loss_db=base_loss_db)
    if not nonzero:
        result.unmatched_sounded = list(sounding.tracks)
        return result

    anchor = max(nonzero, key=lambda t: (abs(t[1]), -t[0]))[0]
    available = {id(t): t for t in sounding.tracks}
    for index, gain in nonzero:
        modeled_db = 20.0 * math.log10(abs(gain))
        cmp = TapComparison(modeled_index=index, modeled_gain_db=modeled_db)
        best = None
        for track in available.values():
            dist = abs(anchor + track.grid_index - index)
            if dist <= tolerance_cells and (best is None or dist < best[0]):
                best = (dist, track)
        if best is not None:
            track = best[1]
            del available[id(track)]
            cmp.sounded_index = anchor + track.grid_index
            cmp.sounded_toa = track.mean_toa
            cmp.sounded_gain_db = track.mean_gain_db
            cmp.delay_match = True
            cmp.gain_error_db = track.mean_gain_db + base_loss_db - modeled_db
        result.taps.append(cmp)
    result.unmatched_sounded = sorted(available.values(), key=lambda t: t.grid_index)
    if not result.all_matched:
        logger.warning(f"link {link[0]}->{link[1]}: "
                       f"{sum(not t.delay_match for t in result.taps)} modeled and "
                       f"{len(result.unmatched_sounded)} sounded taps unmatched")
    return result


def validation_to_csv(results: Sequence[ValidationResult], path: Union[str, Path]) -> Path:
    rows = []
    for res in results:
        for t in res.taps:
            rows.append([res.link[0], res.link[1], t.modeled_index, t.modeled_gain_db,
                         t.sounded_index, t.sounded_toa, t.sounded_gain_db,
                         t.delay_match, t.gain_error_db])
        for s in res.unmatched_sounded:
            rows.append([res.link[0], res.link[1], None, None, None, s.mean_toa,
                         s.mean_gain_db, False, None])
    header = ["tx", "rx", "modeled_index", "modeled_gain_db", "sounded_index",
              "sounded_toa_s", "sounded_gain_db", "delay_match", "gain_error_db"]
    return write_csv(path, header, rows)


@dataclass
class SimilarityResult:
    rho: float
    lag: int
    profile: Dict[int, float]


def _centered(x: Sequence[float], y: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(x, dtype=np.float64).reshape(-1)
    b = np.asarray(y, dtype=np.float64).reshape(-1)
    if a.size < 2 or b.size < 2:
        raise ScenarioError("similarity needs series of at least 2 samples")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise ScenarioError("similarity is undefined for a zero-variance series")
    n = max(a.size, b.size)
    # zeros appended to the end of the shorter series
    a = np.concatenate([a, np.zeros(n - a.size)])
    b = np.concatenate([b, np.zeros(n - b.size)])
    a = a - a.mean()
    b = b - b.mean()
    return a, b


def cross_correlation_profile(x: Sequence[float], y: Sequence[float],
                              max_lag: int = DEFAULT_MAX_LAG) -> Dict[int, float]:
    """rho(k) for |k| <= max_lag, rho(k) = sum_n x~[n] y~[n+k] / sqrt(sum x~^2 sum y~^2)."""
    a, b = _centered(x, y)
    n = a.size
    norm = math.sqrt(float(a @ a) * float(b @ b))
    profile = {}
    for k in range(-max_lag, max_lag + 1):
        if abs(k) >= n:
            profile[k] = 0.0
        elif k >= 0:
            profile[k] = float(a[:n - k] @ b[k:]) / norm
        else:
            profile[k] = float(a[-k:] @ b[:n + k]) / norm
    return profile


def similarity(x: Sequence[float], y: Sequence[float], max_lag: int = DEFAULT_MAX_LAG) -> SimilarityResult:
    """Signed maximum of rho(k) over |k| <= max_lag and the lag achieving it."""
    profile = cross_correlation_profile(x, y, max_lag)
    lag = max(profile, key=lambda k: (profile[k], -abs(k)))
    return SimilarityResult(rho=profile[lag], lag=lag, profile=profile)
