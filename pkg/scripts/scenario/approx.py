"""
Reduce ray-traced multipath profiles to emulator-legal tap sets.

A profile is a list of (ToA, amplitude, phase) components. Components are
binned onto the 10 ns tap grid relative to the earliest arrival, merged
coherently per grid cell, then clustered along the delay axis with power
weighted 1-D k-means (sklearn). Each cluster becomes one tap: coherent sum
of its members, placed at the power-weighted centroid snapped to the grid.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.cluster import KMeans

from dsp.channel import GRID_SPACING_S, MAX_NONZERO_TAPS, TAP_SLOTS, ChannelFrame, Link, TapSet
from utils.errors import ApproximationError

logger = logging.getLogger(__name__)

COHERENCE_DISTANCE_M = 15.0


@dataclass(frozen=True)
class MultipathComponent:
    toa: float
    amplitude: float
    phase: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.toa) and self.toa >= 0):
            raise ApproximationError(f"component ToA must be >= 0, got {self.toa}")
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0):
            raise ApproximationError(f"component amplitude must be >= 0, got {self.amplitude}")
        if not math.isfinite(self.phase):
            raise ApproximationError("component phase must be finite")

    @property
    def gain(self) -> complex:
        return self.amplitude * complex(math.cos(self.phase), math.sin(self.phase))


@dataclass(frozen=True)
class MultipathProfile:
    """h(t, tau) = sum_i c_i delta(t - tau_i); components kept sorted by ToA."""
    components: Tuple[MultipathComponent, ...]

    def __post_init__(self):
        object.__setattr__(self, "components",
                           tuple(sorted(self.components, key=lambda c: c.toa)))

    def __len__(self) -> int:
        return len(self.components)

    @property
    def toas(self) -> np.ndarray:
        return np.array([c.toa for c in self.components], dtype=np.float64)

    @property
    def gains(self) -> np.ndarray:
        return np.array([c.gain for c in self.components], dtype=np.complex128)

    def shifted(self, delta: float) -> "MultipathProfile":
        return MultipathProfile(tuple(
            MultipathComponent(c.toa + delta, c.amplitude, c.phase) for c in self.components))


@dataclass
class ApproximationResult:
    taps: TapSet
    clusters: List[List[int]]
    folded_components: List[int] = field(default_factory=list)
    input_power: float = 0.0
    retained_power: float = 0.0
    refined: bool = False
    origin_toa: float = 0.0

    @property
    def folded(self) -> bool:
        return bool(self.folded_components)

    def energy_report(self) -> Dict[str, float]:
        with np.errstate(divide="ignore"):
            ratio_db = 10.0 * np.log10(self.retained_power / self.input_power) \
                if self.input_power > 0 else 0.0
        return {
            "components": sum(len(c) for c in self.clusters) + len(self.folded_components),
            "taps": len(self.taps),
            "input_power": self.input_power,
            "retained_power": self.retained_power,
            "retained_vs_input_db": float(ratio_db),
            "folded_components": len(self.folded_components),
        }


def _kmeans_partition(cells: np.ndarray, weights: np.ndarray, k: int) -> List[List[int]]:
    """Power-weighted 1-D k-means seeded at the k strongest cells."""
    order = sorted(range(cells.size), key=lambda i: (-weights[i], cells[i]))
    init = np.sort(cells[order[:k]]).astype(np.float64).reshape(-1, 1)
    w = weights if weights.sum() > 0 else np.ones_like(weights)
    model = KMeans(n_clusters=k, init=init, n_init=1, max_iter=300, tol=0.0, random_state=0)
    labels = model.fit_predict(cells.astype(np.float64).reshape(-1, 1), sample_weight=w)
    groups: Dict[int, List[int]] = {}
    for atom, label in enumerate(labels):
        groups.setdefault(int(label), []).append(atom)
    return sorted(groups.values(), key=lambda g: cells[g[0]])


def _best_contiguous_partition(gains: np.ndarray, k: int) -> List[List[int]]:
    """Split delay-ordered atoms into exactly k runs maximising sum |run sum|^2."""
    m = gains.size
    prefix = np.concatenate(([0j], np.cumsum(gains)))

    def power(i: int, j: int) -> float:
        return abs(prefix[j] - prefix[i]) ** 2

    best = np.full((k + 1, m + 1), -np.inf)
    split = np.zeros((k + 1, m + 1), dtype=int)
    best[0, 0] = 0.0
    for c in range(1, k + 1):
        for j in range(c, m - (k - c) + 1):
            for i in range(c - 1, j):
                cand = best[c - 1, i] + power(i, j)
                if cand > best[c, j]:
                    best[c, j] = cand
                    split[c, j] = i
    runs = []
    j = m
    for c in range(k, 0, -1):
        i = split[c, j]
        runs.append(list(range(i, j)))
        j = i
    return runs[::-1]


def _partition_power(gains: np.ndarray, groups: List[List[int]]) -> float:
    return float(sum(abs(gains[g].sum()) ** 2 for g in groups))


def approximate(profile: MultipathProfile, max_taps: int = MAX_NONZERO_TAPS,
                refine: bool = True) -> ApproximationResult:
    """
    Cluster a multipath profile into at most ``max_taps`` grid taps.

    k = min(max_taps, occupied grid cells). Components more than 5.12 us after
    the first arrival are folded into the last cluster and reported. With
    ``refine`` the k-means grouping is replaced by the delay-contiguous
    k-way split with the most coherent power when that split retains more.
    """
    if not len(profile):
        raise ApproximationError("cannot approximate an empty profile")
    if not 1 <= max_taps <= MAX_NONZERO_TAPS:
        raise ApproximationError(f"max_taps must be in 1..{MAX_NONZERO_TAPS}, got {max_taps}")

    toas = profile.toas
    gains = profile.gains
    origin = float(toas.min())
    cell_of = np.floor((toas - origin) / GRID_SPACING_S + 0.5).astype(np.int64)
    inside = np.flatnonzero(cell_of < TAP_SLOTS)
    folded = [int(i) for i in np.flatnonzero(cell_of >= TAP_SLOTS)]
    if folded:
        logger.warning(f"{len(folded)} component(s) beyond {TAP_SLOTS * GRID_SPACING_S * 1e6:.2f} us "
                       f"folded into the last tap")

    cells, atom_index = np.unique(cell_of[inside], return_inverse=True)
    atom_members: List[List[int]] = [[] for _ in cells]
    for comp, atom in zip(inside, atom_index):
        atom_members[atom].append(int(comp))
    atom_gain = np.array([gains[m].sum() for m in atom_members], dtype=np.complex128)
    atom_weight = np.array([float(np.sum(np.abs(gains[m]) ** 2)) for m in atom_members])

    k = min(max_taps, cells.size)
    refined = False
    if k == cells.size:
        groups = [[a] for a in range(cells.size)]
    else:
        groups = _kmeans_partition(cells, atom_weight, k)
        if refine:
            candidate = _best_contiguous_partition(atom_gain, k)
            scale = max(float(np.sum(np.abs(atom_gain) ** 2)), 1e-300)
            if _partition_power(atom_gain, candidate) > _partition_power(atom_gain, groups) + 1e-12 * scale:
                groups = candidate
                refined = True

    taps: List[Tuple[int, complex]] = []
    for g in groups:
        w = atom_weight[g]
        c = cells[g].astype(np.float64)
        centroid = float(np.dot(w, c) / w.sum()) if w.sum() > 0 else float(c.mean())
        index = int(np.clip(math.floor(centroid + 0.5), c.min(), c.max()))
        taps.append((index, complex(atom_gain[g].sum())))
    if folded:
        last_index, last_gain = taps[-1]
        taps[-1] = (last_index, last_gain + complex(gains[folded].sum()))
    first = taps[0][0]
    taps = [(index - first, gain) for index, gain in taps]

    tapset = TapSet(tuple(taps))
    clusters = [sorted(c for a in g for c in atom_members[a]) for g in groups]
    if folded:
        clusters[-1] = sorted(clusters[-1] + folded)
    return ApproximationResult(
        taps=tapset,
        clusters=clusters,
        folded_components=folded,
        input_power=float(np.sum(np.abs(gains) ** 2)),
        retained_power=float(np.sum(np.abs(tapset.gains) ** 2)),
        refined=refined,
        origin_toa=origin,
    )


def sample_trajectory(speed: float, sampling_interval: float, total_time: float) -> np.ndarray:
    """
    Spatial offsets 0, D, 2D, ... with D = speed * sampling_interval, covering
    ``total_time``. Warns when D exceeds the 15 m coherence distance.
    """
    if speed < 0:
        raise ApproximationError(f"speed must be >= 0, got {speed}")
    if not sampling_interval > 0:
        raise ApproximationError(f"sampling interval must be > 0, got {sampling_interval}")
    step = speed * sampling_interval
    if step > COHERENCE_DISTANCE_M:
        logger.warning(f"spatial sampling step {step:g} m exceeds the {COHERENCE_DISTANCE_M:g} m "
                       f"coherence distance; consecutive channels may be inconsistent")
    count = int(math.floor(total_time / sampling_interval + 1e-9)) + 1
    return np.arange(count, dtype=np.float64) * step


def build_frames(link_profiles: Dict[Link, Sequence[MultipathProfile]], sampling_interval: float,
                 max_taps: int = MAX_NONZERO_TAPS, start_ms: int = 0) -> List[ChannelFrame]:
    """
    Turn per-link profile snapshots taken every ``sampling_interval`` seconds
    into consecutive 1 ms frames, each snapshot held until the next one.
    """
    if not link_profiles:
        raise ApproximationError("no link profiles given")
    counts = {len(p) for p in link_profiles.values()}
    if len(counts) != 1 or 0 in counts:
        raise ApproximationError(f"every link needs the same nonzero snapshot count, got {sorted(counts)}")
    hold = max(1, int(round(sampling_interval / 1e-3)))
    snapshots = counts.pop()
    frames: List[ChannelFrame] = []
    for s in range(snapshots):
        links = {link: approximate(profiles[s], max_taps).taps
                 for link, profiles in sorted(link_profiles.items())}
        for _ in range(hold):
            frames.append(ChannelFrame(start_ms + len(frames), links))
    return frames
