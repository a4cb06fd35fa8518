"""
RF placement planning.

RSSI of RU i at UE j (all dB):

    S_ij = P_RU,i + G_RU,i - A_RU,i - L_ij + G_UE,j

SINR with a set of active RUs (linear power, returned in dB):

    Gamma = S_serving,j / (N * F_UE,j + sum_{u active, u != serving} S_u,j)

Exhaustive planning scores every unordered RU pair by the mean over UEs of
max(Gamma_p,j, Gamma_q,j), each member interfering with the other, and
averages the dB values. Ties go to the lexicographically smallest pair.
Scalar evaluation uses ``math`` in a fixed order so scores are reproducible
to the bit.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from utils.errors import PlanningError
from utils.export import write_csv

logger = logging.getLogger(__name__)

DEFAULT_P_RU_DBM = 24.0
DEFAULT_G_RU_DBI = 5.0
DEFAULT_A_RU_DB = 0.0
DEFAULT_G_UE_DBI = 1.1
DEFAULT_F_UE_DB = 5.0
DEFAULT_BANDWIDTH_HZ = 100e6
THERMAL_NOISE_DBM_HZ = -174.0

Pair = Tuple[int, int]


def thermal_noise_dbm(bandwidth_hz: float) -> float:
    """kTB at 290 K: -174 dBm/Hz + 10 log10(B)."""
    if not bandwidth_hz > 0:
        raise PlanningError(f"bandwidth must be positive, got {bandwidth_hz}")
    return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(bandwidth_hz)


def _vector(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    arr = arr.reshape(-1)
    if arr.size != n:
        raise PlanningError(f"{name} has {arr.size} entries, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise PlanningError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True, eq=False)
class LinkGainMatrix:
    """Path loss L (R x U, dB) with per-RU and per-UE link-budget parameters."""
    path_loss_db: np.ndarray
    p_ru_dbm: np.ndarray
    g_ru_dbi: np.ndarray
    a_ru_db: np.ndarray
    g_ue_dbi: np.ndarray
    f_ue_db: np.ndarray
    thermal_noise_dbm: float

    def __post_init__(self):
        loss = np.array(self.path_loss_db, dtype=np.float64)
        if loss.ndim != 2 or 0 in loss.shape:
            raise PlanningError(f"path loss must be a non-empty R x U matrix, got shape {loss.shape}")
        if not np.all(np.isfinite(loss)):
            row, col = np.argwhere(~np.isfinite(loss))[0]
            raise PlanningError(f"non-finite path loss at RU {row}, UE {col}", ru=int(row), ue=int(col))
        r, u = loss.shape
        object.__setattr__(self, "path_loss_db", loss)
        object.__setattr__(self, "p_ru_dbm", _vector(self.p_ru_dbm, r, "P_RU"))
        object.__setattr__(self, "g_ru_dbi", _vector(self.g_ru_dbi, r, "G_RU"))
        object.__setattr__(self, "a_ru_db", _vector(self.a_ru_db, r, "A_RU"))
        object.__setattr__(self, "g_ue_dbi", _vector(self.g_ue_dbi, u, "G_UE"))
        object.__setattr__(self, "f_ue_db", _vector(self.f_ue_db, u, "F_UE"))
        if not math.isfinite(self.thermal_noise_dbm):
            raise PlanningError("thermal noise must be finite")
        object.__setattr__(self, "thermal_noise_dbm", float(self.thermal_noise_dbm))

    @classmethod
    def from_path_loss(cls, path_loss_db, p_ru_dbm=DEFAULT_P_RU_DBM, g_ru_dbi=DEFAULT_G_RU_DBI,
                       a_ru_db=DEFAULT_A_RU_DB, g_ue_dbi=DEFAULT_G_UE_DBI, f_ue_db=DEFAULT_F_UE_DB,
                       bandwidth_hz: float = DEFAULT_BANDWIDTH_HZ,
                       thermal_noise: Optional[float] = None) -> "LinkGainMatrix":
        noise = thermal_noise if thermal_noise is not None else thermal_noise_dbm(bandwidth_hz)
        return cls(np.asarray(path_loss_db, dtype=np.float64), p_ru_dbm, g_ru_dbi, a_ru_db,
                   g_ue_dbi, f_ue_db, noise)

    @property
    def ru_count(self) -> int:
        return int(self.path_loss_db.shape[0])

    @property
    def ue_count(self) -> int:
        return int(self.path_loss_db.shape[1])

    def with_attenuation(self, a_ru_db) -> "LinkGainMatrix":
        """Same matrix with A_RU replaced (scalar applies to every RU)."""
        return replace(self, a_ru_db=a_ru_db)

    def with_path_loss_offset(self, delta_db: float) -> "LinkGainMatrix":
        return replace(self, path_loss_db=self.path_loss_db + delta_db)


def _check_ru(m: LinkGainMatrix, i: int) -> None:
    if not 0 <= i < m.ru_count:
        raise PlanningError(f"RU index {i} out of range 0..{m.ru_count - 1}", ru=i)


def _check_ue(m: LinkGainMatrix, j: int) -> None:
    if not 0 <= j < m.ue_count:
        raise PlanningError(f"UE index {j} out of range 0..{m.ue_count - 1}", ue=j)


def rssi(m: LinkGainMatrix, i: int, j: int) -> float:
    """S_ij in dBm."""
    _check_ru(m, i)
    _check_ue(m, j)
    return (float(m.p_ru_dbm[i]) + float(m.g_ru_dbi[i]) - float(m.a_ru_db[i])
            - float(m.path_loss_db[i, j]) + float(m.g_ue_dbi[j]))


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def sinr(m: LinkGainMatrix, serving: int, j: int, active: Iterable[int]) -> float:
    """Gamma for UE j served by ``serving`` while every other RU in ``active`` interferes."""
    active = sorted(set(active))
    if serving not in active:
        raise PlanningError(f"serving RU {serving} is not in the active set {active}")
    signal = db_to_linear(rssi(m, serving, j))
    noise = db_to_linear(m.thermal_noise_dbm) * db_to_linear(float(m.f_ue_db[j]))
    interference = 0.0
    for u in active:
        if u != serving:
            interference += db_to_linear(rssi(m, u, j))
    return 10.0 * math.log10(signal / (noise + interference))


def pair_score(m: LinkGainMatrix, p: int, q: int) -> float:
    """Phi(p, q): mean over UEs of the better member's SINR, in dB."""
    active = (p, q)
    total = 0.0
    for j in range(m.ue_count):
        total += max(sinr(m, p, j, active), sinr(m, q, j, active))
    return total / m.ue_count


@dataclass
class PlanResult:
    best_pair: Pair
    best_score: float
    scores: Dict[Pair, float] = field(default_factory=dict)
    ru_count: int = 0

    @property
    def pairs_evaluated(self) -> int:
        return len(self.scores)

    def score(self, p: int, q: int) -> float:
        return self.scores[(min(p, q), max(p, q))]

    def score_matrix(self) -> np.ndarray:
        """Symmetric R x R table, NaN on the diagonal."""
        table = np.full((self.ru_count, self.ru_count), np.nan)
        for (p, q), s in self.scores.items():
            table[p, q] = table[q, p] = s
        return table


def plan_exhaustive(m: LinkGainMatrix, pair_size: int = 2, max_workers: int = 1) -> PlanResult:
    """Score every unordered RU pair and return the best one with the full table."""
    if pair_size != 2:
        raise PlanningError(f"only RU pairs are planned (pair_size=2), got {pair_size}")
    if m.ru_count < 2:
        raise PlanningError(f"need at least 2 RUs to plan a pair, got {m.ru_count}")
    pairs = list(itertools.combinations(range(m.ru_count), 2))
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            values = list(executor.map(lambda pq: pair_score(m, *pq), pairs))
    else:
        values = [pair_score(m, p, q) for p, q in pairs]

    best_pair, best_score = pairs[0], -math.inf
    for pair, value in zip(pairs, values):
        if value > best_score:
            best_pair, best_score = pair, value
    logger.debug(f"evaluated {len(pairs)} RU pairs; best {best_pair} at {best_score:.3f} dB")
    return PlanResult(best_pair=best_pair, best_score=best_score,
                      scores=dict(zip(pairs, values)), ru_count=m.ru_count)


@dataclass
class SweepRow:
    attenuation_db: float
    best_pair: Pair
    min_score: float
    max_score: float


def sweep_attenuation(m: LinkGainMatrix, attenuations: Sequence[float] = tuple(range(0, 51, 10)),
                      max_workers: int = 1) -> List[SweepRow]:
    """Re-plan with a uniform A_RU per step and report best pair and [min, max] Phi."""
    rows = []
    for a in attenuations:
        result = plan_exhaustive(m.with_attenuation(float(a)), max_workers=max_workers)
        values = list(result.scores.values())
        rows.append(SweepRow(float(a), result.best_pair, min(values), max(values)))
    return rows


def synthetic_gain_matrix(ru_count: int, ue_count: int, seed: int = 0,
                          area_m: float = 500.0, frequency_hz: float = 3.6e9,
                          **params) -> LinkGainMatrix:
    """Free-space path loss between random RU and UE positions in a square area."""
    rng = np.random.Generator(np.random.PCG64(seed))
    rus = rng.uniform(0.0, area_m, size=(ru_count, 2))
    ues = rng.uniform(0.0, area_m, size=(ue_count, 2))
    dist = np.maximum(np.linalg.norm(rus[:, None, :] - ues[None, :, :], axis=2), 1.0)
    fspl = 20.0 * np.log10(dist) + 20.0 * np.log10(frequency_hz) - 147.55
    return LinkGainMatrix.from_path_loss(fspl, **params)


def plan_to_csv(result: PlanResult, path: Union[str, Path]) -> Path:
    """Score table: one row per unordered pair."""
    rows = [(p, q, s) for (p, q), s in sorted(result.scores.items())]
    return write_csv(path, ["ru_p", "ru_q", "score_db"], rows)


def sweep_to_csv(rows: Sequence[SweepRow], path: Union[str, Path]) -> Path:
    return write_csv(path, ["attenuation_db", "best_p", "best_q", "min_score_db", "max_score_db"],
                     [(r.attenuation_db, r.best_pair[0], r.best_pair[1], r.min_score, r.max_score)
                      for r in rows])
