"""
Gain-matrix ingestion.

CSV: one row per RU, one column per UE, path loss in dB. An optional first
row of column names is skipped; '#' lines are comments.

JSON sidecar (all keys optional; scalars apply to every node)::

    {"ru": {"p_dbm": 24, "g_dbi": 5, "a_db": 0},
     "ue": {"g_dbi": 1.1, "f_db": 5},
     "bandwidth_hz": 1e8,
     "thermal_noise_dbm": -94.0}
"""
import csv
import json
from pathlib import Path
from typing import Optional, Union

import numpy as np

from utils.errors import PlanningError

from .planner import (
    DEFAULT_A_RU_DB,
    DEFAULT_BANDWIDTH_HZ,
    DEFAULT_F_UE_DB,
    DEFAULT_G_RU_DBI,
    DEFAULT_G_UE_DBI,
    DEFAULT_P_RU_DBM,
    LinkGainMatrix,
)


def read_path_loss_csv(path: Union[str, Path]) -> np.ndarray:
    path = Path(path)
    rows = []
    width = None
    try:
        with path.open(newline="") as fh:
            lines = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as e:
        reason = getattr(e, "strerror", None) or e
        raise PlanningError(f"{path}: cannot read path-loss matrix ({reason})", path=str(path)) from e
    for row_no, row in enumerate(lines, start=1):
        cells = [c.strip() for c in row]
        if not cells or not "".join(cells) or cells[0].startswith("#"):
            continue
        try:
            values = [float(c) for c in cells]
        except ValueError:
            if not rows and width is None:
                width = len(cells)  # header row
                continue
            raise PlanningError(f"{path}: row {row_no} has a non-numeric entry", row=row_no)
        if width is not None and len(values) != width:
            raise PlanningError(
                f"{path}: row {row_no} has {len(values)} columns, expected {width}", row=row_no)
        width = len(values)
        rows.append(values)
    if not rows:
        raise PlanningError(f"{path}: no path-loss rows")
    return np.array(rows, dtype=np.float64)


def load_gain_matrix(csv_path: Union[str, Path],
                     sidecar_path: Optional[Union[str, Path]] = None) -> LinkGainMatrix:
    loss = read_path_loss_csv(csv_path)
    params = {}
    if sidecar_path is not None:
        try:
            params = json.loads(Path(sidecar_path).read_text())
        except OSError as e:
            raise PlanningError(f"{sidecar_path}: cannot read sidecar ({e.strerror or e})",
                                path=str(sidecar_path)) from e
        except json.JSONDecodeError as e:
            raise PlanningError(f"{sidecar_path}: invalid JSON ({e})") from e
        if not isinstance(params, dict):
            raise PlanningError(f"{sidecar_path}: sidecar must be a JSON object")
    ru = params.get("ru", {})
    ue = params.get("ue", {})
    return LinkGainMatrix.from_path_loss(
        loss,
        p_ru_dbm=ru.get("p_dbm", DEFAULT_P_RU_DBM),
        g_ru_dbi=ru.get("g_dbi", DEFAULT_G_RU_DBI),
        a_ru_db=ru.get("a_db", DEFAULT_A_RU_DB),
        g_ue_dbi=ue.get("g_dbi", DEFAULT_G_UE_DBI),
        f_ue_db=ue.get("f_db", DEFAULT_F_UE_DB),
        bandwidth_hz=float(params.get("bandwidth_hz", DEFAULT_BANDWIDTH_HZ)),
        thermal_noise=params.get("thermal_noise_dbm"),
    )


def save_path_loss_csv(m: LinkGainMatrix, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ",".join(f"ue{j}" for j in range(m.ue_count))
    lines = [header] + [",".join(repr(float(v)) for v in row) for row in m.path_loss_db]
    path.write_text("\n".join(lines) + "\n")
    return path
