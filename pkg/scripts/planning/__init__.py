"""
RF placement planning: RSSI / SINR link budgets and exhaustive RU-pair search.
"""
from .io import load_gain_matrix, read_path_loss_csv, save_path_loss_csv
from .planner import (
    LinkGainMatrix,
    PlanResult,
    SweepRow,
    pair_score,
    plan_exhaustive,
    plan_to_csv,
    rssi,
    sinr,
    sweep_attenuation,
    sweep_to_csv,
    synthetic_gain_matrix,
    thermal_noise_dbm,
)

__all__ = [
    'LinkGainMatrix',
    'PlanResult',
    'SweepRow',
    'load_gain_matrix',
    'pair_score',
    'plan_exhaustive',
    'plan_to_csv',
    'read_path_loss_csv',
    'rssi',
    'save_path_loss_csv',
    'sinr',
    'sweep_attenuation',
    'sweep_to_csv',
    'synthetic_gain_matrix',
    'thermal_noise_dbm',
]
