"""
Scenario layer of the twin toolchain.

- Model: Scenario, Node, ScenarioMetadata
- Approximation: approximate, sample_trajectory, build_frames
- Files: scenario JSON, ChannelFrame binary, multipath profile CSV/JSON
- Validation: heatmap, validate, similarity
"""
from .approx import (
    ApproximationResult,
    MultipathComponent,
    MultipathProfile,
    approximate,
    build_frames,
    sample_trajectory,
)
from .io import (
    decode_frame,
    encode_frame,
    load_frames,
    load_profile,
    load_scenario,
    save_frames,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .model import Mobility, Node, Scenario, ScenarioMetadata, single_frame_scenario
from .validation import (
    HeatmapResult,
    SimilarityResult,
    ValidationResult,
    campaign_heatmap,
    cross_correlation_profile,
    heatmap,
    heatmap_to_csv,
    measure_base_loss,
    similarity,
    validate,
    validation_to_csv,
)

__all__ = [
    # Model
    'Mobility',
    'Node',
    'Scenario',
    'ScenarioMetadata',
    'single_frame_scenario',
    # Approximation
    'ApproximationResult',
    'MultipathComponent',
    'MultipathProfile',
    'approximate',
    'build_frames',
    'sample_trajectory',
    # Files
    'decode_frame',
    'encode_frame',
    'load_frames',
    'load_profile',
    'load_scenario',
    'save_frames',
    'save_scenario',
    'scenario_from_dict',
    'scenario_to_dict',
    # Validation
    'HeatmapResult',
    'SimilarityResult',
    'ValidationResult',
    'campaign_heatmap',
    'cross_correlation_profile',
    'heatmap',
    'heatmap_to_csv',
    'measure_base_loss',
    'similarity',
    'validate',
    'validation_to_csv',
]
