"""
Signal-processing core of the twin toolchain.

- Sequences: generate_glfsr, generate_gold, generate_golay, generate_ls, autocorrelation
- Waveforms: modulate_bpsk, load_iq_file, save_iq_file, add_awgn
- Channel emulator: TapSet, ChannelFrame, EmulatorConfig, convolve_link, emulate, emulate_mobile
- Sounder: correlate, detect_taps, path_gains, aggregate, sound
"""
from .sequences import (
    CodeSequence,
    CorrelationKind,
    SequenceFamily,
    autocorrelation,
    cross_correlation,
    generate_glfsr,
    generate_gold,
    generate_golay,
    generate_ls,
    golay_pair,
    is_preferred_pair,
    load_chips,
    parse_polynomial,
    save_chips,
    sequence_stats,
)
from .waveform import IqWaveform, add_awgn, export_csv, load_iq_file, modulate_bpsk, save_iq_file
from .channel import (
    GRID_SPACING_S,
    TAP_SLOTS,
    ChannelFrame,
    EmulationReport,
    EmulatorConfig,
    TapSet,
    convolve_link,
    emulate,
    emulate_mobile,
    max_shift,
)
from .sounder import (
    CirEstimate,
    CorrelationMode,
    DetectedTap,
    SounderConfig,
    SoundingReport,
    aggregate,
    check_delay_window,
    correlate,
    covering_glfsr_degree,
    detect_taps,
    path_gains,
    report_to_csv,
    report_to_json,
    sound,
)

__all__ = [
    # Sequences
    'CodeSequence',
    'CorrelationKind',
    'SequenceFamily',
    'autocorrelation',
    'cross_correlation',
    'generate_glfsr',
    'generate_gold',
    'generate_golay',
    'generate_ls',
    'golay_pair',
    'is_preferred_pair',
    'load_chips',
    'parse_polynomial',
    'save_chips',
    'sequence_stats',
    # Waveforms
    'IqWaveform',
    'add_awgn',
    'export_csv',
    'load_iq_file',
    'modulate_bpsk',
    'save_iq_file',
    # Channel emulator
    'GRID_SPACING_S',
    'TAP_SLOTS',
    'ChannelFrame',
    'EmulationReport',
    'EmulatorConfig',
    'TapSet',
    'convolve_link',
    'emulate',
    'emulate_mobile',
    'max_shift',
    # Sounder
    'CirEstimate',
    'CorrelationMode',
    'DetectedTap',
    'SounderConfig',
    'SoundingReport',
    'aggregate',
    'check_delay_window',
    'correlate',
    'covering_glfsr_degree',
    'detect_taps',
    'path_gains',
    'report_to_csv',
    'report_to_json',
    'sound',
]
