"""
Error types shared by the twin toolchain.

Every module raises a subclass of TwinError so the CLI can map failures to
exit codes in one place. ``details`` carries structured context (indices,
offending values) for callers that want more than the message.
"""
from typing import Any, Dict, Optional


class TwinError(ValueError):
    """Base class for all toolchain errors."""

    exit_code = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def __str__(self) -> str:
        return self.message


class SequenceError(TwinError):
    """Invalid code-sequence parameters (degree, seed, polynomial pair, length)."""


class IqFormatError(TwinError):
    """Malformed `.iq` capture or non-finite sample data."""

    def __init__(self, message: str, sample_index: Optional[int] = None, **details: Any):
        super().__init__(message, sample_index=sample_index, **details)
        self.sample_index = sample_index


class ChannelError(TwinError):
    """Illegal tap set, frame sequence or emulator configuration."""


class ApproximationError(TwinError):
    """Multipath profile cannot be reduced to a tap set."""


class ProfileFormatError(ApproximationError):
    """Malformed profile file; reported as a usage error with the row number."""

    exit_code = 2

    def __init__(self, message: str, row: Optional[int] = None, **details: Any):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message, row=row, **details)
        self.row = row


class SoundingError(TwinError):
    """Capture too short or reference unusable for the requested correlation."""


class ScenarioError(TwinError):
    """Scenario file or link lookup violates the scenario model."""


class PlanningError(TwinError):
    """Gain matrix or planning request is inconsistent."""


class ConfigError(TwinError):
    """Unreadable or invalid configuration overlay."""

    exit_code = 2
