"""Exception hierarchy shared across the package.

Every error raised on purpose by this package derives from RomanError so
callers (and the CLI) can distinguish our diagnostics from genuine bugs.
"""

from __future__ import annotations


class RomanError(Exception):
    """Base class for all errors raised by this package."""


class InvalidConfigError(RomanError):
    """A component was built with out-of-range or inconsistent parameters."""


class InvalidStateError(RomanError):
    """A runtime value violated an invariant (non-finite, out of range)."""


class EditRejected(RomanError):
    """A profile edit could not be applied; the profile is unchanged."""


class ValidationError(RomanError):
    """External input (JSON, tag id, device bytes) failed validation."""


class SimulationFault(RomanError):
    """The simulation produced a non-physical value and was aborted."""


class GripperStateError(RomanError):
    """A gripper operation was called from the wrong state."""


class NoTagError(GripperStateError):
    """An RFID read was attempted with no object attached."""


class DetachFault(GripperStateError):
    """The detach mechanism cannot overcome the magnet pull."""
