"""Compact binary encoding of a motion profile for on-tag storage.

Layout (little-endian, no padding):

    u16  keypoint count n
    n *  { u16 t in milliseconds, i8 u scaled by 127 }
    u16  duration in milliseconds
    u8   continuous flag (0 or 1)

Timestamps and the duration must fit in 16 bits of milliseconds (about
65.5 s) and the keypoint count in 16 bits.  The profile name is not stored;
decode assigns the name given by the caller.
"""

from __future__ import annotations

import struct

from .errors import ValidationError
from .profile import Keypoint, MotionProfile

_HEADER = struct.Struct("<H")
_KEYPOINT = struct.Struct("<Hb")
_TRAILER = struct.Struct("<HB")


def _to_ms(seconds: float, what: str) -> int:
    ms = round(seconds * 1000.0)
    if not 0 <= ms <= 0xFFFF:
        raise ValidationError(f"{what} {seconds!r} s does not fit in 16 bits of milliseconds")
    return ms


def encode_profile(profile: MotionProfile) -> bytes:
    """Serialize a profile to the device byte layout."""
    n = len(profile.keypoints)
    if n > 0xFFFF:
        raise ValidationError(f"keypoint count {n} does not fit in 16 bits")
    parts = [_HEADER.pack(n)]
    run_t = None
    run = 0
    for kp in profile.keypoints:
        t_ms = _to_ms(kp.t, "keypoint t")
        run = run + 1 if t_ms == run_t else 1
        run_t = t_ms
        if run > 2:
            raise ValidationError(f"keypoints collapse to three at t={t_ms} ms after rounding")
        parts.append(_KEYPOINT.pack(t_ms, round(kp.u * 127.0)))
    parts.append(_TRAILER.pack(_to_ms(profile.duration_s, "duration"), 1 if profile.continuous else 0))
    return b"".join(parts)


def decode_profile(data: bytes, name: str = "device") -> MotionProfile:
    """Parse device bytes back into a validated profile."""
    if len(data) < _HEADER.size + _TRAILER.size:
        raise ValidationError(f"device payload too short ({len(data)} bytes)")
    (n,) = _HEADER.unpack_from(data, 0)
    expected = _HEADER.size + n * _KEYPOINT.size + _TRAILER.size
    if len(data) != expected:
        raise ValidationError(f"device payload is {len(data)} bytes, expected {expected} for {n} keypoints")
    kps = []
    offset = _HEADER.size
    for _ in range(n):
        t_ms, u_q = _KEYPOINT.unpack_from(data, offset)
        offset += _KEYPOINT.size
        kps.append(Keypoint(t_ms / 1000.0, max(-1.0, min(1.0, u_q / 127.0))))
    duration_ms, continuous = _TRAILER.unpack_from(data, offset)
    if continuous not in (0, 1):
        raise ValidationError(f"continuous flag must be 0 or 1, got {continuous}")
    if duration_ms == 0:
        raise ValidationError("duration must be positive")
    return MotionProfile(
        name=name,
        duration_s=duration_ms / 1000.0,
        continuous=bool(continuous),
        keypoints=tuple(kps),
    )
