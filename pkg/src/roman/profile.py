"""Motion profiles: time-stamped command keypoints and their semantics.

A profile maps time [s] to a unitless motor command u in [-1, 1].  Between
keypoints the command is linearly interpolated; two keypoints may share a
timestamp to form a step, in which case the step is right-continuous (the
later keypoint wins at the shared instant).  Before the first keypoint and
after the last one the nearest keypoint's value holds.  Past the duration
the command is 0 unless the profile is continuous, in which case time wraps
modulo the duration.

Profiles are immutable; every edit returns a new profile.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, replace
from typing import Callable, Iterable

from .errors import EditRejected, SimulationFault, ValidationError
from .kinematics import MotorSpec, motor_output

# Simulation step and telemetry tick [s].
DT = 1e-3
TICK = 0.02

TEMPLATE_KINDS = ("endless_rotation", "periodic", "one_way", "two_way")


@dataclass(frozen=True)
class Keypoint:
    t: float  # [s], >= 0
    u: float  # unitless command in [-1, 1]

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t) and self.t >= 0.0):
            raise ValidationError(f"keypoint t must be finite and >= 0, got {self.t!r}")
        if not (math.isfinite(self.u) and -1.0 <= self.u <= 1.0):
            raise ValidationError(f"keypoint u must be in [-1, 1], got {self.u!r}")


@dataclass(frozen=True)
class MotionProfile:
    name: str
    duration_s: float
    continuous: bool
    keypoints: tuple[Keypoint, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "keypoints", tuple(self.keypoints))
        if not (math.isfinite(self.duration_s) and self.duration_s > 0.0):
            raise ValidationError(f"duration_s must be positive, got {self.duration_s!r}")
        if len(self.keypoints) < 2:
            raise ValidationError("profile needs at least 2 keypoints")
        prev_t = None
        run = 0
        for kp in self.keypoints:
            if kp.t > self.duration_s:
                raise ValidationError(f"keypoint t={kp.t!r} exceeds duration {self.duration_s!r}")
            if prev_t is not None and kp.t < prev_t:
                raise ValidationError("keypoints must be sorted by t")
            run = run + 1 if kp.t == prev_t else 1
            if run > 2:
                raise ValidationError(f"more than two keypoints share t={kp.t!r}")
            prev_t = kp.t


def make_template(kind: str) -> MotionProfile:
    """Build one of the stock starting profiles."""
    if kind == "endless_rotation":
        return MotionProfile(
            name="endless_rotation",
            duration_s=5.0,
            continuous=True,
            keypoints=(Keypoint(0.0, 1.0), Keypoint(5.0, 1.0)),
        )
    if kind == "periodic":
        # Square wave alternating +/-1 with a 1 s period over 4 s: a step
        # pair at every half-period edge.
        kps = [Keypoint(0.0, 1.0)]
        level = 1.0
        for k in range(8):
            edge = 0.5 * (k + 1)
            kps.append(Keypoint(edge, level))
            if k < 7:
                level = -level
                kps.append(Keypoint(edge, level))
        return MotionProfile(name="periodic", duration_s=4.0, continuous=False, keypoints=tuple(kps))
    if kind == "one_way":
        return MotionProfile(
            name="one_way",
            duration_s=4.0,
            continuous=False,
            keypoints=(Keypoint(0.0, 1.0), Keypoint(2.0, 1.0), Keypoint(2.0, 0.0), Keypoint(4.0, 0.0)),
        )
    if kind == "two_way":
        return MotionProfile(
            name="two_way",
            duration_s=6.0,
            continuous=False,
            keypoints=(
                Keypoint(0.0, 1.0),
                Keypoint(2.0, 1.0),
                Keypoint(2.0, 0.0),
                Keypoint(4.0, 0.0),
                Keypoint(4.0, -1.0),
                Keypoint(6.0, -1.0),
            ),
        )
    raise ValidationError(f"unknown template {kind!r}; expected one of {TEMPLATE_KINDS}")


def evaluate(profile: MotionProfile, t: float) -> float:
    """Command u at time t [s] (t >= 0)."""
    if not (math.isfinite(t) and t >= 0.0):
        raise ValueError(f"t must be finite and >= 0, got {t!r}")
    if t > profile.duration_s:
        if not profile.continuous:
            return 0.0
        t = t % profile.duration_s
    kps = profile.keypoints
    times = [kp.t for kp in kps]
    j = bisect_right(times, t)
    if j == 0:
        return kps[0].u
    if j == len(kps):
        return kps[-1].u
    left, right = kps[j - 1], kps[j]
    # right.t > t >= left.t here, so the span is never zero.
    frac = (t - left.t) / (right.t - left.t)
    return left.u + (right.u - left.u) * frac


def _clamp_u(u: float) -> float:
    if not math.isfinite(u):
        raise EditRejected(f"u must be finite, got {u!r}")
    return max(-1.0, min(1.0, u))


def add_keypoint(profile: MotionProfile, t: float, u: float) -> MotionProfile:
    """Insert a keypoint; u is clamped to [-1, 1], t must be in range."""
    if not (math.isfinite(t) and 0.0 <= t <= profile.duration_s):
        raise EditRejected(f"t must be in [0, {profile.duration_s}], got {t!r}")
    if sum(1 for kp in profile.keypoints if kp.t == t) >= 2:
        raise EditRejected(f"two keypoints already share t={t!r}")
    new = Keypoint(t, _clamp_u(u))
    kps = list(profile.keypoints)
    kps.insert(bisect_right([kp.t for kp in kps], t), new)
    return replace(profile, keypoints=tuple(kps))


def move_keypoint(profile: MotionProfile, index: int, t: float, u: float) -> MotionProfile:
    """Move one keypoint; t and u are clamped to their valid ranges."""
    if not 0 <= index < len(profile.keypoints):
        raise EditRejected(f"keypoint index {index} out of range")
    if not math.isfinite(t):
        raise EditRejected(f"t must be finite, got {t!r}")
    t = max(0.0, min(profile.duration_s, t))
    kps = list(profile.keypoints)
    kps[index] = Keypoint(t, _clamp_u(u))
    # Stable sort keeps the relative order of coincident keypoints, so
    # moving a point and moving it back restores the original profile.
    kps.sort(key=lambda kp: kp.t)
    if sum(1 for kp in kps if kp.t == t) > 2:
        raise EditRejected(f"move would put three keypoints at t={t!r}")
    return replace(profile, keypoints=tuple(kps))


def adjust_duration(profile: MotionProfile, delta: float) -> MotionProfile:
    """Lengthen or shorten the profile by exactly one second."""
    if delta not in (1.0, -1.0):
        raise EditRejected(f"duration changes by +/-1 s, got {delta!r}")
    new_duration = profile.duration_s + delta
    if new_duration < 1.0:
        raise EditRejected(f"duration must stay >= 1 s, got {new_duration!r}")
    kps = [kp for kp in profile.keypoints if kp.t <= new_duration]
    if len(kps) < 2:
        # Keep the shape up to the new end so the profile stays valid.
        kps.append(Keypoint(new_duration, evaluate(profile, new_duration)))
    if len(kps) < 2:
        raise EditRejected("shrink would leave fewer than 2 keypoints")
    return replace(profile, duration_s=new_duration, keypoints=tuple(kps))


# --- JSON wire format -------------------------------------------------------


def profile_to_json(profile: MotionProfile) -> dict:
    return {
        "name": profile.name,
        "duration_s": profile.duration_s,
        "continuous": profile.continuous,
        "keypoints": [{"t": kp.t, "u": kp.u} for kp in profile.keypoints],
    }


def profile_from_json(doc: object) -> MotionProfile:
    """Parse and validate a profile document; unknown fields are ignored.

    Raises ValidationError naming the first violated constraint.
    """
    if not isinstance(doc, dict):
        raise ValidationError(f"profile must be an object, got {type(doc).__name__}")
    for field in ("name", "duration_s", "continuous", "keypoints"):
        if field not in doc:
            raise ValidationError(f"profile is missing field {field!r}")
    name = doc["name"]
    if not isinstance(name, str):
        raise ValidationError(f"name must be a string, got {type(name).__name__}")
    duration = doc["duration_s"]
    if isinstance(duration, bool) or not isinstance(duration, (int, float)):
        raise ValidationError(f"duration_s must be a number, got {type(duration).__name__}")
    continuous = doc["continuous"]
    if not isinstance(continuous, bool):
        raise ValidationError(f"continuous must be a boolean, got {type(continuous).__name__}")
    raw_kps = doc["keypoints"]
    if not isinstance(raw_kps, list):
        raise ValidationError(f"keypoints must be a list, got {type(raw_kps).__name__}")
    kps = []
    for i, item in enumerate(raw_kps):
        if not isinstance(item, dict):
            raise ValidationError(f"keypoints[{i}] must be an object")
        for field in ("t", "u"):
            if field not in item:
                raise ValidationError(f"keypoints[{i}] is missing field {field!r}")
            value = item[field]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(f"keypoints[{i}].{field} must be a number")
        kps.append(Keypoint(float(item["t"]), float(item["u"])))
    return MotionProfile(
        name=name,
        duration_s=float(duration),
        continuous=continuous,
        keypoints=tuple(kps),
    )


# --- Integration ------------------------------------------------------------


def integrate_motor_angle(
    profile: MotionProfile,
    spec: MotorSpec,
    load_fn: Callable[[float], float],
    dt: float = DT,
    tick: float = TICK,
    t_end: float | None = None,
) -> list[tuple[float, float, float]]:
    """Forward-Euler motor angle under the profile and a position load.

    load_fn maps motor angle [rad] to a resisting torque [N*m] (>= 0).
    Returns (t, theta, omega) samples every tick, including t=0.
    """
    if t_end is None:
        t_end = profile.duration_s
    if not (math.isfinite(t_end) and t_end > 0.0):
        raise ValueError(f"t_end must be positive, got {t_end!r}")
    steps = round(t_end / dt)
    per_tick = max(1, round(tick / dt))
    theta = 0.0
    load = load_fn(theta)
    if not math.isfinite(load):
        raise SimulationFault(f"load is not finite at theta=0: {load!r}")
    samples = [(0.0, 0.0, motor_output(evaluate(profile, 0.0), load, spec).omega)]
    for k in range(steps):
        u = evaluate(profile, k * dt)
        load = load_fn(theta)
        if not math.isfinite(load):
            raise SimulationFault(f"load is not finite at theta={theta!r}")
        out = motor_output(u, load, spec)
        theta += out.omega * dt
        if (k + 1) % per_tick == 0 or k == steps - 1:
            samples.append(((k + 1) * dt, theta, out.omega))
    return samples
