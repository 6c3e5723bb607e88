"""Quasi-static kinematics for motor-driven gear trains.

Shafts carry angular velocity [rad/s] and torque [N*m]; racks and sliders
carry linear speed [m/s] and force [N].  All stages are ideal (lossless)
unless an efficiency below 1.0 is configured, in which case only the
transmitted torque/force is scaled; speed ratios are always exact.

Sign conventions: every external gear mesh (spur or bevel) reverses the
sense of rotation, so both omega and tau flip sign across a pair.  Power
(omega * tau, or v * f) is conserved exactly through ideal stages.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

from .errors import InvalidConfigError, InvalidStateError

Vec3 = tuple[float, float, float]

Z_AXIS: Vec3 = (0.0, 0.0, 1.0)
X_AXIS: Vec3 = (1.0, 0.0, 0.0)

# Pounds-force to newtons.
LBF_TO_N = 4.448

# Stock drive motor limits: stall torque [N*m] and no-load speed [rad/s].
DEFAULT_TAU_STALL = 0.39
DEFAULT_OMEGA_NOLOAD = 11.94

SINGLE = "single"
DOUBLE = "double"

_UNIT_TOL = 1e-9


def rpm_to_rad_s(rpm: float) -> float:
    return rpm * 2.0 * math.pi / 60.0


def rad_s_to_rpm(omega: float) -> float:
    return omega * 60.0 / (2.0 * math.pi)


def _require_finite(name: str, value: float) -> float:
    if not math.isfinite(value):
        raise InvalidStateError(f"{name} must be finite, got {value!r}")
    return value


def _require_positive(name: str, value: float) -> float:
    if not (math.isfinite(value) and value > 0.0):
        raise InvalidConfigError(f"{name} must be a positive finite number, got {value!r}")
    return value


def _require_unit(name: str, axis: Vec3) -> None:
    if len(axis) != 3 or not all(math.isfinite(c) for c in axis):
        raise InvalidConfigError(f"{name} must be a finite 3-vector, got {axis!r}")
    norm = math.sqrt(axis[0] ** 2 + axis[1] ** 2 + axis[2] ** 2)
    if abs(norm - 1.0) > _UNIT_TOL:
        raise InvalidConfigError(f"{name} must be a unit vector (|v|={norm!r})")


def _require_efficiency(value: float) -> None:
    if not (math.isfinite(value) and 0.0 < value <= 1.0):
        raise InvalidConfigError(f"efficiency must be in (0, 1], got {value!r}")


@dataclass(frozen=True)
class ShaftState:
    """Instantaneous state of a rotating shaft."""

    omega: float  # angular velocity [rad/s], signed
    tau: float  # torque [N*m], signed
    axis: Vec3 = Z_AXIS  # unit rotation axis in the world frame

    def __post_init__(self) -> None:
        _require_finite("omega", self.omega)
        _require_finite("tau", self.tau)
        _require_unit("axis", self.axis)

    @property
    def power(self) -> float:
        return self.omega * self.tau


@dataclass(frozen=True)
class LinearState:
    """Instantaneous state of a translating member (rack or slider)."""

    v: float  # linear speed [m/s], signed
    f: float  # force along the travel direction [N], signed
    x: float = 0.0  # displacement [m]

    def __post_init__(self) -> None:
        _require_finite("v", self.v)
        _require_finite("f", self.f)
        _require_finite("x", self.x)

    @property
    def power(self) -> float:
        return self.v * self.f


@dataclass(frozen=True)
class MotorSpec:
    """Linear torque-speed motor model: speed falls linearly with load."""

    tau_stall: float = DEFAULT_TAU_STALL  # [N*m]
    omega_noload: float = DEFAULT_OMEGA_NOLOAD  # [rad/s]

    def __post_init__(self) -> None:
        _require_positive("tau_stall", self.tau_stall)
        _require_positive("omega_noload", self.omega_noload)


@dataclass(frozen=True)
class SpurPair:
    """Two meshed spur gears on parallel axes; pitch radii in meters."""

    r_in: float
    r_out: float
    efficiency: float = 1.0

    def __post_init__(self) -> None:
        _require_positive("r_in", self.r_in)
        _require_positive("r_out", self.r_out)
        _require_efficiency(self.efficiency)


@dataclass(frozen=True)
class BevelPair:
    """Two meshed bevel gears redirecting rotation onto axis_out."""

    r_in: float
    r_out: float
    axis_out: Vec3 = X_AXIS
    efficiency: float = 1.0

    def __post_init__(self) -> None:
        _require_positive("r_in", self.r_in)
        _require_positive("r_out", self.r_out)
        _require_unit("axis_out", self.axis_out)
        _require_efficiency(self.efficiency)


@dataclass(frozen=True)
class GearRack:
    """Pinion of radius r driving a rack.

    A one-directional rack (bidirectional=False) is a plain pushing bar: it
    transmits compressive force only, so a pulling force comes out as zero.
    Displacement still follows the pinion both ways (the returned part is
    assumed to track the bar under its own restoring load).
    """

    r: float  # pinion pitch radius [m]
    bidirectional: bool = True
    efficiency: float = 1.0

    def __post_init__(self) -> None:
        _require_positive("r", self.r)
        _require_efficiency(self.efficiency)


@dataclass(frozen=True)
class PinInSlot:
    """Crank pin riding in a slotted follower (scotch yoke).

    A double-sided slot constrains the follower to x = R*sin(theta).  A
    single-sided slot only pushes, so the follower rests at 0 whenever the
    pin would pull it negative: x = max(0, R*sin(theta)).
    """

    crank_radius: float  # [m]
    sided: str = DOUBLE

    def __post_init__(self) -> None:
        _require_positive("crank_radius", self.crank_radius)
        if self.sided not in (SINGLE, DOUBLE):
            raise InvalidConfigError(f"sided must be {SINGLE!r} or {DOUBLE!r}, got {self.sided!r}")


@dataclass(frozen=True)
class Ratchet:
    """One-way constraint on a translating member.

    Motion along free_direction always passes; motion against it is blocked
    unless the pawl is released.
    """

    free_direction: int = 1  # +1 or -1
    released: bool = False

    def __post_init__(self) -> None:
        if self.free_direction not in (1, -1):
            raise InvalidConfigError(f"free_direction must be +1 or -1, got {self.free_direction!r}")


TransmissionStage = Union[SpurPair, BevelPair, GearRack, PinInSlot, Ratchet]

_ROTARY = (SpurPair, BevelPair)
_TERMINAL = (GearRack, PinInSlot)


@dataclass(frozen=True)
class TransmissionChain:
    """Ordered stages from the motor shaft to the output member.

    Layout rules: any number of spur/bevel pairs first, then at most one
    motion-converting terminal (GearRack or PinInSlot), and a Ratchet is
    only allowed as the final stage directly after a GearRack.
    """

    stages: tuple[TransmissionStage, ...]

    def __post_init__(self) -> None:
        stages = tuple(self.stages)
        object.__setattr__(self, "stages", stages)
        seen_terminal = False
        for i, stage in enumerate(stages):
            if isinstance(stage, _ROTARY):
                if seen_terminal:
                    raise InvalidConfigError("rotary stage after a terminal converter")
            elif isinstance(stage, _TERMINAL):
                if seen_terminal:
                    raise InvalidConfigError("more than one terminal converter in chain")
                seen_terminal = True
            elif isinstance(stage, Ratchet):
                if i == 0 or not isinstance(stages[i - 1], GearRack):
                    raise InvalidConfigError("ratchet must directly follow a gear rack")
                if i != len(stages) - 1:
                    raise InvalidConfigError("ratchet must be the final stage")
            else:
                raise InvalidConfigError(f"unknown stage type {type(stage).__name__}")

    @property
    def terminal(self) -> TransmissionStage | None:
        """The motion-converting terminal stage, if any."""
        for stage in self.stages:
            if isinstance(stage, _TERMINAL):
                return stage
        return None

    @property
    def ratchet(self) -> Ratchet | None:
        for stage in self.stages:
            if isinstance(stage, Ratchet):
                return stage
        return None

    @property
    def output_kind(self) -> str:
        """"linear" if the chain ends in a rack or slot, else "angle"."""
        return "linear" if self.terminal is not None else "angle"


def spur_transmit(state: ShaftState, pair: SpurPair) -> ShaftState:
    """Propagate shaft state across a spur pair (mesh reverses rotation)."""
    ratio = pair.r_in / pair.r_out
    return ShaftState(
        omega=-state.omega * ratio,
        tau=-state.tau / ratio * pair.efficiency,
        axis=state.axis,
    )


def bevel_transmit(state: ShaftState, pair: BevelPair) -> ShaftState:
    """Propagate shaft state across a bevel pair onto the new axis."""
    ratio = pair.r_in / pair.r_out
    return ShaftState(
        omega=-state.omega * ratio,
        tau=-state.tau / ratio * pair.efficiency,
        axis=pair.axis_out,
    )


def rack_transmit(state: ShaftState, rack: GearRack) -> LinearState:
    """Convert pinion rotation to rack translation: v = omega*r, f = tau/r."""
    f = state.tau / rack.r * rack.efficiency
    if not rack.bidirectional and f < 0.0:
        f = 0.0
    return LinearState(v=state.omega * rack.r, f=f)


def pin_in_slot_position(theta: float, stage: PinInSlot) -> float:
    """Follower displacement for crank angle theta [rad]."""
    _require_finite("theta", theta)
    x = stage.crank_radius * math.sin(theta)
    if stage.sided == SINGLE:
        x = max(0.0, x)
    return x


def ratchet_advance(stage: Ratchet, x: float, dx: float) -> tuple[float, bool]:
    """Apply a displacement increment through the ratchet.

    Returns (new_x, blocked).  An increment against the free direction is
    swallowed (blocked=True) unless the pawl is released; dx == 0 always
    passes.
    """
    _require_finite("x", x)
    _require_finite("dx", dx)
    if dx == 0.0 or stage.released or math.copysign(1.0, dx) == float(stage.free_direction):
        return x + dx, False
    return x, True


def motor_output(u: float, load_tau: float, spec: MotorSpec) -> ShaftState:
    """Shaft state of the motor at command u under a resisting torque.

    u is unitless in [-1, 1] (values outside are clamped with a warning).
    The speed follows the linear torque-speed line scaled by u; at or above
    stall torque the shaft stops.  The torque the shaft actually exerts is
    the load it carries, capped at stall, signed with the command.
    """
    _require_finite("u", u)
    _require_finite("load_tau", load_tau)
    if load_tau < 0.0:
        raise InvalidStateError(f"load_tau must be >= 0, got {load_tau!r}")
    if abs(u) > 1.0:
        warnings.warn(f"motor command {u!r} outside [-1, 1]; clamping", stacklevel=2)
        u = max(-1.0, min(1.0, u))
    if u == 0.0:
        return ShaftState(omega=0.0, tau=0.0)
    headroom = max(0.0, 1.0 - load_tau / spec.tau_stall)
    omega = u * spec.omega_noload * headroom
    tau = math.copysign(min(load_tau, spec.tau_stall), u)
    return ShaftState(omega=omega, tau=tau)


def rotation_gain(chain: TransmissionChain) -> float:
    """Signed angular ratio d(theta_last_shaft)/d(theta_motor)."""
    gain = 1.0
    for stage in chain.stages:
        if isinstance(stage, _ROTARY):
            gain *= -stage.r_in / stage.r_out
    return gain


def chain_output(theta_motor: float, chain: TransmissionChain) -> float:
    """Output coordinate (angle [rad] or displacement [m]) at motor angle theta.

    This is a pure positional map.  A ratchet is applied as if the motor
    swept monotonically from 0 to theta_motor: motion against the free
    direction yields 0 unless released.
    """
    _require_finite("theta_motor", theta_motor)
    theta = theta_motor * rotation_gain(chain)
    terminal = chain.terminal
    if terminal is None:
        return theta
    if isinstance(terminal, PinInSlot):
        return pin_in_slot_position(theta, terminal)
    out = theta * terminal.r
    ratchet = chain.ratchet
    if ratchet is not None and not ratchet.released:
        if out != 0.0 and math.copysign(1.0, out) != float(ratchet.free_direction):
            return 0.0
    return out


def chain_velocity_gain(theta_motor: float, chain: TransmissionChain) -> float:
    """Signed d(output)/d(theta_motor) at the given motor angle.

    At a single-sided slot boundary or a blocking ratchet the gain is 0 on
    the non-transmitting side.
    """
    _require_finite("theta_motor", theta_motor)
    gain = rotation_gain(chain)
    terminal = chain.terminal
    if terminal is None:
        return gain
    if isinstance(terminal, GearRack):
        ratchet = chain.ratchet
        if ratchet is not None and not ratchet.released:
            out = theta_motor * gain * terminal.r
            if out != 0.0 and math.copysign(1.0, out) != float(ratchet.free_direction):
                return 0.0
        return gain * terminal.r
    theta = theta_motor * gain
    slope = terminal.crank_radius * math.cos(theta)
    if terminal.sided == SINGLE and terminal.crank_radius * math.sin(theta) < 0.0:
        slope = 0.0
    return slope * gain


def chain_reflect_load(load: float, chain: TransmissionChain, theta_motor: float = 0.0) -> float:
    """Motor-side torque [N*m] holding a load at the chain output.

    The load is an output-side torque [N*m] for rotary chains or a force
    [N] for linear ones.  Reflection is ideal (virtual work): the stage
    efficiencies model drive losses and are deliberately not applied here.
    """
    _require_finite("load", load)
    return load * chain_velocity_gain(theta_motor, chain)


# --- JSON wire format -------------------------------------------------------


def stage_to_json(stage: TransmissionStage) -> dict:
    if isinstance(stage, SpurPair):
        return {"type": "spur", "r_in": stage.r_in, "r_out": stage.r_out, "efficiency": stage.efficiency}
    if isinstance(stage, BevelPair):
        return {
            "type": "bevel",
            "r_in": stage.r_in,
            "r_out": stage.r_out,
            "axis_out": list(stage.axis_out),
            "efficiency": stage.efficiency,
        }
    if isinstance(stage, GearRack):
        return {
            "type": "gear_rack",
            "r": stage.r,
            "bidirectional": stage.bidirectional,
            "efficiency": stage.efficiency,
        }
    if isinstance(stage, PinInSlot):
        return {"type": "pin_in_slot", "crank_radius": stage.crank_radius, "sided": stage.sided}
    if isinstance(stage, Ratchet):
        return {"type": "ratchet", "free_direction": stage.free_direction, "released": stage.released}
    raise InvalidConfigError(f"unknown stage type {type(stage).__name__}")


def stage_from_json(doc: dict) -> TransmissionStage:
    if not isinstance(doc, dict):
        raise InvalidConfigError(f"stage must be an object, got {type(doc).__name__}")
    kind = doc.get("type")
    try:
        if kind == "spur":
            return SpurPair(r_in=doc["r_in"], r_out=doc["r_out"], efficiency=doc.get("efficiency", 1.0))
        if kind == "bevel":
            axis = doc.get("axis_out", list(X_AXIS))
            return BevelPair(
                r_in=doc["r_in"],
                r_out=doc["r_out"],
                axis_out=tuple(float(c) for c in axis),
                efficiency=doc.get("efficiency", 1.0),
            )
        if kind == "gear_rack":
            return GearRack(
                r=doc["r"],
                bidirectional=bool(doc.get("bidirectional", True)),
                efficiency=doc.get("efficiency", 1.0),
            )
        if kind == "pin_in_slot":
            return PinInSlot(crank_radius=doc["crank_radius"], sided=doc.get("sided", DOUBLE))
        if kind == "ratchet":
            return Ratchet(free_direction=int(doc.get("free_direction", 1)), released=bool(doc.get("released", False)))
    except KeyError as exc:
        raise InvalidConfigError(f"stage {kind!r} is missing field {exc.args[0]!r}") from None
    raise InvalidConfigError(f"unknown stage type {kind!r}")


def chain_to_json(chain: TransmissionChain) -> list[dict]:
    return [stage_to_json(s) for s in chain.stages]


def chain_from_json(doc: list) -> TransmissionChain:
    if not isinstance(doc, list):
        raise InvalidConfigError("chain must be a list of stages")
    return TransmissionChain(stages=tuple(stage_from_json(s) for s in doc))
