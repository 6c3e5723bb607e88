"""Virtual gripper and object testbed.

Replaces physical hardware: a magnetic gripper state machine
(attach/detach/recognize/drive) and a catalog of virtual objects, each a
transmission chain plus a quasi-static load model and a task-completion
predicate.  run_task integrates a motion profile through the motor model
and the object's chain and reports the sampled trajectory.

Quasi-static rules: no inertia, and loads never drive the mechanism
backwards; with u = 0 the motor holds and nothing moves.  Loads are
evaluated on the state at the start of each step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from .errors import (
    DetachFault,
    GripperStateError,
    InvalidConfigError,
    NoTagError,
    ValidationError,
)
from .kinematics import (
    SINGLE,
    GearRack,
    MotorSpec,
    PinInSlot,
    Ratchet,
    SpurPair,
    BevelPair,
    TransmissionChain,
    chain_from_json,
    chain_to_json,
    chain_velocity_gain,
    motor_output,
    pin_in_slot_position,
    ratchet_advance,
    rotation_gain,
)
from .profile import DT, TICK, MotionProfile, evaluate
from .registry import normalize_tag

Vec3 = tuple[float, float, float]

# Gripper force budget [N] and reach [m].
MAGNET_PULL_N = 49.8
DETACH_CAPACITY_N = 78.0
ATTACH_RANGE_M = 0.01


# --- Load models -------------------------------------------------------------
#
# A load model maps (output coordinate, output velocity) to the signed
# generalized force (N for linear outputs, N*m for rotary ones) that the
# mechanism must overcome to advance the output in the + direction.


@dataclass(frozen=True)
class SpringLoad:
    """Linear restoring load anchored at coordinate 0."""

    k: float  # [N/m] or [N*m/rad]

    def __call__(self, x: float, v: float) -> float:
        return self.k * x


@dataclass(frozen=True)
class FrictionLoad:
    """Constant-magnitude load opposing whichever way the output moves."""

    magnitude: float

    def __call__(self, x: float, v: float) -> float:
        if v > 0.0:
            return self.magnitude
        if v < 0.0:
            return -self.magnitude
        return 0.0


@dataclass(frozen=True)
class ViscousLoad:
    """Load proportional to output speed."""

    coeff: float  # [N*s/m] or [N*m*s/rad]

    def __call__(self, x: float, v: float) -> float:
        return self.coeff * v


@dataclass(frozen=True)
class SpringStepLoad:
    """Spring plus a constant extra force beyond an engagement coordinate."""

    k: float
    step_force: float
    step_at: float

    def __call__(self, x: float, v: float) -> float:
        extra = self.step_force if x >= self.step_at else 0.0
        return self.k * x + extra


LoadModel = Callable[[float, float], float]


# --- Completion predicates ---------------------------------------------------


@dataclass(frozen=True)
class Sample:
    """One telemetry tick of a simulated run."""

    t: float
    u: float
    theta: float  # motor angle [rad]
    output: float  # output coordinate [m] or [rad]
    load: float  # load at the output [N] or [N*m]


@dataclass(frozen=True)
class WireCut:
    """Handles closed to the cut gap while pressing hard enough."""

    gap: float  # open handle gap [m]
    cut_gap: float  # gap at which the blades meet the wire core [m]
    min_force: float  # rack force needed to shear [N]

    def __call__(self, samples: Sequence[Sample]) -> bool:
        last = samples[-1]
        return (self.gap - last.output) <= self.cut_gap and last.load >= self.min_force


@dataclass(frozen=True)
class StrokeReach:
    """Output displacement reached a target stroke."""

    stroke: float

    def __call__(self, samples: Sequence[Sample]) -> bool:
        return samples[-1].output >= self.stroke


@dataclass(frozen=True)
class TurnCount:
    """Output shaft turned at least n full revolutions either way."""

    turns: float

    def __call__(self, samples: Sequence[Sample]) -> bool:
        return abs(samples[-1].output) >= 2.0 * math.pi * self.turns


@dataclass(frozen=True)
class SustainedSpeed:
    """Output speed stayed at or above a floor for a hold time."""

    min_speed: float
    hold_s: float

    def __call__(self, samples: Sequence[Sample]) -> bool:
        held = 0.0
        for i in range(len(samples) - 1, 0, -1):
            a, b = samples[i - 1], samples[i]
            dt = b.t - a.t
            if dt <= 0.0 or abs(b.output - a.output) / dt < self.min_speed:
                return False
            held += dt
            if held >= self.hold_s:
                return True
        return False


@dataclass(frozen=True)
class ShakeCount:
    """Output crossed up through a level at least n times."""

    level: float
    count: int

    def __call__(self, samples: Sequence[Sample]) -> bool:
        crossings = 0
        for i in range(1, len(samples)):
            if samples[i - 1].output < self.level <= samples[i].output:
                crossings += 1
                if crossings >= self.count:
                    return True
        return False


CompletionPredicate = Callable[[Sequence[Sample]], bool]


# --- Objects and outcomes ----------------------------------------------------


@dataclass(frozen=True)
class VirtualObject:
    tag_id: str
    name: str
    category: str  # taxonomy label, e.g. "Squeeze/BiDirectional"
    chain: TransmissionChain
    load_fn: LoadModel
    completion: CompletionPredicate
    pose: Vec3 = (0.0, 0.0, 0.0)
    travel: tuple[float, float] | None = None  # hard stops on the output

    def __post_init__(self) -> None:
        object.__setattr__(self, "tag_id", normalize_tag(self.tag_id))
        object.__setattr__(self, "pose", tuple(float(c) for c in self.pose))
        if self.travel is not None:
            lo, hi = self.travel
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise InvalidConfigError(f"travel must be a (min, max) pair, got {self.travel!r}")
            object.__setattr__(self, "travel", (float(lo), float(hi)))


@dataclass(frozen=True)
class TaskOutcome:
    completed: bool
    t_complete: float | None
    trajectory: tuple[Sample, ...]
    fault: str | None = None


# --- Gripper -----------------------------------------------------------------


class Gripper:
    """Magnetic gripper head: attach within range, read the tag, detach.

    detach_force_capacity must exceed magnet_pull for detachment to work;
    the check happens at detach time so misconfigured hardware surfaces as
    a fault, not a constructor error.
    """

    def __init__(
        self,
        magnet_pull: float = MAGNET_PULL_N,
        detach_force_capacity: float = DETACH_CAPACITY_N,
        attach_range: float = ATTACH_RANGE_M,
    ):
        if not (math.isfinite(magnet_pull) and magnet_pull > 0.0):
            raise InvalidConfigError(f"magnet_pull must be positive, got {magnet_pull!r}")
        if not (math.isfinite(detach_force_capacity) and detach_force_capacity > 0.0):
            raise InvalidConfigError(f"detach_force_capacity must be positive, got {detach_force_capacity!r}")
        if not (math.isfinite(attach_range) and attach_range > 0.0):
            raise InvalidConfigError(f"attach_range must be positive, got {attach_range!r}")
        self.magnet_pull = magnet_pull
        self.detach_force_capacity = detach_force_capacity
        self.attach_range = attach_range
        self.attached_to: str | None = None
        self.drive_u = 0.0

    def attach(self, obj: VirtualObject, gripper_pose: Vec3) -> bool:
        """True if the magnet caught the object, False if out of range."""
        if self.attached_to is not None:
            raise GripperStateError(f"already attached to {self.attached_to}")
        distance = math.dist(gripper_pose, obj.pose)
        if distance > self.attach_range:
            return False
        self.attached_to = obj.tag_id
        return True

    def detach(self) -> None:
        if self.attached_to is None:
            raise GripperStateError("not attached")
        if self.detach_force_capacity <= self.magnet_pull:
            raise DetachFault(
                f"insufficient detach force: {self.detach_force_capacity} N "
                f"cannot overcome {self.magnet_pull} N magnet pull"
            )
        self.attached_to = None
        self.drive_u = 0.0

    def read_rfid(self) -> str:
        if self.attached_to is None:
            raise NoTagError("no tag in range: not attached")
        return self.attached_to

    def drive(self, u: float) -> None:
        if not math.isfinite(u):
            raise InvalidConfigError(f"drive command must be finite, got {u!r}")
        self.drive_u = max(-1.0, min(1.0, u))


# --- Simulation --------------------------------------------------------------


class TaskSimulator:
    """Step-by-step integrator for one object under one motion profile.

    The server advances it one telemetry tick at a time and may swap the
    profile between ticks; run_task drives it to the end in one call.
    """

    def __init__(
        self,
        obj: VirtualObject,
        profile: MotionProfile,
        motor: MotorSpec | None = None,
        dt: float = DT,
        tick: float = TICK,
        continuous: bool | None = None,
    ):
        if continuous is not None and continuous != profile.continuous:
            profile = replace(profile, continuous=continuous)
        self.obj = obj
        self.profile = profile
        self.motor = motor if motor is not None else MotorSpec()
        self.dt = dt
        self.per_tick = max(1, round(tick / dt))
        self.steps = 0
        self.theta = 0.0
        self.output = self._output_at(0.0)
        self.v = 0.0
        self.completed = False
        self.t_complete: float | None = None
        self.fault: str | None = None
        self.samples: list[Sample] = []
        self._record_sample()

    @property
    def t(self) -> float:
        return self.steps * self.dt

    def set_profile(self, profile: MotionProfile) -> None:
        """Hot-swap the command source; takes effect from the next step."""
        self.profile = profile

    def _output_at(self, theta: float) -> float:
        terminal = self.obj.chain.terminal
        gain = rotation_gain(self.obj.chain)
        if terminal is None:
            return gain * theta
        if isinstance(terminal, PinInSlot):
            return pin_in_slot_position(gain * theta, terminal)
        return gain * theta * terminal.r

    def _theta_for_output(self, out: float) -> float:
        # Invert the positional map for rack and bare-rotary chains (used to
        # pin the motor angle against a hard stop).
        terminal = self.obj.chain.terminal
        gain = rotation_gain(self.obj.chain)
        if isinstance(terminal, GearRack):
            return out / (gain * terminal.r)
        return out / gain

    def _record_sample(self) -> None:
        u = evaluate(self.profile, self.t)
        load = self.obj.load_fn(self.output, self.v)
        self.samples.append(Sample(t=self.t, u=u, theta=self.theta, output=self.output, load=load))
        if not self.completed and self.obj.completion(self.samples):
            self.completed = True
            self.t_complete = self.t

    def _step(self) -> None:
        u = evaluate(self.profile, self.t)
        load = self.obj.load_fn(self.output, self.v)
        if not math.isfinite(load):
            self.fault = f"non-finite load {load!r} at t={self.t:.3f}"
            return
        gain = chain_velocity_gain(self.theta, self.obj.chain)
        if u > 0.0:
            effective = max(0.0, load * gain)
        elif u < 0.0:
            effective = max(0.0, -load * gain)
        else:
            effective = 0.0
        shaft = motor_output(u, effective, self.motor)
        theta_new = self.theta + shaft.omega * self.dt

        terminal = self.obj.chain.terminal
        if isinstance(terminal, GearRack):
            out_new = self._output_at(theta_new)
            ratchet = self.obj.chain.ratchet
            if ratchet is not None:
                out_new, blocked = ratchet_advance(ratchet, self.output, out_new - self.output)
                if blocked:
                    theta_new = self.theta
        else:
            out_new = self._output_at(theta_new)

        if self.obj.travel is not None and not isinstance(terminal, PinInSlot):
            lo, hi = self.obj.travel
            clamped = max(lo, min(hi, out_new))
            if clamped != out_new:
                out_new = clamped
                theta_new = self._theta_for_output(clamped)

        self.v = (out_new - self.output) / self.dt
        self.theta = theta_new
        self.output = out_new
        self.steps += 1

    def advance_ticks(self, n: int = 1) -> None:
        """Run n telemetry ticks (per_tick integration steps each)."""
        for _ in range(n):
            if self.fault is not None:
                return
            for _ in range(self.per_tick):
                self._step()
                if self.fault is not None:
                    return
            self._record_sample()

    def outcome(self) -> TaskOutcome:
        return TaskOutcome(
            completed=self.completed,
            t_complete=self.t_complete,
            trajectory=tuple(self.samples),
            fault=self.fault,
        )


def run_task(
    obj: VirtualObject,
    profile: MotionProfile,
    spec: MotorSpec | None = None,
    *,
    t_end: float | None = None,
    dt: float = DT,
) -> TaskOutcome:
    """Simulate the profile on the object and report the sampled trajectory."""
    if t_end is None:
        t_end = profile.duration_s
    if not (math.isfinite(t_end) and t_end > 0.0):
        raise InvalidConfigError(f"t_end must be positive, got {t_end!r}")
    sim = TaskSimulator(obj, profile, motor=spec, dt=dt)
    ticks = math.ceil(round(t_end / dt) / sim.per_tick)
    sim.advance_ticks(ticks)
    return sim.outcome()


# --- Built-in catalog --------------------------------------------------------


def builtin_catalog() -> list[VirtualObject]:
    """The five demo objects, one per manipulation family."""
    return [
        VirtualObject(
            tag_id="1a2b3c01",
            name="wire cutter",
            category="Squeeze/BiDirectional",
            # Two 3:1 reductions give the 9:1 gearbox; the double mesh keeps
            # positive command closing the handles.
            chain=TransmissionChain(
                (
                    SpurPair(r_in=0.01, r_out=0.03),
                    SpurPair(r_in=0.015, r_out=0.045),
                    GearRack(r=0.005),
                )
            ),
            load_fn=SpringStepLoad(k=500.0, step_force=60.0, step_at=0.024),
            completion=WireCut(gap=0.030, cut_gap=0.002, min_force=60.0),
            pose=(0.30, 0.00, 0.05),
            travel=(0.0, 0.030),
        ),
        VirtualObject(
            tag_id="1a2b3c02",
            name="hand sanitizer",
            category="Pump/OneDirectional",
            chain=TransmissionChain((GearRack(r=0.005, bidirectional=False),)),
            load_fn=SpringLoad(k=300.0),
            completion=StrokeReach(stroke=0.025),
            pose=(0.45, 0.10, 0.05),
            travel=(0.0, 0.026),
        ),
        VirtualObject(
            tag_id="1a2b3c03",
            name="jar lid",
            category="Twist/OneDirectional",
            chain=TransmissionChain((BevelPair(r_in=0.02, r_out=0.02, axis_out=(1.0, 0.0, 0.0)),)),
            load_fn=FrictionLoad(magnitude=0.15),
            completion=TurnCount(turns=2.0),
            pose=(0.60, -0.05, 0.10),
        ),
        VirtualObject(
            tag_id="1a2b3c04",
            name="whisk",
            category="AsWhole-Rotational/OneDirectional",
            chain=TransmissionChain((SpurPair(r_in=0.01, r_out=0.03),)),
            load_fn=ViscousLoad(coeff=0.02),
            completion=SustainedSpeed(min_speed=3.5, hold_s=1.5),
            pose=(0.75, 0.05, 0.08),
        ),
        VirtualObject(
            tag_id="1a2b3c05",
            name="spice bottle",
            category="AsWhole-Linear/OneDirectional",
            chain=TransmissionChain((PinInSlot(crank_radius=0.02, sided=SINGLE),)),
            load_fn=FrictionLoad(magnitude=2.0),
            completion=ShakeCount(level=0.01, count=5),
            pose=(0.90, 0.00, 0.06),
        ),
    ]


# --- Scenario files ----------------------------------------------------------

_LOAD_TYPES = {
    "spring": (SpringLoad, ("k",)),
    "friction": (FrictionLoad, ("magnitude",)),
    "viscous": (ViscousLoad, ("coeff",)),
    "spring_step": (SpringStepLoad, ("k", "step_force", "step_at")),
}

_COMPLETION_TYPES = {
    "wire_cut": (WireCut, ("gap", "cut_gap", "min_force")),
    "stroke": (StrokeReach, ("stroke",)),
    "turns": (TurnCount, ("turns",)),
    "sustained_speed": (SustainedSpeed, ("min_speed", "hold_s")),
    "shake_count": (ShakeCount, ("level", "count")),
}


def _typed_to_json(value: object, table: dict) -> dict:
    for tag, (cls, fields) in table.items():
        if isinstance(value, cls):
            return {"type": tag, **{f: getattr(value, f) for f in fields}}
    raise ValidationError(f"{type(value).__name__} has no scenario representation")


def _typed_from_json(doc: object, table: dict, what: str) -> object:
    if not isinstance(doc, dict) or "type" not in doc:
        raise ValidationError(f"{what} must be an object with a 'type' field")
    tag = doc["type"]
    if tag not in table:
        raise ValidationError(f"unknown {what} type {tag!r}; expected one of {sorted(table)}")
    cls, fields = table[tag]
    try:
        return cls(**{f: doc[f] for f in fields})
    except KeyError as exc:
        raise ValidationError(f"{what} {tag!r} is missing field {exc.args[0]!r}") from None


def object_to_json(obj: VirtualObject) -> dict:
    doc = {
        "tag_id": obj.tag_id,
        "name": obj.name,
        "category": obj.category,
        "pose": list(obj.pose),
        "chain": chain_to_json(obj.chain),
        "load": _typed_to_json(obj.load_fn, _LOAD_TYPES),
        "completion": _typed_to_json(obj.completion, _COMPLETION_TYPES),
    }
    if obj.travel is not None:
        doc["travel"] = list(obj.travel)
    return doc


def object_from_json(doc: object) -> VirtualObject:
    if not isinstance(doc, dict):
        raise ValidationError(f"object must be a JSON object, got {type(doc).__name__}")
    for field_name in ("tag_id", "name", "category", "pose", "chain", "load", "completion"):
        if field_name not in doc:
            raise ValidationError(f"object is missing field {field_name!r}")
    pose = doc["pose"]
    if not (isinstance(pose, list) and len(pose) == 3):
        raise ValidationError("pose must be a 3-element list")
    travel = doc.get("travel")
    if travel is not None:
        if not (isinstance(travel, list) and len(travel) == 2):
            raise ValidationError("travel must be a 2-element list")
        travel = (travel[0], travel[1])
    return VirtualObject(
        tag_id=doc["tag_id"],
        name=str(doc["name"]),
        category=str(doc["category"]),
        chain=chain_from_json(doc["chain"]),
        load_fn=_typed_from_json(doc["load"], _LOAD_TYPES, "load"),
        completion=_typed_from_json(doc["completion"], _COMPLETION_TYPES, "completion"),
        pose=tuple(pose),
        travel=travel,
    )


def scenario_to_json(name: str, objects: Sequence[VirtualObject]) -> dict:
    return {"name": name, "objects": [object_to_json(o) for o in objects]}


def scenario_from_json(doc: object) -> list[VirtualObject]:
    if not isinstance(doc, dict) or not isinstance(doc.get("objects"), list):
        raise ValidationError("scenario must be an object with an 'objects' list")
    objects = [object_from_json(o) for o in doc["objects"]]
    seen: set[str] = set()
    for obj in objects:
        if obj.tag_id in seen:
            raise ValidationError(f"duplicate tag_id {obj.tag_id!r} in scenario")
        seen.add(obj.tag_id)
    return objects
