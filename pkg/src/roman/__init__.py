"""Gear-train kinematics, motion-profile authoring, and a virtual gripper
testbed with an HTTP/WebSocket control server."""

from .errors import (
    DetachFault,
    EditRejected,
    GripperStateError,
    InvalidConfigError,
    InvalidStateError,
    NoTagError,
    RomanError,
    SimulationFault,
    ValidationError,
)
from .kinematics import (
    BevelPair,
    GearRack,
    LinearState,
    MotorSpec,
    PinInSlot,
    Ratchet,
    ShaftState,
    SpurPair,
    TransmissionChain,
    bevel_transmit,
    chain_output,
    chain_reflect_load,
    chain_velocity_gain,
    motor_output,
    pin_in_slot_position,
    rack_transmit,
    ratchet_advance,
    rotation_gain,
    spur_transmit,
)
from .profile import (
    Keypoint,
    MotionProfile,
    add_keypoint,
    adjust_duration,
    evaluate,
    integrate_motor_angle,
    make_template,
    move_keypoint,
    profile_from_json,
    profile_to_json,
)
from .device_codec import decode_profile, encode_profile
from .registry import ObjectRecord, Registry
from .testbed import (
    Gripper,
    Sample,
    TaskOutcome,
    TaskSimulator,
    VirtualObject,
    builtin_catalog,
    run_task,
    scenario_from_json,
    scenario_to_json,
)
from .server import create_app

__version__ = "0.1.0"
