"""Closed-form inverse kinematics for a six-revolute-joint arm with a lateral offset."""
from .analytic import (
    IkFailure,
    NoConsistentBranch,
    OutOfReach,
    ShoulderSingularity,
    WristSingularity,
    ik_solve,
)
from .dls import DlsConfig, DlsResult, ik_dls
from .fk import build_frames, fk, fk_planar
from .model import (
    FIXTURE,
    ArmParams,
    BranchLabel,
    DegenerateAxes,
    IkSolution,
    JointAngles,
    Pose,
    Vec3,
    normalize_angle,
    pose_from_axes,
)

__version__ = "0.1.0"
