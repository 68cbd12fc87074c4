"""Exception types shared across the package."""


class MechhapError(Exception):
    """Base class for all package errors."""


class OutOfWorkspace(MechhapError):
    """Requested point is not reachable by the mechanism (or one of its legs)."""

    def __init__(self, message: str, leg: str | None = None):
        super().__init__(message)
        self.leg = leg


class JointLimitViolation(MechhapError):
    """An inverse-kinematics branch violates the active joint limits."""

    def __init__(self, message: str, joint: int):
        super().__init__(message)
        self.joint = joint  # 1-based index of the violating joint


class NoAssembly(MechhapError):
    """The five-bar distal circles do not intersect for the commanded angles."""

    def __init__(self, message: str, gap: float):
        super().__init__(message)
        self.gap = gap  # signed clearance between the two distal circles


class DegenerateField(MechhapError):
    """All reachable cells of an index field are numerically zero."""


class OutOfGrid(MechhapError):
    """Query point lies outside the sampled grid bounds."""


class NoAtlas(MechhapError):
    """Normalization constants requested before the atlas was computed."""


class UnknownCase(MechhapError):
    """Study-case id does not exist for the given mechanism."""


class NonMonotonicTime(MechhapError):
    """Trajectory sample timestamp does not increase."""


class NotFinished(MechhapError):
    """Metrics requested for a trajectory that has not reached its target."""


class BadMessage(MechhapError):
    """Wire message cannot be parsed or has an unknown type/field."""


class InvalidValue(MechhapError):
    """Wire message is well-formed but violates a type invariant."""
