"""Exception hierarchy shared by all peaklab modules."""


class PeaklabError(Exception):
    """Base class for every error raised by peaklab."""


class OutOfChart(PeaklabError):
    pass


class DomainError(PeaklabError, ValueError):
    pass


class ModeOverflow(PeaklabError, ValueError):
    pass


class SingularArgument(PeaklabError, ValueError):
    pass


class SingularPoint(PeaklabError, ValueError):
    pass


class PositivityLost(PeaklabError):
    pass


class MaxIterations(PeaklabError):
    pass


class SingularJacobian(PeaklabError):
    pass


class StepRefused(PeaklabError):
    def __init__(self, message, branch=None):
        super().__init__(message)
        self.branch = branch


class BranchBroken(PeaklabError):
    def __init__(self, message, branch=None):
        super().__init__(message)
        # partial branch up to (excluding) the offending record
        self.branch = branch


class OverlappingBalls(PeaklabError, ValueError):
    pass


class CoincidentPoints(PeaklabError, ValueError):
    pass


class CollapseDetected(PeaklabError):
    pass


class ConfigError(PeaklabError, ValueError):
    pass
