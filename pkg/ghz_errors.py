"""
Error types shared by the entropic GHZ modules

Library code raises these; the command-line front end turns them into
{"success": False, "message": ...} responses and exit codes.
"""


class GHZError(Exception):
    """Base class for every error raised by this project"""


class ArityError(GHZError, ValueError):
    """Number of parties/qubits/settings does not fit the operation"""


class ProbabilityError(GHZError, ValueError):
    """Input is not a valid probability vector or density matrix"""


class RangeError(GHZError, ValueError):
    """Numeric argument outside its documented range"""


class LengthMismatchError(GHZError, ValueError):
    """Bit strings of different lengths were combined"""


class CodecError(GHZError, ValueError):
    """Unknown codec or corrupt compressed stream"""


class SignalingError(GHZError, ValueError):
    """Context distributions disagree on a single-party marginal"""


class NoThresholdError(GHZError):
    """Scenario shows no violation at p=0, so there is nothing to bisect"""


class NonMonotoneMarginError(GHZError):
    """Margin is not monotone in the noise fraction; bisection would be unsafe"""


class SolverError(GHZError):
    """LP solver gave neither a valid witness nor an infeasibility certificate"""
