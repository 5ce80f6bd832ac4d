"""Exception hierarchy shared across the package.

Every error raised by library code derives from CrosstalkError so callers
can catch one type at an API boundary. The CLI maps subtrees onto exit
codes; nothing here carries process state.
"""


class CrosstalkError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSeries(CrosstalkError):
    """A metric series violates a structural invariant (lengths, finiteness)."""


class NonUniformTimestep(InvalidSeries):
    """Timestamps are not a strictly increasing uniform grid."""


class PhaseAbsent(CrosstalkError):
    """Requested phase label does not occur in the series."""


class NonContiguousPhase(CrosstalkError):
    """A phase label occurs in more than one contiguous run."""


class EmptyIntersection(CrosstalkError):
    """Rounds share no common usable window for a phase."""


class MalformedRow(CrosstalkError):
    """An input row failed to parse.

    Carries the 1-based line number and the offending content so the CLI
    can point at the exact location.
    """

    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"line {line_number}: {reason}")


class UnknownMetricKind(CrosstalkError):
    """Metric code not in the supported set."""


class MissingSeries(CrosstalkError):
    """A tenant/metric combination has no samples."""


class DegenerateBaseline(CrosstalkError):
    """Baseline statistic too close to zero for a relative comparison."""


class DegenerateMean(CrosstalkError):
    """Mean too close to zero for a coefficient of variation."""


class ZeroVariance(CrosstalkError):
    """Both groups have zero variance; effect size is undefined."""


class ConstantSeries(CrosstalkError):
    """Series (or its differences) is constant; the statistic is undefined."""


class InsufficientSamples(CrosstalkError):
    """Fewer samples than the operation's stated minimum."""


class SingularRegression(CrosstalkError):
    """Design matrix is numerically rank deficient."""


class EmptyBaselineGraph(CrosstalkError):
    """Baseline graph has no links; a relative density is undefined."""


class InfeasibleImpact(CrosstalkError):
    """Requested impact cannot be realized by the generative model.

    max_achievable_pct reports the boundary the calibration ran into.
    """

    def __init__(self, message: str, max_achievable_pct: float | None = None):
        self.max_achievable_pct = max_achievable_pct
        super().__init__(message)


class InvalidConfig(CrosstalkError):
    """Simulation or analysis configuration fails validation."""
