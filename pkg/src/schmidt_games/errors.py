"""Exception taxonomy shared across the workbench.

Every failure mode that a caller is expected to handle gets its own class;
anything else is a plain bug and raises whatever Python raises.
"""


class SchmidtGameError(Exception):
    """Base class for all workbench errors."""


# -- geometry ---------------------------------------------------------------

class HeightBelowFloor(SchmidtGameError):
    """Formal ball height at or below the parameter space floor t*."""


class MixedSupports(SchmidtGameError):
    """Predicate applied to regions from incomparable support families."""


class UnsupportedObstacle(SchmidtGameError):
    """Obstacle kind with no neighborhood realization rule."""


class IndeterminatePredicate(SchmidtGameError):
    """Sign could not be certified up to the precision cap (1024 bits)."""


# -- families ---------------------------------------------------------------

class EnumerationBudgetExceeded(SchmidtGameError):
    def __init__(self, budget, message=""):
        self.budget = budget
        super().__init__(message or f"enumeration budget {budget} exceeded")


class VolumeTooLarge(SchmidtGameError):
    """Box volume precondition of the simplex argument is not provable."""


class NestednessViolation(SchmidtGameError):
    """Smaller-size member set not contained in a larger-size one."""


class DiscretenessViolation(SchmidtGameError):
    """Infinitely many (or unsorted) sizes below a finite horizon."""


class SeparationViolation(SchmidtGameError):
    """Two members of one resonant set closer than the declared bound."""


# -- strategy ---------------------------------------------------------------

class NoAvoidingBall(SchmidtGameError):
    """Diffuseness failed: no legal ball avoids the obstacle at this b."""


class NStarNotOne(SchmidtGameError):
    """Composition requires a locally-contained certificate with n* = 1."""


class DecayTooWeak(SchmidtGameError):
    """No b below the configured cap satisfies the decay inequality."""


class LStarCertificateFails(SchmidtGameError):
    """Sampled ball violating the bi-Lipschitz sandwich; carries a witness."""

    def __init__(self, ball, message=""):
        self.ball = ball
        super().__init__(message or f"sandwich fails at {ball}")


class WitnessMismatch(SchmidtGameError):
    """Interleaving requires a common (b*, n*, L*) across all witnesses."""


class ConditionTwoSixUnavailable(SchmidtGameError):
    """Classic reduction needs a strong witness; only a graded one exists."""


# -- engine -----------------------------------------------------------------

class InconsistentParams(SchmidtGameError):
    """Game parameters violate the variant's inequalities (e.g. b < b*)."""


class IllegalMove(SchmidtGameError):
    def __init__(self, reason, message=""):
        self.reason = reason
        super().__init__(message or f"illegal move: {reason}")


class BStalled(SchmidtGameError):
    """Scripted or external B exhausted its retries on rejected moves."""

    def __init__(self, reason, message=""):
        self.reason = reason
        super().__init__(message or f"player B stalled: {reason}")


# -- verify -----------------------------------------------------------------

class AuditFailure(SchmidtGameError):
    def __init__(self, move_index, reason):
        self.move_index = move_index
        self.reason = reason
        super().__init__(f"audit failed at move {move_index}: {reason}")


class IntervalTooWide(SchmidtGameError):
    """Interval too wide for the requested continued-fraction depth."""


class PrefixTooShort(SchmidtGameError):
    """Word prefix too short to decide all requested shifts."""


class PowerLawViolation(SchmidtGameError):
    def __init__(self, ball, message=""):
        self.ball = ball
        super().__init__(message or f"power law violated at {ball}")


class ChildCountCollapse(SchmidtGameError):
    def __init__(self, node, message=""):
        self.node = node
        super().__init__(message or f"node {node} yields < 2 children")


class UnsupportedSupport(SchmidtGameError):
    """Operation not defined for this support kind (e.g. SVG of a shift)."""
