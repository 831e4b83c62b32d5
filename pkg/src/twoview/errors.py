"""Exception hierarchy for the two-view toolkit.

Every error carries a short machine-readable ``code`` so batch front ends
can surface failures without parsing messages.
"""


class TwoViewError(Exception):
    """Base class for all toolkit errors."""

    code = "error"


class DepthSingular(TwoViewError):
    """Projective depth vanished: the point maps to the plane at infinity."""

    code = "depth_singular"


class DegenerateAffine(TwoViewError):
    """Local affine frame has a (near) zero first column."""

    code = "degenerate_affine"


class DegeneratePointSet(TwoViewError):
    """Point set collapses to a single location; no similarity normalization."""

    code = "degenerate_point_set"


class AllCoefficientsZero(TwoViewError):
    """Polynomial with every coefficient zero has no defined roots."""

    code = "all_coefficients_zero"


class NoRealRoot(TwoViewError):
    """Even-degree fallback polynomial has no real roots."""

    code = "no_real_root"


class RankDefect(TwoViewError):
    """Linear system has a larger null space than the model allows."""

    code = "rank_defect"


class CollinearSample(RankDefect):
    """Three-point sample is collinear in one of the images."""

    code = "collinear_sample"


class RotationDegenerate(TwoViewError):
    """Rotation constraints are ill-conditioned; sample rejected."""

    code = "rotation_degenerate"


class NoValidCandidate(TwoViewError):
    """All candidate models were rejected (e.g. by the oriented constraint)."""

    code = "no_valid_candidate"


class NotEnoughPoints(TwoViewError):
    """Fewer correspondences than the solver's minimal sample size."""

    code = "not_enough_points"


class NoModelFound(TwoViewError):
    """Robust estimation exhausted its budget without a single valid model."""

    code = "no_model_found"


class RetryExhausted(TwoViewError):
    """Synthetic scene sampling failed visibility constraints repeatedly."""

    code = "retry_exhausted"


class ParseError(TwoViewError):
    """Correspondence file could not be parsed."""

    code = "parse_error"

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line
