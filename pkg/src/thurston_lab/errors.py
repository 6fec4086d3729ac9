"""Exception hierarchy shared by every module of the package."""


class ThurstonLabError(Exception):
    """Base class; the CLI maps any subclass to exit code 3."""

    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class ZeroSlopeInput(ThurstonLabError, ValueError):
    code = "zero_slope_input"


class NonPositiveLength(ThurstonLabError, ValueError):
    code = "non_positive_length"


class PrecisionUnderflow(ThurstonLabError, ArithmeticError):
    code = "precision_underflow"

    def __init__(self, message, n=None):
        super().__init__(message)
        self.n = n


class HolonomyCorrupt(ThurstonLabError, ArithmeticError):
    code = "holonomy_corrupt"


class SurfaceMismatch(ThurstonLabError, ValueError):
    code = "surface_mismatch"


class ZeroVector(ThurstonLabError, ValueError):
    code = "zero_vector"


class ZeroCovector(ZeroVector):
    code = "zero_covector"


class ConvexityViolation(ThurstonLabError, ArithmeticError):
    code = "convexity_violation"


class EmptyFacet(ThurstonLabError, ArithmeticError):
    code = "empty_facet"


class IntegrationStall(ThurstonLabError, RuntimeError):
    code = "integration_stall"


class DepthInsufficient(ThurstonLabError, RuntimeError):
    code = "depth_insufficient"


class Unresolved(ThurstonLabError, RuntimeError):
    code = "unresolved"


class SingularMap(ThurstonLabError, ValueError):
    code = "singular_map"
