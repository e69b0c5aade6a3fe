"""Exception hierarchy shared by every module."""


class CornerLabError(Exception):
    """Base class for domain errors (CLI exit code 1)."""

    code = "error"

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class NonHermitianInput(CornerLabError):
    code = "non_hermitian_input"


class NotPSD(CornerLabError):
    code = "not_psd"


class NotState(CornerLabError):
    code = "not_state"


class SingularPoint(CornerLabError):
    code = "singular_point"


class DimensionMismatch(CornerLabError):
    code = "dimension_mismatch"


class EmptyInterior(CornerLabError):
    code = "empty_interior"


class NonOrthonormalBasis(CornerLabError):
    code = "non_orthonormal_basis"


class RepresentationMismatch(CornerLabError):
    code = "representation_mismatch"


class NotProjection(CornerLabError):
    code = "not_projection"


class UnboundedDirection(CornerLabError):
    code = "unbounded_direction"


class MissingOperand(CornerLabError):
    code = "missing_operand"


class TooLarge(CornerLabError):
    code = "too_large"


class UnknownName(CornerLabError):
    code = "unknown_name"


class DimOverflow(CornerLabError):
    code = "dim_overflow"


class InvalidOperatorSystem(CornerLabError):
    code = "invalid_operator_system"
