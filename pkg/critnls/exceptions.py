"""
Custom exception classes for critnls

Every error carries a stable error code and the process exit code the CLI
reports for it (1 for domain failures, 2 for usage and configuration).
"""

from typing import Any, Dict, Optional


class CritNLSError(Exception):
    """Base exception for all critnls errors"""

    def __init__(
        self,
        message: str,
        error_code: str = "INTERNAL_ERROR",
        exit_code: int = 1,
        details: Optional[Dict[str, Any]] = None,
    ):
        self.message = message
        self.error_code = error_code
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to the JSON error object written to stderr"""
        response = {
            "error": self.error_code,
            "message": self.message,
            "exit_code": self.exit_code,
        }
        if self.details:
            response["details"] = self.details
        return response


# Configuration / usage
class ConfigurationError(CritNLSError):
    """Invalid grid, config file or parameter set"""

    def __init__(self, message: str, error_code: str = "CONFIGURATION_ERROR", **kwargs):
        super().__init__(message, error_code=error_code, exit_code=2, **kwargs)


class UsageError(ConfigurationError):
    """Command-line usage error (missing file, bad flag value)"""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, error_code="USAGE_ERROR", **kwargs)


# Grid / field errors
class SamplingError(CritNLSError):
    """Profile evaluation produced non-finite samples"""

    def __init__(self, profile: str, bad_nodes: int):
        super().__init__(
            f"Profile '{profile}' evaluated to non-finite values at {bad_nodes} nodes",
            error_code="SAMPLING_ERROR",
            details={"profile": profile, "bad_nodes": bad_nodes},
        )


class ShapeError(CritNLSError):
    """Array length does not match the grid"""

    def __init__(self, expected: int, actual: int, what: str = "samples"):
        super().__init__(
            f"Length mismatch for {what}: expected {expected}, got {actual}",
            error_code="SHAPE_ERROR",
            details={"expected": expected, "actual": actual, "what": what},
        )


class RangeError(CritNLSError):
    """Requested radius, scale or shell lies outside what the grid supports"""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, error_code="RANGE_ERROR", **kwargs)


class FieldValidationError(CritNLSError):
    """Field samples violate the RadialField invariants"""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, error_code="FIELD_INVALID", **kwargs)


# Variational / construction errors
class ConstructionError(CritNLSError):
    """Manufactured data failed its verified sign conditions"""

    def __init__(self, condition: str, message: Optional[str] = None, **kwargs):
        details = kwargs.pop("details", {})
        details["condition"] = condition
        super().__init__(
            message or f"Construction failed: {condition}",
            error_code="CONSTRUCTION_ERROR",
            details=details,
        )
        self.condition = condition


class PreconditionError(CritNLSError):
    """Operation called on an input outside its domain"""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, error_code="PRECONDITION_ERROR", **kwargs)


class BracketError(CritNLSError):
    """Root bracket has no sign change"""

    def __init__(self, lower: float, upper: float, f_lower: float, f_upper: float):
        super().__init__(
            f"No sign change on [{lower}, {upper}]",
            error_code="BRACKET_ERROR",
            details={
                "lower": lower,
                "upper": upper,
                "f_lower": f_lower,
                "f_upper": f_upper,
            },
        )


class CalibrationError(CritNLSError):
    """Quadrature disagrees with a closed-form reference beyond tolerance"""

    def __init__(self, quantity: str, discrepancy: float, tolerance: float):
        super().__init__(
            f"Calibration of {quantity} failed: discrepancy {discrepancy:.3e} "
            f"exceeds {tolerance:.1e}",
            error_code="CALIBRATION_ERROR",
            details={
                "quantity": quantity,
                "discrepancy": discrepancy,
                "tolerance": tolerance,
            },
        )


class InternalConsistencyError(CritNLSError):
    """An algebraic identity between functionals was violated"""

    def __init__(self, identity: str, residual: float, tolerance: float):
        super().__init__(
            f"Identity '{identity}' violated: residual {residual:.3e} > {tolerance:.1e}",
            error_code="INTERNAL_CONSISTENCY",
            details={"identity": identity, "residual": residual, "tolerance": tolerance},
        )


# Time-integration signals
class TimeStepFloorError(CritNLSError):
    """Adaptive step fell below the blow-up floor"""

    def __init__(self, dt: float, floor: float):
        super().__init__(
            f"Adaptive step {dt:.3e} below floor {floor:.1e}",
            error_code="DT_FLOOR",
            details={"dt": dt, "floor": floor},
        )
        self.dt = dt
        self.floor = floor


class BlowUpSignal(CritNLSError):
    """A step produced non-finite samples"""

    def __init__(self, t: float, step: int):
        super().__init__(
            f"Non-finite field at t={t!r} (step {step})",
            error_code="NON_FINITE",
            details={"t": t, "step": step},
        )


def exception_to_response(exc: Exception) -> Dict[str, Any]:
    """
    Convert any exception to the standardized error object

    Args:
        exc: Exception instance

    Returns:
        Dictionary with error details, including the exit code
    """
    if isinstance(exc, CritNLSError):
        return exc.to_dict()

    # pydantic validation errors subclass ValueError
    if isinstance(exc, ValueError):
        return {
            "error": "VALIDATION_ERROR",
            "message": str(exc),
            "exit_code": 2,
        }
    elif isinstance(exc, FileNotFoundError):
        return {
            "error": "FILE_NOT_FOUND",
            "message": str(exc),
            "exit_code": 2,
        }
    elif isinstance(exc, PermissionError):
        return {
            "error": "PERMISSION_DENIED",
            "message": str(exc),
            "exit_code": 1,
        }
    elif isinstance(exc, OSError):
        return {
            "error": "IO_ERROR",
            "message": str(exc),
            "exit_code": 1,
        }
    else:
        return {
            "error": "INTERNAL_ERROR",
            "message": "An unexpected error occurred",
            "exit_code": 1,
        }
