"""
Input validation module for critnls

Validators for grid sizes, field samples and numerical parameters.
"""

import math
from typing import Iterable, List, Optional

import numpy as np
from scipy import fft as sp_fft

from .exceptions import ConfigurationError, FieldValidationError, ShapeError


class GridValidator:
    """Validator for radial grid parameters"""

    MIN_NODES = 16
    # DST-I of length n runs on an FFT of length 2(n+1)
    MAX_NODES = 2**22

    @classmethod
    def validate(cls, r_max: float, n: int) -> None:
        """
        Validate outer radius and node count

        Raises:
            ConfigurationError: If r_max is not positive/finite or n unusable
        """
        if not isinstance(r_max, (int, float)) or not math.isfinite(r_max):
            raise ConfigurationError(f"r_max must be a finite number, got {r_max!r}")
        if r_max <= 0:
            raise ConfigurationError(f"r_max must be positive, got {r_max}")
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise ConfigurationError(f"n must be an integer, got {n!r}")
        if n < cls.MIN_NODES:
            raise ConfigurationError(f"n must be >= {cls.MIN_NODES}, got {n}")
        if n > cls.MAX_NODES:
            raise ConfigurationError(f"n must be <= {cls.MAX_NODES}, got {n}")
        if sp_fft.next_fast_len(int(n) + 1) != int(n) + 1:
            raise ConfigurationError(
                f"n + 1 = {n + 1} has no fast-transform factorization; "
                f"use n = {sp_fft.next_fast_len(int(n) + 1) - 1}",
                details={"n": int(n)},
            )


class FieldValidator:
    """Validator for sampled field values"""

    @staticmethod
    def validate_samples(values: np.ndarray, n: int, what: str = "field") -> None:
        """
        Check length and finiteness of samples

        Raises:
            ShapeError: If the length differs from the grid
            FieldValidationError: If any sample is NaN or infinite
        """
        if values.ndim != 1 or values.shape[0] != n:
            raise ShapeError(n, int(values.size), what)
        bad = int(np.count_nonzero(~np.isfinite(values)))
        if bad:
            raise FieldValidationError(
                f"{what} has {bad} non-finite samples", details={"bad_nodes": bad}
            )


class ParameterValidator:
    """Validator for scalar numerical parameters"""

    @staticmethod
    def positive(name: str, value: float) -> float:
        if (
            isinstance(value, bool)
            or not isinstance(value, (int, float, np.floating))
            or not math.isfinite(value)
            or value <= 0
        ):
            raise ConfigurationError(f"{name} must be positive, got {value!r}")
        return float(value)

    @staticmethod
    def fraction(name: str, value: float, allow_zero: bool = False) -> float:
        lower_ok = value >= 0 if allow_zero else value > 0
        if not (lower_ok and value < 1):
            interval = "[0, 1)" if allow_zero else "(0, 1)"
            raise ConfigurationError(f"{name} must lie in {interval}, got {value!r}")
        return float(value)

    @staticmethod
    def epsilon(value: float, bound: float = 0.25) -> float:
        if not math.isfinite(value) or value == 0 or abs(value) > bound:
            raise ConfigurationError(
                f"eps must satisfy 0 < |eps| <= {bound}, got {value!r}"
            )
        return float(value)

    @staticmethod
    def radii(
        name: str,
        values: Iterable[float],
        limit: Optional[float] = None,
        allow_zero: bool = False,
        inclusive: bool = True,
    ) -> List[float]:
        """Radii that are positive (or zero) and at most ``limit`` (below it if not inclusive)."""
        out = []
        for value in values:
            if not math.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
                raise ConfigurationError(f"{name} entries must be positive: {value!r}")
            if limit is not None and (value > limit if inclusive else value >= limit):
                relation = "<=" if inclusive else "<"
                raise ConfigurationError(
                    f"{name} entry {value} must be {relation} {limit:g}",
                    details={"limit": limit},
                )
            out.append(float(value))
        return out
