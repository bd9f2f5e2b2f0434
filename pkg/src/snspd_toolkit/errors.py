"""Exception hierarchy for snspd_toolkit.

Every error carries the exit code the CLI returns for it:
0 ok, 2 validation, 3 numeric, 4 insufficient data.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 1


class ValidationError(ToolkitError, ValueError):
    """Invalid input: bad parameter, broken invariant, unreadable config."""

    exit_code = 2


class RangeError(ValidationError):
    """A wavelength or other physical quantity outside its supported range."""


class MaterialRangeError(RangeError):
    """Dispersion table queried outside its tabulated wavelength range."""

    def __init__(self, material: str, wavelength_nm: float, lo_nm: float, hi_nm: float, context: str = ""):
        self.material = material
        self.wavelength_nm = wavelength_nm
        self.lo_nm = lo_nm
        self.hi_nm = hi_nm
        self.context = context
        message = f"Material '{material}' has no data at {wavelength_nm:g} nm (tabulated range {lo_nm:g}-{hi_nm:g} nm)"
        super().__init__(f"{message} at {context}" if context else message)


class ContractError(ValidationError):
    """Operation called on an input its contract does not allow."""


class NumericError(ToolkitError, ArithmeticError):
    """Numerical failure: singular matrix, division guard, non-convergence."""

    exit_code = 3


class FitError(NumericError):
    """Nonlinear fit failed to converge or produced an unphysical result."""

    def __init__(self, message: str, residual_norm: float | None = None, iterations: int | None = None):
        self.residual_norm = residual_norm
        self.iterations = iterations
        details = []
        if iterations is not None:
            details.append(f"iterations={iterations}")
        if residual_norm is not None:
            details.append(f"residual_norm={residual_norm:.6g}")
        super().__init__(f"{message} ({', '.join(details)})" if details else message)


class UnreachableThresholdError(NumericError):
    """A recovery curve never reaches the requested fraction of its maximum."""


class InsufficientDataError(ToolkitError):
    """Too few events or bins to run an analysis."""

    exit_code = 4


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(exc, ToolkitError):
        return exc.exit_code
    # pydantic validation errors and bad files count as validation failures
    from pydantic import ValidationError as PydanticValidationError

    if isinstance(exc, PydanticValidationError | FileNotFoundError | ValueError):
        return ValidationError.exit_code
    return 1
