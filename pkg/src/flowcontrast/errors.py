"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration and schema problems exit
with 2, numeric failures with 3. Plain ``ValueError`` is used for
invalid-argument errors on individual operations.
"""


class FlowContrastError(Exception):
    """Base class for package-specific errors."""


class ConfigError(FlowContrastError):
    """Invalid run configuration (bad value, missing key, infeasible setting)."""


class SchemaError(ConfigError):
    """Feature schema does not match the data (missing column, bad mapping)."""


class NumericError(FlowContrastError):
    """Non-finite values or a diverging numeric procedure."""


class GradCheckError(NumericError):
    """Finite-difference gradient verification could not be completed."""


class DegenerateDataError(FlowContrastError):
    """Input data cannot support the requested operation (e.g. single class)."""
