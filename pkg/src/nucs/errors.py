"""Exception hierarchy. The CLI maps each class to an exit code."""


class NucsError(Exception):
    exit_code = 1


class ConfigError(NucsError, ValueError):
    exit_code = 1


class DataError(NucsError, ValueError):
    exit_code = 2


class NumericError(NucsError, ArithmeticError):
    exit_code = 3
