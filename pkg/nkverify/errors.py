class NKVerifyError(ValueError):
    """Base class for every input, config and computation error raised by nkverify."""


class QuaternionDomainError(NKVerifyError):
    pass


class TangencyError(NKVerifyError):
    pass


class BasePointMismatchError(NKVerifyError):
    pass


class StepUnderflowError(NKVerifyError):
    pass


class DegenerateChartError(NKVerifyError):
    pass


class NotLagrangianError(NKVerifyError):
    pass


class ComputationIntegrityError(NKVerifyError):
    pass


class ConvergenceError(NKVerifyError):
    pass


class LambdaUnavailableError(NKVerifyError):
    pass


class ConfigError(NKVerifyError):
    pass


class UnknownImmersionError(NKVerifyError):
    def __init__(self, name: str, available: list[str]):
        self.name = name
        self.available = available
        super().__init__(
            f"Immersion {name} not found. Currently available immersions are {available}"
        )


class UnknownCheckError(NKVerifyError):
    def __init__(self, check_id: str, available: list[str]):
        self.check_id = check_id
        self.available = available
        super().__init__(
            f"Check {check_id} not found. Currently available checks are {available}"
        )


class ParseError(NKVerifyError):
    def __init__(self, message: str, line: int, column: int):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")
