import typing


class DRHamError(Exception):
    pass


class SignatureError(DRHamError):
    pass


class UnsupportedInputError(DRHamError):
    pass


class NotAGradientError(DRHamError):
    pass


class NotSkewError(DRHamError):
    pass


class PreconditionError(DRHamError):
    pass


class SingularMetricError(DRHamError):
    pass


class TruncationError(DRHamError):
    pass


class RecursionFailure(DRHamError):
    def __init__(self, alpha: int, d: int, reason: str) -> None:
        super().__init__(f"recursion failed at (alpha={alpha}, d={d}): {reason}")
        self.alpha = alpha
        self.d = d
        self.reason = reason


class ModelFileError(DRHamError):
    def __init__(self, field: str, reason: str) -> None:
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


class ConfigurationError(DRHamError):
    pass


def field_path(*parts: typing.Union[str, int]) -> str:
    path = ""
    for part in parts:
        if isinstance(part, int):
            path += f"[{part}]"
        else:
            path += f".{part}" if path else part
    return path
