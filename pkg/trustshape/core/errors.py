class TrustShapeError(Exception):
    """Base error: a stable machine ``code`` plus a human ``detail``."""

    code = "error"

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}"


class InvalidPerformanceError(TrustShapeError):
    code = "invalid_performance"


class InvalidStateError(TrustShapeError):
    code = "invalid_state"


class InvalidStageError(TrustShapeError):
    code = "invalid_stage"


class InvalidHorizonError(TrustShapeError):
    code = "invalid_horizon"


class InvalidQuadratureError(TrustShapeError):
    code = "invalid_quadrature"


class NumericFailureError(TrustShapeError):
    code = "numeric_failure"


class UndefinedPolicyError(TrustShapeError):
    code = "undefined_policy"


class InstanceTooLargeError(TrustShapeError):
    code = "instance_too_large"


class ConfigInvalidError(TrustShapeError):
    code = "config_invalid"


class ConfigParseError(TrustShapeError):
    code = "config_parse"


class OutputError(TrustShapeError):
    code = "io_failure"
