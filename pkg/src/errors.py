class ToolkitError(Exception):
    exit_code = 1


class ConfigError(ToolkitError):
    exit_code = 2

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(message)


class EmptyInput(ToolkitError):
    pass


class NumericalError(ToolkitError):
    exit_code = 3


class SingularMatrix(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass


class FrequencyOffGrid(NumericalError):
    pass


class DegenerateSequence(NumericalError):
    pass


class DegenerateSignal(NumericalError):
    pass


class ResonantFrequency(NumericalError):
    pass


class DuplicateFrequency(NumericalError):
    pass


class RankDeficient(NumericalError):
    pass


class DimensionMismatch(NumericalError):
    pass


class NonPositiveDefinite(NumericalError):
    pass


class NotStabilizable(NumericalError):
    pass


class NoStabilizingController(NumericalError):
    pass


class StateBlowup(NumericalError):
    def __init__(self, step: int, norm: float, guard: float):
        self.step = step
        self.norm = norm
        self.guard = guard
        super().__init__(f"State norm {norm:.3e} exceeded guard {guard:.1e} at step {step}")
