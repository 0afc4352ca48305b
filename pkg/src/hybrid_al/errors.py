"""Exception hierarchy. The CLI maps each family to an exit code."""


class HybridALError(Exception):
    """Base class for all package errors."""


class ConfigurationError(HybridALError, ValueError):
    """Invalid parameters or configuration files (exit code 1)."""


class DataError(HybridALError, ValueError):
    """Malformed input data (exit code 2)."""


class ParseError(DataError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedPosteriorError(DataError):
    """A probability matrix failed validation."""


class ShapeError(DataError):
    """Array dimensions do not match what the model or pool expects."""


class InvariantViolation(HybridALError, RuntimeError):
    """A pool operation would break the labeled/unlabeled partition."""


class LabelAccessError(InvariantViolation):
    """A ground-truth label was requested for a sample that is not labeled yet."""


class TrainingError(HybridALError, RuntimeError):
    pass


class DivergenceError(TrainingError):
    """Training produced a non-finite loss (exit code 3)."""

    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        self.loss = loss
        self.partial_curve = None  # filled in by the experiment loop
        super().__init__(f"non-finite training loss {loss!r} at epoch {epoch}")

    def __reduce__(self):
        return (_rebuild_divergence, (self.epoch, self.loss, self.args, self.partial_curve))


def _rebuild_divergence(epoch, loss, args, partial_curve):
    exc = DivergenceError(epoch, loss)
    exc.args = args
    exc.partial_curve = partial_curve
    return exc
