"""Exception types shared across the package."""


class ZtidsError(Exception):
    """Base class for every error raised by this package."""


# --- dataset loading ---

class MissingLabelColumn(ZtidsError):
    pass


class EmptyFile(ZtidsError):
    pass


class RaggedRow(ZtidsError):
    pass


class TooFewSamplesPerClass(ZtidsError):
    pass


# --- preprocessing ---

class DegenerateColumn(ZtidsError):
    """Constant column makes the requested normalization undefined."""


class MinorityTooSmall(ZtidsError):
    """Not enough minority rows for the requested neighbor count."""


# --- feature engineering ---

class InvalidTargetCount(ZtidsError):
    """Requested feature count outside [1, n_features]."""


# --- metrics ---

class LengthMismatch(ZtidsError):
    pass


class EmptyInput(ZtidsError):
    pass


# --- models ---

class SingleClassTraining(ZtidsError):
    """Training labels contain only one class."""


class BadHyperparameter(ZtidsError):
    pass


class ShapeMismatch(ZtidsError):
    """Feature width differs from what the model was fit on."""


class NotDifferentiable(ZtidsError):
    """Input gradients exist only for the differentiable learner."""


class VersionMismatch(ZtidsError):
    pass


class CorruptModel(ZtidsError):
    pass


class NotTreeBased(ZtidsError):
    """Operation needs a decision-tree ensemble."""


# --- search ---

class EmptySpace(ZtidsError):
    pass


# --- cli / reports ---

class UsageError(ZtidsError):
    """Bad flags, unreadable inputs, or malformed config (exit code 2)."""


class CorruptReport(ZtidsError):
    """Report file is not a run-report JSON document."""
