"""Exception hierarchy shared by all stages."""


class HawkesError(Exception):
    """Base class for every error raised by hawkesnet."""


class StationarityError(HawkesError):
    pass


class SingularityError(HawkesError):
    pass


class DegenerateModelError(HawkesError):
    pass


class SimulationAbort(HawkesError):
    pass


class EstimationError(HawkesError):
    """Bad estimator input: empty horizon, lag grid too long, etc."""


class ModeRecoveryFailure(HawkesError):
    """No admissible rational fit; ``diagnostics`` holds the per-order details."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class SchemaError(HawkesError):
    pass


class ConfigError(HawkesError):
    pass
