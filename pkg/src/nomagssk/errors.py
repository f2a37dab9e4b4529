"""Exception hierarchy for the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class InvalidAntennaConfig(SimulationError):
    pass


class DegenerateAllocation(SimulationError):
    pass


class UnsupportedOrder(SimulationError):
    pass


class LengthMismatch(SimulationError):
    pass


class IndexOutOfRange(SimulationError):
    pass


class InvalidGainTargets(SimulationError):
    pass


class DimensionMismatch(SimulationError):
    pass


class RankOutOfRange(SimulationError):
    pass


class InvalidSnr(SimulationError):
    pass


class DomainError(SimulationError):
    pass


class ZeroPower(SimulationError):
    pass


class ConfigMismatch(SimulationError):
    pass


class ScenarioParseError(SimulationError):
    pass


class ScenarioValidationError(SimulationError):
    pass
