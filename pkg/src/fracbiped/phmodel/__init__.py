"""Port-Hamiltonian biped models: evaluators, guards, impact maps."""

from .base import (
    ImpactSingularityError,
    PHState,
    RobotModel,
    SingularMassError,
    christoffel_coriolis,
)
from .rabbit import RabbitModel, RabbitParams
from .twolink import TwoLinkModel, TwoLinkParams

__all__ = [
    "PHState",
    "RobotModel",
    "SingularMassError",
    "ImpactSingularityError",
    "christoffel_coriolis",
    "TwoLinkModel",
    "TwoLinkParams",
    "RabbitModel",
    "RabbitParams",
]
