"""Criticality metrics for automated driving.

Scene metrics (``scene_metrics``), scenario metrics (``scenario_metrics``),
probabilistic estimators (``probabilistic``), prediction and maneuver
models (``models``, ``maneuvers``, ``markov``), the trajectory criticality
index (``tci``), the metric suitability analysis (``suitability``) and the
batch pipeline behind the ``critmetrics`` command (``pipeline``).
"""

from .core import (
    AccidentEvent,
    ActorClass,
    ActorState,
    CapabilityEnvelope,
    ConflictArea,
    MetricResult,
    OccupancyRaster,
    Scale,
    Scenario,
    Scene,
    Unit,
)
from .settings import CENTER, DEFAULT, Settings
from .trajectory import Trajectory, TrajectorySet

__all__ = [
    "AccidentEvent",
    "ActorClass",
    "ActorState",
    "CapabilityEnvelope",
    "CENTER",
    "ConflictArea",
    "DEFAULT",
    "MetricResult",
    "OccupancyRaster",
    "Scale",
    "Scenario",
    "Scene",
    "Settings",
    "Trajectory",
    "TrajectorySet",
    "Unit",
]

__version__ = "0.1.0"
