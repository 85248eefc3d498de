"""Dynamic spectrum allocation with a self-organizing feature map."""
from .model import (
    InstanceError,
    NetworkInstance,
    build_proximity,
    cost,
    instance_from_dict,
    interference_from_geometry,
    load_instance,
    save_instance,
    validate,
)
from .som import SolverConfig, solve

__version__ = "0.1.0"

__all__ = [
    "InstanceError",
    "NetworkInstance",
    "SolverConfig",
    "build_proximity",
    "cost",
    "instance_from_dict",
    "interference_from_geometry",
    "load_instance",
    "save_instance",
    "solve",
    "validate",
]
