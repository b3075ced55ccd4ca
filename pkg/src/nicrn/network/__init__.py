"""Network description: data model, parser, validation and graph matrices."""

from .matrices import KernelImage, Matrices, build_matrices, kernel_image, kernel_residual
from .model import (
    ActivationModel,
    Complex,
    EnergyMode,
    NetworkError,
    NetworkSpec,
    Reaction,
    ReactionKind,
)
from .parser import NetworkSyntaxError, load_network, parse_network
from .serialize import matrices_to_dict, network_to_dict, serialize_network, to_json_dict
from .validate import ConditionResult, ValidationReport, validate_conditions

__all__ = [
    "ActivationModel",
    "Complex",
    "ConditionResult",
    "EnergyMode",
    "KernelImage",
    "Matrices",
    "NetworkError",
    "NetworkSpec",
    "NetworkSyntaxError",
    "Reaction",
    "ReactionKind",
    "ValidationReport",
    "build_matrices",
    "kernel_image",
    "kernel_residual",
    "load_network",
    "matrices_to_dict",
    "network_to_dict",
    "parse_network",
    "serialize_network",
    "to_json_dict",
    "validate_conditions",
]
