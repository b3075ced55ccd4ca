"""Non-isothermal chemical reaction networks in the state (U, N).

Modules:

* :mod:`nicrn.thermo`       closed-form ideal-mixture thermodynamics
* :mod:`nicrn.network`      input language, validation, graph matrices
* :mod:`nicrn.kinetics`     Eyring rates, vector field, compact form
* :mod:`nicrn.equilibrium`  detailed balance, availability, Legendre solver
* :mod:`nicrn.dynamics`     integration, drift and Lyapunov monitoring
* :mod:`nicrn.cli`          command-line front end
"""

from .data import bundled_names, bundled_text, load_bundled
from .dynamics import IntegratorOptions, Trajectory, class_drift, converged_state, integrate, lyapunov_trace
from .equilibrium import (
    DualPoint,
    EquilibriumError,
    EquilibriumResult,
    ReferenceEquilibrium,
    availability,
    availability_gradient,
    detailed_balance_residual,
    dual_of_state,
    equilibrium_in_class,
    legendre_L_A,
    pseudo_helmholtz,
    reference_equilibrium,
    state_of_dual,
    wegscheider_check,
)
from .kinetics import (
    Conductances,
    KineticsError,
    compact_vector_field,
    conductance_matrices,
    laplacian,
    reaction_rates,
    vector_field,
)
from .network import (
    Matrices,
    NetworkError,
    NetworkSpec,
    NetworkSyntaxError,
    build_matrices,
    kernel_image,
    load_network,
    parse_network,
    serialize_network,
    validate_conditions,
)
from .thermo import (
    SpeciesThermo,
    State,
    ThermoConstants,
    ThermoDomainError,
    ThermoModel,
    entropy_gradient,
    entropy_of_state,
    molar_quantities,
    system_potentials,
    temperature_of,
)

__version__ = "0.1.0"

__all__ = [
    "Conductances",
    "DualPoint",
    "EquilibriumError",
    "EquilibriumResult",
    "IntegratorOptions",
    "KineticsError",
    "Matrices",
    "NetworkError",
    "NetworkSpec",
    "NetworkSyntaxError",
    "ReferenceEquilibrium",
    "SpeciesThermo",
    "State",
    "ThermoConstants",
    "ThermoDomainError",
    "ThermoModel",
    "Trajectory",
    "availability",
    "availability_gradient",
    "build_matrices",
    "bundled_names",
    "bundled_text",
    "class_drift",
    "compact_vector_field",
    "conductance_matrices",
    "converged_state",
    "detailed_balance_residual",
    "dual_of_state",
    "entropy_gradient",
    "entropy_of_state",
    "equilibrium_in_class",
    "integrate",
    "kernel_image",
    "laplacian",
    "legendre_L_A",
    "load_bundled",
    "load_network",
    "lyapunov_trace",
    "molar_quantities",
    "parse_network",
    "pseudo_helmholtz",
    "reaction_rates",
    "reference_equilibrium",
    "serialize_network",
    "state_of_dual",
    "system_potentials",
    "temperature_of",
    "validate_conditions",
    "vector_field",
    "wegscheider_check",
]
