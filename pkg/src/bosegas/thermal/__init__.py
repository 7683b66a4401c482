"""Thermal Gaussian loop fields: sampling, Weyl functionals, mixing, perturbations."""

from .fields import (
    FieldGrid,
    FieldSample,
    ThermalFieldParams,
    char_functional,
    covariance,
    ergodicity_diagnostic,
    loop_kernel,
    pair_field,
    sample_field,
    sample_fields,
    weyl_expectation,
)
from .mixing import (
    PureStatePoint,
    mixing_convergence_diagnostic,
    mixing_decomposition_check,
    mixing_nodes,
    renormalized_mixing,
)
from .perturb import (
    PolynomialPerturbation,
    mollify,
    perturbation_action,
    reweighted_state,
)

__all__ = [
    "FieldGrid",
    "FieldSample",
    "ThermalFieldParams",
    "char_functional",
    "covariance",
    "ergodicity_diagnostic",
    "loop_kernel",
    "pair_field",
    "sample_field",
    "sample_fields",
    "weyl_expectation",
    "PureStatePoint",
    "mixing_convergence_diagnostic",
    "mixing_decomposition_check",
    "mixing_nodes",
    "renormalized_mixing",
    "PolynomialPerturbation",
    "mollify",
    "perturbation_action",
    "reweighted_state",
]
