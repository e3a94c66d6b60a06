"""Generalized k-fractional integral operator and Chebyshev-type inequalities."""
from .functions import parse
from .inequalities import InequalityCase, InequalityReport, check
from .operator import (
    OperatorInstance,
    OperatorParams,
    kernel_F,
    kfrac_integral,
    monomial_image,
    rl_generalized_integral,
)
from .special_functions import gamma, gauss_2f1, pochhammer
from .trials import TrialConfig, run_trials

__all__ = [
    "InequalityCase",
    "InequalityReport",
    "OperatorInstance",
    "OperatorParams",
    "TrialConfig",
    "check",
    "gamma",
    "gauss_2f1",
    "kernel_F",
    "kfrac_integral",
    "monomial_image",
    "parse",
    "pochhammer",
    "rl_generalized_integral",
    "run_trials",
]
