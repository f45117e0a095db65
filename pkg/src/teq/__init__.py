"""Time-energy cost of implementing unitaries and quantum channels.

The measure of a unitary is a weighted sum of its sorted absolute eigenangles.
This package computes it for unitaries, solves the single-vector problem in
closed form, and brackets the least measure over all dilations of a channel
between a lower and an upper bound.
"""

from .bounds import (
    BoundReport,
    OptimizerConfig,
    channel_bounds,
    construct_extension,
    exact_class_c,
    lower_bound,
    upper_bound,
)
from .channels import KrausChannel, depolarizing_quantum, noisy_classical, validate
from .measure import MuWeights, max_norm, mu_norm, sum_norm
from .single_vector import f_max, f_sum_lower, f_sum_upper

__all__ = [
    "BoundReport",
    "KrausChannel",
    "MuWeights",
    "OptimizerConfig",
    "channel_bounds",
    "construct_extension",
    "depolarizing_quantum",
    "exact_class_c",
    "f_max",
    "f_sum_lower",
    "f_sum_upper",
    "lower_bound",
    "max_norm",
    "mu_norm",
    "noisy_classical",
    "sum_norm",
    "upper_bound",
    "validate",
]
