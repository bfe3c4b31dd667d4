"""Exact and second-order asymptotic reduced dynamics of an (N+1)-level system
coupled to bosonic reservoirs in the rotating wave approximation."""

from ._backend import BACKEND
from .asymptotics import (AsymptoticData, GkslData, asymptotic_data, asymptotic_density,
                          compute_L, compute_L_explicit, compute_r, gksl_decompose, liouvillian,
                          markov_density, renormalize)
from .bath_kernel import (BathKernel, KernelTerm, divided_difference_G_tilde, eval_G,
                          eval_G_tilde)
from .correlations import (exact_three_time, exact_two_time, markov_three_time, markov_two_time,
                           renormalized_two_time)
from .exact_dynamics import (DensityBlocks, Propagator, SystemModel, divisible_map,
                             evolve_density, rescaled_propagator, rescaled_propagator_series,
                             solve_propagator, solve_rescaled_equation, solve_via_auxiliary_odes)
from .matrix_calculus import (SpectralDecomposition, dissipativity_margin, feynman_ordered_apply,
                              matrix_exp, matrix_function, sandwich_divided_difference,
                              spectral_decompose)

__version__ = "0.1.0"
