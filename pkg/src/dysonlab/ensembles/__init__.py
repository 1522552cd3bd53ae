"""
Random ensembles: determinantal processes, finite Dyson models, samplers
and the Dyson SDE integrator.
"""

from .dpp import KernelSpec, count_moments, discretize, fredholm_det, gap_probability, generating_function
from .dynamics import (
    CoupledTrace,
    SdeConfig,
    evolve,
    evolve_coupled,
    evolve_coupled_batch,
    evolve_ensemble,
    grad_hamiltonian,
    hamiltonian,
    hessian_min_eigenvalue,
    step,
)
from .models import BULK, EDGE, ModelSpec
from .sampling import sample_airy_window, sample_gue_spectrum, sample_mcmc, sample_mu_k, sample_sine_window

__all__ = [
    "KernelSpec",
    "count_moments",
    "discretize",
    "fredholm_det",
    "gap_probability",
    "generating_function",
    "CoupledTrace",
    "SdeConfig",
    "evolve",
    "evolve_coupled",
    "evolve_coupled_batch",
    "evolve_ensemble",
    "grad_hamiltonian",
    "hamiltonian",
    "hessian_min_eigenvalue",
    "step",
    "BULK",
    "EDGE",
    "ModelSpec",
    "sample_airy_window",
    "sample_gue_spectrum",
    "sample_mcmc",
    "sample_mu_k",
    "sample_sine_window",
]
