"""Traveling waves bifurcating from a plateau-regularized Poiseuille flow in a channel.

Modules: profile (background flow), greens (Dirichlet Green's functions and
channel Poisson solves), ode (Frobenius mode solutions), kernel (dispersion
relation and kernel element), spectra (one-dimensionality checks), wave
(field assembly and distance to Poiseuille), cli.
"""
from .kernel import KernelMode, assemble_kernel_mode, solve_mu1, solve_mu_tilde
from .profile import ShearProfile, make_profile

__all__ = ["KernelMode", "ShearProfile", "assemble_kernel_mode", "make_profile", "solve_mu1", "solve_mu_tilde"]
__version__ = "0.1.0"
