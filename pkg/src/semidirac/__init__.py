"""Bound states of perturbed semi-Dirac Hamiltonians: Galerkin solver and analytic bounds."""
from .model import (DiskIndicator, FieldSum, GaussianDecay, Model, Potential, Zero,
                    dispersion, eval_field, spectral_edges, validate_potential)
from .quadrature import QuadControls
from .rbf import RbfBasis, make_basis
from .assembly import BlockSystem, assemble
from .eigensolve import SpectralResult, solve_gap
from .bounds import (BoundsReport, CutoffProfile, cutoff_constants, evaluate_bounds,
                     potential_moments)
from .config import RunConfig, parse_config
from .pipeline import run_sweep, write_outputs

__version__ = "0.1.0"
