"""Numerical toolkit for holomorphic supercurves and sigma-model actions on a torus."""
from .action import (GrassmannAction, action_A1, action_A2, compare_A1_A2, el_residuals,
                     harmonic_action, lagrangian_decompose, super_lagrangian,
                     verify_classical_identity, verify_super_identity)
from .config import RunConfig
from .fields import (MapField, SuperField, D_phi, D_phi_alt, dbar_J, dirac, holo_local_residuals,
                     induced_psi, partial_J, supercurve_residuals, tension)
from .grassmann import GrassmannElement, gr_bilinear_extend, gr_extract, gr_integral, gr_mul
from .target import FlatTorus, PerturbedR4, RoundSphereChart, TargetChart
from .worldsheet import ConformalFactor, TorusGrid, Worldsheet

__version__ = "0.1.0"
