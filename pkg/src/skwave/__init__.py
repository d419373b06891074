"""Numerical laboratory for the radial Adkins-Nappi and wave-map equations."""

from .data import from_family, pulse, soliton_data, soliton_perturbed, stereographic
from .diagnostics import (
    DiagnosticSeries, ball_energy, bulk_I_integral, concentration_series, cone_energy,
    cone_weighted_energy, equiv_residual, flux, flux_identity_residual, gh_bounds_report,
    multiplier_identity_residual, sup_norm_series, topological_charge, weighted_local_energy,
)
from .evolve import (
    EvolveReport, FieldState, Singularity, SpacetimeRecord, Thresholds, evolve, rhs,
    spatial_gradient, step_rk4,
)
from .exact import Manufactured, shatah_local_energy, shatah_state, shatah_u
from .grid import ConeRegion, GridSpec, RegionKind, make_grid, region_contains
from .model import (
    ENERGY, NULL_FULL, NULL_HALF, PRESETS, SCALING, ModelKind, MultiplierTriple,
    energy_density, multiplier_bulk_I, nonlinearity, positivity_term,
)
from .soliton import InvalidBracket, SolitonProfile, find_soliton, shoot

__version__ = "0.1.0"
