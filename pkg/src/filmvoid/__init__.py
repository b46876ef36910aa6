"""filmvoid: a 2-D numerical laboratory for the equilibrium shapes of
epitaxially strained films and material voids.

Sharp and relaxed energies of film/void configurations, one-dimensional
slicing identities, a constrained phase-field approximation minimized by
alternating descent, and the recovery constructions tying the two
descriptions together.
"""

from .elasticity import ElasticDensity, check_growth, eval_f
from .extfield import ExtendedField, dbar
from .geometry import Profile, Segment, VoidSet
from .grid import Grid
from .phasefield import (
    PhaseParams,
    PhaseState,
    alternate_minimize,
    energy_Geps,
    extract_profile,
    gamma_sweep,
    solve_u,
    solve_v,
    volume_projection,
)
from .recovery import RecoveryParams, graph_approx, phasefield_recovery, volume_rescale
from .sharp import (
    FilmConfig,
    VoidConfig,
    energy_F,
    energy_F_relaxed,
    energy_FDir_relaxed,
    energy_G,
    energy_G_relaxed,
    vertical_extension,
)
from .slicing import F_eps_xi, collapse_lowerbound_check, fubini_residual, take_slice
from .surfnorm import SurfaceNorm, dual_norm_residual, phi_dual
from .wells import BRIDGE_WELL, DOUBLE_WELL, compute_cw

__version__ = "0.1.0"
