"""Scattering of scalar and electromagnetic plane waves on 2D lattices of
point scatterers / dipoles: accelerated lattice sums, Bloch-reduced
reflection coefficients, and the continuum-sheet limits."""

from .backends import backend_name
from .core import (
    Frequency,
    LatticeConfig,
    Mode,
    ModeKind,
    WaveVector,
    make_incident_wave,
)
from .errors import (
    ConvergenceError,
    DiracLatticeError,
    PoleError,
    SingularSystemError,
    ValidationError,
    WoodAnomalyError,
)
from .lattice_sums import (
    EwaldParams,
    LatticeSumMethod,
    LatticeSumResult,
    heat_kernel,
    j_sum,
    j_sum_direct,
    phi_lattice_regularized,
)
from .limits import (
    LimitOutcome,
    LimitPath,
    LimitReport,
    h_eps,
    order_of_limits_report,
    phi_tilde_a0,
    r_continuum,
    scaling_probe,
)
from .multi_center import (
    AmplitudeSolution,
    MultiCenterSystem,
    assemble,
    detect_intrinsic_modes,
    field_at,
    solve,
)
from .plane_lattice import (
    BlochIndex,
    DiffractionOrder,
    f0_bloch,
    field_planewave,
    field_spherical,
    flux_balance,
    gamma,
    phi_tilde,
    propagating_orders,
    reflection,
)
from .single_center import (
    BoundState,
    ExtensionParameter,
    RenormScheme,
    bound_state,
    phi0,
    renormalize_coupling,
    sae_boundary_params,
    scattering_amplitude_sae,
    scattering_length,
    single_center_field,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
