"""Hanle lineshapes from the optical Bloch equations of one F_g -> F_e
Zeeman manifold driven by polarized light in a longitudinal magnetic field.

Units: the total excited decay rate Gamma = 1 and hbar = 1; the magnetic
field is the dimensionless Larmor parameter b = mu_B B / (hbar Gamma).
"""

from .analytic import (
    ExcitedPopulations,
    GroundState5,
    PumpParams,
    excited_populations,
    hwhm,
    light_shift,
    lineshape,
    pumping_rate,
    rate_rhs,
    rate_rhs_reduced,
    steady_state_ground,
)
from .angular import (
    AngularMomentum,
    DomainError,
    clebsch_gordan,
    wigner_3j,
    wigner_6j,
    wigner_small_d,
)
from .config import (
    ConfigError,
    ScenarioConfig,
    available_presets,
    load_preset_config,
    parse_config,
    run_scenario,
    write_csv,
)
from .obe import (
    DegenerateSteadyStateError,
    DensityMatrix,
    Liouvillian,
    OpenSystemError,
    SolverError,
    StiffIntegrationError,
    Trajectory,
    build_liouvillian,
    evolve,
    excited_projection_row,
    integrated_excited_population,
    integrated_functionals,
    rotate_basis,
    steady_state,
)
from .observables import (
    FeatureStats,
    LineshapeScan,
    ResolutionError,
    contrast,
    extract_hwhm,
    fluorescence,
    narrow_feature,
    scan_lineshape,
    susceptibility_im,
)
from .system import (
    FieldConfig,
    LevelSpec,
    Polarization,
    TransitionSystem,
    branching_ratio,
    build_system,
    dipole_coupling,
    drive_matrix,
    get_preset,
    lande_g_factor,
    preset_names,
    rabi_for_saturation,
    rabi_from_intensity,
    saturation_intensity,
    saturation_parameter,
    zeeman_shift,
)

__version__ = "0.1.0"
