"""1D cubic NLSE bright-soliton evolution with perturbed nonlinearity.

Split-step Crank-Nicolson integrator for i psi_t = -psi_xx + g(x,t)|psi|^2 psi
with g(x,t) = G (1 + sigma(x,t)) and sigma generated by a logistic-map chain,
a seeded uniform stream, or a static incommensurate two-cosine profile.
"""

from .diagnostics import (
    DiagnosticsRecord,
    RunSummary,
    centroid,
    discrete_energy,
    height_at,
    peak,
    record,
    summarize,
)
from .disorder import (
    KINDS,
    PerturbationSpec,
    SigmaSchedule,
    build_schedule,
    chaotic_profile,
    logistic_next,
    nonlinearity,
    quasiperiodic_profile,
    random_profile,
    sigma_at,
)
from .errors import ConfigurationError, ContractViolationError, SimulationDivergedError
from .experiment import (
    PRESETS,
    OutputConfig,
    RunConfig,
    SweepResult,
    SweepRow,
    fingerprint,
    load_config,
    parse_config,
    run,
    sweep,
    write_sigma,
    write_snapshots,
    write_summary,
    write_timeseries,
)
from .field import (
    SOLITON_PHASE_RATE,
    ErrorReport,
    Grid1D,
    WaveField,
    comparative_error,
    density,
    make_grid,
    physical_norm,
    power,
    soliton_initial,
)
from .propagator import (
    SolverParams,
    StepWorkspace,
    cn_linear_step,
    evolve,
    phase_step,
    rk4_evolve,
    rk4_reference_step,
    strang_step,
)

__all__ = [
    "ConfigurationError",
    "ContractViolationError",
    "DiagnosticsRecord",
    "ErrorReport",
    "Grid1D",
    "KINDS",
    "OutputConfig",
    "PRESETS",
    "PerturbationSpec",
    "RunConfig",
    "RunSummary",
    "SOLITON_PHASE_RATE",
    "SigmaSchedule",
    "SimulationDivergedError",
    "SolverParams",
    "StepWorkspace",
    "SweepResult",
    "SweepRow",
    "WaveField",
    "build_schedule",
    "centroid",
    "chaotic_profile",
    "cn_linear_step",
    "comparative_error",
    "density",
    "discrete_energy",
    "evolve",
    "fingerprint",
    "height_at",
    "load_config",
    "logistic_next",
    "make_grid",
    "nonlinearity",
    "parse_config",
    "peak",
    "phase_step",
    "physical_norm",
    "power",
    "quasiperiodic_profile",
    "random_profile",
    "record",
    "rk4_evolve",
    "rk4_reference_step",
    "run",
    "sigma_at",
    "soliton_initial",
    "strang_step",
    "summarize",
    "sweep",
    "write_sigma",
    "write_snapshots",
    "write_summary",
    "write_timeseries",
]
