"""Optimized Schwarz methods for time-harmonic and time-discretized Maxwell problems."""

from osmaxwell.errors import (
    ConfigError,
    ContractError,
    DivergenceError,
    GMRESBreakdown,
    OptimizationError,
    PoleError,
    ResonanceError,
    SchemaError,
)
from osmaxwell.model import (
    CharacteristicDecomposition,
    HarmonicRegime,
    MediumParameters,
    TimeDiscreteRegime,
    characteristic_matrix,
    characteristic_variables,
)
from osmaxwell.symbols import (
    SymbolPoint,
    TransmissionSpec,
    lambda_symbol,
    rho_case,
    rho_classical,
    rho_general,
)

from osmaxwell.discretization import (
    GlobalProblem,
    Sources,
    StaggeredGrid2D,
    assemble_global,
    split_domain,
)
from osmaxwell.optimize import (
    FrequencyBand,
    OptimizationResult,
    asymptotic_parameters,
    band_max_rho,
    build_band,
    minmax_optimize,
)
from osmaxwell.schwarz import RunReport, SchwarzPair, run_gmres, run_stationary

__version__ = "0.1.0"

__all__ = [
    "CharacteristicDecomposition",
    "ConfigError",
    "ContractError",
    "DivergenceError",
    "FrequencyBand",
    "GMRESBreakdown",
    "GlobalProblem",
    "HarmonicRegime",
    "MediumParameters",
    "OptimizationError",
    "OptimizationResult",
    "PoleError",
    "ResonanceError",
    "RunReport",
    "SchemaError",
    "SchwarzPair",
    "Sources",
    "StaggeredGrid2D",
    "SymbolPoint",
    "TimeDiscreteRegime",
    "TransmissionSpec",
    "assemble_global",
    "asymptotic_parameters",
    "band_max_rho",
    "build_band",
    "characteristic_matrix",
    "characteristic_variables",
    "lambda_symbol",
    "minmax_optimize",
    "rho_case",
    "rho_classical",
    "rho_general",
    "run_gmres",
    "run_stationary",
    "split_domain",
]
