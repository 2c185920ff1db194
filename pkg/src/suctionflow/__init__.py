"""Semi-analytic solver for steady axisymmetric flow past a cylinder with wall suction."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    ConvergenceError,
    DivergenceError,
    GridMismatchError,
    OutOfGridError,
    PreconditionError,
    SuctionFlowError,
)
from .spaces import AxiVectorField, RadialGrid, RadialProfile, SpectralMeasure, ZetaGrid  # noqa: E402
from .solver import FlowConfig, picard_solve, solve_lp, solve_lp_modes  # noqa: E402
