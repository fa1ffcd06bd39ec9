"""Secondary-channel design for two-channel linear Gaussian measurement systems."""

from .model import (
    DerivedQuantities,
    TwoChannelSystem,
    derive,
    gen_ar_system,
    gen_example1,
    gen_random_system,
    gen_scalar_system,
    validate_system,
)
from .gain import (
    ChannelMatrix,
    fd_gradient,
    gradient,
    information_gain,
    information_gain_snr_form,
    upper_bound,
)
from .waterfill import WaterfillDesign, analytic_design, power_at_mu, solve_mu
from .optimize import OptimConfig, OptimTrace, run, run_multistart
from .dimension import DimensionSweep, dimension_sweep, reduce_rank

__version__ = "0.1.0"
