"""Connection/secrecy outage and secrecy transmission capacity of noisy Poisson networks."""

from .analytic import (
    RatePair,
    StcResult,
    cop,
    cop_fixed,
    cop_nrt,
    invert_cop,
    invert_sop,
    sop_lower,
    sop_upper,
    stc,
)
from .model import (
    ConstantNoise,
    CustomNoise,
    ExponentialNoise,
    FixedDistance,
    NearestReceiver,
    NetworkParams,
    OutageConstraints,
    laplace_at,
)
from .simulator import McEstimate, run_cop_trials, run_sop_trials

__version__ = "0.1.0"
