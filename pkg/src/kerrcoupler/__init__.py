"""Higher-order squeezing in the codirectional Kerr nonlinear coupler.

Two independent engines compute the same normally ordered moments: a
closed-form evaluator (:mod:`kerrcoupler.analytic`) and a brute-force
truncated Fock-space propagator (:mod:`kerrcoupler.fock`). Both plug into
:mod:`kerrcoupler.squeezing` through the moment-source interface.
"""

from .analytic import (
    AnalyticMomentSource,
    Trajectory,
    classical_trajectory,
    kerr_phase_base,
    mean_photon,
    normally_ordered_moment,
)
from .core import (
    PAPER_EXACT,
    UNITARY,
    CouplerParams,
    InitialAmplitudes,
    MomentIndex,
    OrderCapError,
    SqueezingSample,
    epsilon,
    lambda_rate,
)
from .fock import CutoffError, FockMomentSource, oracle_moment_source
from .squeezing import Difference, SingleModeNth, Sum, squeezing_factors

__all__ = [
    "AnalyticMomentSource", "CouplerParams", "CutoffError", "Difference",
    "FockMomentSource", "InitialAmplitudes", "MomentIndex", "OrderCapError",
    "PAPER_EXACT", "SingleModeNth", "SqueezingSample", "Sum", "Trajectory", "UNITARY",
    "classical_trajectory", "epsilon", "kerr_phase_base", "lambda_rate", "mean_photon",
    "normally_ordered_moment", "oracle_moment_source", "squeezing_factors",
]
