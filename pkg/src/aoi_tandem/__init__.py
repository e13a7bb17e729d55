"""Age-of-information analysis for tandem queues with server breakdowns:
closed-form transforms, a truncated-chain oracle, a discrete-event
simulator, and a reproducible experiment harness."""

__version__ = "0.1.0"

from .dist import (  # noqa: F401
    DistributionSpec,
    deterministic,
    erlang,
    exponential,
    hyper2,
    unit_mean_hyper2,
)
from .mg1 import Mg1TandemParams, StabilityError  # noqa: F401
from .mm1 import Mm1TandemParams  # noqa: F401
