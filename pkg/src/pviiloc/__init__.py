"""Location estimation in the Pearson Type VII family.

The package is organized as:

``pvii``
    Distribution functions, quantiles and seeded samplers.
``likelihood``
    Loss, score, certified root enumeration and the global MLE.
``theory``
    Closed-form asymptotic constants and quadrature expectations.
``experiments``
    Reproducible Monte Carlo runners.
``cli``
    Command-line front end.
"""

from .likelihood import MleResult, RootSet, find_roots, loss, mle, score
from .pvii import DistParams, SampleVec, cdf, density, make_rng, quantile, sample
from .theory import TheoryConstants, constants

__version__ = "0.1.0"

__all__ = [
    "DistParams",
    "MleResult",
    "RootSet",
    "SampleVec",
    "TheoryConstants",
    "cdf",
    "constants",
    "density",
    "find_roots",
    "loss",
    "make_rng",
    "mle",
    "quantile",
    "sample",
    "score",
]
