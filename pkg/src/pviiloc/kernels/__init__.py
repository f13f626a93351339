"""Hot loops of the estimator, compiled with numba when available.

Set ``PVIILOC_PURE_NUMPY=1`` before import to force the numpy implementation
(useful for debugging and for environments without numba).  ``BACKEND``
names the active implementation.
"""

import os

_FLAG = "PVIILOC_PURE_NUMPY"

if os.environ.get(_FLAG, "").strip() not in ("", "0"):
    from . import _numpy as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _numba as _impl

        BACKEND = "numba"
    except ImportError:  # pragma: no cover
        from . import _numpy as _impl

        BACKEND = "numpy"

STATUS_OK = _impl.STATUS_OK
STATUS_RESOLUTION = _impl.STATUS_RESOLUTION
STATUS_ENDPOINT = _impl.STATUS_ENDPOINT
STATUS_STACK = _impl.STATUS_STACK

loss = _impl.loss
score = _impl.score
score_slope = _impl.score_slope
score_curvature = _impl.score_curvature
find_roots = _impl.find_roots
select_global = _impl.select_global
local_mle = _impl.local_mle
global_mle_batch = _impl.global_mle_batch
local_mle_batch = _impl.local_mle_batch

__all__ = [
    "BACKEND",
    "STATUS_OK",
    "STATUS_RESOLUTION",
    "STATUS_ENDPOINT",
    "STATUS_STACK",
    "loss",
    "score",
    "score_slope",
    "score_curvature",
    "find_roots",
    "select_global",
    "local_mle",
    "global_mle_batch",
    "local_mle_batch",
]
