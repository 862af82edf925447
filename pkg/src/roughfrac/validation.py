"""Input checks shared by the estimator front-end."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .exceptions import HypothesisViolation
from .functions import SampledFunction


def check_points(X, n):
    """Return evaluation points as a finite float array of shape ``(N, n)``."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and n == 1:
        X = X.reshape(-1, 1)
    X = check_array(X, dtype=float, ensure_2d=True)
    if X.shape[1] != n:
        raise ValueError(f"points must have {n} columns, got {X.shape[1]}")
    return X


def check_functions(functions, m, n):
    """Return a tuple of ``m`` sampled functions on ``R^n``."""
    if isinstance(functions, SampledFunction):
        functions = (functions,)
    functions = tuple(functions)
    if len(functions) != m:
        raise HypothesisViolation("one function per factor", f"got {len(functions)} for m={m}")
    for f in functions:
        if not isinstance(f, SampledFunction):
            raise TypeError("factors must be SampledFunction instances")
        if f.dim != n:
            raise HypothesisViolation("f_i defined on R^n", f"dim={f.dim}, n={n}")
        check_array(f.values.reshape(1, -1), dtype=float)
    return functions
