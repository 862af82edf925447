"""scikit-learn style wrappers.

``fit`` takes the input functions (or the weight) and ``transform`` maps
evaluation points to operator values. Parameters work with ``get_params``,
``set_params`` and ``clone``. There is no ``fit_transform`` because fit
and transform take different kinds of input.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exponents import derive_exponents
from .kernels import KernelSpec, parse_kernel
from .operators import EvalSettings, point_profile
from .validation import check_functions, check_points
from .weights import CubeFamily, WeightSpec, ap_constant, apq_constant


class _OperatorBase(BaseEstimator):
    def __init__(self, alpha=0.5, m=1, n=1, kernel="constant:1", s=None, p=None,
                 quad_tol=1e-3, rho=4, seed=0):
        self.alpha = alpha
        self.m = m
        self.n = n
        self.kernel = kernel
        self.s = s
        self.p = p
        self.quad_tol = quad_tol
        self.rho = rho
        self.seed = seed

    def _kernel(self):
        if isinstance(self.kernel, KernelSpec):
            return self.kernel
        return parse_kernel(self.kernel, self.m, self.n, self.s)

    def fit(self, X, y=None):
        """Store the input functions ``X`` (a sequence of ``m`` sampled functions)."""
        kernel = self._kernel()
        p = self.p
        if p is None:
            s_prime = 1.0 if np.isinf(kernel.s) else kernel.s / (kernel.s - 1.0)
            p = 0.5 * (s_prime + self.m * self.n / self.alpha)
        p_in = tuple(np.broadcast_to(np.asarray(p, dtype=float), (self.m,)))
        self.config_ = derive_exponents(self.m, self.n, self.alpha, kernel.s, p_in)
        self.kernel_ = kernel
        self.functions_ = check_functions(X, self.m, self.n)
        self.settings_ = EvalSettings(quad_tol=self.quad_tol, rho=self.rho, seed=self.seed)
        return self

    def _profiles(self, X):
        check_is_fitted(self, "functions_")
        pts = check_points(X, self.n)
        a = float(self.alpha)
        return [point_profile(self.functions_, self.kernel_, a, x, self.settings_, (a,)) for x in pts]


class FractionalIntegral(_OperatorBase):
    """Rough multilinear fractional integral evaluated at points."""

    def transform(self, X):
        return np.array([p.I for p in self._profiles(X)])


class FractionalMaximal(_OperatorBase):
    """Rough multilinear fractional maximal function evaluated at points."""

    def transform(self, X):
        a = float(self.alpha)
        return np.array([p.M[a] for p in self._profiles(X)])


class MuckenhouptEstimator(BaseEstimator):
    """Estimate the A_p (``q=None``) or A_{p,q} constant of a weight.

    After ``fit(w)`` the estimate is in ``constant_`` and the full
    :class:`~roughfrac.weights.ClassReport` in ``report_``.
    """

    def __init__(self, p=2.0, q=None, family=None, quad_tol=1e-3):
        self.p = p
        self.q = q
        self.family = family
        self.quad_tol = quad_tol

    def fit(self, X, y=None):
        w = X if isinstance(X, WeightSpec) else WeightSpec.parse(X)
        fam = self.family or CubeFamily(lower=(-1.0,) * w.dim)
        if self.q is None:
            rep = ap_constant(w, self.p, fam, self.quad_tol)
        else:
            rep = apq_constant(w, self.p, self.q, fam, self.quad_tol)
        self.report_ = rep
        self.constant_ = rep.sup_estimate
        self.in_class_ = rep.finite
        return self
