"""Rough multilinear fractional operators: evaluation, norms, weights and verification."""

__version__ = "0.1.0"

from .exceptions import (
    BudgetExceeded,
    ConfigError,
    DomainError,
    HypothesisViolation,
    NonFiniteWeight,
    NonIntegrable,
    NonIntegrableOnCube,
    NoFeasibleEpsilon,
    RoughFracError,
)
from .exponents import ExponentConfig, ProofExponents, conjugate, derive_exponents, proof_exponents
from .functions import SampledFunction, from_callable, parse_generator, read_sfn, write_sfn
from .kernels import KernelSpec, parse_kernel
from .norms import NormSpec, lp_norm, weak_lp_quasinorm, weighted_norm, weighted_weak_quasinorm
from .operators import (
    EvalSettings,
    eval_field,
    eval_I,
    eval_M,
    lemma1_constant,
    lemma1_majorant,
    welland_constant,
    welland_majorant,
)
from .quadrature import ShellScheme, integrate_singular, shell_decomposition
from .weights import (
    CubeFamily,
    WeightSpec,
    ap_constant,
    apq_constant,
    cond7_constant,
    pair_alpha_constant,
    perturb_epsilon_search,
    remark2_implication_check,
    thm6_condition_constant,
)
from .verify import TestBattery, VerificationReport, run_suite

# scikit-learn is slow to import, so the estimator wrappers load on first use.
_ESTIMATORS = ("FractionalIntegral", "FractionalMaximal", "MuckenhouptEstimator")


def __getattr__(name):
    if name in _ESTIMATORS:
        from . import estimators

        return getattr(estimators, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    name for name in dir()
    if not name.startswith("_") and name not in {
        "exceptions", "exponents", "functions", "kernels", "norms", "operators", "quadrature",
        "weights", "verify", "annotations",
    }
] + list(_ESTIMATORS)
