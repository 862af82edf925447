"""Exception hierarchy shared by every roughfrac module."""


class RoughFracError(Exception):
    """Base class for all library errors."""


class HypothesisViolation(RoughFracError, ValueError):
    """A theorem or lemma hypothesis is not met by the supplied exponents.

    The message always names the violated condition, e.g. ``"0 < alpha < mn"``.
    """

    def __init__(self, hypothesis, detail=""):
        self.hypothesis = hypothesis
        self.detail = detail
        msg = f"hypothesis violated: {hypothesis}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DomainError(RoughFracError, ValueError):
    """Evaluation requested at a point outside the operation's domain."""


class NonIntegrable(RoughFracError):
    """A Monte Carlo sphere-norm estimate does not stabilize under doubling."""

    def __init__(self, msg, estimate=None, history=()):
        super().__init__(msg)
        self.estimate = estimate
        self.history = tuple(history)


class BudgetExceeded(RoughFracError):
    """Refinement hit the evaluation cap before reaching the tolerance."""

    def __init__(self, msg, value=None, err_est=None):
        super().__init__(msg)
        self.value = value
        self.err_est = err_est


class NonFiniteWeight(RoughFracError, ValueError):
    """A weight is non-finite or non-positive on a cell where it is needed."""


class NonIntegrableOnCube(RoughFracError):
    """A per-cube weight average fails to stabilize under quadrature refinement."""

    def __init__(self, msg, cube=None):
        super().__init__(msg)
        self.cube = cube


class NoFeasibleEpsilon(RoughFracError):
    """No grid perturbation passed both class checks (inconclusive, not a refutation)."""

    def __init__(self, msg, reports=()):
        super().__init__(msg)
        self.reports = list(reports)


class ConfigError(RoughFracError, ValueError):
    """A run configuration failed to parse or validate."""
