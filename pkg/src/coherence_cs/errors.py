"""Exception types shared across the toolkit.

Everything derives from CoherenceCSError so callers can catch the package's
failures with a single except clause. Input-validation problems additionally
derive from ValueError.
"""


class CoherenceCSError(Exception):
    """Base class for all errors raised by this package."""


class ZeroColumn(CoherenceCSError, ValueError):
    """A matrix column has (numerically) zero norm and cannot be normalized."""

    def __init__(self, index, norm):
        self.index = int(index)
        self.norm = float(norm)
        super().__init__(f"column {index} has norm {norm:.3e} (< 1e-14)")


class NotNormalized(CoherenceCSError, ValueError):
    """An operation that assumes unit-norm columns got an unnormalized matrix."""


class TooFewColumns(CoherenceCSError, ValueError):
    """Coherence needs at least two columns."""


class TooFewBlocks(CoherenceCSError, ValueError):
    """Block coherence needs at least two blocks."""


class EnumerationTooLarge(CoherenceCSError, ValueError):
    """Support enumeration would exceed the combinatorial guard."""

    def __init__(self, n, k, count, guard):
        self.count = int(count)
        self.guard = int(guard)
        super().__init__(
            f"C({n},{k}) = {count} supports exceeds the enumeration guard {guard}"
        )


class CapUnreachable(CoherenceCSError):
    """Rejection sampling failed to reach the requested coherence cap."""

    def __init__(self, attempts, best, cap):
        self.attempts = int(attempts)
        self.best = float(best)
        self.cap = float(cap)
        super().__init__(
            f"coherence cap {cap:.6g} not met after {attempts} attempts "
            f"(best achieved: {best:.6g})"
        )


class ConditionViolated(CoherenceCSError, ValueError):
    """A coherence condition required by a bound or factor does not hold."""


class DegenerateProjection(CoherenceCSError):
    """Noise scaling hit a (numerically) zero denominator after retries."""


class NotConverged(CoherenceCSError):
    """Solver hit the iteration limit; carries the best iterate found.

    The partial solve is available as ``exc.result`` (a SolveResult with
    ``converged == False``).
    """

    def __init__(self, result):
        self.result = result
        super().__init__(
            f"not converged after {result.iterations} iterations "
            f"(kkt residual {result.kkt_residual:.3e})"
        )


class ProxFailure(CoherenceCSError):
    """The sort-based prox violated its own fixed-point identity."""


class ConfigError(CoherenceCSError, ValueError):
    """An experiment configuration failed validation."""


class IOFailure(CoherenceCSError):
    """Reading or writing an artifact file failed."""

    def __init__(self, path, cause):
        self.path = str(path)
        super().__init__(f"{path}: {cause}")
