"""Exception hierarchy.

DataError maps to CLI exit code 2, ComputeError to exit code 3;
plain ValueError (bad arguments / config) maps to exit code 1.
"""


class TcindexError(Exception):
    pass


class DataError(TcindexError):
    """Input data cannot be read or fails schema/consistency checks."""


class ComputeError(TcindexError):
    """Numerical pipeline cannot produce a valid result."""


class StructuralError(ComputeError):
    """Zero row/column sum or other structural defect in a matrix."""


class EmptyNetworkError(ComputeError):
    """Binarization left no edges."""


class DisconnectedNetworkError(ComputeError):
    def __init__(self, message, n_components, component_sizes=None):
        super().__init__(message)
        self.n_components = n_components
        self.component_sizes = component_sizes or []


class DegenerateSpectrumError(ComputeError):
    """Second eigenvalue is not isolated; the complexity axis is undefined."""


class NonConvergenceError(ComputeError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class UndefinedCorrelationError(ComputeError):
    """Correlation requested on a constant vector."""
