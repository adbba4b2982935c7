"""Exception types shared across the package."""


class VnembedError(Exception):
    """Base class for all package errors."""


class InstanceError(VnembedError):
    """Malformed instance document or structurally invalid graph."""


class OrientationError(VnembedError):
    """Invalid extraction order or orientation request."""


class OrderingError(VnembedError):
    """Invalid label set ordering or label assignment."""


class LpBuildError(VnembedError):
    """Program construction failed (e.g. request type absent from substrate)."""


class SolverError(VnembedError):
    """Solver invoked on a malformed program."""


class DecompositionError(VnembedError):
    """Decomposition invariant breached (no admissible variable or path)."""


class MappingConflictError(DecompositionError):
    """A node received two different substrate mappings during extraction.

    Raised by naive path-following on non-decomposable assignments; carries
    the offending request node and both substrate nodes.
    """

    def __init__(self, node: str, existing: str, new: str):
        self.node = node
        self.existing = existing
        self.new = new
        super().__init__(
            f"inconsistent mapping of node {node!r}: {existing!r} vs {new!r}"
        )


class BudgetExceededError(VnembedError):
    """Brute-force enumeration would exceed the configured budget."""


class RegionError(VnembedError):
    """Invalid root region structure (e.g. edges inside a boundary set)."""
