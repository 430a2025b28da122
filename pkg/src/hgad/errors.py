"""Exception types raised across the package.

All errors derive from :class:`HgadError` so callers can catch one base
class at API boundaries (the CLI does exactly that).
"""


class HgadError(Exception):
    """Base class for all package errors."""


class EmptyEdge(HgadError):
    """A hyperedge contains no nodes after deduplication."""


class NodeIndexOutOfRange(HgadError):
    """A node index is negative or >= num_nodes."""


class FeatureRowMismatch(HgadError):
    """Feature matrix row count differs from the node count."""


class DimensionMismatch(HgadError):
    """Matrix shapes do not chain for the requested operation."""


class TraceMismatch(HgadError):
    """A backward pass was given a trace produced by different parameters."""


class EmptyCandidate(HgadError):
    """A candidate hyperedge to score is empty."""


class EmptyEdgeSet(HgadError):
    """An operation requiring at least one hyperedge got none."""


class NonFiniteLoss(HgadError):
    """Training produced a NaN/Inf loss; aborted with diagnostics."""


class ParseError(HgadError):
    """A text input file is malformed.

    Carries the path and 1-based line number of the offending line.
    """

    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{self.path}:{line_no}: {message}")


class MissingLabels(HgadError):
    """Neither an edge-label file nor a node-label file was supplied."""


class TooFewInliers(HgadError):
    """Not enough inlier hyperedges to build the requested folds."""


class SingleClassOnly(HgadError):
    """AUROC needs at least one inlier and one anomaly."""
