"""Exception hierarchy used across the package."""


class SdncError(Exception):
    """Base class for all package-specific errors."""


class GraphError(SdncError):
    """Invalid graph construction input."""


class EmptyGraphError(GraphError):
    """Graph with zero nodes."""


class InvalidEdgeError(GraphError):
    """Edge endpoint outside 0..n-1."""


class SelfLoopError(GraphError):
    """Edge from a node to itself."""


class DuplicateEdgeError(GraphError):
    """Edge listed more than once (in either orientation)."""


class DisconnectedError(GraphError):
    """Graph is not connected."""


class NotChordalError(SdncError):
    """Input graph failed the perfect-elimination-ordering check."""


class NotBipartiteError(SdncError):
    """Input graph contains an odd cycle."""


class SizeLimitError(SdncError):
    """Instance exceeds a hard size cap of an exponential-time routine."""


class ProtocolViolationError(SdncError):
    """Learner broke the query protocol (reselected node, early stop, ...)."""


class GeneratorError(SdncError):
    """A labeled-instance generator could not satisfy its post-condition."""


class FormatError(SdncError):
    """Malformed on-disk artifact (edge list, labeling, grid matrix, ...)."""


class ConfigError(SdncError):
    """Invalid or incompatible experiment configuration."""
