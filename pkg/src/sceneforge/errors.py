"""Exception types shared across the toolchain."""


class SceneForgeError(Exception):
    """Base class for all toolchain errors."""


class GeometryError(SceneForgeError):
    """Invalid or unusable geometry (empty mesh, bad indices, ...)."""


class DegenerateGeometryError(GeometryError):
    """Geometry has no usable extent (all vertices identical, zero area, ...)."""


class MeshParseError(SceneForgeError):
    """A mesh file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f" [{path}"
            if line is not None:
                where += f":{line}"
            where += "]"
        super().__init__(message + where)


class ProviderError(SceneForgeError):
    """Base class for external model provider failures."""


class ProviderTimeout(ProviderError):
    """The provider did not answer within the configured timeout (retriable)."""


class ProviderProtocolError(ProviderError):
    """The provider answered, but not in the expected wire format."""


class EmptyRegionError(SceneForgeError):
    """A prompt selected no pixels (e.g. a point on background)."""


class DatasetError(SceneForgeError):
    """Dataset build or validation failure."""
