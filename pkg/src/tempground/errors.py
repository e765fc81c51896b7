"""Exception types shared across the package."""


class TempGroundError(Exception):
    """Base class for all package errors."""


# --- embedding store ---

class StoreError(TempGroundError):
    """Base class for embedding-store errors."""


class MissingManifest(StoreError):
    """manifest.json is absent or unreadable for the requested video."""


class UnknownSchemaVersion(StoreError):
    """Manifest declares a schema version this loader does not understand."""


class ShapeMismatch(StoreError):
    """Binary byte length disagrees with the manifest's N x dim x 4."""


class ZeroVectorRow(StoreError):
    """An embedding row is all zeros; cosine is undefined on it."""


class IoFailure(StoreError):
    """Filesystem read/write failed while persisting or loading a store."""


# --- scoring ---

class ZeroVector(TempGroundError):
    """Cosine similarity requested against a zero vector."""


class DegenerateShift(TempGroundError):
    """Mean-shifted vector collapsed to zero; inputs are pathological."""


class BackendMissing(TempGroundError):
    """A backend required by the query is absent from the video store."""


# --- clients ---

class ClientUnavailable(TempGroundError):
    """A remote or replay client could not produce a result."""


class EmptyDecomposition(TempGroundError):
    """The transform client returned no iconic actions for an event."""


class EmbeddingFailure(TempGroundError):
    """Text embedding lookup or remote embedding call failed."""


# --- evaluation harness ---

class VideoMismatch(TempGroundError):
    """Temporal IoU requested between annotations of different videos."""


class NoValidLines(TempGroundError):
    """Annotation file contained no parseable lines."""


class NoEligiblePairs(TempGroundError):
    """No event pair passed the IoU / distinct-start filters."""


class MissingResponse(TempGroundError):
    """An evaluation item has no associated response."""


class UnknownDuration(TempGroundError):
    """No duration is known for a video needed by the random baseline."""
