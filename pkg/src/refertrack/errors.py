"""Exception hierarchy shared across the toolkit.

Everything data-related derives from ``DataError`` so callers (CLI, HTTP
service) can map whole families of failures to exit codes / status codes
without enumerating concrete types.
"""


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


class DataError(ToolkitError, ValueError):
    """A problem with user-supplied data (files, requests, arguments)."""


class SchemaError(DataError):
    """File or payload does not match the expected schema/format."""


class ValidationError(DataError):
    """Structurally well-formed data violates a documented invariant."""


class ClickRejected(ValidationError):
    """A two-click propagation request cannot be applied."""


class RevisionConflict(ToolkitError):
    """Optimistic-concurrency revision check failed (stale writer)."""
