"""Exception taxonomy.

Every error raised on purpose by this package derives from PmodError, so
callers (including the CLI) can distinguish crypto/policy failures from
programming errors.
"""


class PmodError(Exception):
    """Base class for all deliberate failures."""


class BackendMismatch(PmodError):
    """Elements or artifacts from different group contexts were mixed."""


class ParameterError(PmodError):
    """Invalid group/scheme parameters (non-prime order, zero beta, ...)."""


class PolicySyntaxError(PmodError):
    """Policy text failed to parse; carries the offending position."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class PolicyNotSatisfied(PmodError):
    """A private key's attribute set does not satisfy the access tree."""


class NoLevelSatisfied(PmodError):
    """No level of a bundle is decryptable with the given key."""


class IntegrityError(PmodError):
    """Authentication or digest verification failed."""


class SerializationError(PmodError):
    """Malformed, truncated, or version-incompatible serialized bytes."""


class PartitionError(PmodError):
    """Invalid partition plan or parts inconsistent with the plan."""


class ServiceError(PmodError):
    """Issuer/store service failure (transport, auth, or server-side)."""

    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status
