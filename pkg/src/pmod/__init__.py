"""Privilege-based multilevel data sharing.

A ciphertext-policy ABE toolkit for hierarchical organizations: data is split
into sensitivity-ordered parts, each part is sealed with AES-256-GCM under a
per-level key, level keys form a one-way hash chain (higher levels derive
lower-level keys, never the reverse), and only the chain roots are
ABE-encapsulated under per-level access policies over a bilinear group.
"""

__version__ = "0.1.0"

from .errors import (
    PmodError,
    BackendMismatch,
    PolicySyntaxError,
    PolicyNotSatisfied,
    NoLevelSatisfied,
    IntegrityError,
    SerializationError,
)

__all__ = [
    "__version__",
    "PmodError",
    "BackendMismatch",
    "PolicySyntaxError",
    "PolicyNotSatisfied",
    "NoLevelSatisfied",
    "IntegrityError",
    "SerializationError",
]
