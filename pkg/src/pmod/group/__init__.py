"""Bilinear group backends.

create_context() is the front door.  Contexts are cached by their serialized
descriptor so artifacts deserialized independently still share one context
instance (element operations require identical contexts); pass fresh=True for
an isolated instance, e.g. to read operation counters without interference.
"""

from __future__ import annotations

import threading

from ..errors import SerializationError
from .base import G0Element, G1Element, OpCounters, PairingContext
from .kernel import available_kernels, default_kernel_name
from .params import CURVES, DEFAULT_CURVE
from .supersingular import SupersingularContext
from .transparent import TransparentContext

BACKEND_NAMES = ("transparent",) + tuple(sorted(CURVES))

_cache: dict = {}
_cache_lock = threading.Lock()


def _build(backend: str, p: int | None, kernel: str | None) -> PairingContext:
    if backend == "transparent":
        return TransparentContext(p if p is not None else 101)
    if p is not None:
        raise ValueError("a custom order is only meaningful for the transparent backend")
    return SupersingularContext(backend, kernel=kernel)


def create_context(
    backend: str = DEFAULT_CURVE,
    *,
    p: int | None = None,
    kernel: str | None = None,
    fresh: bool = False,
) -> PairingContext:
    """Build (or fetch the shared) context for a named backend."""
    if backend == "transparent" and p is None:
        p = 101
    if fresh:
        return _build(backend, p, kernel)
    key = (backend, p, kernel or default_kernel_name())
    with _cache_lock:
        ctx = _cache.get(key)
        if ctx is None:
            ctx = _build(backend, p, kernel)
            _cache[key] = ctx
        return ctx


def context_from_descriptor(desc: bytes, ctx: PairingContext | None = None) -> PairingContext:
    """Resolve a serialized group descriptor, preferring a caller-supplied
    context when it matches (so in-memory artifacts interoperate)."""
    if ctx is not None:
        if ctx.descriptor() != desc:
            raise SerializationError(
                "artifact was produced under %r, not the supplied %r backend"
                % (_describe(desc), ctx.backend_id)
            )
        return ctx
    if not desc:
        raise SerializationError("empty group descriptor")
    tag = desc[0]
    if tag == TransparentContext.tag:
        if len(desc) != 33:
            raise SerializationError("malformed transparent descriptor")
        return create_context("transparent", p=int.from_bytes(desc[1:], "big"))
    name = desc[1:].decode("ascii", "replace")
    if name not in CURVES:
        raise SerializationError("unknown curve %r in descriptor" % (name,))
    ctx = create_context(name)
    if ctx.descriptor() != desc:
        raise SerializationError("descriptor does not match curve %r" % (name,))
    return ctx


def _describe(desc: bytes) -> str:
    if desc and desc[0] == TransparentContext.tag:
        return "transparent"
    return desc[1:].decode("ascii", "replace") if len(desc) > 1 else "?"


__all__ = [
    "BACKEND_NAMES",
    "G0Element",
    "G1Element",
    "OpCounters",
    "PairingContext",
    "SupersingularContext",
    "TransparentContext",
    "available_kernels",
    "create_context",
    "context_from_descriptor",
    "default_kernel_name",
]
