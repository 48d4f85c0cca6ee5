"""Arithmetic kernel selection.

The production backend runs on one of two interchangeable kernels: a compiled
Cython/GMP extension and a pure-Python fallback with identical semantics.  The
compiled one is preferred when importable; PMOD_PURE_KERNEL=1 (or any non-empty
value) forces the fallback, and callers may pin a kernel explicitly — the
kernel benchmark instantiates both side by side.
"""

from __future__ import annotations

import os

from ._purekernel import PureKernel

PURE_KERNEL_ENV = "PMOD_PURE_KERNEL"

try:
    from ._fastkernel import FastKernel
except ImportError:  # extension not built; pure fallback still works
    FastKernel = None


def available_kernels() -> dict:
    """Name -> constructor for every kernel usable in this process."""
    kinds = {"pure": PureKernel}
    if FastKernel is not None:
        kinds["compiled"] = FastKernel
    return kinds


def default_kernel_name() -> str:
    if os.environ.get(PURE_KERNEL_ENV):
        return "pure"
    return "compiled" if FastKernel is not None else "pure"


def load_kernel(q: int, p: int, h: int, prefer: str | None = None):
    """Instantiate a kernel for the given curve constants."""
    name = prefer or default_kernel_name()
    kinds = available_kernels()
    if name not in kinds:
        raise ValueError(
            "kernel %r unavailable (have: %s)" % (name, ", ".join(sorted(kinds)))
        )
    return kinds[name](q, p, h)
