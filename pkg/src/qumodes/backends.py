"""Trajectory-loop backend selection.

The compiled Cython kernel is preferred when present; the pure numpy
fallback implements the identical contract. Both consume the same
per-trajectory bit generators, so a given (plan, seed) produces the same
trajectories up to float rounding on either backend.
"""

from __future__ import annotations

from . import _mc_python

try:
    from . import _mc_kernel
except ImportError:  # pragma: no cover - depends on build environment
    _mc_kernel = None

HAS_COMPILED_KERNEL = _mc_kernel is not None


def available_backends() -> tuple[str, ...]:
    return ("compiled", "python") if HAS_COMPILED_KERNEL else ("python",)


def select_backend(name: str = "auto"):
    """Resolve a backend name to (runner, resolved_name).

    ``auto`` prefers the compiled kernel. Asking for ``compiled`` when the
    extension is not built raises.
    """
    if name == "auto":
        name = "compiled" if HAS_COMPILED_KERNEL else "python"
    if name == "python":
        return _mc_python.run_batches, "python"
    if name == "compiled":
        if not HAS_COMPILED_KERNEL:
            raise ValueError("compiled kernel requested but the extension is not built")
        return _mc_kernel.run_batches, "compiled"
    raise ValueError(f"unknown backend {name!r}; expected auto, compiled, or python")
