"""Backend selection: compiled extension if available, numpy otherwise.

Set SHIFTWARING_BACKEND=c or =py to force a choice; "c" raises if the
extension was not built.  Both backends expose the same four callables and
agree numerically to well below the tolerances used anywhere in the package.
"""

from __future__ import annotations

import os

_requested = os.environ.get("SHIFTWARING_BACKEND", "auto").strip().lower()

if _requested in ("", "auto", "c", "compiled"):
    try:
        from . import _speed as _impl
    except ImportError:
        if _requested in ("c", "compiled"):
            raise ImportError(
                "SHIFTWARING_BACKEND=c requested but the compiled backend "
                "is not available; reinstall with a working C toolchain")
        from . import _purepy as _impl
elif _requested in ("py", "python", "numpy"):
    from . import _purepy as _impl
else:
    raise ImportError(f"unknown SHIFTWARING_BACKEND={_requested!r}")

BACKEND = _impl.BACKEND_NAME
f_point = _impl.f_point
f_grid = _impl.f_grid
enum_count = _impl.enum_count
psi_avg = _impl.psi_avg


def backend_name() -> str:
    return BACKEND


def load_backend(name: str):
    """Load a specific backend module (used by the benchmark and tests)."""
    if name == "c":
        from . import _speed
        return _speed
    if name == "py":
        from . import _purepy
        return _purepy
    raise ValueError(f"unknown backend {name!r}")
