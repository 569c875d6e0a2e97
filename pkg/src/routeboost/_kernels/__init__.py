"""Split-scan kernel selection.

Prefers the compiled extension and falls back to the pure-Python twin
when the extension is unavailable. Set ``ROUTEBOOST_PURE_PYTHON=1`` to
force the fallback (used by the kernel benchmark and parity tests).
Both backends are bit-for-bit equivalent; only speed differs.
"""

import os

from ._split_py import scan_split as scan_split_py

if os.environ.get("ROUTEBOOST_PURE_PYTHON"):
    scan_split = scan_split_py
    BACKEND = "python"
else:
    try:
        from ._split_cy import scan_split as scan_split  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on build environment
        scan_split = scan_split_py
        BACKEND = "python"

__all__ = ["scan_split", "scan_split_py", "BACKEND"]
