"""Backend selection for the competition core.

Prefers the compiled extension when it is built; otherwise uses the
pure-Python twin.  Set LIGHTHOUSE_PURE_PY=1 to force the fallback (the
benchmark and the backend-equality tests do this).
"""

from __future__ import annotations

import os

from lighthouse import _biascore_py

if os.environ.get("LIGHTHOUSE_PURE_PY", "") in ("", "0"):
    try:
        from lighthouse import _biascore as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _biascore_py
else:
    _impl = _biascore_py

BACKEND: str = _impl.BACKEND

MODE_RAW: int = _biascore_py.MODE_RAW
MODE_NO_COLLUSION: int = _biascore_py.MODE_NO_COLLUSION
MODE_FULL_COLLUSION: int = _biascore_py.MODE_FULL_COLLUSION
DEFAULT_DISCARD_CAP: int = _biascore_py.DEFAULT_DISCARD_CAP

bias_trials = _impl.bias_trials
kernel_sha3_256 = _impl.sha3_256
kernel_keccak_256 = _impl.keccak_256
