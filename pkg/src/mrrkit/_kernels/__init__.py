"""Hot-loop kernels with backend selection at import.

The compiled Cython core is preferred when importable; the pure-Python
fallback is used otherwise. Set MRRKIT_BACKEND=python to force the fallback
or MRRKIT_BACKEND=c to require the compiled core (ImportError if missing).
Both backends are bit-identical; benchmarks/bench_paths.py compares their
throughput and asserts equality.
"""

import os

from . import _pysim
from ._rng import (  # noqa: F401  (re-exported)
    MAX_SLOTS,
    MAX_STREAMS,
    PURPOSE_PATH,
    PURPOSE_SURVEY_PICK,
    PURPOSE_SURVEY_TIME,
    derive_key,
    derive_seed,
    uniforms,
)

_requested = os.environ.get("MRRKIT_BACKEND", "auto").lower()
if _requested in ("auto", "c"):
    try:
        from . import _core as _impl
    except ImportError:
        if _requested == "c":
            raise ImportError(
                "MRRKIT_BACKEND=c requested but the compiled kernel is not built"
            ) from None
        _impl = _pysim
elif _requested == "python":
    _impl = _pysim
else:
    raise ValueError(f"unrecognized MRRKIT_BACKEND value {_requested!r}")

BACKEND = _impl.BACKEND
event_ages = _impl.event_ages
illness_death_paths = _impl.illness_death_paths
