"""Numba switch for the hot kernels.

Every kernel in this package is written in the subset of Python/numpy that
numba can compile.  When numba is importable and ``COHSMOOTH_DISABLE_NUMBA``
is unset (or falsy) the kernels are compiled with ``numba.njit``; otherwise
the very same functions run as plain numpy code.  The flag is read once at
import time.

Both paths stay reachable in one process through ``kernel.py_func`` which is
what the benchmark and the parity tests use.
"""
import hashlib
import os
from pathlib import Path

DISABLE_FLAG = "COHSMOOTH_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _requested() -> bool:
    value = os.environ.get(DISABLE_FLAG, "").strip().lower()
    return value in ("", "0", "false", "no", "off")


NUMBA_ENABLED = numba is not None and _requested()

_STAMP = "numba-sources.sha256"


def _drop_stale_cache() -> None:
    """Remove cached machine code when any kernel source changed.

    numba checks only the defining file of a cached function, so a caller in
    one module keeps stale inlined callees from another.  Hashing every kernel
    module together closes that gap.
    """
    pkg = Path(__file__).resolve().parent
    cache = pkg / "__pycache__"
    digest = hashlib.sha256()
    for src in sorted(pkg.glob("*.py")):
        text = src.read_bytes()
        if b"@njit" not in text:
            continue
        digest.update(src.name.encode())
        digest.update(text)
    stamp = digest.hexdigest()
    marker = cache / _STAMP
    try:
        if marker.is_file() and marker.read_text().strip() == stamp:
            return
        for pattern in ("*.nbi", "*.nbc"):
            for f in cache.glob(pattern):
                f.unlink()
        cache.mkdir(exist_ok=True)
        marker.write_text(stamp + "\n")
    except OSError:  # read-only install: numba falls back to its own checks
        pass


if NUMBA_ENABLED:
    _drop_stale_cache()


def njit(fn=None, **options):
    """``numba.njit(cache=True)`` when enabled, identity otherwise."""

    def wrap(f):
        if NUMBA_ENABLED:
            return numba.njit(cache=True, **options)(f)
        f.py_func = f
        return f

    if fn is None:
        return wrap
    return wrap(fn)


def backend() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
