"""Backend selection for the hot quadrature kernels.

Numba is used when importable unless ``HOLDER_APPROX_DISABLE_NUMBA`` is set
to a truthy value, in which case the vectorized numpy implementation runs.
The flag is read at call time so tests can flip it with ``monkeypatch``.
"""
import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

_FALSY = ("", "0", "false", "no", "off")


def use_numba():
    if not HAVE_NUMBA:
        return False
    return os.environ.get("HOLDER_APPROX_DISABLE_NUMBA", "").strip().lower() in _FALSY


def resolve_backend(backend=None):
    """Return ``"numba"`` or ``"numpy"`` for an explicit or default request."""
    if backend is None:
        return "numba" if use_numba() else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


def max_threads():
    """Thread cap from ``HOLDER_APPROX_THREADS`` (defaults to the CPU count)."""
    raw = os.environ.get("HOLDER_APPROX_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"HOLDER_APPROX_THREADS must be an integer, got {raw!r}")
    return os.cpu_count() or 1


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, identity decorator otherwise."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrap(fn):
        return fn

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap
