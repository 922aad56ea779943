"""Process-level allocator tuning.

Field buffers at production resolutions (128^2 .. 256^2 doubles) sit just
above glibc's default mmap threshold, so every Runge-Kutta stage would
otherwise pay mmap/munmap page-fault costs for its temporaries, which
dominates the step time.  Raising the threshold keeps those buffers on the
heap free lists.  No-op off glibc.
"""

import ctypes

_M_TRIM_THRESHOLD = -1
_M_MMAP_THRESHOLD = -3


def tune_allocator(threshold: int = 1 << 26) -> bool:
    try:
        libc = ctypes.CDLL("libc.so.6", use_errno=True)
        ok = libc.mallopt(_M_MMAP_THRESHOLD, threshold)
        ok &= libc.mallopt(_M_TRIM_THRESHOLD, threshold)
        return bool(ok)
    except (OSError, AttributeError):
        return False


tune_allocator()
