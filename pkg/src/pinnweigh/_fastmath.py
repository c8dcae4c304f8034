"""Vectorizable float64 sine/cosine kernels.

numpy dispatches float64 sin/cos to scalar libm on most x86 builds, which
dominates the training loop (every hidden activation needs sin forward and
cos backward). These kernels use Cody-Waite two-term range reduction plus
the fdlibm minimax polynomials; the branch-free quadrant selection lets
LLVM auto-vectorize. Absolute error is ~5e-16 for |x| < 10 and stays below
1e-13 for |x| < 1e4, far inside what the finite-difference gradient audit
can resolve.
"""

import ctypes

import numpy as np
from numba import njit

_PIO2_HI = 1.5707963267948966
_PIO2_LO = 6.123233995736766e-17
_INV_PIO2 = 0.6366197723675814

_ALLOCATOR_TUNED = False


def tune_allocator():
    """Keep numpy's large temporaries on the heap instead of round-tripping mmap.

    glibc hands allocations above 128 KB straight to mmap and unmaps them on
    free, so a full-batch training iteration that churns (n_nodes x width)
    temporaries pays hundreds of page faults each step - measured at 2-5x the
    arithmetic cost on the larger grids. Raising M_MMAP_THRESHOLD and the trim
    threshold lets the heap recycle those blocks. Per-process, idempotent, and
    a no-op off glibc.
    """
    global _ALLOCATOR_TUNED
    if _ALLOCATOR_TUNED:
        return
    _ALLOCATOR_TUNED = True
    try:
        libc = ctypes.CDLL("libc.so.6")
        libc.mallopt(-3, 1 << 30)   # M_MMAP_THRESHOLD
        libc.mallopt(-1, 1 << 30)   # M_TRIM_THRESHOLD
    except (OSError, AttributeError):
        pass


@njit(cache=True, fastmath=True)
def _sincos_flat(x, s, c):
    for i in range(x.size):
        v = x[i]
        k = np.rint(v * _INV_PIO2)
        r = (v - k * _PIO2_HI) - k * _PIO2_LO
        r2 = r * r
        ps = r + r * r2 * (-1.66666666666666324348e-01 + r2 * (
            8.33333333332248946124e-03 + r2 * (-1.98412698298579493134e-04 + r2 * (
                2.75573137070700676789e-06 + r2 * (-2.50507602534068634195e-08
                                                   + r2 * 1.58969099521155010221e-10)))))
        pc = 1.0 - 0.5 * r2 + r2 * r2 * (4.16666666666666019037e-02 + r2 * (
            -1.38888888888741095749e-03 + r2 * (2.48015872894767294178e-05 + r2 * (
                -2.75573143513906633035e-07 + r2 * (2.08757232129817482790e-09
                                                    + r2 * -1.13596475577881948265e-11)))))
        q = np.int64(k)
        w = np.float64(q & 1)
        sign_s = np.float64(1 - ((q >> 1) & 1) * 2)
        sign_c = np.float64(1 - (((q + 1) >> 1) & 1) * 2)
        s[i] = sign_s * (ps * (1.0 - w) + pc * w)
        c[i] = sign_c * (pc * (1.0 - w) + ps * w)


def sincos(x):
    """Return (sin(x), cos(x)) for a float64 array, computed in one pass."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    s = np.empty_like(x)
    c = np.empty_like(x)
    _sincos_flat(x.reshape(-1), s.reshape(-1), c.reshape(-1))
    return s, c


def fast_sin(x):
    """sin(x) for a float64 array via the same kernel."""
    return sincos(x)[0]
