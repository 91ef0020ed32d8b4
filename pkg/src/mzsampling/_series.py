"""Certified enclosures for tails of slowly decaying positive series."""

import mpmath
import numpy as np


def tail_integral(g, start):
    """Return ``int_start^inf g(x) dx`` evaluated with mpmath.

    ``g`` must accept mpmath numbers.
    """
    with mpmath.workdps(30):
        val = mpmath.quad(g, [start, 2 * start + 1, mpmath.inf])
    return float(val)


def series_tail(g, start, stride=1):
    """Enclose ``sum_{m = start, start + stride, ...} g(m)``.

    ``g`` has to be non-increasing on ``[start, inf)``. Returns ``(lo, hi)``
    from the integral comparison test.
    """
    integral = tail_integral(g, start) / stride
    return integral, integral + float(g(mpmath.mpf(start)))


def level_sum(g_np, first, last, stride=1, chunk=1 << 20):
    """``sum_{m = first, first + stride, ..., <= last} g_np(m)`` in chunks."""
    total = 0.0
    if last < first:
        return total
    lo = first
    while lo <= last:
        hi = min(last, lo + stride * (chunk - 1))
        m = np.arange(lo, hi + 1, stride, dtype=float)
        total += float(np.sum(g_np(m)))
        lo = hi + stride
    return total
