"""Vectorized numpy implementation of the ADMM cone step."""
from __future__ import annotations

import numpy as np


def soc_project_blocks(s, starts, sizes):
    """Project every block ``s[starts[i]:starts[i]+sizes[i]]`` onto the SOC, in place.

    Blocks must be contiguous and in increasing order.
    """
    if len(starts) != len(sizes):
        raise ValueError("starts and sizes differ in length")
    if len(starts) == 0:
        return
    lo = starts[0]
    seg = s[lo:starts[-1] + sizes[-1]]
    rel = np.asarray(starts) - lo
    heads = seg[rel].copy()
    tail = np.sqrt(np.maximum(np.add.reduceat(seg**2, rel) - heads**2, 0.0))
    inside = tail <= heads
    polar = ~inside & (tail <= -heads)
    mid = ~(inside | polar)
    newhead = np.where(mid, 0.5 * (heads + tail), heads)
    factor = np.ones_like(heads)
    factor[polar] = 0.0
    factor[mid] = newhead[mid] / tail[mid]
    seg *= np.repeat(factor, sizes)
    seg[rel] = np.where(polar, 0.0, newhead)


def cone_update(vt, v, y, b, rho, alpha, m_eq, starts, sizes, work):
    """Relaxed projection onto ``b - K`` and dual update; updates ``v`` and ``y``."""
    np.multiply(alpha, vt, out=work)
    work += (1.0 - alpha) * v
    v[m_eq:] = b[m_eq:] - (work[m_eq:] + y[m_eq:] / rho[m_eq:])
    soc_project_blocks(v, starts, sizes)
    v[m_eq:] = b[m_eq:] - v[m_eq:]
    v[:m_eq] = b[:m_eq]
    y += rho * (work - v)
