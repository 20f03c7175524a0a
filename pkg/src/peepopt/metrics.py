"""Output-distribution distance metrics."""
from __future__ import annotations

import numpy as np


def _check(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    return p, q


def tvd(p, q) -> float:
    """Total variational distance 0.5 * sum |p_i - q_i|, in [0, 1]."""
    p, q = _check(p, q)
    return float(0.5 * np.abs(p - q).sum())


def jsd(p, q) -> float:
    """Jensen-Shannon divergence, log base 2, in [0, 1]; 0 log 0 = 0."""
    p, q = _check(p, q)
    m = 0.5 * (p + q)
    def kl(a, b):
        mask = a > 0
        return float(np.sum(a[mask] * np.log2(a[mask] / b[mask])))
    return 0.5 * kl(p, m) + 0.5 * kl(q, m)
