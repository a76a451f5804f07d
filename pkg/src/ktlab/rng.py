"""Reproducible counter-based random numbers.

Monte Carlo work is split into fixed-size batches; batch b of a run seeded
with s draws from Philox keyed by (s, b).  The batch structure is part of
the estimator definition, so results are identical for any worker count as
long as batch sums are reduced in batch order.
"""

from __future__ import annotations

import numpy as np


def batch_generator(seed: int, batch_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, batch_index], dtype=np.uint64)))


def batch_layout(n_total: int, batch_size: int) -> list[int]:
    """Sample counts per batch; fixed given (n_total, batch_size)."""
    full, rem = divmod(n_total, batch_size)
    return [batch_size] * full + ([rem] if rem else [])
