"""Rank probabilities of uniformly random matrices over GF(q).

All functions are pure and memoised; results are plain floats.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

# Below this exponent q**-e is taken directly; above it the whole product is
# evaluated in the log domain.
_LOG_DOMAIN_EXPONENT = 1000
_UNDERFLOW = 1e-300


def _check_q(q: int) -> None:
    if q < 2:
        raise ValueError(f"field size must be >= 2, got {q}")


@lru_cache(maxsize=None)
def full_rank_prob(m: int, K: int, q: int) -> float:
    """Probability that a uniform ``m x K`` matrix over GF(q) has rank ``K``.

    Returns 1 for ``K == 0`` and 0 for ``m < K``.
    """
    _check_q(q)
    if K <= 0:
        return 1.0
    if m < K:
        return 0.0
    qf = float(q)
    p = 1.0
    for i in range(K):
        p *= 1.0 - qf ** (i - m)
    return p


@lru_cache(maxsize=None)
def rank_prob(i: int, m: int, K: int, q: int) -> float:
    """Probability that a uniform ``m x K`` matrix over GF(q) has rank exactly ``i``.

    Numerator and denominator products are formed separately and divided
    once, so for small binary cases the result is the exact dyadic rational
    whenever that rational is representable.
    """
    _check_q(q)
    if i < 0 or i > min(m, K):
        return 0.0
    qf = float(q)
    exponent = (m - i) * (K - i)
    if exponent > _LOG_DOMAIN_EXPONENT:
        log_p = -exponent * math.log(qf)
        for l in range(i):
            log_p += math.log1p(-(qf ** (l - m))) + math.log1p(-(qf ** (l - K))) - math.log1p(-(qf ** (l - i)))
        p = math.exp(log_p)
        return 0.0 if p < _UNDERFLOW else p
    num = 1.0
    den = 1.0
    for l in range(i):
        num *= (1.0 - qf ** (l - m)) * (1.0 - qf ** (l - K))
        den *= 1.0 - qf ** (l - i)
    p = num / den * qf ** (-exponent)
    return 0.0 if p < _UNDERFLOW else p


def joint_full_rank_product_bound(m: Sequence[int], mu: int, K: int, q: int) -> float:
    """Independence lower bound on all matrices being full rank.

    ``mu`` is accepted for symmetry with :func:`joint_full_rank_bound` and
    ignored.
    """
    p = 1.0
    for mj in m:
        p *= full_rank_prob(mj, K, q)
    return p


def joint_full_rank_bound(m: Sequence[int], mu: int, K: int, q: int) -> float:
    """Lower bound on ``L`` matrices sharing ``mu`` rows all being full rank.

    Conditions on the rank ``i`` of the shared block and treats the
    remaining ``m_j - mu`` rows of each matrix as independent, which needs
    rank ``K - i`` from each of them. Exact for ``L <= 2``.
    """
    m = tuple(m)
    if not m:
        raise ValueError("need at least one matrix")
    if mu < 0 or mu > min(m):
        raise ValueError(f"mu={mu} must lie in [0, min(m)={min(m)}]")
    lo = max(0, max(K - mj + mu for mj in m))
    hi = min(mu, K)
    total = 0.0
    for i in range(lo, hi + 1):
        term = rank_prob(i, mu, K, q)
        if term == 0.0:
            continue
        for mj in m:
            term *= full_rank_prob(mj - mu, K - i, q)
        total += term
    return min(total, 1.0)
