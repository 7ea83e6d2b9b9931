"""Exact integer combinatorics for the multicast bound.

Everything here returns Python ints, so no result is ever rounded.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from typing import Iterator, Sequence

import numpy as np


def binom(n: int, k: int) -> int:
    """C(n, k), zero outside ``0 <= k <= n``."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def mu_range(m: Sequence[int], N: int) -> range:
    """Feasible counts of packets received by every user.

    Lower end assumes every other packet reached all but one user.
    """
    L = len(m)
    lo = max(0, sum(m) - (L - 1) * N)
    return range(lo, min(m) + 1)


def _check_counts(m: Sequence[int], mu: int, N: int) -> None:
    if not m:
        raise ValueError("need at least one user")
    if not 0 <= mu <= min(m) or max(m) > N:
        raise ValueError(f"require 0 <= mu <= min(m) <= max(m) <= N; got m={tuple(m)}, mu={mu}, N={N}")


def alpha(m: Sequence[int], mu: int, N: int) -> int:
    """Number of reception patterns with per-user counts ``m`` and exactly
    ``mu`` packets common to all users.

    Inclusion-exclusion over packets that would enlarge the common set.
    """
    _check_counts(m, mu, N)
    rest = N - mu
    total = 0
    for l in range(min(m) - mu + 1):
        prod = binom(rest, l)
        for mj in m:
            prod *= binom(rest - l, mj - mu - l)
        total += -prod if l & 1 else prod
    return binom(N, mu) * total


def alpha_profile(m: Sequence[int], N: int) -> list[int]:
    """``[alpha(m, mu, N) for mu in 0..min(m)]`` in one pass.

    Same inclusion-exclusion sum, regrouped by ``t = mu + l`` so the
    per-user binomial product is formed once per ``t``::

        alpha(mu) = sum_t (-1)^(t-mu) C(t, mu) C(N, t) prod_j C(N-t, m_j-t)
    """
    if not m or max(m) > N or min(m) < 0:
        raise ValueError(f"counts {tuple(m)} outside [0, {N}]")
    top = min(m)
    counts = Counter(m)
    g = []
    for t in range(top + 1):
        prod = binom(N, t)
        for v, c in counts.items():
            prod *= binom(N - t, v - t) ** c
        g.append(prod)
    out = []
    for mu in range(top + 1):
        acc = 0
        for t in range(mu, top + 1):
            term = math.comb(t, mu) * g[t]
            acc += -term if (t - mu) & 1 else term
        out.append(acc)
    return out


def alpha_table(tuples: np.ndarray, N: int) -> np.ndarray:
    """Row ``r`` holds ``alpha(tuples[r], mu, N)`` for ``mu = 0..N``.

    Vectorised form of :func:`alpha_profile` over a ``T x L`` integer array
    of count tuples. Entries are exact Python ints (object dtype); the
    columns past ``min(tuples[r])`` are zero.
    """
    tuples = np.asarray(tuples, dtype=np.int64)
    if tuples.ndim != 2 or tuples.shape[1] < 1:
        raise ValueError("tuples must be a non-empty T x L array")
    if tuples.size and (tuples.min() < 0 or tuples.max() > N):
        raise ValueError(f"counts outside [0, {N}]")
    span = range(N + 1)
    # B[v, t] = C(N-t, v-t): ways to place the rest of a v-subset once t packets are fixed
    B = np.array([[binom(N - t, v - t) for t in span] for v in span], dtype=object)
    g = np.array([[binom(N, t) for t in span]], dtype=object).repeat(len(tuples), axis=0)
    for j in range(tuples.shape[1]):
        g = g * B[tuples[:, j]]
    signed = np.array(
        [[-binom(t, mu) if (t - mu) & 1 else binom(t, mu) for mu in span] for t in span], dtype=object
    )
    return g @ signed


def enumerate_count_tuples(K: int, N: int, L: int) -> Iterator[tuple[int, ...]]:
    """Non-decreasing ``L``-tuples over ``[K, N]`` in lexicographic order.

    There are ``C(N - K + L, L)`` of them.
    """
    if N < K or L < 1:
        raise ValueError(f"need N >= K and L >= 1; got K={K}, N={N}, L={L}")
    return itertools.combinations_with_replacement(range(K, N + 1), L)


def count_tuples(K: int, N: int, L: int) -> int:
    return binom(N - K + L, L)


def permutation_count(t: Sequence[int]) -> int:
    """Distinct orderings of ``t``: ``L! / prod(multiplicity!)``."""
    out = math.factorial(len(t))
    for c in Counter(t).values():
        out //= math.factorial(c)
    return out
