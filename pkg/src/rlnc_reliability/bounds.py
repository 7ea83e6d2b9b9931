"""Delivery-probability formulas for RLNC multicast.

Point-to-point exact probabilities (non-systematic and systematic), the
exact two-user probability, the independent-user product bound and the
common-packet bound for ``L`` users.

Weights mixing huge exact counts with tiny channel probabilities are never
formed directly. Counts of reception patterns are divided by
``prod_j C(N, m_j)`` in exact integer arithmetic (a correctly rounded
quotient) and paired with binomial pmfs evaluated in the log domain.
"""

from __future__ import annotations

import itertools
import math
from bisect import insort
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .combin import alpha, alpha_table, binom, count_tuples, enumerate_count_tuples, mu_range, permutation_count
from .rankprob import full_rank_prob, joint_full_rank_bound, rank_prob

NONSYSTEMATIC = "nonsystematic"
SYSTEMATIC = "systematic"
VARIANTS = (NONSYSTEMATIC, SYSTEMATIC)

PATHS = ("naive", "order_free", "homogeneous")

# Pre-clamp excursions larger than this are treated as bugs, not rounding.
CONSISTENCY_TOL = 1e-9

_LOG_ZERO = -1e6
_CHUNK = 4096


class ConsistencyError(RuntimeError):
    """A computed probability left [0, 1] by more than rounding noise."""


@dataclass(frozen=True)
class CodeSpec:
    N: int
    K: int
    q: int = 2
    variant: str = NONSYSTEMATIC

    def __post_init__(self):
        if self.K < 1 or self.N < self.K:
            raise ValueError(f"need N >= K >= 1; got N={self.N}, K={self.K}")
        if self.q < 2:
            raise ValueError(f"field size must be >= 2; got {self.q}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")


@dataclass(frozen=True)
class NetworkSpec:
    epsilons: tuple[float, ...]

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if not eps:
            raise ValueError("network needs at least one user")
        for e in eps:
            _check_eps(e)
        object.__setattr__(self, "epsilons", eps)

    @classmethod
    def homogeneous(cls, L: int, eps: float) -> "NetworkSpec":
        return cls((eps,) * L)

    @property
    def L(self) -> int:
        return len(self.epsilons)

    @property
    def is_homogeneous(self) -> bool:
        return len(set(self.epsilons)) == 1


@dataclass(frozen=True)
class BoundResult:
    value: float
    method: str
    terms_evaluated: int


def _check_eps(eps: float) -> None:
    if not 0.0 <= eps <= 1.0 or math.isnan(eps):
        raise ValueError(f"erasure probability {eps} outside [0, 1]")


def _finalize(value: float) -> float:
    if value < -CONSISTENCY_TOL or value > 1.0 + CONSISTENCY_TOL:
        raise ConsistencyError(f"probability {value!r} outside [0, 1]")
    return min(max(value, 0.0), 1.0)


def _xlogy(x: float, y: float) -> float:
    """x * log(y) with 0 * log(0) = 0."""
    if x == 0:
        return 0.0
    if y == 0.0:
        return -math.inf
    return x * math.log(y)


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _log_channel(received: int, N: int, eps: float) -> float:
    """log of (1-eps)^received * eps^(N-received)."""
    return _xlogy(received, 1.0 - eps) + _xlogy(N - received, eps)


def _binom_pmf(m: int, N: int, eps: float) -> float:
    """P(exactly m of N packets arrive) on a link with erasure rate eps."""
    lp = _log_channel(m, N, eps)
    return 0.0 if lp == -math.inf else math.exp(_log_binom(N, m) + lp)


def _log2_int(n: int) -> float:
    """log2 of a positive integer of any size (mantissa/exponent split)."""
    e = n.bit_length()
    if e <= 1000:
        return math.log2(n)
    shift = e - 64
    return math.log2(n >> shift) + shift


def phi(m: Sequence[int], N: int, net: NetworkSpec) -> float:
    """Probability of one specific reception pattern with per-user counts ``m``."""
    if len(m) != net.L:
        raise ValueError(f"got {len(m)} counts for {net.L} users")
    if any(not 0 <= mj <= N for mj in m):
        raise ValueError(f"counts {tuple(m)} outside [0, {N}]")
    lp = sum(_log_channel(mj, N, e) for mj, e in zip(m, net.epsilons))
    return 0.0 if lp == -math.inf else math.exp(lp)


def ptp_nonsystematic(code: CodeSpec, eps: float) -> float:
    _check_eps(eps)
    N, K, q = code.N, code.K, code.q
    terms = [_binom_pmf(m, N, eps) * full_rank_prob(m, K, q) for m in range(K, N + 1)]
    return _finalize(math.fsum(terms))


def ptp_systematic(code: CodeSpec, eps: float) -> float:
    """Single-link delivery probability when the first ``K`` packets are uncoded.

    ``h`` counts received systematic packets; those pin ``h`` columns, so
    the ``m - h`` coded rows must cover the other ``K - h``.
    """
    _check_eps(eps)
    N, K, q = code.N, code.K, code.q
    terms = []
    for m in range(K, N + 1):
        lp = _log_channel(m, N, eps)
        if lp == -math.inf:
            continue
        for h in range(max(0, m - (N - K)), min(K, m) + 1):
            w = _log_binom(K, h) + _log_binom(N - K, m - h) + lp
            terms.append(math.exp(w) * full_rank_prob(m - h, K - h, q))
    return _finalize(math.fsum(terms))


def ptp(code: CodeSpec, eps: float) -> float:
    if code.variant == SYSTEMATIC:
        return ptp_systematic(code, eps)
    return ptp_nonsystematic(code, eps)


def product_bound(code: CodeSpec, net: NetworkSpec) -> float:
    """Product of per-user point-to-point probabilities.

    A lower bound for both variants; for the systematic code it is the
    bound of choice, for the non-systematic one it is the classic
    comparison bound that ignores shared packets.
    """
    p = 1.0
    for e in net.epsilons:
        p *= ptp(code, e)
    return _finalize(p)


def two_user_exact(code: CodeSpec, eps1: float, eps2: float) -> float:
    """Exact delivery probability for two users of a non-systematic code."""
    if code.variant != NONSYSTEMATIC:
        raise ValueError("two_user_exact applies to non-systematic codes only")
    _check_eps(eps1)
    _check_eps(eps2)
    N, K, q = code.N, code.K, code.q
    terms = []
    for m1 in range(K, N + 1):
        b1 = _binom_pmf(m1, N, eps1)
        if b1 == 0.0:
            continue
        for m2 in range(K, N + 1):
            b2 = _binom_pmf(m2, N, eps2)
            if b2 == 0.0:
                continue
            norm = binom(N, m1) * binom(N, m2)
            for mu in range(max(0, m1 + m2 - N), min(m1, m2) + 1):
                ways = binom(N, mu) * binom(N - mu, m1 - mu) * binom(N - m1, m2 - mu)
                joint = 0.0
                for i in range(max(0, K - m1 + mu, K - m2 + mu), min(mu, K) + 1):
                    joint += (
                        rank_prob(i, mu, K, q)
                        * full_rank_prob(m1 - mu, K - i, q)
                        * full_rank_prob(m2 - mu, K - i, q)
                    )
                terms.append(b1 * b2 * (ways / norm) * joint)
    return _finalize(math.fsum(terms))


# --- L-user bound ---------------------------------------------------------


def _naive(code: CodeSpec, net: NetworkSpec) -> BoundResult:
    N, K, q = code.N, code.K, code.q
    ln2 = math.log(2.0)
    terms = []
    n_terms = 0
    for m in itertools.product(range(K, N + 1), repeat=net.L):
        lp = sum(_log_channel(mj, N, e) for mj, e in zip(m, net.epsilons))
        if lp == -math.inf:
            continue
        log2_phi = lp / ln2
        for mu in mu_range(m, N):
            n_terms += 1
            a = alpha(m, mu, N)
            if a == 0:
                continue
            pt = joint_full_rank_bound(m, mu, K, q)
            if pt == 0.0:
                continue
            terms.append(2.0 ** (_log2_int(a) + log2_phi) * pt)
    return BoundResult(_finalize(math.fsum(terms)), "naive", n_terms)


@lru_cache(maxsize=4)
def _pattern_table(N: int, K: int, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Count tuples over ``[K, N]`` with their common-packet distributions.

    Returns ``tuples`` (T x L) and ``share`` (T x (N+1)) where
    ``share[t, mu] = alpha(tuple, mu, N) / prod_j C(N, m_j)``, i.e. the
    probability of exactly ``mu`` common packets given the counts.
    """
    T = count_tuples(K, N, L)
    flat = itertools.chain.from_iterable(enumerate_count_tuples(K, N, L))
    tuples = np.fromiter(flat, dtype=np.int64, count=T * L).reshape(T, L)
    counts = alpha_table(tuples, N)
    norm = np.ones(T, dtype=object)
    binoms = np.array([binom(N, v) for v in range(N + 1)], dtype=object)
    for j in range(L):
        norm = norm * binoms[tuples[:, j]]
    # big-int true division rounds correctly, so share carries no cancellation error
    share = (counts / norm[:, None]).astype(np.float64)
    tuples.setflags(write=False)
    share.setflags(write=False)
    return tuples, share


@lru_cache(maxsize=512)
def _inner_sums(N: int, K: int, L: int, q: int) -> np.ndarray:
    """Per count tuple: sum over mu of share(mu) * joint_full_rank_bound."""
    tuples, share = _pattern_table(N, K, L)
    V = N - K + 1
    log_fr = np.full((V, N + 1, K + 1), _LOG_ZERO)
    for vi, v in enumerate(range(K, N + 1)):
        for mu in range(v + 1):
            for i in range(K + 1):
                p = full_rank_prob(v - mu, K - i, q)
                if p > 0.0:
                    log_fr[vi, mu, i] = math.log(p)
    log_fr = log_fr.reshape(V, -1)
    rp = np.array([[rank_prob(i, mu, K, q) for i in range(K + 1)] for mu in range(N + 1)])

    counts = np.zeros((len(tuples), V))
    np.add.at(counts, (np.arange(len(tuples))[:, None], tuples - K), 1.0)

    out = np.empty(len(tuples))
    for start in range(0, len(tuples), _CHUNK):
        stop = start + _CHUNK
        s = counts[start:stop] @ log_fr
        joint = (np.exp(s).reshape(-1, N + 1, K + 1) * rp).sum(axis=-1)
        out[start:stop] = (share[start:stop] * joint).sum(axis=-1)
    out.setflags(write=False)
    return out


def _n_mu_terms(tuples: np.ndarray, N: int) -> int:
    L = tuples.shape[1]
    lo = np.maximum(0, tuples.sum(axis=1) - (L - 1) * N)
    return int((tuples.min(axis=1) - lo + 1).sum())


def _homogeneous_weights(tuples: np.ndarray, N: int, eps: float) -> np.ndarray:
    log_b = np.array([_log_binom(N, v) + _log_channel(v, N, eps) for v in range(N + 1)])
    log_sigma = np.array([math.log(permutation_count(t)) for t in tuples.tolist()])
    return np.exp(log_sigma + log_b[tuples].sum(axis=1))


def _arrangement_weights(tuples: np.ndarray, K: int, N: int, net: NetworkSpec) -> np.ndarray:
    """Sum over distinct user assignments of each count multiset.

    For a multiset ``m'`` this is ``sum_pi prod_j b_j(m'_pi(j))`` with
    ``b_j`` user ``j``'s binomial pmf: the coefficient of the monomial
    ``m'`` in ``prod_j sum_v b_j(v) x_v``, built one user at a time.
    """
    values = range(K, N + 1)
    pmfs = [[_binom_pmf(v, N, e) for v in values] for e in net.epsilons]
    level: dict[tuple[int, ...], float] = {(): 1.0}
    for b in pmfs:
        nxt: dict[tuple[int, ...], float] = defaultdict(float)
        for key, w in level.items():
            if w == 0.0:
                continue
            for vi, bv in enumerate(b):
                if bv == 0.0:
                    continue
                new = list(key)
                insort(new, vi + K)
                nxt[tuple(new)] += w * bv
        level = nxt
    return np.array([level.get(tuple(t), 0.0) for t in tuples.tolist()])


def multicast_bound(code: CodeSpec, net: NetworkSpec, path: str | None = None) -> BoundResult:
    """Common-packet lower bound on the probability that all users decode.

    ``path`` picks the evaluation strategy; all give the same number:

    ``naive``
        every ordered count tuple in ``[K, N]^L`` (exponential in ``L``).
    ``order_free``
        one term per count multiset, with the channel weights of all its
        orderings summed.
    ``homogeneous``
        as ``order_free`` but the ordering sum collapses to a permutation
        count; requires equal erasure rates.

    Default: ``homogeneous`` for equal rates, else ``order_free``.
    """
    if code.variant != NONSYSTEMATIC:
        raise ValueError("multicast_bound applies to non-systematic codes; use product_bound")
    if path is None:
        path = "homogeneous" if net.is_homogeneous else "order_free"
    if path not in PATHS:
        raise ValueError(f"unknown path {path!r}; expected one of {PATHS}")
    if path == "homogeneous" and not net.is_homogeneous:
        raise ValueError("homogeneous path needs equal erasure rates for all users")
    if path == "naive":
        return _naive(code, net)

    N, K, q, L = code.N, code.K, code.q, net.L
    tuples, _ = _pattern_table(N, K, L)
    inner = _inner_sums(N, K, L, q)
    if path == "homogeneous":
        weights = _homogeneous_weights(tuples, N, net.epsilons[0])
    else:
        weights = _arrangement_weights(tuples, K, N, net)
    value = math.fsum((weights * inner).tolist())
    return BoundResult(_finalize(value), path, _n_mu_terms(tuples, N))


def mse(curve_a: Sequence[float], curve_b: Sequence[float]) -> float:
    """Mean squared pointwise difference of two equally long curves."""
    if len(curve_a) != len(curve_b):
        raise ValueError(f"length mismatch: {len(curve_a)} vs {len(curve_b)}")
    if not curve_a:
        raise ValueError("curves must be non-empty")
    return math.fsum((a - b) ** 2 for a, b in zip(curve_a, curve_b)) / len(curve_a)
