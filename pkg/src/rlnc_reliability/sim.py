"""Monte Carlo ground truth for RLNC multicast delivery.

Only coding coefficients are simulated; payloads never affect whether a
user can decode.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .bounds import SYSTEMATIC, CodeSpec, ConsistencyError, NetworkSpec
from .gf import FieldSpec

MAX_PACKETS = 64
MAX_THETA_USERS = 16
Z95 = 1.96


@dataclass(frozen=True)
class Estimate:
    """Success frequency with a 95% normal-approximation half-width."""

    successes: int
    trials: int

    @property
    def mean(self) -> float:
        return self.successes / self.trials

    @property
    def half_width(self) -> float:
        p = self.mean
        return Z95 * math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def std_error(self) -> float:
        return self.half_width / Z95


@dataclass(frozen=True)
class ReceptionStats:
    """Per-trial reception counts.

    ``theta`` maps each user subset ``J`` (sorted 0-based indices,
    ``2 <= |J| <= L-1``) to the number of packets received by exactly
    those users.
    """

    m: tuple[int, ...]
    mu: int
    theta: dict[tuple[int, ...], int]
    none_count: int
    unique: tuple[int, ...]

    @property
    def L(self) -> int:
        return len(self.m)

    def none_from_identity(self, N: int) -> int:
        """Packets received by nobody, from the counts alone."""
        L = self.L
        return (
            N
            - sum(self.m)
            + (L - 1) * self.mu
            + sum((len(J) - 1) * c for J, c in self.theta.items())
        )


@dataclass(frozen=True)
class TrialOutcome:
    success: bool
    per_user_rank: tuple[int, ...]
    reception: ReceptionStats


def _seed64(seed: int) -> np.uint64:
    return np.uint64(seed % (1 << 64))


def _thresholds(eps: Iterable[float]) -> np.ndarray:
    # erase when the top 53 bits of a draw fall below eps * 2**53
    return np.array([round(e * (1 << 53)) for e in eps], dtype=np.int64)


def _field_for(q: int, field: FieldSpec | None) -> FieldSpec:
    if field is None:
        return FieldSpec.from_q(q)
    if field.q != q:
        raise ValueError(f"field GF({field.q}) does not match q={q}")
    return field


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    step = -(-trials // workers)
    return [(a, min(a + step, trials)) for a in range(0, trials, step)]


def _run_pool(fn, args_list: list[tuple], workers: int) -> int:
    if workers <= 1 or len(args_list) == 1:
        return sum(fn(*a) for a in args_list)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(_star, [(fn, a) for a in args_list]))


def _star(packed):
    fn, args = packed
    return fn(*args)


def _multicast_chunk(seed, t0, t1, N, K, systematic, thr, w, exp, log) -> int:
    return int(_kernels.multicast_successes(seed, t0, t1, N, K, systematic, thr, w, exp, log))


def _ensemble_chunk(seed, t0, t1, L, n_all, n_pair, n_total, K, w, exp, log) -> int:
    return int(_kernels.ensemble_successes(seed, t0, t1, L, n_all, n_pair, n_total, K, w, exp, log))


def simulate_multicast(
    code: CodeSpec,
    net: NetworkSpec,
    trials: int,
    seed: int,
    *,
    field: FieldSpec | None = None,
    workers: int = 1,
) -> Estimate:
    """Fraction of trials in which every user decodes.

    Each trial draws a fresh coding matrix (identity in front for the
    systematic variant), erases every (user, packet) pair independently
    and checks all users' ranks. The result depends only on ``seed`` and
    ``trials``, never on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if code.N > MAX_PACKETS:
        raise ValueError(f"at most {MAX_PACKETS} transmissions supported")
    f = _field_for(code.q, field)
    exp, log = f.tables
    args = [
        (
            _seed64(seed), a, b, code.N, code.K, code.variant == SYSTEMATIC,
            _thresholds(net.epsilons), f.extension_degree, exp, log,
        )
        for a, b in _chunks(trials, workers)
    ]
    return Estimate(_run_pool(_multicast_chunk, args, workers), trials)


def simulate_trial(code: CodeSpec, net: NetworkSpec, seed: int, t: int, *, field: FieldSpec | None = None) -> TrialOutcome:
    """Replay trial ``t`` of :func:`simulate_multicast` with full detail."""
    if code.N > MAX_PACKETS:
        raise ValueError(f"at most {MAX_PACKETS} transmissions supported")
    f = _field_for(code.q, field)
    exp, log = f.tables
    masks = np.zeros(net.L, dtype=np.uint64)
    ranks = np.zeros(net.L, dtype=np.int64)
    _kernels.multicast_trial_detail(
        _seed64(seed), t, code.N, code.K, code.variant == SYSTEMATIC,
        _thresholds(net.epsilons), f.extension_degree, exp, log, masks, ranks,
    )
    received = [{k for k in range(code.N) if (int(mk) >> k) & 1} for mk in masks]
    ranks_t = tuple(int(r) for r in ranks)
    return TrialOutcome(all(r == code.K for r in ranks_t), ranks_t, reception_stats(received, code.N))


def reception_stats(received: Sequence[Iterable[int]], N: int) -> ReceptionStats:
    """Tally who received what from per-user sets of packet indices ``0..N-1``.

    Raises :class:`ConsistencyError` if the counts violate the
    received-by-nobody identity (they never should).
    """
    sets = [frozenset(u) for u in received]
    L = len(sets)
    if L < 1:
        raise ValueError("need at least one user")
    if L > MAX_THETA_USERS:
        raise ValueError(f"theta map limited to {MAX_THETA_USERS} users")
    for u in sets:
        if any(not 0 <= k < N for k in u):
            raise ValueError(f"packet index outside [0, {N})")
    theta = {
        J: 0
        for size in range(2, L)
        for J in itertools.combinations(range(L), size)
    }
    mu = none = 0
    unique = [0] * L
    for k in range(N):
        J = tuple(j for j in range(L) if k in sets[j])
        if not J:
            none += 1
        elif len(J) == L:
            mu += 1
        elif len(J) == 1:
            unique[J[0]] += 1
        else:
            theta[J] += 1
    stats = ReceptionStats(tuple(len(u) for u in sets), mu, theta, none, tuple(unique))
    if stats.none_from_identity(N) != none:
        raise ConsistencyError("received-by-nobody identity violated")
    return stats


def simulate_correlated_ensemble(
    L: int,
    rows_shared_all: int,
    rows_shared_pairwise: int,
    rows_total: int,
    K: int,
    f: FieldSpec,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
) -> Estimate:
    """Joint full-rank frequency of ``L`` matrices with shared row blocks.

    Every matrix has ``rows_total`` rows: ``rows_shared_all`` common to all,
    ``rows_shared_pairwise`` shared with each other matrix, and the rest
    private.
    """
    if L < 1 or K < 1 or trials < 1:
        raise ValueError("L, K and trials must be positive")
    if min(rows_shared_all, rows_shared_pairwise) < 0:
        raise ValueError("row counts must be non-negative")
    if rows_shared_all + (L - 1) * rows_shared_pairwise > rows_total:
        raise ValueError("shared rows exceed the per-matrix row budget")
    exp, log = f.tables
    args = [
        (_seed64(seed), a, b, L, rows_shared_all, rows_shared_pairwise, rows_total, K, f.extension_degree, exp, log)
        for a, b in _chunks(trials, workers)
    ]
    return Estimate(_run_pool(_ensemble_chunk, args, workers), trials)
