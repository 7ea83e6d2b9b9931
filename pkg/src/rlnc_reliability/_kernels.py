"""Compiled per-trial kernels for the Monte Carlo simulator.

Randomness: trial ``t`` owns a SplitMix64 stream keyed by ``(seed, t)``, so
any split of the trial range over workers reproduces the same draws.
Stream layout per multicast trial: ``L*N`` erasure draws (user-major),
then the coefficient words of packets ``0..N-1`` in order.
"""

import numpy as np
from numba import njit

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)


@njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def trial_state(seed, t):
    st = np.empty(1, dtype=np.uint64)
    st[0] = mix64(mix64(seed) ^ (np.uint64(t) * GAMMA + _ONE))
    return st


@njit(cache=True, inline="always")
def next_u64(st):
    st[0] += GAMMA
    return mix64(st[0])


@njit(cache=True, inline="always")
def erased(st, thr):
    return np.int64(next_u64(st) >> _S11) < thr


@njit(cache=True)
def draw_masks(st, N, thr, masks):
    L = thr.shape[0]
    for j in range(L):
        m = _ZERO
        for k in range(N):
            if not erased(st, thr[j]):
                m |= _ONE << np.uint64(k)
        masks[j] = m


@njit(cache=True)
def draw_rows_gf2(st, first, n, K, rows):
    kmask = (_ONE << np.uint64(K)) - _ONE if K < 64 else ~_ZERO
    for k in range(first, first + n):
        rows[k] = next_u64(st) & kmask


@njit(cache=True)
def draw_rows_gfq(st, first, n, K, w, rows):
    sym_mask = np.uint64((1 << w) - 1)
    uw = np.uint64(w)
    for k in range(first, first + n):
        word = _ZERO
        left = 0
        for c in range(K):
            if left < w:
                word = next_u64(st)
                left = 64
            rows[k, c] = np.uint8(word & sym_mask)
            word >>= uw
            left -= w


@njit(cache=True)
def rank_gf2(rows, idx, n, K, basis):
    """Rank of ``rows[idx[:n]]`` (bitset rows), stopping at ``K``."""
    for c in range(K):
        basis[c] = _ZERO
    r = 0
    for t in range(n):
        x = rows[idx[t]]
        for c in range(K):
            if (x >> np.uint64(c)) & _ONE:
                if basis[c]:
                    x ^= basis[c]
                else:
                    basis[c] = x
                    r += 1
                    break
        if r == K:
            break
    return r


@njit(cache=True)
def rank_gfq(rows, idx, n, K, basis, has, tmp, exp, log, order):
    """Rank over GF(2^w) of ``rows[idx[:n]]``, stopping at ``K``.

    Basis row ``c`` is kept with a unit pivot at column ``c`` and zeros to
    its left, so reducing an incoming row only touches columns >= c.
    """
    for c in range(K):
        has[c] = False
    r = 0
    for t in range(n):
        src = idx[t]
        for c in range(K):
            tmp[c] = rows[src, c]
        for c in range(K):
            x = tmp[c]
            if x == 0:
                continue
            if has[c]:
                lx = log[x]
                for d in range(c, K):
                    b = basis[c, d]
                    if b != 0:
                        tmp[d] ^= exp[lx + log[b]]
            else:
                inv = order - log[x]
                for d in range(c, K):
                    b = tmp[d]
                    basis[c, d] = exp[log[b] + inv] if b != 0 else 0
                has[c] = True
                r += 1
                break
        if r == K:
            break
    return r


@njit(cache=True)
def _mask_to_idx(mask, N, idx):
    n = 0
    for k in range(N):
        if (mask >> np.uint64(k)) & _ONE:
            idx[n] = k
            n += 1
    return n


@njit(cache=True)
def _fill_rows(st, N, K, systematic, w, rows2, rowsq):
    first = 0
    if systematic:
        for k in range(K):
            if w == 1:
                rows2[k] = _ONE << np.uint64(k)
            else:
                for c in range(K):
                    rowsq[k, c] = 0
                rowsq[k, k] = 1
        first = K
    if w == 1:
        draw_rows_gf2(st, first, N - first, K, rows2)
    else:
        draw_rows_gfq(st, first, N - first, K, w, rowsq)


@njit(cache=True)
def multicast_successes(seed, t0, t1, N, K, systematic, thr, w, exp, log):
    """Number of trials in ``[t0, t1)`` where every user reaches rank ``K``."""
    L = thr.shape[0]
    order = (1 << w) - 1
    masks = np.empty(L, dtype=np.uint64)
    rows2 = np.empty(N, dtype=np.uint64)
    rowsq = np.empty((N, K), dtype=np.uint8)
    basis2 = np.empty(K, dtype=np.uint64)
    basisq = np.empty((K, K), dtype=np.uint8)
    has = np.empty(K, dtype=np.bool_)
    tmp = np.empty(K, dtype=np.uint8)
    idx = np.empty(N, dtype=np.int64)
    wins = 0
    for t in range(t0, t1):
        st = trial_state(seed, t)
        draw_masks(st, N, thr, masks)
        ok = True
        for j in range(L):
            cnt = 0
            m = masks[j]
            while m:
                m &= m - _ONE
                cnt += 1
            if cnt < K:
                ok = False
                break
        if not ok:
            continue
        _fill_rows(st, N, K, systematic, w, rows2, rowsq)
        for j in range(L):
            n = _mask_to_idx(masks[j], N, idx)
            if w == 1:
                r = rank_gf2(rows2, idx, n, K, basis2)
            else:
                r = rank_gfq(rowsq, idx, n, K, basisq, has, tmp, exp, log, order)
            if r < K:
                ok = False
                break
        if ok:
            wins += 1
    return wins


@njit(cache=True)
def multicast_trial_detail(seed, t, N, K, systematic, thr, w, exp, log, masks, ranks):
    """Replay trial ``t`` in full: reception masks and every user's rank."""
    L = thr.shape[0]
    order = (1 << w) - 1
    rows2 = np.empty(N, dtype=np.uint64)
    rowsq = np.empty((N, K), dtype=np.uint8)
    basis2 = np.empty(K, dtype=np.uint64)
    basisq = np.empty((K, K), dtype=np.uint8)
    has = np.empty(K, dtype=np.bool_)
    tmp = np.empty(K, dtype=np.uint8)
    idx = np.empty(N, dtype=np.int64)
    st = trial_state(seed, t)
    draw_masks(st, N, thr, masks)
    _fill_rows(st, N, K, systematic, w, rows2, rowsq)
    for j in range(L):
        n = _mask_to_idx(masks[j], N, idx)
        if w == 1:
            ranks[j] = rank_gf2(rows2, idx, n, K, basis2)
        else:
            ranks[j] = rank_gfq(rowsq, idx, n, K, basisq, has, tmp, exp, log, order)


@njit(cache=True)
def ensemble_successes(seed, t0, t1, L, n_all, n_pair, n_total, K, w, exp, log):
    """Trials where ``L`` correlated random matrices are all full rank.

    Row pool per trial: ``n_all`` rows shared by every matrix, ``n_pair``
    rows for each unordered pair, then ``n_total - n_all - (L-1)*n_pair``
    private rows per matrix. Drawn in that order.
    """
    order = (1 << w) - 1
    n_pairs = L * (L - 1) // 2
    n_own = n_total - n_all - (L - 1) * n_pair
    pool = n_all + n_pairs * n_pair + L * n_own
    rows2 = np.empty(pool, dtype=np.uint64)
    rowsq = np.empty((pool, K), dtype=np.uint8)
    basis2 = np.empty(K, dtype=np.uint64)
    basisq = np.empty((K, K), dtype=np.uint8)
    has = np.empty(K, dtype=np.bool_)
    tmp = np.empty(K, dtype=np.uint8)
    idx = np.empty(n_total, dtype=np.int64)
    wins = 0
    for t in range(t0, t1):
        st = trial_state(seed, t)
        if w == 1:
            draw_rows_gf2(st, 0, pool, K, rows2)
        else:
            draw_rows_gfq(st, 0, pool, K, w, rowsq)
        ok = True
        for j in range(L):
            n = 0
            for k in range(n_all):
                idx[n] = k
                n += 1
            p = 0
            for a in range(L):
                for b in range(a + 1, L):
                    if a == j or b == j:
                        base = n_all + p * n_pair
                        for k in range(n_pair):
                            idx[n] = base + k
                            n += 1
                    p += 1
            base = n_all + n_pairs * n_pair + j * n_own
            for k in range(n_own):
                idx[n] = base + k
                n += 1
            if w == 1:
                r = rank_gf2(rows2, idx, n, K, basis2)
            else:
                r = rank_gfq(rowsq, idx, n, K, basisq, has, tmp, exp, log, order)
            if r < K:
                ok = False
                break
        if ok:
            wins += 1
    return wins
