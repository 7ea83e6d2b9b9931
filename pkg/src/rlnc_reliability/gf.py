"""Arithmetic over GF(2^w) and matrix rank by Gaussian elimination.

Field elements are plain integers in ``[0, q)``; polynomial bit ``i`` is the
coefficient of ``x**i``. Only characteristic-2 fields with ``w`` in
``{1, 2, 4, 8}`` are supported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

SUPPORTED_DEGREES = (1, 2, 4, 8)

DEFAULT_POLYNOMIALS = {
    1: 0b11,
    2: 0b111,
    4: 0b10011,
    8: 0x11D,
}


class FieldError(ValueError):
    """Invalid field description or out-of-range element."""


def _clmul(a: int, b: int) -> int:
    """Carry-less product of two bit-vector polynomials."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _polymod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def is_irreducible(poly: int) -> bool:
    """Exhaustive divisor test; fine for degree <= 8."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for cand in range(1 << d, 1 << (d + 1)):
            if _polymod(poly, cand) == 0:
                return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """GF(2^w) with a fixed reduction polynomial.

    ``reduction_polynomial`` is ignored for ``w == 1``.
    """

    extension_degree: int
    reduction_polynomial: int | None = None
    _poly: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        w = self.extension_degree
        if w not in SUPPORTED_DEGREES:
            raise FieldError(f"unsupported extension degree {w}; expected one of {SUPPORTED_DEGREES}")
        poly = self.reduction_polynomial
        if poly is None or w == 1:
            poly = DEFAULT_POLYNOMIALS[w]
        if poly.bit_length() - 1 != w:
            raise FieldError(f"reduction polynomial {poly:#x} does not have degree {w}")
        if not is_irreducible(poly):
            raise FieldError(f"reduction polynomial {poly:#x} is reducible")
        object.__setattr__(self, "_poly", poly)

    @classmethod
    def from_q(cls, q: int, reduction_polynomial: int | None = None) -> "FieldSpec":
        w = q.bit_length() - 1
        if q < 2 or q != 1 << w:
            raise FieldError(f"field size {q} is not a power of two")
        return cls(w, reduction_polynomial)

    @property
    def q(self) -> int:
        return 1 << self.extension_degree

    @property
    def polynomial(self) -> int:
        return self._poly

    def check(self, a: int) -> None:
        if not 0 <= a < self.q:
            raise FieldError(f"element {a} outside GF({self.q})")

    @cached_property
    def tables(self) -> tuple[np.ndarray, np.ndarray]:
        """(exp, log) tables over a primitive element.

        ``exp`` has length ``2*(q-1)`` so ``exp[log[a] + log[b]]`` needs no
        modular reduction. ``log[0]`` is unused and set to 0.
        """
        q = self.q
        if q == 2:
            return np.array([1, 1], dtype=np.uint8), np.array([0, 0], dtype=np.int32)
        for g in range(2, q):
            powers = [1]
            x = 1
            for _ in range(q - 2):
                x = _polymod(_clmul(x, g), self._poly)
                powers.append(x)
            if len(set(powers)) == q - 1:
                break
        else:  # pragma: no cover - every finite field has a generator
            raise FieldError("no primitive element found")
        exp = np.array(powers + powers, dtype=np.uint8)
        log = np.zeros(q, dtype=np.int32)
        for i, v in enumerate(powers):
            log[v] = i
        return exp, log


def field_mul(a: int, b: int, f: FieldSpec) -> int:
    f.check(a)
    f.check(b)
    if f.extension_degree == 1:
        return a & b
    return _polymod(_clmul(a, b), f.polynomial)


def field_inv(a: int, f: FieldSpec) -> int:
    f.check(a)
    if a == 0:
        raise ZeroDivisionError("zero has no multiplicative inverse")
    # a^(q-2) = a^-1 in GF(q)
    result, base, e = 1, a, f.q - 2
    while e:
        if e & 1:
            result = field_mul(result, base, f)
        base = field_mul(base, base, f)
        e >>= 1
    return result


@dataclass(frozen=True)
class FieldMatrix:
    """Dense row-major matrix over GF(q).

    Entries are stored as a read-only ``uint8`` array of shape
    ``(rows, cols)``. Over GF(2) :meth:`packed_rows` gives the rows as
    integer bitsets (bit ``c`` is column ``c``).
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.int64, copy=True)
        if arr.ndim != 2:
            if arr.size == 0:
                arr = arr.reshape(0, 0)
            else:
                raise ValueError("matrix entries must be two-dimensional")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise FieldError("matrix entries outside [0, 256)")
        arr = arr.astype(np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], cols: int | None = None) -> "FieldMatrix":
        rows = [list(r) for r in rows]
        if not rows:
            return cls(np.zeros((0, cols or 0), dtype=np.uint8))
        return cls(np.array(rows))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def validate(self, f: FieldSpec) -> None:
        if self.entries.size and int(self.entries.max()) >= f.q:
            raise FieldError(f"matrix entry {int(self.entries.max())} outside GF({f.q})")

    def packed_rows(self) -> list[int]:
        weights = [1 << c for c in range(self.cols)]
        return [sum(w for w, e in zip(weights, row) if e & 1) for row in self.entries.tolist()]

    def transpose(self) -> "FieldMatrix":
        return FieldMatrix(self.entries.T)


def _rank_gf2(rows: list[int]) -> int:
    # basis keyed by lowest set bit
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            low = r & -r
            if low in basis:
                r ^= basis[low]
            else:
                basis[low] = r
                break
    return len(basis)


def matrix_rank(M: FieldMatrix, f: FieldSpec) -> int:
    """Rank of ``M`` over ``f`` by forward elimination.

    Uses word-wide XOR on packed rows over GF(2) and log/exp tables with
    explicit pivot scaling otherwise. ``M`` is never modified.
    """
    M.validate(f)
    if M.rows == 0 or M.cols == 0:
        return 0
    if f.extension_degree == 1:
        return _rank_gf2(M.packed_rows())

    exp, log = f.tables
    order = f.q - 1
    a = M.entries.astype(np.int64)  # working copy
    n_rows, n_cols = a.shape
    rank = 0
    for c in range(n_cols):
        nz = np.nonzero(a[rank:, c])[0]
        if nz.size == 0:
            continue
        p = rank + int(nz[0])
        if p != rank:
            a[[rank, p]] = a[[p, rank]]
        pivot_row = a[rank]
        inv_log = (order - log[pivot_row[c]]) % order
        nzp = pivot_row != 0
        scaled = np.zeros_like(pivot_row)
        scaled[nzp] = exp[(log[pivot_row[nzp]] + inv_log) % order]
        a[rank] = scaled
        for r in range(rank + 1, n_rows):
            coef = a[r, c]
            if coef:
                lc = log[coef]
                a[r, nzp] ^= exp[(log[scaled[nzp]] + lc) % order]
        rank += 1
        if rank == n_rows:
            break
    return rank
