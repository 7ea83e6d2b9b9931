import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rlnc_reliability.gf import (
    DEFAULT_POLYNOMIALS,
    FieldError,
    FieldMatrix,
    FieldSpec,
    field_inv,
    field_mul,
    is_irreducible,
    matrix_rank,
)

from oracles import poly_mul_mod, rank_by_span, rank_by_subsets

FIELDS = [FieldSpec(w) for w in (1, 2, 4, 8)]


def test_mul_examples():
    assert field_mul(1, 1, FieldSpec(1)) == 1
    for f in FIELDS:
        assert field_mul(0, f.q - 1, f) == 0
    assert field_mul(0x02, 0x80, FieldSpec(8, 0x11D)) == 0x1D


@pytest.mark.parametrize("w", [2, 4, 8])
def test_mul_matches_schoolbook(w):
    f = FieldSpec(w)
    for a, b in itertools.product(range(f.q), repeat=2):
        assert field_mul(a, b, f) == poly_mul_mod(a, b, f.polynomial)


@pytest.mark.parametrize("w", [1, 2, 4, 8])
def test_inverse_by_search(w):
    f = FieldSpec(w)
    assert field_inv(1, f) == 1
    for a in range(1, f.q):
        b = field_inv(a, f)
        assert field_mul(a, b, f) == 1
        assert [c for c in range(1, f.q) if field_mul(a, c, f) == 1] == [b]


def test_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        field_inv(0, FieldSpec(8))


def test_out_of_range_elements():
    with pytest.raises(FieldError):
        field_mul(4, 1, FieldSpec(2))
    with pytest.raises(FieldError):
        field_inv(256, FieldSpec(8))


def test_field_validation():
    for w in (3, 5, 16):
        with pytest.raises(FieldError):
            FieldSpec(w)
    with pytest.raises(FieldError):
        FieldSpec(8, 0x100)  # x^8, reducible
    with pytest.raises(FieldError):
        FieldSpec(4, 0b111)  # wrong degree
    assert FieldSpec(8, 0x11B).q == 256
    assert FieldSpec.from_q(256).polynomial == 0x11D
    with pytest.raises(FieldError):
        FieldSpec.from_q(6)


def test_irreducibility_check():
    assert all(is_irreducible(p) for p in DEFAULT_POLYNOMIALS.values())
    assert not is_irreducible(0b101)  # (x+1)^2
    assert not is_irreducible(0x101)  # (x+1)^8
    irreducible_deg4 = [p for p in range(16, 32) if is_irreducible(p)]
    assert irreducible_deg4 == [0b10011, 0b11001, 0b11111]


def test_field_properties():
    f = FieldSpec(4)
    elems = range(f.q)
    for a, b, c in itertools.product(elems, repeat=3):
        assert field_mul(a, b, f) == field_mul(b, a, f)
        assert field_mul(a, field_mul(b, c, f), f) == field_mul(field_mul(a, b, f), c, f)
        assert field_mul(a, b ^ c, f) == field_mul(a, b, f) ^ field_mul(a, c, f)


def test_rank_examples():
    for f in FIELDS:
        for K in (1, 3, 6):
            assert matrix_rank(FieldMatrix(np.eye(K, dtype=np.uint8)), f) == K
            assert matrix_rank(FieldMatrix(np.zeros((4, K), dtype=np.uint8)), f) == 0
    assert matrix_rank(FieldMatrix.from_rows([[1, 1], [1, 1]]), FieldSpec(1)) == 1


def test_rank_of_empty():
    for shape in ((0, 5), (5, 0), (0, 0)):
        M = FieldMatrix(np.zeros(shape, dtype=np.uint8))
        assert matrix_rank(M, FieldSpec(1)) == 0
        assert matrix_rank(M, FieldSpec(8)) == 0


def test_rank_rejects_bad_entries():
    with pytest.raises(FieldError):
        matrix_rank(FieldMatrix.from_rows([[0, 2]]), FieldSpec(1))


def test_rank_does_not_mutate():
    rng = np.random.default_rng(1)
    a = rng.integers(0, 256, size=(6, 5), dtype=np.uint8)
    M = FieldMatrix(a.copy())
    matrix_rank(M, FieldSpec(8))
    assert np.array_equal(M.entries, a)
    assert not M.entries.flags.writeable


def test_binary_rank_against_subset_oracle():
    # every binary matrix with at most 3 rows and 3 columns, plus 4x4 samples
    for r, c in itertools.product(range(1, 4), repeat=2):
        for bits in range(1 << (r * c)):
            rows = [(bits >> (i * c)) & ((1 << c) - 1) for i in range(r)]
            M = FieldMatrix.from_rows([[(v >> k) & 1 for k in range(c)] for v in rows], cols=c)
            assert matrix_rank(M, FieldSpec(1)) == rank_by_subsets(rows)
    rng = np.random.default_rng(7)
    for _ in range(2000):
        a = rng.integers(0, 2, size=(4, 4), dtype=np.uint8)
        M = FieldMatrix(a)
        assert matrix_rank(M, FieldSpec(1)) == rank_by_subsets(M.packed_rows())


@pytest.mark.parametrize("w", [2, 4])
def test_extension_rank_against_span_oracle(w):
    f = FieldSpec(w)
    rng = np.random.default_rng(w)
    for _ in range(150):
        r, c = rng.integers(1, 4, size=2)
        # sparse draws make rank deficiency common
        a = rng.integers(0, f.q, size=(r, c), dtype=np.uint8) * (rng.random((r, c)) < 0.6)
        M = FieldMatrix(a.astype(np.uint8))
        assert matrix_rank(M, f) == rank_by_span([tuple(int(x) for x in row) for row in a], f.q, f.polynomial)


matrices = st.sampled_from([1, 2, 4, 8]).flatmap(
    lambda w: st.tuples(
        st.just(w),
        st.integers(1, 8).flatmap(
            lambda r: st.integers(1, 8).flatmap(
                lambda c: st.lists(
                    st.lists(st.integers(0, (1 << w) - 1), min_size=c, max_size=c),
                    min_size=r,
                    max_size=r,
                )
            )
        ),
    )
)


@settings(max_examples=200, deadline=None)
@given(matrices, st.randoms(use_true_random=False))
def test_rank_invariant_under_row_operations(wm, rnd):
    w, rows = wm
    f = FieldSpec(w)
    base = matrix_rank(FieldMatrix.from_rows(rows), f)
    perm = rows[:]
    rnd.shuffle(perm)
    assert matrix_rank(FieldMatrix.from_rows(perm), f) == base
    i = rnd.randrange(len(rows))
    s = rnd.randrange(1, f.q)
    scaled = [list(r) for r in rows]
    scaled[i] = [field_mul(s, x, f) for x in scaled[i]]
    assert matrix_rank(FieldMatrix.from_rows(scaled), f) == base
    assert base <= min(len(rows), len(rows[0]))


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_rank_equals_transpose_rank(wm):
    w, rows = wm
    f = FieldSpec(w)
    M = FieldMatrix.from_rows(rows)
    assert matrix_rank(M, f) == matrix_rank(M.transpose(), f)


def test_rank_polynomial_independent_statistics():
    # full-rank frequency of random 4x4 matrices does not depend on the modulus
    rng = np.random.default_rng(3)
    draws = rng.integers(0, 16, size=(3000, 4, 4), dtype=np.uint8)
    counts = []
    for poly in (0b10011, 0b11001, 0b11111):
        f = FieldSpec(4, poly)
        counts.append(sum(matrix_rank(FieldMatrix(d), f) == 4 for d in draws))
    expected = 3000 * np.prod([1 - 16.0 ** (i - 4) for i in range(4)])
    for c in counts:
        assert abs(c - expected) < 4 * np.sqrt(expected * (1 - expected / 3000))
