from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctcoding.gf import (
    FieldError,
    FieldMatrix,
    IncrementalDecoder,
    PrimeField,
    field_ops,
    has_mds_property,
    in_span,
    mds_generator,
    rank,
    rref,
    unique_coordinate_solve,
)
from oracles import brute_in_span, brute_nonsingular, brute_rank, brute_solutions


def M(rows, q):
    return FieldMatrix(PrimeField(q), rows)


# ---------------------------------------------------------------- field


def test_inverse_examples():
    assert field_ops(2).inv(1) == 1
    assert field_ops(5).inv(2) == 3


@pytest.mark.parametrize("q", [4, 1, 0, 9, 65536, 65539, 2**17 + 1])
def test_bad_modulus(q):
    with pytest.raises(FieldError):
        PrimeField(q)


def test_not_prime_message():
    with pytest.raises(FieldError, match="not prime"):
        PrimeField(4)


def test_largest_modulus_accepted():
    assert PrimeField(65537).inv(3) * 3 % 65537 == 1


@pytest.mark.parametrize("q", [2, 3, 5, 7, 13, 31])
def test_field_axioms_exhaustive(q):
    f = PrimeField(q)
    el = range(q)
    for a in el:
        assert f.add(a, f.neg(a)) == 0
        assert f.mul(a, 1) == a
        if a:
            assert f.mul(a, f.inv(a)) == 1
        for b in el:
            assert f.add(a, b) == f.add(b, a)
            assert f.mul(a, b) == f.mul(b, a)
            for c in el:
                assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
                assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))


def test_inverses_257():
    f = PrimeField(257)
    assert all(f.mul(a, f.inv(a)) == 1 for a in range(1, 257))
    with pytest.raises(ZeroDivisionError):
        f.inv(0)


# ---------------------------------------------------------------- rank


def test_rank_examples():
    assert rank(FieldMatrix.identity(PrimeField(2), 3)) == 3
    assert rank(FieldMatrix.zeros(PrimeField(2), 2, 4)) == 0
    assert rank(M([[1, 0, 1], [0, 1, 1]], 2)) == 2
    assert brute_rank([[1, 0, 1], [0, 1, 1]], 2) == 2


def test_rref_pivots_first_nonzero():
    r, piv = rref(M([[0, 2, 1], [0, 1, 2]], 3))
    assert piv == [1]
    assert r.tolist() == [[0, 1, 2], [0, 0, 0]]


def small_matrices(max_dim=4):
    return st.tuples(st.sampled_from([2, 3, 5]), st.integers(1, max_dim), st.integers(1, max_dim)).flatmap(
        lambda t: st.tuples(
            st.just(t[0]),
            st.lists(st.lists(st.integers(0, t[0] - 1), min_size=t[2], max_size=t[2]), min_size=t[1], max_size=t[1]),
        )
    )


@settings(max_examples=200, deadline=None)
@given(small_matrices(3))
def test_rank_matches_enumeration(qa):
    q, rows = qa
    assert rank(M(rows, q)) == brute_rank(rows, q)


@settings(max_examples=200, deadline=None)
@given(small_matrices(6))
def test_rank_transpose(qa):
    q, rows = qa
    m = M(rows, q)
    assert rank(m) == rank(m.T) <= min(m.shape)


def test_rank_invariant_under_row_operations():
    rng = np.random.default_rng(11)
    for _ in range(300):
        q = int(rng.choice([2, 3, 5, 7]))
        r, c = rng.integers(1, 7, size=2)
        a = rng.integers(0, q, size=(r, c))
        base = rank(M(a, q))
        b = a.copy()
        i, j = rng.integers(0, r, size=2)
        b[[i, j]] = b[[j, i]]
        b[i] = b[i] * int(rng.integers(1, q)) % q
        if r > 1:
            k = (i + 1) % r
            b[k] = (b[k] + int(rng.integers(0, q)) * b[i]) % q
        assert rank(M(b, q)) == base


# ---------------------------------------------------------------- span


def test_in_span_examples():
    f2 = PrimeField(2)
    assert in_span([0, 0, 0], M([[1, 0], [0, 1], [1, 1]], 2))
    assert not in_span([1, 0], M([[0], [1]], 2))
    assert in_span([1, 1], FieldMatrix.identity(f2, 2))
    assert brute_in_span([1, 1], [[1, 0], [0, 1]], 2)


def test_in_span_dimension_mismatch():
    with pytest.raises(FieldError):
        in_span([1, 0, 0], M([[1], [0]], 2))


def test_in_span_equals_rank_test_and_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(400):
        q = int(rng.choice([2, 3, 5]))
        h, w = rng.integers(1, 7, size=2)
        w = min(w, 4)  # enumeration cost q**w
        a = rng.integers(0, q, size=(h, w))
        v = rng.integers(0, q, size=h) if rng.random() < 0.5 else a @ rng.integers(0, q, size=w) % q
        m = M(a, q)
        got = in_span(v, m)
        assert got == (rank(m.hstack(v)) == rank(m))
        assert got == brute_in_span(v, a, q)


# ---------------------------------------------------------------- unique coordinate


def test_unique_coordinate_examples():
    assert unique_coordinate_solve(FieldMatrix.identity(PrimeField(3), 2), [2, 1], 0) == 2
    assert unique_coordinate_solve(M([[1, 1]], 2), [1], 0) is None
    a = M([[1, 0, 1], [0, 1, 1]], 2)
    c = a.matvec([1, 1, 0])
    assert unique_coordinate_solve(a, c, 2) is None


def test_unique_coordinate_inconsistent():
    with pytest.raises(FieldError, match="inconsistent"):
        unique_coordinate_solve(M([[1, 0], [1, 0]], 2), [0, 1], 0)


def test_unique_coordinate_against_enumeration():
    rng = np.random.default_rng(3)
    for _ in range(300):
        q = int(rng.choice([2, 3]))
        h, w = rng.integers(1, 5, size=2)
        a = rng.integers(0, q, size=(h, w))
        b = rng.integers(0, q, size=w)
        c = a @ b % q
        sols = brute_solutions(a, c, q)
        for i in range(w):
            vals = {s[i] for s in sols}
            got = unique_coordinate_solve(M(a, q), c, i)
            if len(vals) == 1:
                assert got == b[i]
            else:
                assert got is None


# ---------------------------------------------------------------- MDS


def test_mds_example_vandermonde():
    g = mds_generator(4, 2, PrimeField(5))
    assert g.tolist() == [[1, 1, 1, 1], [0, 1, 2, 3]]
    pairs = list(combinations(range(4), 2))
    assert len(pairs) == 6
    assert all(brute_nonsingular(g.select_columns(p).data, 5) for p in pairs)


def test_mds_square():
    g = mds_generator(2, 2, PrimeField(3))
    assert rank(g) == 2


def test_mds_field_too_small():
    with pytest.raises(FieldError, match="field too small"):
        mds_generator(4, 2, PrimeField(3))


@pytest.mark.parametrize("n_out", range(1, 13))
def test_mds_any_k_columns(n_out):
    f = PrimeField(13)
    for k_in in range(1, n_out + 1):
        assert has_mds_property(mds_generator(n_out, k_in, f))


# ---------------------------------------------------------------- incremental decoding


def test_incremental_decoder_recovers_payload():
    f = PrimeField(65537)
    rng = np.random.default_rng(0)
    n = 40
    truth = rng.integers(0, f.q, size=n)
    dec = IncrementalDecoder(f, n)
    fed = 0
    while not dec.complete:
        coeffs = rng.integers(0, f.q, size=n)
        dec.add(coeffs, int(coeffs @ truth % f.q))
        fed += 1
    assert fed == n
    assert np.array_equal(dec.solution(), truth)


def test_incremental_decoder_rejects_dependent_rows():
    f = PrimeField(7)
    dec = IncrementalDecoder(f, 3)
    assert dec.add([1, 2, 3], 4)
    assert not dec.add([2, 4, 6], 1)
    assert dec.add([0, 1, 0], 5)
    assert dec.rank == 2
    with pytest.raises(FieldError):
        dec.solution()
