"""Linear algebra core, checked against exhaustive oracles on tiny fields."""

import itertools

import numpy as np
import pytest

from obstrukt.fplinalg import (
    AffineSet,
    FpMatrix,
    image_basis,
    kernel_basis,
    quotient_coords,
    rref,
    solve_affine,
    span_contains,
    subspace_sum,
)


def enumerate_row_space(mat):
    """Oracle: every F_p-combination of the rows, as a set of tuples."""
    p = mat.p
    out = set()
    for coeffs in itertools.product(range(p), repeat=mat.rows):
        v = np.zeros(mat.cols, dtype=np.int64)
        for c, row in zip(coeffs, mat.a):
            v = (v + c * row) % p
        out.add(tuple(v.tolist()))
    return out


def test_rref_identity():
    m = FpMatrix.identity(2, 3)
    reduced, pivots, rank = rref(m)
    assert reduced == m
    assert pivots == (0, 1, 2)
    assert rank == 3


def test_rref_zero():
    m = FpMatrix.zeros(5, 2, 4)
    reduced, pivots, rank = rref(m)
    assert reduced == m
    assert pivots == ()
    assert rank == 0


def test_rref_rank_against_rowspace_oracle():
    rng = np.random.default_rng(7)
    for _ in range(20):
        m = FpMatrix(2, rng.integers(0, 2, size=(6, 6)))
        _, _, rank = rref(m)
        assert len(enumerate_row_space(m)) == 2**rank


def test_rref_idempotent():
    rng = np.random.default_rng(11)
    for p in (2, 3, 5):
        for _ in range(10):
            m = FpMatrix(p, rng.integers(0, p, size=(5, 7)))
            reduced, _, _ = rref(m)
            again, _, _ = rref(reduced.copy())
            assert again == reduced


def test_kernel_identity_and_zero():
    assert kernel_basis(FpMatrix.identity(3, 4)) == []
    kern = kernel_basis(FpMatrix.zeros(2, 3, 3))
    assert np.array_equal(np.vstack(kern), np.eye(3, dtype=np.int64))


def test_kernel_against_exhaustive_oracle():
    rng = np.random.default_rng(3)
    for _ in range(8):
        m = FpMatrix(3, rng.integers(0, 3, size=(5, 5)))
        kern = kernel_basis(m)
        # oracle: every vector of F_3^5 with m v = 0
        null = {
            tuple(v)
            for v in itertools.product(range(3), repeat=5)
            if not np.any(m.apply(np.array(v)))
        }
        spanned = enumerate_row_space(FpMatrix.from_rows(3, kern, 5)) if kern else {(0,) * 5}
        assert spanned == null
        assert len(kern) + rref(m)[2] == m.cols
        for v in kern:
            assert not np.any(m.apply(v))


def test_solve_affine_identity_and_inconsistent():
    m = FpMatrix.identity(5, 3)
    s = solve_affine(m, [1, 2, 3])
    assert not s.is_empty
    assert np.array_equal(s.point, [1, 2, 3])
    assert s.directions.rows == 0

    s = solve_affine(FpMatrix.zeros(3, 2, 4), [1, 0])
    assert s.is_empty


def test_solve_affine_membership_oracle():
    rng = np.random.default_rng(5)
    for _ in range(6):
        m = FpMatrix(2, rng.integers(0, 2, size=(4, 6)))
        b = rng.integers(0, 2, size=4)
        s = solve_affine(m, b)
        for v in itertools.product(range(2), repeat=6):
            v = np.asarray(v, dtype=np.int64)
            direct = bool(np.array_equal(m.apply(v), b % 2))
            assert s.contains(v) == direct
        if not s.is_empty:
            for x in s.enumerate():
                assert np.array_equal(m.apply(x), b % 2)


def test_quotient_of_full_space_is_zero():
    reps, proj = quotient_coords(np.eye(4, dtype=np.int64), 4, 2)
    assert reps == []
    assert proj.rows == 0


def test_quotient_projection_properties():
    rng = np.random.default_rng(13)
    for p in (2, 3):
        sub = rng.integers(0, p, size=(3, 6))
        reps, proj = quotient_coords(sub, 6, p)
        for row in sub:
            assert not np.any(proj.apply(row))
        for i, r in enumerate(reps):
            e = np.zeros(len(reps), dtype=np.int64)
            e[i] = 1
            assert np.array_equal(proj.apply(r), e)


def test_subspace_sum_with_zero():
    v = [np.array([1, 0, 1]), np.array([0, 1, 1])]
    s = subspace_sum(v, [], 3, 2)
    assert {tuple(x) for x in s} <= enumerate_row_space(FpMatrix.from_rows(2, v, 3))
    assert len(s) == 2


def test_sum_dimension_formula_with_intersection_oracle():
    rng = np.random.default_rng(17)
    for _ in range(10):
        a = [row for row in rng.integers(0, 2, size=(2, 8))]
        b = [row for row in rng.integers(0, 2, size=(2, 8))]
        s = subspace_sum(a, b, 8, 2)
        span_a = enumerate_row_space(FpMatrix.from_rows(2, a, 8))
        span_b = enumerate_row_space(FpMatrix.from_rows(2, b, 8))
        inter = span_a & span_b
        dim_a = int(np.log2(len(span_a)))
        dim_b = int(np.log2(len(span_b)))
        dim_i = int(np.log2(len(inter)))
        assert len(s) == dim_a + dim_b - dim_i


def test_affine_set_canonical_point():
    dirs = FpMatrix(2, [[1, 1, 0]])
    s1 = AffineSet(2, 3, [1, 1, 1], dirs)
    s2 = AffineSet(2, 3, [0, 0, 1], dirs)
    assert s1 == s2


def test_span_contains():
    vs = [np.array([1, 0, 1]), np.array([0, 1, 0])]
    assert span_contains(vs, [1, 1, 1], 3, 2)
    assert not span_contains(vs, [0, 0, 1], 3, 2)
