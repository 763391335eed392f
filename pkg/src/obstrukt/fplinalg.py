"""Dense exact linear algebra over prime fields F_p.

Every value carries its modulus; mixing moduli raises instead of coercing.
All outputs are canonical (reduced row echelon form, RREF-reduced coset
representatives), so any computation built on top is deterministic.
"""

from __future__ import annotations

import itertools

import numpy as np


class FpLinalgError(Exception):
    pass


class InvalidDimension(FpLinalgError):
    pass


class MixedModulus(FpLinalgError):
    pass


class TooLarge(FpLinalgError):
    pass


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"modulus {p} is not prime")


def inv_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError(f"0 is not invertible mod {p}")
    return pow(a, p - 2, p)


def as_vector(v, p: int) -> np.ndarray:
    a = np.asarray(v, dtype=np.int64)
    if a.ndim != 1:
        raise InvalidDimension(f"expected a vector, got shape {a.shape}")
    return a % p


class FpMatrix:
    """A rows x cols matrix over F_p, entries stored reduced."""

    __slots__ = ("p", "a", "_rref")

    def __init__(self, p: int, entries):
        _check_prime(p)
        a = np.asarray(entries, dtype=np.int64)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        if a.ndim != 2:
            raise InvalidDimension(f"expected a matrix, got shape {a.shape}")
        self.p = p
        self.a = a % p
        self._rref = None

    @classmethod
    def zeros(cls, p: int, rows: int, cols: int) -> "FpMatrix":
        return cls(p, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, p: int, n: int) -> "FpMatrix":
        return cls(p, np.eye(n, dtype=np.int64))

    @classmethod
    def from_rows(cls, p: int, rows, cols: int) -> "FpMatrix":
        """Build from a list of vectors; the empty list gives a 0 x cols matrix."""
        rows = list(rows)
        if not rows:
            return cls.zeros(p, 0, cols)
        m = cls(p, np.vstack([as_vector(r, p) for r in rows]))
        if m.cols != cols:
            raise InvalidDimension(f"rows have length {m.cols}, expected {cols}")
        return m

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    def copy(self) -> "FpMatrix":
        return FpMatrix(self.p, self.a.copy())

    def _require_same_p(self, other: "FpMatrix") -> None:
        if self.p != other.p:
            raise MixedModulus(f"cannot mix moduli {self.p} and {other.p}")

    def matmul(self, other: "FpMatrix") -> "FpMatrix":
        self._require_same_p(other)
        if self.cols != other.rows:
            raise InvalidDimension(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        return FpMatrix(self.p, (self.a @ other.a) % self.p)

    def apply(self, v) -> np.ndarray:
        v = as_vector(v, self.p)
        if v.shape[0] != self.cols:
            raise InvalidDimension(f"vector length {v.shape[0]}, expected {self.cols}")
        if self.rows == 0:
            return np.zeros(0, dtype=np.int64)
        return (self.a @ v) % self.p

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FpMatrix)
            and self.p == other.p
            and self.a.shape == other.a.shape
            and bool(np.array_equal(self.a, other.a))
        )

    def __repr__(self) -> str:
        return f"FpMatrix(p={self.p}, {self.a.tolist()})"


def rref(m: FpMatrix) -> tuple[FpMatrix, tuple[int, ...], int]:
    """Reduced row echelon form; returns (reduced, pivot columns, rank)."""
    if m._rref is not None:
        return m._rref
    p = m.p
    a = m.a.copy()
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        a[r] = (a[r] * inv_mod(int(a[r, c]), p)) % p
        col = a[:, c].copy()
        col[r] = 0
        if np.any(col):
            a = (a - np.outer(col, a[r])) % p
        pivots.append(c)
        r += 1
    reduced = FpMatrix(p, a)
    result = (reduced, tuple(pivots), r)
    m._rref = result
    reduced._rref = result
    return result


def row_space(m: FpMatrix) -> FpMatrix:
    """Canonical basis of the row space: the nonzero rows of the RREF."""
    reduced, _, rank = rref(m)
    return FpMatrix(m.p, reduced.a[:rank].copy()) if rank else FpMatrix.zeros(m.p, 0, m.cols)


def kernel_basis(m: FpMatrix) -> list[np.ndarray]:
    """RREF-canonical basis of {v : m v = 0}."""
    p = m.p
    reduced, pivots, rank = rref(m)
    free = [c for c in range(m.cols) if c not in set(pivots)]
    vecs = []
    for f in free:
        v = np.zeros(m.cols, dtype=np.int64)
        v[f] = 1
        for j, c in enumerate(pivots):
            v[c] = (-int(reduced.a[j, f])) % p
        vecs.append(v)
    if not vecs:
        return []
    return [row for row in row_space(FpMatrix.from_rows(p, vecs, m.cols)).a]


def image_basis(m: FpMatrix) -> list[np.ndarray]:
    """RREF-canonical basis of the column space (image of v -> m v)."""
    return [row for row in row_space(FpMatrix(m.p, m.a.T)).a]


def reduce_mod_rows(v, basis: FpMatrix) -> np.ndarray:
    """Canonical coset representative of v modulo the row space of an RREF basis."""
    p = basis.p
    v = as_vector(v, p).copy()
    reduced, pivots, rank = rref(basis)
    for j in range(rank):
        c = pivots[j]
        if v[c]:
            v = (v - v[c] * reduced.a[j]) % p
    return v


def in_row_space(v, basis: FpMatrix) -> bool:
    return not np.any(reduce_mod_rows(v, basis))


class AffineSet:
    """The solution set of a linear system: a point plus a direction space.

    EMPTY is a value: ``point is None`` and there are no directions.
    The point is always the RREF-canonical coset representative.
    """

    __slots__ = ("p", "dim", "point", "directions")

    def __init__(self, p: int, dim: int, point, directions: FpMatrix | None = None):
        _check_prime(p)
        self.p = p
        self.dim = dim
        if directions is None:
            directions = FpMatrix.zeros(p, 0, dim)
        directions = row_space(directions)
        if directions.cols != dim:
            raise InvalidDimension("direction length mismatch")
        if point is None:
            if directions.rows:
                raise ValueError("EMPTY sets carry no directions")
            self.point = None
            self.directions = directions
        else:
            self.point = reduce_mod_rows(as_vector(point, p), directions)
            self.directions = directions

    @classmethod
    def empty(cls, p: int, dim: int) -> "AffineSet":
        return cls(p, dim, None)

    @property
    def is_empty(self) -> bool:
        return self.point is None

    def size(self) -> int:
        return 0 if self.is_empty else self.p ** self.directions.rows

    def contains(self, v) -> bool:
        if self.is_empty:
            return False
        diff = (as_vector(v, self.p) - self.point) % self.p
        return not np.any(reduce_mod_rows(diff, self.directions))

    def enumerate(self, limit: int = 4096):
        """Yield every member; raises TooLarge beyond ``limit`` points."""
        if self.is_empty:
            return
        k = self.directions.rows
        if self.p ** k > limit:
            raise TooLarge(f"affine set has {self.p ** k} > {limit} points")
        if k == 0:
            yield self.point.copy()
            return
        d = self.directions.a
        for coeffs in itertools.product(range(self.p), repeat=k):
            yield (self.point + np.asarray(coeffs, dtype=np.int64) @ d) % self.p

    def __eq__(self, other) -> bool:
        if not isinstance(other, AffineSet):
            return NotImplemented
        if self.p != other.p or self.dim != other.dim:
            return False
        if self.is_empty or other.is_empty:
            return self.is_empty and other.is_empty
        return bool(np.array_equal(self.point, other.point)) and self.directions == other.directions

    def __repr__(self) -> str:
        if self.is_empty:
            return f"AffineSet(EMPTY, p={self.p}, dim={self.dim})"
        return (
            f"AffineSet(p={self.p}, point={self.point.tolist()}, "
            f"directions={self.directions.a.tolist()})"
        )


def solve_affine(m: FpMatrix, b) -> AffineSet:
    """All x with m x = b, as a canonical AffineSet (EMPTY when inconsistent)."""
    p = m.p
    b = as_vector(b, p)
    if b.shape[0] != m.rows:
        raise InvalidDimension(f"rhs length {b.shape[0]}, expected {m.rows}")
    if m.cols == 0:
        if np.any(b):
            return AffineSet.empty(p, 0)
        return AffineSet(p, 0, np.zeros(0, dtype=np.int64))
    aug = FpMatrix(p, np.hstack([m.a, b.reshape(-1, 1)]))
    reduced, pivots, rank = rref(aug)
    if m.cols in pivots:
        return AffineSet.empty(p, m.cols)
    x = np.zeros(m.cols, dtype=np.int64)
    for j, c in enumerate(pivots):
        x[c] = reduced.a[j, m.cols]
    kern = kernel_basis(m)
    dirs = FpMatrix.from_rows(p, kern, m.cols) if kern else None
    return AffineSet(p, m.cols, x, dirs)


def quotient_coords(sub, ambient: int, p: int) -> tuple[list[np.ndarray], FpMatrix]:
    """Quotient F_p^ambient by the span of ``sub``.

    Returns (complement representatives, projection): the representatives are
    the standard basis vectors at the non-pivot coordinates of the RREF of the
    subspace, and the projection matrix sends a vector to its coordinates in
    that complement basis.  projection(rep_i) = e_i and projection(sub) = 0.
    """
    if isinstance(sub, FpMatrix):
        mat = sub
        if mat.p != p:
            raise MixedModulus(f"cannot mix moduli {mat.p} and {p}")
    else:
        mat = FpMatrix.from_rows(p, sub, ambient)
    if mat.cols != ambient:
        raise InvalidDimension(f"subspace vectors have length {mat.cols}, expected {ambient}")
    reduced, pivots, rank = rref(mat)
    free = [c for c in range(ambient) if c not in set(pivots)]
    reps = []
    proj = np.zeros((len(free), ambient), dtype=np.int64)
    for i, f in enumerate(free):
        e = np.zeros(ambient, dtype=np.int64)
        e[f] = 1
        reps.append(e)
        proj[i, f] = 1
        for j, c in enumerate(pivots):
            proj[i, c] = (-int(reduced.a[j, f])) % p
    return reps, FpMatrix(p, proj if free else np.zeros((0, ambient), dtype=np.int64))


def subspace_sum(a, b, ambient: int, p: int) -> list[np.ndarray]:
    """RREF-canonical basis of span(a) + span(b)."""
    rows = list(a) + list(b)
    if not rows:
        return []
    for r in rows:
        if as_vector(r, p).shape[0] != ambient:
            raise InvalidDimension("vector length mismatch in subspace_sum")
    return [row for row in row_space(FpMatrix.from_rows(p, rows, ambient)).a]


def span_contains(vectors, v, ambient: int, p: int) -> bool:
    mat = FpMatrix.from_rows(p, vectors, ambient) if vectors else FpMatrix.zeros(p, 0, ambient)
    return in_row_space(v, mat)
