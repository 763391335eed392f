"""Compiled graded-commutative dg-algebras over F_p, truncated at a degree cap.

A finite presentation (generators with degrees, homogeneous relations, a
differential on generators) is compiled into per-degree monomial bases by
taking exact RREF quotients of the free graded-commutative algebra by the
degreewise span of relation multiples.  Everything downstream (products,
differentials, cohomology, morphisms) is plain linear algebra over F_p.

Monomials are exponent vectors over the declared generators; for odd p the
square of an odd-degree generator is identically zero.  Canonical monomial
order is graded lexicographic in the declared generator order, so compiled
bases are deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import fplinalg as la
from .fplinalg import AffineSet, FpMatrix
from .poly import ParseError, poly_to_exponents


class DgAlgError(Exception):
    pass


class IllFormedDifferential(DgAlgError):
    pass


class DegreeOverflow(DgAlgError):
    pass


class NotAMorphism(DgAlgError):
    pass


Monomial = tuple  # exponent vector aligned with the declared generators


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int


class Presentation:
    """A finite presentation of a graded-commutative dg-algebra over F_p.

    relations and differential values may be polynomial strings (see the
    grammar in obstrukt.poly) or pre-parsed {exponent tuple: coeff} dicts.
    """

    def __init__(self, p, generators, relations=(), differential=None, degree_cap=None):
        la._check_prime(p)
        self.p = p
        self.generators = [g if isinstance(g, Generator) else Generator(*g) for g in generators]
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise DgAlgError("generator names must be unique")
        for g in self.generators:
            if g.degree < 1:
                raise DgAlgError(f"generator {g.name} has degree {g.degree} < 1")
        self.gen_index = {g.name: i for i, g in enumerate(self.generators)}
        if degree_cap is None:
            raise DgAlgError("degree_cap is required")
        self.degree_cap = int(degree_cap)
        if self.generators and self.degree_cap < max(g.degree for g in self.generators):
            raise DgAlgError("degree_cap below the largest generator degree")
        self.relations = [self._parse(r) for r in relations]
        self.differential = {}
        for name, val in (differential or {}).items():
            if name not in self.gen_index:
                raise DgAlgError(f"differential given for unknown generator {name!r}")
            self.differential[name] = self._parse(val)

    def _parse(self, val):
        if isinstance(val, dict):
            return {tuple(k): c % self.p for k, c in val.items() if c % self.p}
        return poly_to_exponents(val, self.gen_index, self.p)

    @property
    def degrees(self):
        return [g.degree for g in self.generators]


def _mono_degree(mono, degrees):
    return sum(e * d for e, d in zip(mono, degrees))


class DgAlgebra:
    """A compiled, degree-truncated dg-algebra.  Immutable after compile."""

    def __init__(self, pres: Presentation, verify: bool = True):
        self.pres = pres
        self.p = pres.p
        self.D = pres.degree_cap
        self.degrees = pres.degrees
        self.odd = [
            (g.degree % 2 == 1) and (self.p != 2) for g in pres.generators
        ]
        self._mult_cache = {}
        self._morphism_cache = {}
        self._compile()
        if verify:
            self.verify_structure()

    # ----- monomial arithmetic -------------------------------------------

    def mono_mul(self, m1, m2):
        """(sign, product monomial) or None when an odd square appears."""
        prod = tuple(a + b for a, b in zip(m1, m2))
        for i, odd in enumerate(self.odd):
            if odd and prod[i] > 1:
                return None
        if self.p == 2:
            return 1, prod
        # Koszul sign: odd letters of m2 pass over later odd letters of m1
        sign = 0
        for j, odd_j in enumerate(self.odd):
            if not odd_j or not m2[j]:
                continue
            for i in range(j + 1, len(m1)):
                if self.odd[i] and m1[i]:
                    sign += m1[i] * m2[j]
        return (-1) ** sign, prod

    def mono_diff_free(self, mono):
        """d of a free monomial as {free monomial: coeff}, by the Leibniz rule."""
        out = {}
        total = _mono_degree(mono, self.degrees)
        prefix_deg = 0
        for i, e in enumerate(mono):
            if e:
                dg = self.pres.differential.get(self.pres.generators[i].name)
                if dg:
                    rest = list(mono)
                    rest[i] -= 1
                    rest = tuple(rest)
                    suffix_deg = total - prefix_deg - e * self.degrees[i]
                    base = e * (-1) ** (prefix_deg % 2)
                    for dmono, c in dg.items():
                        move = (-1) ** (((self.degrees[i] + 1) * suffix_deg) % 2)
                        r = self.mono_mul(rest, dmono)
                        if r is None:
                            continue
                        s, prod = r
                        coeff = (base * move * s * c) % self.p
                        if coeff:
                            out[prod] = (out.get(prod, 0) + coeff) % self.p
            prefix_deg += e * self.degrees[i]
        return {m: c for m, c in out.items() if c}

    # ----- compilation ----------------------------------------------------

    def _enumerate_free(self):
        degrees, D = self.degrees, self.D
        by_degree = {n: [] for n in range(D + 1)}

        def rec(i, mono, deg):
            if i == len(degrees):
                by_degree[deg].append(tuple(mono))
                return
            cap = 1 if self.odd[i] else (D - deg) // degrees[i]
            for e in range(min(cap, (D - deg) // degrees[i]) + 1):
                mono[i] = e
                rec(i + 1, mono, deg + e * degrees[i])
            mono[i] = 0

        rec(0, [0] * len(degrees), 0)
        for n in by_degree:
            by_degree[n].sort(reverse=True)
        return by_degree

    def _compile(self):
        p, D = self.p, self.D
        for rel in self.pres.relations:
            degs = {_mono_degree(m, self.degrees) for m in rel}
            if len(degs) > 1:
                raise DgAlgError(f"relation is not homogeneous: degrees {sorted(degs)}")
        for name, dval in self.pres.differential.items():
            gdeg = self.degrees[self.pres.gen_index[name]]
            for m in dval:
                if _mono_degree(m, self.degrees) != gdeg + 1:
                    raise IllFormedDifferential(
                        f"d({name}) is not homogeneous of degree {gdeg + 1}"
                    )

        self.free = self._enumerate_free()
        self.free_index = {
            n: {m: i for i, m in enumerate(monos)} for n, monos in self.free.items()
        }

        # degreewise span of relation multiples
        ideal_rows = {n: [] for n in range(D + 1)}
        for rel in self.pres.relations:
            if not rel:
                continue
            rdeg = _mono_degree(next(iter(rel)), self.degrees)
            for n in range(rdeg, D + 1):
                for m in self.free[n - rdeg]:
                    row = np.zeros(len(self.free[n]), dtype=np.int64)
                    nonzero = False
                    for rmono, c in rel.items():
                        r = self.mono_mul(m, rmono)
                        if r is None:
                            continue
                        s, prod = r
                        row[self.free_index[n][prod]] = (
                            row[self.free_index[n][prod]] + s * c
                        ) % p
                        nonzero = True
                    if nonzero and np.any(row):
                        ideal_rows[n].append(row)

        self.ideal = {}
        self.basis = {}
        self.to_basis = {}
        for n in range(D + 1):
            dim = len(self.free[n])
            mat = (
                la.row_space(FpMatrix.from_rows(p, ideal_rows[n], dim))
                if ideal_rows[n]
                else FpMatrix.zeros(p, 0, dim)
            )
            self.ideal[n] = mat
            reps, proj = la.quotient_coords(mat, dim, p)
            self.to_basis[n] = proj
            self.basis[n] = [
                self.free[n][int(np.argmax(r))] for r in reps
            ]
        if not self.basis[0]:
            raise DgAlgError("the unit was killed by the relations")
        self.dims = {n: len(self.basis[n]) for n in range(D + 1)}

        # d on the quotient: compute on free coset representatives, project,
        # and insist the ideal is d-stable
        for n in range(D):
            mat = self.ideal[n]
            for row in mat.a:
                img = self._free_diff_vector(row, n)
                if not la.in_row_space(img, self.ideal[n + 1]):
                    raise IllFormedDifferential(
                        f"d does not preserve the relation ideal in degree {n}"
                    )
        self.d_mat = {}
        for n in range(D):
            cols = []
            for mono in self.basis[n]:
                free_vec = np.zeros(len(self.free[n + 1]), dtype=np.int64)
                for m, c in self.mono_diff_free(mono).items():
                    free_vec[self.free_index[n + 1][m]] = c
                cols.append(self.to_basis[n + 1].apply(free_vec))
            self.d_mat[n] = (
                FpMatrix(p, np.array(cols).T)
                if cols
                else FpMatrix.zeros(p, self.dims[n + 1], 0)
            )

    def _free_diff_vector(self, free_vec, n):
        out = np.zeros(len(self.free[n + 1]), dtype=np.int64)
        for i in np.nonzero(free_vec)[0]:
            mono = self.free[n][int(i)]
            for m, c in self.mono_diff_free(mono).items():
                j = self.free_index[n + 1][m]
                out[j] = (out[j] + int(free_vec[i]) * c) % self.p
        return out

    # ----- verification ---------------------------------------------------

    def verify_structure(self):
        p, D = self.p, self.D
        for n in range(D - 1):
            dd = self.d_mat[n + 1].matmul(self.d_mat[n])
            if np.any(dd.a):
                raise IllFormedDifferential(f"d^2 != 0 on degree {n}")
        for d1 in range(D + 1):
            for d2 in range(d1, D + 1 - d1):
                T = self.mult_tensor(d1, d2)
                Tt = self.mult_tensor(d2, d1)
                sign = 1 if (p == 2 or d1 * d2 % 2 == 0) else p - 1
                if np.any((T - sign * Tt.transpose(1, 0, 2)) % p):
                    raise DgAlgError(f"graded commutativity fails on degrees {d1},{d2}")
        for d1 in range(1, D):
            for d2 in range(1, D - d1):
                for d3 in range(1, D + 1 - d1 - d2):
                    T12 = self.mult_tensor(d1, d2)
                    T12_3 = self.mult_tensor(d1 + d2, d3)
                    T23 = self.mult_tensor(d2, d3)
                    T1_23 = self.mult_tensor(d1, d2 + d3)
                    lhs = np.einsum("ijm,mkl->ijkl", T12, T12_3) % p
                    rhs = np.einsum("jkm,iml->ijkl", T23, T1_23) % p
                    if np.any((lhs - rhs) % p):
                        raise DgAlgError(f"associativity fails on degrees {d1},{d2},{d3}")
        for d1 in range(D):
            for d2 in range(D - d1):
                T = self.mult_tensor(d1, d2)
                D12 = self.d_mat[d1 + d2].a
                lhs = np.einsum("ijm,nm->ijn", T, D12) % p
                rhs = np.zeros_like(lhs)
                if d1 < D:
                    T_l = self.mult_tensor(d1 + 1, d2)
                    rhs = (rhs + np.einsum("mi,mjn->ijn", self.d_mat[d1].a, T_l)) % p
                if d2 < D:
                    T_r = self.mult_tensor(d1, d2 + 1)
                    sgn = 1 if (p == 2 or d1 % 2 == 0) else p - 1
                    rhs = (rhs + sgn * np.einsum("mj,imn->ijn", self.d_mat[d2].a, T_r)) % p
                if np.any((lhs - rhs) % p):
                    raise IllFormedDifferential(f"Leibniz fails on degrees {d1},{d2}")

    # ----- elements -------------------------------------------------------

    def zero(self, degree):
        self._check_degree(degree)
        return Element(self, degree, np.zeros(self.dims[degree], dtype=np.int64))

    def one(self):
        return Element(self, 0, np.array([1], dtype=np.int64))

    def element(self, degree, vec):
        self._check_degree(degree)
        v = la.as_vector(vec, self.p)
        if v.shape[0] != self.dims[degree]:
            raise DgAlgError(f"vector length {v.shape[0]} != dim {self.dims[degree]}")
        return Element(self, degree, v)

    def generator(self, name):
        i = self.pres.gen_index[name]
        mono = tuple(1 if j == i else 0 for j in range(len(self.degrees)))
        return self.from_exponents({mono: 1}, self.degrees[i])

    def from_exponents(self, expo, degree):
        self._check_degree(degree)
        free_vec = np.zeros(len(self.free[degree]), dtype=np.int64)
        for mono, c in expo.items():
            if _mono_degree(mono, self.degrees) != degree:
                raise DgAlgError("inhomogeneous exponent data")
            free_vec[self.free_index[degree][tuple(mono)]] = c % self.p
        return Element(self, degree, self.to_basis[degree].apply(free_vec))

    def parse_element(self, text, degree):
        return self.from_exponents(
            poly_to_exponents(text, self.pres.gen_index, self.p), degree
        )

    def _check_degree(self, degree):
        if not (0 <= degree <= self.D):
            raise DegreeOverflow(f"degree {degree} outside [0, {self.D}]")

    def mult_tensor(self, d1, d2):
        """T[i, j, :] = coordinates of basis_i(d1) * basis_j(d2)."""
        if d1 + d2 > self.D:
            raise DegreeOverflow(f"product degree {d1 + d2} exceeds cap {self.D}")
        key = (d1, d2)
        if key not in self._mult_cache:
            b1, b2, b3 = self.dims[d1], self.dims[d2], self.dims[d1 + d2]
            T = np.zeros((b1, b2, b3), dtype=np.int64)
            for i, m1 in enumerate(self.basis[d1]):
                for j, m2 in enumerate(self.basis[d2]):
                    r = self.mono_mul(m1, m2)
                    if r is None:
                        continue
                    s, prod = r
                    free_vec = np.zeros(len(self.free[d1 + d2]), dtype=np.int64)
                    free_vec[self.free_index[d1 + d2][prod]] = s % self.p
                    T[i, j] = self.to_basis[d1 + d2].apply(free_vec)
            self._mult_cache[key] = T
        return self._mult_cache[key]

    def multiply(self, u, v):
        if u.algebra is not self or v.algebra is not self:
            raise DgAlgError("elements belong to a different algebra")
        T = self.mult_tensor(u.degree, v.degree)
        vec = np.einsum("i,ijk,j->k", u.vec, T, v.vec) % self.p
        return Element(self, u.degree + v.degree, vec)

    def power_p(self, u):
        result = self.one()
        for _ in range(self.p):
            result = self.multiply(result, u)
        return result

    def differential_apply(self, u):
        if u.degree >= self.D:
            raise DegreeOverflow(f"d on degree {u.degree} exceeds cap {self.D}")
        return Element(self, u.degree + 1, self.d_mat[u.degree].apply(u.vec))

    def find_primitive(self, v):
        """The affine set {c : dc = v} in degree |v| - 1; EMPTY iff [v] != 0."""
        if v.degree < 1 or v.degree > self.D:
            raise DegreeOverflow(f"no primitives in degree {v.degree - 1}")
        return la.solve_affine(self.d_mat[v.degree - 1], v.vec)

    def coboundary_space(self, n):
        """RREF basis of the coboundaries in degree n."""
        if n == 0 or self.dims[n] == 0:
            return []
        return la.image_basis(self.d_mat[n - 1])

    def cocycle_space(self, n):
        if n >= self.D:
            raise DegreeOverflow(f"cocycles undefined at the cap edge {n}")
        return la.kernel_basis(self.d_mat[n])

    def mono_str(self, mono):
        parts = []
        for g, e in zip(self.pres.generators, mono):
            if e == 1:
                parts.append(g.name)
            elif e > 1:
                parts.append(f"{g.name}^{e}")
        return "*".join(parts) if parts else "1"

    def element_str(self, el):
        terms = []
        for i in np.nonzero(el.vec)[0]:
            c = int(el.vec[i])
            name = self.mono_str(self.basis[el.degree][int(i)])
            terms.append(name if c == 1 else f"{c}*{name}")
        return " + ".join(terms) if terms else "0"

    def cohomology(self):
        return CohomologyRing(self)


@dataclass
class Element:
    algebra: DgAlgebra
    degree: int
    vec: np.ndarray

    def __post_init__(self):
        self.vec = np.asarray(self.vec, dtype=np.int64) % self.algebra.p

    def __add__(self, other):
        assert self.degree == other.degree and self.algebra is other.algebra
        return Element(self.algebra, self.degree, (self.vec + other.vec) % self.algebra.p)

    def __sub__(self, other):
        assert self.degree == other.degree and self.algebra is other.algebra
        return Element(self.algebra, self.degree, (self.vec - other.vec) % self.algebra.p)

    def scale(self, c):
        return Element(self.algebra, self.degree, (self.vec * (c % self.algebra.p)) % self.algebra.p)

    def __mul__(self, other):
        return self.algebra.multiply(self, other)

    def d(self):
        return self.algebra.differential_apply(self)

    @property
    def is_zero(self):
        return not np.any(self.vec)

    def __eq__(self, other):
        return (
            isinstance(other, Element)
            and self.algebra is other.algebra
            and self.degree == other.degree
            and bool(np.array_equal(self.vec, other.vec))
        )

    def __str__(self):
        return self.algebra.element_str(self)


class CohomologyRing:
    """Per-degree bases of H^n with chosen cocycle representatives, for n < cap.

    Degree D itself is edge-unreliable (d out of degree D is not computable
    under the truncation) and is excluded.
    """

    def __init__(self, alg: DgAlgebra):
        self.alg = alg
        self.p = alg.p
        self.max_degree = alg.D - 1
        self._z = {}
        self._proj_in_z = {}
        self._rep_mat = {}
        self.dims = {}
        self._mult_cache = {}
        for n in range(alg.D):
            z = alg.cocycle_space(n)
            zmat = FpMatrix.from_rows(alg.p, z, alg.dims[n]) if z else FpMatrix.zeros(alg.p, 0, alg.dims[n])
            b = alg.coboundary_space(n)
            ucoords = []
            for bv in b:
                sol = la.solve_affine(FpMatrix(alg.p, zmat.a.T), bv)
                if sol.is_empty:
                    raise DgAlgError("coboundary outside the cocycle space (d^2 != 0?)")
                ucoords.append(sol.point)
            reps_z, proj = la.quotient_coords(ucoords, zmat.rows, alg.p)
            self._z[n] = zmat
            self._proj_in_z[n] = proj
            rep_rows = [
                (np.asarray(r) @ zmat.a) % alg.p for r in reps_z
            ]
            self._rep_mat[n] = (
                FpMatrix.from_rows(alg.p, rep_rows, alg.dims[n])
                if rep_rows
                else FpMatrix.zeros(alg.p, 0, alg.dims[n])
            )
            self.dims[n] = len(rep_rows)

    def dim(self, n):
        self._check(n)
        return self.dims[n]

    def _check(self, n):
        if not (0 <= n <= self.max_degree):
            raise DegreeOverflow(f"H^{n} not certified under cap {self.alg.D}")

    def zero(self, n):
        self._check(n)
        return HClass(self, n, np.zeros(self.dims[n], dtype=np.int64))

    def hclass(self, n, vec):
        self._check(n)
        v = la.as_vector(vec, self.p)
        if v.shape[0] != self.dims[n]:
            raise DgAlgError(f"H^{n} coordinate length mismatch")
        return HClass(self, n, v)

    def representative(self, h) -> Element:
        """The chosen cocycle representative of an H-class."""
        self._check(h.degree)
        if self.dims[h.degree] == 0:
            return self.alg.zero(h.degree)
        vec = (h.vec @ self._rep_mat[h.degree].a) % self.p
        return Element(self.alg, h.degree, vec)

    def project(self, el: Element) -> "HClass":
        """The class of a cocycle; raises if el is not a cocycle."""
        n = el.degree
        self._check(n)
        if n < self.alg.D and np.any(self.alg.d_mat[n].apply(el.vec)):
            raise DgAlgError("element is not a cocycle")
        sol = la.solve_affine(FpMatrix(self.p, self._z[n].a.T), el.vec)
        if sol.is_empty:
            raise DgAlgError("element is not in the cocycle space")
        return HClass(self, n, self._proj_in_z[n].apply(sol.point))

    def mult_tensor(self, n, m):
        if n + m > self.max_degree:
            raise DegreeOverflow(f"H-product degree {n + m} beyond certified range")
        key = (n, m)
        if key not in self._mult_cache:
            T = np.zeros((self.dims[n], self.dims[m], self.dims[n + m]), dtype=np.int64)
            for i in range(self.dims[n]):
                ri = self.representative(HClass(self, n, _unit_vec(self.dims[n], i)))
                for j in range(self.dims[m]):
                    rj = self.representative(HClass(self, m, _unit_vec(self.dims[m], j)))
                    T[i, j] = self.project(ri * rj).vec
            self._mult_cache[key] = T
        return self._mult_cache[key]

    def multiply(self, hx, hy):
        T = self.mult_tensor(hx.degree, hy.degree)
        vec = np.einsum("i,ijk,j->k", hx.vec, T, hy.vec) % self.p
        return HClass(self, hx.degree + hy.degree, vec)

    def frobenius_matrix(self, n):
        """F_n : H^n -> H^{pn}, the p-th power map on classes."""
        target = self.p * n
        self._check(n)
        self._check(target)
        cols = []
        for i in range(self.dims[n]):
            rep = self.representative(HClass(self, n, _unit_vec(self.dims[n], i)))
            cols.append(self.project(self.alg.power_p(rep)).vec)
        if not cols:
            return FpMatrix.zeros(self.p, self.dims[target], 0)
        return FpMatrix(self.p, np.array(cols).T)

    def frobenius(self, h):
        F = self.frobenius_matrix(h.degree)
        return HClass(self, self.p * h.degree, F.apply(h.vec))

    def frobenius_image(self, n):
        """RREF basis of F(H^n) inside H^{pn}."""
        F = self.frobenius_matrix(n)
        return la.image_basis(F)

    def chain_power_classes(self, m):
        """RREF basis of {[K^p] : K a chain of degree m} inside H^{pm}.

        K^p is a cocycle for every chain K in characteristic p, and the class
        map is additive, so the value set is a subspace spanned by the images
        of the chain basis vectors.
        """
        target = self.p * m
        self._check(target)
        if m > self.alg.D:
            raise DegreeOverflow(f"no chains in degree {m}")
        vecs = []
        for i in range(self.alg.dims[m]):
            e = self.alg.element(m, _unit_vec(self.alg.dims[m], i))
            vecs.append(self.project(self.alg.power_p(e)).vec)
        return la.subspace_sum(vecs, [], self.dims[target], self.p) if vecs else []

    def basis_classes(self, n):
        self._check(n)
        return [HClass(self, n, _unit_vec(self.dims[n], i)) for i in range(self.dims[n])]

    def class_str(self, h):
        rep = self.representative(h)
        return f"[{self.alg.element_str(rep)}]"


def _unit_vec(n, i):
    v = np.zeros(n, dtype=np.int64)
    v[i] = 1
    return v


@dataclass
class HClass:
    ring: CohomologyRing
    degree: int
    vec: np.ndarray

    def __post_init__(self):
        self.vec = np.asarray(self.vec, dtype=np.int64) % self.ring.p

    def __add__(self, other):
        assert self.degree == other.degree
        return HClass(self.ring, self.degree, (self.vec + other.vec) % self.ring.p)

    def __sub__(self, other):
        assert self.degree == other.degree
        return HClass(self.ring, self.degree, (self.vec - other.vec) % self.ring.p)

    def scale(self, c):
        return HClass(self.ring, self.degree, (self.vec * c) % self.ring.p)

    def __mul__(self, other):
        return self.ring.multiply(self, other)

    @property
    def is_zero(self):
        return not np.any(self.vec)

    def __eq__(self, other):
        return (
            isinstance(other, HClass)
            and self.ring is other.ring
            and self.degree == other.degree
            and bool(np.array_equal(self.vec, other.vec))
        )

    def key(self):
        return (self.degree, tuple(int(x) for x in self.vec))

    def __str__(self):
        return self.ring.class_str(self)


class Morphism:
    """An algebra chain map determined by generator images."""

    def __init__(self, source: DgAlgebra, target: DgAlgebra, images: dict):
        if source.p != target.p:
            raise NotAMorphism("source and target have different primes")
        if source.D != target.D:
            raise NotAMorphism("source and target have different degree caps")
        self.source = source
        self.target = target
        self.images = {}
        for g in source.pres.generators:
            if g.name not in images:
                raise NotAMorphism(f"no image given for generator {g.name}")
            img = images[g.name]
            if isinstance(img, str):
                img = target.parse_element(img, g.degree)
            if img.degree != g.degree:
                raise NotAMorphism(
                    f"image of {g.name} has degree {img.degree}, expected {g.degree}"
                )
            self.images[g.name] = img
        self._mats = {}

    def _eval_mono(self, mono):
        out = self.target.one()
        for g, e in zip(self.source.pres.generators, mono):
            if e:
                img = self.images[g.name]
                for _ in range(e):
                    out = out * img
        return out

    def matrix(self, n):
        """The degree-n matrix of the map in the compiled bases."""
        if n not in self._mats:
            cols = [self._eval_mono(m).vec for m in self.source.basis[n]]
            self._mats[n] = (
                FpMatrix(self.source.p, np.array(cols).T)
                if cols
                else FpMatrix.zeros(self.source.p, self.target.dims[n], 0)
            )
        return self._mats[n]

    def apply(self, el: Element) -> Element:
        return Element(self.target, el.degree, self.matrix(el.degree).apply(el.vec))

    def check(self):
        """Relation annihilation, degree respect, d-commutation on generators."""
        for k, rel in enumerate(self.source.pres.relations):
            if not rel:
                continue
            rdeg = _mono_degree(next(iter(rel)), self.source.degrees)
            val = self.target.zero(rdeg)
            for mono, c in rel.items():
                val = val + self._eval_mono(mono).scale(c)
            if not val.is_zero:
                raise NotAMorphism(
                    f"relation {k} is not annihilated; image = {self.target.element_str(val)}"
                )
        for g in self.source.pres.generators:
            if g.degree >= self.source.D:
                continue
            lhs = self.apply(self.source.generator(g.name).d())
            rhs = self.images[g.name].d()
            if lhs != rhs:
                raise NotAMorphism(f"d does not commute on generator {g.name}")
        return True

    def is_surjective(self, up_to=None):
        top = self.source.D if up_to is None else up_to
        for n in range(top + 1):
            if la.rref(self.matrix(n))[2] < self.target.dims[n]:
                return False
        return True

    def induced_map(self, Hs: CohomologyRing, Ht: CohomologyRing):
        """Per-degree matrices H^n(source) -> H^n(target), n < cap."""
        mats = {}
        for n in range(self.source.D):
            cols = []
            for h in Hs.basis_classes(n):
                rep = Hs.representative(h)
                cols.append(Ht.project(self.apply(rep)).vec)
            mats[n] = (
                FpMatrix(self.source.p, np.array(cols).T)
                if cols
                else FpMatrix.zeros(self.source.p, Ht.dims[n], 0)
            )
        return mats

    def is_quasi_iso(self, Hs=None, Ht=None, witness=False):
        Hs = Hs or self.source.cohomology()
        Ht = Ht or self.target.cohomology()
        mats = self.induced_map(Hs, Ht)
        for n in range(self.source.D):
            m = mats[n]
            ok = m.rows == m.cols and la.rref(m)[2] == m.rows
            if not ok:
                if witness:
                    return False, n
                return False
        if witness:
            return True, None
        return True


def compile_presentation(pres: Presentation, verify: bool = True) -> DgAlgebra:
    return DgAlgebra(pres, verify=verify)


def divided_power_basis(p: int, gen_degree: int, cap: int) -> dict:
    """Per-degree basis of the free divided-power algebra on one generator.

    Even |x|: polynomial generators x_k of degree k|x| with x_k^p = 0.
    Odd |x|: just {1, x}.
    """
    la._check_prime(p)
    if gen_degree < 1:
        raise DgAlgError("generator degree must be positive")
    if gen_degree % 2 == 1 and p != 2:
        out = {0: ["1"]}
        if gen_degree <= cap:
            out[gen_degree] = ["x"]
        return out
    ks = list(range(1, cap // gen_degree + 1))
    out = {n: [] for n in range(cap + 1)}
    for exps in itertools.product(range(p), repeat=len(ks)):
        deg = sum(e * k * gen_degree for e, k in zip(exps, ks))
        if deg > cap:
            continue
        parts = [
            f"x{k}" if e == 1 else f"x{k}^{e}"
            for e, k in zip(exps, ks)
            if e
        ]
        out[deg].append("*".join(parts) if parts else "1")
    for n in list(out):
        if not out[n]:
            del out[n]
        else:
            out[n].sort()
    return out
