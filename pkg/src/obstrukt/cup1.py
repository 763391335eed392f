"""Lax and strict cup-1-algebras over F_2: rewriting, compilation, checks.

Terms are built from generators with the associative product ``*`` (cup) and
the degree -1 operation ``cup1``.  The only rewrite identities are
associativity of both operations and the left Hirsch identity

    (u * v) cup1 w  ->  u * (v cup1 w) + (u cup1 w) * v,

so normal monomials are cup-products of cup1-words; a cup1-word is a
left-associated chain whose non-final letters are generators and whose final
letter is a generator or a parenthesised cup-monomial (shapes u cup1 (v * w)
have no rewrite and are kept as designated extra symbols).  The differential
follows the Steenrod relation

    d(u cup1 v) = du cup1 v + u cup1 dv + u*v + v*u

and the Leibniz rule for ``*``.  Everything here is characteristic 2: linear
combinations are just sets of monomials under symmetric difference.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import fplinalg as la
from .fplinalg import FpMatrix
from .poly import Cup1Factor, GenFactor, ParseError, parse_poly

WORD = "W"
MONO = "M"


class Cup1Error(Exception):
    pass


class CapExceeded(Cup1Error):
    pass


class IllFormedDifferential(Cup1Error):
    pass


class NotAChainMap(Cup1Error):
    pass


class NotMultiplicative(Cup1Error):
    pass


# ---------------------------------------------------------------------------
# free-algebra terms: mono = ("M", word, ...), word = ("W", letter, ...),
# letter = generator name | mono


def gen_mono(name: str):
    return (MONO, (WORD, name))


def cup_mono(m1, m2):
    return (MONO,) + m1[1:] + m2[1:]


def cup_sets(a, b):
    out = set()
    for m1 in a:
        for m2 in b:
            out ^= {cup_mono(m1, m2)}
    return out


def cup1_mono(m1, m2):
    """Normalize m1 cup1 m2 for normal monomials; returns a set of monomials."""
    factors = m1[1:]
    if len(factors) > 1:
        u = (MONO, factors[0])
        v = (MONO,) + factors[1:]
        out = cup_sets({u}, cup1_mono(v, m2))
        out ^= cup_sets(cup1_mono(u, m2), {v})
        return out
    letters = factors[0][1:]
    last = letters[-1]
    if not isinstance(last, str):
        # final letter is a composite; reassociate so Hirsch can fire inside
        prefix = (MONO, (WORD,) + letters[:-1])
        out = set()
        for mi in cup1_mono(last, m2):
            out ^= cup1_mono(prefix, mi)
        return out
    if len(m2[1:]) == 1:
        w2 = m2[1]
        return {(MONO, (WORD,) + letters + w2[1:])}
    return {(MONO, (WORD,) + letters + (m2,))}


def cup1_sets(a, b):
    out = set()
    for m1 in a:
        for m2 in b:
            out ^= cup1_mono(m1, m2)
    return out


def term_to_set(tree):
    """Normalize a syntax tree ('gen' | 'cup' | 'cup1' | 'sum') to monomials."""
    kind = tree[0]
    if kind == "gen":
        return {gen_mono(tree[1])}
    if kind == "cup":
        return cup_sets(term_to_set(tree[1]), term_to_set(tree[2]))
    if kind == "cup1":
        return cup1_sets(term_to_set(tree[1]), term_to_set(tree[2]))
    if kind == "sum":
        out = set()
        for sub in tree[1]:
            out ^= term_to_set(sub)
        return out
    raise Cup1Error(f"unknown tree node {kind!r}")


def parse_cup1_expr(text: str) -> set:
    """Parse a cup-1 polynomial string into a set of normal monomials."""

    def conv_poly(terms):
        return ("sum", [conv_term(t) for t in terms])

    def conv_term(term):
        if term.coeff % 2 == 0:
            return ("sum", [])
        node = None
        for f in term.factors:
            if isinstance(f, GenFactor):
                sub = ("gen", f.name)
                for _ in range(f.power - 1):
                    sub = ("cup", sub, ("gen", f.name))
            else:
                sub = ("cup1", conv_poly(f.left), conv_poly(f.right))
            node = sub if node is None else ("cup", node, sub)
        if node is None:
            raise Cup1Error("constant terms are not cup-1 elements")
        return node

    return term_to_set(conv_poly(parse_poly(text, allow_cup1=True)))


def mono_str(m) -> str:
    return "*".join(_word_str(w) for w in m[1:])


def _word_str(w) -> str:
    letters = w[1:]
    out = None
    for l in letters:
        s = l if isinstance(l, str) else mono_str(l)
        out = s if out is None else f"cup1({out},{s})"
    return out


def _sort_key(x):
    if isinstance(x, str):
        return (0, x)
    return (1,) + tuple(_sort_key(e) for e in x[1:])


def d_mono(m, dmap):
    """Differential of a normal monomial; dmap maps generators to mono-sets."""
    factors = m[1:]
    if len(factors) > 1:
        out = set()
        for i in range(len(factors)):
            for t in d_mono((MONO, factors[i]), dmap):
                out ^= {(MONO,) + factors[:i] + t[1:] + factors[i + 1:]}
        return out
    letters = factors[0][1:]
    if len(letters) == 1:
        l = letters[0]
        if isinstance(l, str):
            return set(dmap.get(l, set()))
        return d_mono(l, dmap)
    u = (MONO, (WORD,) + letters[:-1])
    last = letters[-1]
    v = gen_mono(last) if isinstance(last, str) else last
    out = set()
    for t in d_mono(u, dmap):
        out ^= cup1_mono(t, v)
    for t in d_mono(v, dmap):
        out ^= cup1_mono(u, t)
    out ^= {cup_mono(u, v)}
    out ^= {cup_mono(v, u)}
    return out


def d_set(s, dmap):
    out = set()
    for m in s:
        out ^= d_mono(m, dmap)
    return out


def strict_normalize(s) -> set:
    """Canonical form modulo commutativity of cup1 (strict algebras only).

    Flat cup1-words become sorted multisets of letters; words ending in a
    composite letter are swapped so the Hirsch identity can destructure them.
    """
    out = set()
    for m in s:
        out ^= _strict_mono(m)
    return out


def _strict_mono(m):
    factors = m[1:]
    if len(factors) > 1:
        out = {(MONO,)}
        for w in factors:
            out = cup_sets(out, _strict_mono((MONO, w)))
        return out
    letters = factors[0][1:]
    if len(letters) == 1:
        return {m}
    last = letters[-1]
    if isinstance(last, str):
        return {(MONO, (WORD,) + tuple(sorted(letters)))}
    prefix = (MONO, (WORD,) + letters[:-1])
    return strict_normalize(cup1_sets(_strict_mono(last), _strict_mono(prefix)))


# ---------------------------------------------------------------------------
# presentations and compilation


@dataclass
class Cup1Presentation:
    """A finitely presented lax cup-1-algebra over F_2 with kill rules."""

    generators: list  # (name, degree) pairs, ordered
    degree_cap: int
    differential: dict = field(default_factory=dict)  # name -> expression
    relations: list = field(default_factory=list)  # expressions
    wordlength: dict = field(default_factory=dict)  # name -> {axis: int}
    wordlength_max: dict = field(default_factory=dict)  # axis -> max allowed
    kill_monomials: list = field(default_factory=list)  # expressions, one monomial each
    kill_containing: list = field(default_factory=list)  # generator names
    keep_monomials: list = field(default_factory=list)  # exceptions


class Cup1Algebra:
    """A compiled cup-1-algebra: finite bases, cup/cup1 tables, differential.

    Duck-types the slice of the DgAlgebra interface that CohomologyRing
    needs, so cohomology comes from the same machinery (p = 2, multiply is
    the cup product and power_p the cup square).
    """

    def __init__(self, pres: Cup1Presentation, verify: bool = True):
        self.pres = pres
        self.p = 2
        self.D = pres.degree_cap
        self.gen_degree = dict(pres.generators)
        if any(d < 1 for d in self.gen_degree.values()):
            raise Cup1Error("generator degrees must be positive")
        self._deg_cache = {}
        self._wl_cache = {}
        self._compile()
        if verify:
            self.verify_structure()

    # ----- gradings and kill rules ---------------------------------------

    def degree(self, m):
        if m not in self._deg_cache:
            self._deg_cache[m] = sum(self._word_degree(w) for w in m[1:])
        return self._deg_cache[m]

    def _word_degree(self, w):
        letters = w[1:]
        total = 0
        for l in letters:
            total += self.gen_degree[l] if isinstance(l, str) else self.degree(l)
        return total - (len(letters) - 1)

    def wl(self, m, axis):
        key = (m, axis)
        if key not in self._wl_cache:
            total = 0
            for w in m[1:]:
                for l in w[1:]:
                    if isinstance(l, str):
                        total += self.pres.wordlength.get(l, {}).get(axis, 0)
                    else:
                        total += self.wl(l, axis)
            self._wl_cache[key] = total
        return self._wl_cache[key]

    def _contains_gen(self, m, name):
        for w in m[1:]:
            for l in w[1:]:
                if isinstance(l, str):
                    if l == name:
                        return True
                elif self._contains_gen(l, name):
                    return True
        return False

    def _contains_pattern(self, m, pat):
        pfactors = pat[1:]
        mfactors = m[1:]
        if len(pfactors) == 1:
            pletters = pfactors[0][1:]
            for w in mfactors:
                letters = w[1:]
                k = len(pletters)
                for i in range(len(letters) - k + 1):
                    if letters[i:i + k] == pletters:
                        return True
                for l in letters:
                    if not isinstance(l, str) and self._contains_pattern(l, pat):
                        return True
            return False
        k = len(pfactors)
        for i in range(len(mfactors) - k + 1):
            if mfactors[i:i + k] == pfactors:
                return True
        for w in mfactors:
            for l in w[1:]:
                if not isinstance(l, str) and self._contains_pattern(l, pat):
                    return True
        return False

    def killed(self, m) -> bool:
        for axis, cap in self.pres.wordlength_max.items():
            if self.wl(m, axis) > cap:
                return True
        if m in self._keep:
            return False
        for name in self.pres.kill_containing:
            if self._contains_gen(m, name):
                return True
        for pat in self._kill_patterns:
            if self._contains_pattern(m, pat):
                return True
        return False

    def reduce_set(self, s) -> set:
        return {m for m in s if self.degree(m) <= self.D and not self.killed(m)}

    # ----- compilation ----------------------------------------------------

    def _single_mono(self, expr):
        s = parse_cup1_expr(expr)
        if len(s) != 1:
            raise Cup1Error(f"{expr!r} is not a single monomial")
        return next(iter(s))

    def _compile(self):
        pres = self.pres
        self._keep = {self._single_mono(e) for e in pres.keep_monomials}
        self._kill_patterns = [self._single_mono(e) for e in pres.kill_monomials]
        self.dmap = {}
        for name, expr in pres.differential.items():
            val = parse_cup1_expr(expr) if isinstance(expr, str) else set(expr)
            gdeg = self.gen_degree[name]
            for m in val:
                if self.degree(m) != gdeg + 1:
                    raise IllFormedDifferential(f"d({name}) is not homogeneous")
                for axis in pres.wordlength_max:
                    if self.wl(m, axis) != pres.wordlength.get(name, {}).get(axis, 0):
                        raise IllFormedDifferential(
                            f"d({name}) does not preserve word length on axis {axis}"
                        )
            self.dmap[name] = val

        # enumerate surviving normal monomials by pairwise closure
        alive = set()
        queue = []
        for name, _ in pres.generators:
            g = gen_mono(name)
            if self.degree(g) <= self.D and not self.killed(g):
                alive.add(g)
                queue.append(g)
        while queue:
            m = queue.pop()
            for other in list(alive):
                for prod in (
                    {cup_mono(m, other)},
                    {cup_mono(other, m)},
                    cup1_mono(m, other),
                    cup1_mono(other, m),
                ):
                    for cand in self.reduce_set(prod):
                        if cand not in alive:
                            alive.add(cand)
                            queue.append(cand)
        self.free = {n: [] for n in range(self.D + 1)}
        for m in alive:
            self.free[self.degree(m)].append(m)
        for n in self.free:
            self.free[n].sort(key=_sort_key)
        self.free_index = {
            n: {m: i for i, m in enumerate(monos)} for n, monos in self.free.items()
        }

        # relation ideal: worklist closure under cup and cup1 on both sides
        rows = {n: [] for n in range(self.D + 1)}
        mats = {}

        def vec_of(s, n):
            v = np.zeros(len(self.free[n]), dtype=np.int64)
            for m in s:
                v[self.free_index[n][m]] ^= 1
            return v

        def add_row(s):
            s = self.reduce_set(s)
            if not s:
                return None
            degs = {self.degree(m) for m in s}
            if len(degs) != 1:
                raise Cup1Error("relation is not homogeneous")
            n = degs.pop()
            v = vec_of(s, n)
            mat = mats.get(n)
            if mat is not None and la.in_row_space(v, mat):
                return None
            rows[n].append(v)
            mats[n] = la.row_space(FpMatrix.from_rows(2, rows[n], len(self.free[n])))
            return (n, s)

        worklist = []
        self.relation_sets = []
        for expr in pres.relations:
            s = parse_cup1_expr(expr) if isinstance(expr, str) else set(expr)
            self.relation_sets.append(s)
            item = add_row(s)
            if item:
                worklist.append(item)
        while worklist:
            n, s = worklist.pop()
            for m in alive:
                if self.degree(m) + n > self.D:
                    continue
                for prod in (
                    cup_sets({m}, s),
                    cup_sets(s, {m}),
                    cup1_sets({m}, s),
                    cup1_sets(s, {m}),
                ):
                    item = add_row(prod)
                    if item:
                        worklist.append(item)
        self.ideal = {
            n: mats.get(n, FpMatrix.zeros(2, 0, len(self.free[n])))
            for n in range(self.D + 1)
        }

        # d must descend to the quotient
        for pat in self._kill_patterns:
            if self.degree(pat) < self.D:
                res = self.reduce_set(d_set({pat}, self.dmap))
                if res:
                    n = self.degree(pat) + 1
                    if not la.in_row_space(vec_of(res, n), self.ideal[n]):
                        raise IllFormedDifferential(
                            f"d of killed monomial {mono_str(pat)} leaves the ideal"
                        )
        for name in pres.kill_containing:
            if self.dmap.get(name):
                raise IllFormedDifferential(
                    f"killed-generator rule needs d({name}) = 0"
                )
        for n in range(self.D):
            for row in self.ideal[n].a:
                s = {self.free[n][int(i)] for i in np.nonzero(row)[0]}
                res = self.reduce_set(d_set(s, self.dmap))
                if res and not la.in_row_space(vec_of(res, n + 1), self.ideal[n + 1]):
                    raise IllFormedDifferential(
                        f"d does not preserve the relation ideal in degree {n}"
                    )

        self.basis = {}
        self.to_basis = {}
        for n in range(self.D + 1):
            reps, proj = la.quotient_coords(self.ideal[n], len(self.free[n]), 2)
            self.to_basis[n] = proj
            self.basis[n] = [self.free[n][int(np.argmax(r))] for r in reps]
        self.dims = {n: len(self.basis[n]) for n in range(self.D + 1)}

        self.d_mat = {}
        for n in range(self.D):
            cols = []
            for m in self.basis[n]:
                s = self.reduce_set(d_set({m}, self.dmap))
                cols.append(self.to_basis[n + 1].apply(vec_of(s, n + 1)))
            self.d_mat[n] = (
                FpMatrix(2, np.array(cols).T)
                if cols
                else FpMatrix.zeros(2, self.dims[n + 1], 0)
            )
        self._cup_cache = {}
        self._cup1_cache = {}

    def _project(self, s, n):
        v = np.zeros(len(self.free[n]), dtype=np.int64)
        for m in s:
            v[self.free_index[n][m]] ^= 1
        return self.to_basis[n].apply(v)

    # ----- element interface (DgAlgebra-compatible slice) ------------------

    def zero(self, n):
        from .dgalg import Element

        return Element(self, n, np.zeros(self.dims[n], dtype=np.int64))

    def one(self):
        raise Cup1Error("cup-1-algebras here are non-unital")

    def element(self, n, vec):
        from .dgalg import Element

        v = la.as_vector(vec, 2)
        if v.shape[0] != self.dims[n]:
            raise Cup1Error("coordinate length mismatch")
        return Element(self, n, v)

    def element_from_set(self, s):
        s = self.reduce_set(s)
        if not s:
            raise Cup1Error("zero or killed element needs an explicit degree")
        degs = {self.degree(m) for m in s}
        if len(degs) != 1:
            raise Cup1Error("inhomogeneous element")
        n = degs.pop()
        return self.element(n, self._project(s, n))

    def parse_element(self, expr, degree=None):
        s = parse_cup1_expr(expr)
        s = self.reduce_set(s)
        if not s:
            if degree is None:
                raise Cup1Error("zero element needs an explicit degree")
            return self.zero(degree)
        return self.element_from_set(s)

    def cup_tensor(self, d1, d2):
        if d1 + d2 > self.D:
            raise CapExceeded(f"cup degree {d1 + d2} exceeds cap {self.D}")
        key = (d1, d2)
        if key not in self._cup_cache:
            T = np.zeros((self.dims[d1], self.dims[d2], self.dims[d1 + d2]), dtype=np.int64)
            for i, m1 in enumerate(self.basis[d1]):
                for j, m2 in enumerate(self.basis[d2]):
                    s = self.reduce_set({cup_mono(m1, m2)})
                    T[i, j] = self._project(s, d1 + d2)
            self._cup_cache[key] = T
        return self._cup_cache[key]

    def cup1_tensor(self, d1, d2):
        n = d1 + d2 - 1
        if n > self.D:
            raise CapExceeded(f"cup1 degree {n} exceeds cap {self.D}")
        key = (d1, d2)
        if key not in self._cup1_cache:
            T = np.zeros((self.dims[d1], self.dims[d2], self.dims[n]), dtype=np.int64)
            for i, m1 in enumerate(self.basis[d1]):
                for j, m2 in enumerate(self.basis[d2]):
                    s = self.reduce_set(cup1_mono(m1, m2))
                    T[i, j] = self._project(s, n)
            self._cup1_cache[key] = T
        return self._cup1_cache[key]

    def multiply(self, u, v):
        from .dgalg import Element

        T = self.cup_tensor(u.degree, v.degree)
        vec = np.einsum("i,ijk,j->k", u.vec, T, v.vec) % 2
        return Element(self, u.degree + v.degree, vec)

    def cup1(self, u, v):
        from .dgalg import Element

        T = self.cup1_tensor(u.degree, v.degree)
        vec = np.einsum("i,ijk,j->k", u.vec, T, v.vec) % 2
        return Element(self, u.degree + v.degree - 1, vec)

    def power_p(self, u):
        return self.multiply(u, u)

    def differential_apply(self, u):
        from .dgalg import Element

        if u.degree >= self.D:
            raise CapExceeded(f"d on degree {u.degree} exceeds cap {self.D}")
        return Element(self, u.degree + 1, self.d_mat[u.degree].apply(u.vec))

    def find_primitive(self, v):
        if v.degree < 1 or v.degree > self.D:
            raise CapExceeded(f"no primitives in degree {v.degree - 1}")
        return la.solve_affine(self.d_mat[v.degree - 1], v.vec)

    def cocycle_space(self, n):
        if n >= self.D:
            raise CapExceeded(f"cocycles undefined at the cap edge {n}")
        return la.kernel_basis(self.d_mat[n])

    def coboundary_space(self, n):
        if n == 0 or self.dims[n] == 0:
            return []
        return la.image_basis(self.d_mat[n - 1])

    def mono_str(self, m):
        return mono_str(m)

    def element_str(self, el):
        terms = [mono_str(self.basis[el.degree][int(i)]) for i in np.nonzero(el.vec)[0]]
        return " + ".join(terms) if terms else "0"

    def cohomology(self):
        from .dgalg import CohomologyRing

        return CohomologyRing(self)

    def basis_table(self):
        """{degree: [(monomial string, {axis: wordlength})]} for reports."""
        out = {}
        for n in range(self.D + 1):
            out[n] = [
                (mono_str(m), {a: self.wl(m, a) for a in sorted(self.pres.wordlength_max)})
                for m in self.basis[n]
            ]
        return out

    def size(self):
        return sum(self.dims.values())

    # ----- structure verification -----------------------------------------

    def verify_structure(self):
        for n in range(self.D - 1):
            dd = self.d_mat[n + 1].matmul(self.d_mat[n])
            if np.any(dd.a):
                raise IllFormedDifferential(f"d^2 != 0 on degree {n}")
        degs = [n for n in range(1, self.D + 1) if self.dims[n]]
        for d1 in degs:
            for d2 in degs:
                if d1 + d2 - 1 > self.D:
                    continue
                # Steenrod relation tablewise
                if d1 + d2 <= self.D and d1 + d2 - 1 < self.D:
                    for i in range(self.dims[d1]):
                        u = self.element(d1, la.as_vector(_unit(self.dims[d1], i), 2))
                        for j in range(self.dims[d2]):
                            v = self.element(d2, _unit(self.dims[d2], j))
                            lhs = self.differential_apply(self.cup1(u, v))
                            r = self.cup1(self.differential_apply(u), v)
                            r = r + self.cup1(u, self.differential_apply(v))
                            r = r + self.multiply(u, v) + self.multiply(v, u)
                            if lhs != r:
                                raise Cup1Error(
                                    f"Steenrod relation fails on ({d1},{i}) x ({d2},{j})"
                                )
                for d3 in degs:
                    if d1 + d2 + d3 - 1 > self.D:
                        continue
                    for i in range(self.dims[d1]):
                        u = self.element(d1, _unit(self.dims[d1], i))
                        for j in range(self.dims[d2]):
                            v = self.element(d2, _unit(self.dims[d2], j))
                            for k in range(self.dims[d3]):
                                w = self.element(d3, _unit(self.dims[d3], k))
                                lhs = self.cup1(self.multiply(u, v), w)
                                rhs = self.multiply(u, self.cup1(v, w)) + self.multiply(
                                    self.cup1(u, w), v
                                )
                                if lhs != rhs:
                                    raise Cup1Error(
                                        f"Hirsch identity fails on degrees {(d1, d2, d3)}"
                                    )
                                if d1 + d2 + d3 <= self.D:
                                    a1 = self.multiply(self.multiply(u, v), w)
                                    a2 = self.multiply(u, self.multiply(v, w))
                                    if a1 != a2:
                                        raise Cup1Error("cup associativity fails")
                                if d1 + d2 + d3 - 2 <= self.D:
                                    b1 = self.cup1(self.cup1(u, v), w)
                                    b2 = self.cup1(u, self.cup1(v, w))
                                    if b1 != b2:
                                        raise Cup1Error("cup1 associativity fails")


def _unit(n, i):
    v = np.zeros(n, dtype=np.int64)
    v[i] = 1
    return v


def compile_cup1(pres: Cup1Presentation, verify: bool = True) -> Cup1Algebra:
    return Cup1Algebra(pres, verify=verify)


def normalize(expr: str, caps: Cup1Algebra | None = None) -> set:
    """Public entry point: parse and normalize; optionally apply an algebra's
    kill rules."""
    s = parse_cup1_expr(expr)
    if caps is not None:
        s = caps.reduce_set(s)
    return s


# ---------------------------------------------------------------------------
# the Frobenius-product cocycle of the cup-1 calculus


def verify_frobenius_cocycle(strict: bool, perturbed: bool = False):
    """Symbolically verify the cup-1 Frobenius cocycle in the free algebra.

    Lax:    c*c + cup1(c, a*b) + K        with dK = cup1(a*b, a*b)
    Strict: c*c + cup1(c, a*b) + a*a*Kp + Lp*b*b
            with dKp = cup1(b, b), dLp = cup1(a, a)
    Returns (is_cocycle, log lines); ``perturbed`` drops the correction term
    and reports the nonzero remainder.
    """
    a, b, c = gen_mono("a"), gen_mono("b"), gen_mono("c")
    ab = cup_mono(a, b)
    dmap = {"c": {ab}}
    terms = [("c*c", {cup_mono(c, c)}), ("cup1(c,a*b)", cup1_mono(c, ab))]
    if strict:
        dmap["Kp"] = cup1_mono(b, b)
        dmap["Lp"] = cup1_mono(a, a)
        if not perturbed:
            terms.append(("a*a*Kp", {cup_mono(cup_mono(a, a), gen_mono("Kp"))}))
            terms.append(("Lp*b*b", {cup_mono(gen_mono("Lp"), cup_mono(b, b))}))
    else:
        dmap["K"] = cup1_sets({ab}, {ab})
        if not perturbed:
            terms.append(("K", {gen_mono("K")}))
    post = strict_normalize if strict else (lambda s: s)
    log = []
    total = set()
    for name, s in terms:
        ds = post(d_set(s, dmap))
        log.append(f"d({name}) = {_fmt(ds)}")
        total ^= ds
    log.append(f"sum = {_fmt(total)}")
    return (not total), log


def _fmt(s):
    if not s:
        return "0"
    return " + ".join(sorted(mono_str(m) for m in s))


# ---------------------------------------------------------------------------
# associative quasi-isomorphism checks out of a cup-1-algebra


def assoc_quasi_iso_check(C: Cup1Algebra, target, assignment: dict) -> dict:
    """Check that a word-assignment defines an associative quasi-isomorphism.

    assignment maps cup1-word expressions to target polynomial strings; any
    basis word not listed goes to zero.  The induced map on a basis monomial
    is the cup-ordered product of its word values.  Verified: well-defined on
    the quotient, a chain map, multiplicative for the cup product, and a
    degreewise isomorphism on cohomology below the cap.
    """
    word_values = {}
    for expr, val in assignment.items():
        s = parse_cup1_expr(expr)
        if len(s) != 1 or len(next(iter(s))[1:]) != 1:
            raise Cup1Error(f"assignment key {expr!r} is not a single word")
        w = next(iter(s))[1]
        deg = C._word_degree(w)
        word_values[w] = target.parse_element(val, deg) if isinstance(val, str) else val

    def value_of_word(w):
        if w in word_values:
            return word_values[w]
        return target.zero(C._word_degree(w))

    def value_of_mono(m):
        out = None
        for w in m[1:]:
            v = value_of_word(w)
            out = v if out is None else out * v
        return out

    def value_of_element(el):
        out = target.zero(el.degree)
        for i in np.nonzero(el.vec)[0]:
            out = out + value_of_mono(C.basis[el.degree][int(i)])
        return out

    report = {"chain_map": True, "multiplicative": True, "quasi_iso": True}
    for n in range(C.D):
        for m in C.basis[n]:
            lhs = value_of_element(C.element_from_set({m}) .d())
            rhs = value_of_mono(m).d()
            if lhs != rhs:
                raise NotAChainMap(f"chain map fails on {mono_str(m)} (degree {n})")
    for d1 in range(1, C.D):
        for d2 in range(1, C.D + 1 - d1):
            for i, m1 in enumerate(C.basis[d1]):
                for j, m2 in enumerate(C.basis[d2]):
                    prod = C.multiply(C.element(d1, _unit(C.dims[d1], i)),
                                      C.element(d2, _unit(C.dims[d2], j)))
                    if value_of_element(prod) != value_of_mono(m1) * value_of_mono(m2):
                        raise NotMultiplicative(
                            f"multiplicativity fails on {mono_str(m1)} * {mono_str(m2)}"
                        )
    HC = C.cohomology()
    HT = target.cohomology()
    mats = {}
    for n in range(C.D):
        cols = []
        for h in HC.basis_classes(n):
            rep = HC.representative(h)
            cols.append(HT.project(value_of_element(rep)).vec)
        mats[n] = (
            FpMatrix(2, np.array(cols).T) if cols else FpMatrix.zeros(2, HT.dims[n], 0)
        )
        m = mats[n]
        if m.rows != m.cols or la.rref(m)[2] != m.rows:
            report["quasi_iso"] = False
            report["failure_degree"] = n
    report["induced"] = mats
    return report
