"""Secondary and higher obstruction products on a cohomology ring.

Massey triple products, type 1 / type 2 Frobenius products and the higher
type 1 family, each returned as a ProductSet: the genuine value set over all
defining systems, together with its indeterminacy subspace.

Massey and type 1 sets are affine because the value map is additive in every
free choice (cocycle corrections and p-th powers are additive in
characteristic p); type 2 is a polynomial sweep and defaults to enumeration.
bruteforce_oracle re-derives any of these sets by literal enumeration of all
defining systems and is the independent ground truth used by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fplinalg as la
from .fplinalg import TooLarge
from .dgalg import CohomologyRing, DegreeOverflow, Element, HClass


class ProductsError(Exception):
    pass


class ProductsNonzero(ProductsError):
    pass


class OddPrimeRequired(ProductsError):
    pass


AFFINE = "AFFINE"
ENUMERATED = "ENUMERATED"
UNDEFINED = "UNDEFINED"


@dataclass
class ProductSet:
    """The value set of an obstruction operation in a single H-degree."""

    ring: CohomologyRing
    degree: int
    mode: str
    representative: HClass | None = None
    indeterminacy: list = field(default_factory=list)
    elements: list | None = None
    witness: str | None = None
    approximate: bool = False

    def __post_init__(self):
        if self.mode == AFFINE and self.representative is not None:
            mat = la.FpMatrix.from_rows(
                self.ring.p, self.indeterminacy, self.ring.dims[self.degree]
            ) if self.indeterminacy else la.FpMatrix.zeros(
                self.ring.p, 0, self.ring.dims[self.degree]
            )
            self.representative = HClass(
                self.ring, self.degree, la.reduce_mod_rows(self.representative.vec, mat)
            )
        if self.mode == ENUMERATED and self.elements is not None:
            seen = {}
            for h in self.elements:
                seen[tuple(int(v) for v in h.vec)] = h
            self.elements = [seen[k] for k in sorted(seen)]

    @property
    def is_defined(self):
        return self.mode != UNDEFINED

    def class_set(self, limit: int = 4096) -> frozenset:
        """The set of classes as coordinate tuples; None when UNDEFINED."""
        if self.mode == UNDEFINED:
            return None
        if self.mode == ENUMERATED:
            return frozenset(tuple(int(v) for v in h.vec) for h in self.elements)
        aff = la.AffineSet(
            self.ring.p,
            self.ring.dims[self.degree],
            self.representative.vec,
            la.FpMatrix.from_rows(
                self.ring.p, self.indeterminacy, self.ring.dims[self.degree]
            )
            if self.indeterminacy
            else None,
        )
        return frozenset(tuple(int(x) for x in v) for v in aff.enumerate(limit))

    def contains(self, h: HClass, limit: int = 4096) -> bool:
        key = tuple(int(v) for v in h.vec)
        return key in self.class_set(limit)

    def contains_zero(self, limit: int = 4096) -> bool:
        return self.contains(self.ring.zero(self.degree), limit)

    def is_zero_modulo(self, subspace) -> bool:
        """True when the representative lies in the span of ``subspace``."""
        if self.mode == UNDEFINED:
            return False
        rep = self.representative if self.mode == AFFINE else self.elements[0]
        return la.span_contains(
            subspace, rep.vec, self.ring.dims[self.degree], self.ring.p
        )

    def same_set(self, other: "ProductSet", limit: int = 4096) -> bool:
        return self.class_set(limit) == other.class_set(limit)

    def describe(self) -> str:
        if self.mode == UNDEFINED:
            return f"UNDEFINED ({self.witness})"
        if self.mode == ENUMERATED:
            return "{" + ", ".join(str(h) for h in self.elements) + "}"
        ind = ", ".join(
            str(HClass(self.ring, self.degree, v)) for v in self.indeterminacy
        )
        return f"{self.representative} + span{{{ind}}}"


@dataclass
class DefiningSystemT1:
    """A concrete type 1 defining system {a, b, c_1, ..., c_{n-1}}."""

    a: Element
    b: Element
    chain: list

    def verify(self) -> bool:
        alg = self.a.algebra
        if not self.a.d().is_zero or not self.b.d().is_zero:
            return False
        prev = self.a * self.b
        for c in self.chain:
            if c.d() != prev:
                return False
            prev = alg.power_p(c)
        return True

    def value(self) -> Element:
        return self.a.algebra.power_p(self.chain[-1])


def _rep_space(H: CohomologyRing, x: HClass) -> la.AffineSet:
    """All cocycle representatives of x: chosen rep + coboundaries."""
    alg = H.alg
    rep = H.representative(x)
    cob = alg.coboundary_space(x.degree)
    dirs = la.FpMatrix.from_rows(alg.p, cob, alg.dims[x.degree]) if cob else None
    return la.AffineSet(alg.p, alg.dims[x.degree], rep.vec, dirs)


def _check_pair(H, x, y):
    if x.ring is not H or y.ring is not H:
        raise ProductsError("classes belong to a different cohomology ring")
    if not (x * y).is_zero:
        raise ProductsNonzero(f"x*y = {x * y} is nonzero in H")


def _hmul_span(H, h: HClass, vectors, source_degree, target_degree):
    """span{h * v : v in span(vectors)} as RREF rows in H^target coordinates."""
    out = []
    for v in vectors:
        prod = H.multiply(h, HClass(H, source_degree, v))
        out.append(prod.vec)
    return la.subspace_sum(out, [], H.dims[target_degree], H.p) if out else []


def massey_triple(H: CohomologyRing, x: HClass, y: HClass, z: HClass) -> ProductSet:
    """The Massey triple product <x, y, z> with its full indeterminacy."""
    if x.ring is not H or y.ring is not H or z.ring is not H:
        raise ProductsError("classes belong to a different cohomology ring")
    if not (x * y).is_zero:
        raise ProductsNonzero("x*y is nonzero in H")
    if not (y * z).is_zero:
        raise ProductsNonzero("y*z is nonzero in H")
    target = x.degree + y.degree + z.degree - 1
    H._check(target)
    alg = H.alg
    a, b, c = H.representative(x), H.representative(y), H.representative(z)
    u = alg.element(x.degree + y.degree - 1, alg.find_primitive(a * b).point)
    v = alg.element(y.degree + z.degree - 1, alg.find_primitive(b * c).point)
    sign = (-((-1) ** (x.degree % 2))) % alg.p
    val = (u * c) + (a * v).scale(sign)
    rep = H.project(val)
    ind = la.subspace_sum(
        _hmul_span(
            H,
            z,
            [h.vec for h in H.basis_classes(x.degree + y.degree - 1)],
            x.degree + y.degree - 1,
            target,
        ),
        _hmul_span(
            H,
            x,
            [h.vec for h in H.basis_classes(y.degree + z.degree - 1)],
            y.degree + z.degree - 1,
            target,
        ),
        H.dims[target],
        H.p,
    )
    return ProductSet(H, target, AFFINE, representative=rep, indeterminacy=ind)


def frobenius_type1(H: CohomologyRing, x: HClass, y: HClass) -> ProductSet:
    """Type 1 secondary Frobenius product: the class set {[c^p] : dc = ab}."""
    _check_pair(H, x, y)
    alg = H.alg
    p = alg.p
    s = x.degree + y.degree - 1
    target = p * s
    H._check(target)
    if p != 2 and s % 2 == 1:
        # every primitive c has odd degree, so c^p = 0 identically
        return ProductSet(H, target, AFFINE, representative=H.zero(target))
    a, b = H.representative(x), H.representative(y)
    c0 = alg.element(s, alg.find_primitive(a * b).point)
    rep = H.project(alg.power_p(c0))
    ind = _type1_spread(H, x, y)
    return ProductSet(H, target, AFFINE, representative=rep, indeterminacy=ind)


def _type1_spread(H, x, y):
    """The exact spread of the type 1 set around any one value.

    Cocycle corrections contribute F(H^s); changing the representative of x
    by dK shifts the value by [K^p] * F(y) for an arbitrary chain K, and
    symmetrically for y, so the chain-level Frobenius image enters, not just
    the cohomology-level one.
    """
    p = H.p
    s = x.degree + y.degree - 1
    target = p * s
    spans = [H.frobenius_image(s)]
    fx = H.frobenius(x)
    fy = H.frobenius(y)
    if not fy.is_zero and x.degree >= 1:
        w = H.chain_power_classes(x.degree - 1)
        spans.append(_hmul_span(H, fy, w, p * (x.degree - 1), target))
    if not fx.is_zero and y.degree >= 1:
        w = H.chain_power_classes(y.degree - 1)
        spans.append(_hmul_span(H, fx, w, p * (y.degree - 1), target))
    out = []
    for sp in spans:
        out = la.subspace_sum(out, sp, H.dims[target], p)
    return out


def indeterminacy_type1(H: CohomologyRing, x: HClass, y: HClass):
    """The paper-level indeterminacy subspace of the type 1 product.

    F(H^s) + x^p H^{p(|y|-1)} + y^p H^{p(|x|-1)}; for odd p the term whose
    base class has odd degree vanishes identically (odd p-th powers are zero),
    which recovers the one-term odd-p formula.
    """
    _check_pair(H, x, y)
    p = H.p
    s = x.degree + y.degree - 1
    target = p * s
    H._check(target)
    if p != 2 and s % 2 == 1:
        return []
    spans = [H.frobenius_image(s)]
    fx = H.frobenius(x)
    fy = H.frobenius(y)
    if not fx.is_zero:
        m = p * (y.degree - 1)
        spans.append(
            _hmul_span(H, fx, [h.vec for h in H.basis_classes(m)], m, target)
        )
    if not fy.is_zero:
        m = p * (x.degree - 1)
        spans.append(
            _hmul_span(H, fy, [h.vec for h in H.basis_classes(m)], m, target)
        )
    out = []
    for sp in spans:
        out = la.subspace_sum(out, sp, H.dims[target], p)
    return out


def frobenius_type2(
    H: CohomologyRing, x: HClass, y: HClass, enumeration_bound: int = 2**20
) -> ProductSet:
    """Type 2 secondary Frobenius product {[c^{p-1} a b]}, odd p only."""
    if H.p == 2:
        raise OddPrimeRequired("type 2 Frobenius products require an odd prime")
    _check_pair(H, x, y)
    alg = H.alg
    p = alg.p
    s = x.degree + y.degree - 1
    target = (p - 1) * s + x.degree + y.degree
    H._check(target)
    ra, rb = _rep_space(H, x), _rep_space(H, y)
    a0 = alg.element(x.degree, ra.point)
    b0 = alg.element(y.degree, rb.point)
    csp = alg.find_primitive(a0 * b0)
    total = ra.size() * rb.size() * csp.size()
    if total > enumeration_bound:
        c0 = alg.element(s, csp.point)
        val = _pow(alg, c0, p - 1) * a0 * b0
        ind = _type2_paper_indeterminacy(H, x, y, enumeration_bound)
        return ProductSet(
            H, target, AFFINE, representative=H.project(val),
            indeterminacy=ind, approximate=True,
        )
    values = []
    for av in ra.enumerate(enumeration_bound):
        a = alg.element(x.degree, av)
        for bv in rb.enumerate(enumeration_bound):
            b = alg.element(y.degree, bv)
            for cv in alg.find_primitive(a * b).enumerate(enumeration_bound):
                c = alg.element(s, cv)
                values.append(H.project(_pow(alg, c, p - 1) * a * b))
    return ProductSet(H, target, ENUMERATED, elements=values)


def _pow(alg, el, k):
    out = alg.one()
    for _ in range(k):
        out = out * el
    return out


def _type2_paper_indeterminacy(H, x, y, bound):
    """span of H^s(A)^{p-1} x y, by sweeping H^s when small."""
    p = H.p
    s = x.degree + y.degree - 1
    target = (p - 1) * s + x.degree + y.degree
    vecs = []
    if p ** H.dims[s] <= bound:
        for coeffs in np.ndindex(*([p] * H.dims[s])):
            h = HClass(H, s, np.array(coeffs, dtype=np.int64))
            val = x * y
            for _ in range(p - 1):
                val = H.multiply(h, val)
            vecs.append(val.vec)
    else:
        for h in H.basis_classes(s):
            val = x * y
            for _ in range(p - 1):
                val = H.multiply(h, val)
            vecs.append(val.vec)
    return la.subspace_sum(vecs, [], H.dims[target], p) if vecs else []


def higher_frobenius_type1(
    H: CohomologyRing, x: HClass, y: HClass, n: int, enumeration_bound: int = 2**20
) -> ProductSet:
    """The n-th order type 1 Frobenius product set, n >= 2.

    Order 2 coincides with frobenius_type1.  Higher orders search the full
    order-(n-1) set for coboundary values and sweep every extension, so the
    result is ENUMERATED and exact; UNDEFINED carries the blocking set.
    """
    if n < 2:
        raise ProductsError("order must be >= 2")
    if n == 2:
        return frobenius_type1(H, x, y)
    _check_pair(H, x, y)
    alg = H.alg
    p = alg.p
    s = x.degree + y.degree - 1
    deg = s
    for _ in range(n - 2):
        deg = p * deg - 1
    target = p * deg
    H._check(target)

    ra, rb = _rep_space(H, x), _rep_space(H, y)
    if ra.size() * rb.size() > enumeration_bound:
        raise TooLarge("representative sweep exceeds the enumeration bound")
    systems = []
    for av in ra.enumerate(enumeration_bound):
        a = alg.element(x.degree, av)
        for bv in rb.enumerate(enumeration_bound):
            b = alg.element(y.degree, bv)
            prim = alg.find_primitive(a * b)
            if prim.size() and len(systems) + prim.size() > enumeration_bound:
                raise TooLarge("defining-system sweep exceeds the enumeration bound")
            for cv in prim.enumerate(enumeration_bound):
                systems.append((a, b, [alg.element(s, cv)]))

    for order in range(3, n + 1):
        prev_values = [alg.power_p(sys[2][-1]) for sys in systems]
        extended = []
        for sys, val in zip(systems, prev_values):
            if not H.project(val).is_zero:
                continue
            prim = alg.find_primitive(val)
            if len(extended) + prim.size() > enumeration_bound:
                raise TooLarge("defining-system sweep exceeds the enumeration bound")
            for cv in prim.enumerate(enumeration_bound):
                extended.append(
                    (sys[0], sys[1], sys[2] + [alg.element(val.degree - 1, cv)])
                )
        if not extended:
            blocked = sorted(
                {str(H.project(v)) for v in prev_values}
            )
            return ProductSet(
                H,
                target,
                UNDEFINED,
                witness=(
                    f"order-{order - 1} product set {{{', '.join(blocked)}}} "
                    "contains no coboundary"
                ),
            )
        systems = extended

    values = [H.project(alg.power_p(sys[2][-1])) for sys in systems]
    return ProductSet(H, target, ENUMERATED, elements=values)


def strictly_defined(H: CohomologyRing, x: HClass, y: HClass, n: int):
    """Vanishing-ladder test for strict definedness of the order-n product.

    Returns (flag, witness degrees, indeterminacy rows or None).  When the
    flag is set, the order-n product is defined on every quasi-isomorphic
    algebra and its indeterminacy is the returned subspace.
    """
    _check_pair(H, x, y)
    p = H.p
    failing = []
    for k in range(1, n):
        powsum = sum(p**i for i in range(1, k + 1))
        for base in (x.degree, y.degree):
            degree = p**k * base - powsum
            if degree < 0 or degree > H.max_degree:
                continue
            if H.dims[degree] != 0:
                failing.append(degree)
    if failing:
        return False, sorted(set(failing)), None
    prev = higher_frobenius_type1(H, x, y, n - 1) if n >= 3 else frobenius_type1(H, x, y)
    if not prev.is_defined or not prev.contains_zero():
        return False, [], None

    deg_c = p ** (n - 2) * (x.degree + y.degree) - sum(p**i for i in range(n - 1))
    target = p ** (n - 1) * (x.degree + y.degree) - sum(p**i for i in range(1, n))
    H._check(target)
    spans = [H.frobenius_image(deg_c)]
    fx, fy = x, y
    for _ in range(n - 1):
        fx, fy = H.frobenius(fx), H.frobenius(fy)
    powsum = sum(p**i for i in range(1, n))
    for fr, other in ((fx, y.degree), (fy, x.degree)):
        if fr.is_zero:
            continue
        m = p ** (n - 1) * other - powsum
        if 0 <= m <= H.max_degree:
            spans.append(_hmul_span(H, fr, [h.vec for h in H.basis_classes(m)], m, target))
    ind = []
    for sp in spans:
        ind = la.subspace_sum(ind, sp, H.dims[target], p)
    return True, [], ind


@dataclass(frozen=True)
class OperationDescriptor:
    kind: str  # massey | frob1 | frob2 | higher1
    order: int = 2


def bruteforce_oracle(
    H: CohomologyRing,
    descriptor: OperationDescriptor,
    classes,
    enumeration_bound: int = 2**20,
) -> ProductSet:
    """Ground-truth enumeration of a product set from its literal definition.

    Every representative and every lift is swept and the defining formula is
    applied verbatim; no affine shortcuts are taken.
    """
    alg = H.alg
    p = alg.p
    budget = [enumeration_bound]

    def spend(size):
        budget[0] -= size
        if budget[0] < 0:
            raise TooLarge("brute-force sweep exceeds the enumeration bound")

    def sweep(space):
        spend(space.size())
        return [v for v in space.enumerate(enumeration_bound)]

    if descriptor.kind == "massey":
        x, y, z = classes
        if not (x * y).is_zero or not (y * z).is_zero:
            raise ProductsNonzero("massey preconditions fail")
        target = x.degree + y.degree + z.degree - 1
        values = []
        sign = (-((-1) ** (x.degree % 2))) % p
        for av in sweep(_rep_space(H, x)):
            a = alg.element(x.degree, av)
            for bv in sweep(_rep_space(H, y)):
                b = alg.element(y.degree, bv)
                for cv in sweep(_rep_space(H, z)):
                    c = alg.element(z.degree, cv)
                    for uv in sweep(alg.find_primitive(a * b)):
                        u = alg.element(x.degree + y.degree - 1, uv)
                        for vv in sweep(alg.find_primitive(b * c)):
                            v = alg.element(y.degree + z.degree - 1, vv)
                            values.append(H.project((u * c) + (a * v).scale(sign)))
        return ProductSet(H, target, ENUMERATED, elements=values)

    if descriptor.kind in ("frob1", "higher1"):
        x, y = classes
        order = 2 if descriptor.kind == "frob1" else descriptor.order
        if not (x * y).is_zero:
            raise ProductsNonzero("x*y is nonzero")
        s = x.degree + y.degree - 1
        deg = s
        for _ in range(order - 2):
            deg = p * deg - 1
        target = p * deg
        systems = []
        for av in sweep(_rep_space(H, x)):
            a = alg.element(x.degree, av)
            for bv in sweep(_rep_space(H, y)):
                b = alg.element(y.degree, bv)
                for cv in sweep(alg.find_primitive(a * b)):
                    systems.append([a, b, alg.element(s, cv)])
        for _ in range(order - 2):
            extended = []
            for sys in systems:
                val = alg.power_p(sys[-1])
                prim = alg.find_primitive(val)
                if prim.is_empty:
                    continue
                for cv in sweep(prim):
                    extended.append(sys + [alg.element(val.degree - 1, cv)])
            if not extended:
                blocked = sorted({str(H.project(alg.power_p(s[-1]))) for s in systems})
                return ProductSet(
                    H, target, UNDEFINED,
                    witness=f"no coboundary among {{{', '.join(blocked)}}}",
                )
            systems = extended
        values = [H.project(alg.power_p(sys[-1])) for sys in systems]
        return ProductSet(H, target, ENUMERATED, elements=values)

    if descriptor.kind == "frob2":
        x, y = classes
        if p == 2:
            raise OddPrimeRequired("type 2 requires an odd prime")
        if not (x * y).is_zero:
            raise ProductsNonzero("x*y is nonzero")
        s = x.degree + y.degree - 1
        target = (p - 1) * s + x.degree + y.degree
        values = []
        for av in sweep(_rep_space(H, x)):
            a = alg.element(x.degree, av)
            for bv in sweep(_rep_space(H, y)):
                b = alg.element(y.degree, bv)
                for cv in sweep(alg.find_primitive(a * b)):
                    c = alg.element(s, cv)
                    values.append(H.project(_pow(alg, c, p - 1) * a * b))
        return ProductSet(H, target, ENUMERATED, elements=values)

    raise ProductsError(f"unknown operation kind {descriptor.kind!r}")


def find_defining_system(
    H: CohomologyRing, x: HClass, y: HClass, target: HClass, bound: int = 2**16
) -> DefiningSystemT1 | None:
    """A concrete order-2 defining system whose value is the given class."""
    alg = H.alg
    for av in _rep_space(H, x).enumerate(bound):
        a = alg.element(x.degree, av)
        for bv in _rep_space(H, y).enumerate(bound):
            b = alg.element(y.degree, bv)
            for cv in alg.find_primitive(a * b).enumerate(bound):
                c = alg.element(x.degree + y.degree - 1, cv)
                if H.project(alg.power_p(c)) == target:
                    return DefiningSystemT1(a, b, [c])
    return None
