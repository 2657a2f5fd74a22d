"""Polyhedral cones: double description, duality, tensor products, separability.

A cone is stored with both a generator (extreme-ray) description and a facet
description.  The facet list holds generators of the dual cone; a vector x
belongs to the cone iff it lies in the linear span of the generators and every
facet functional is nonnegative on it.  Cones are allowed to span a proper
subspace of their ambient space (the column-stochastic cones of this package
do), in which case conversions between the two descriptions run in
coordinates of the span.

Separability testing (`member_min`) returns either an explicit convex
decomposition into products of generators or a witness functional that is
nonnegative on all such products and strictly negative on the tested tensor.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Optional, Sequence

from .ratlin import (
    R0,
    R1,
    LinearProgram,
    RatMatrix,
    RatlinError,
    as_vec,
    dot,
    inverse,
    kron_vec,
    lp_solve,
    rat,
    rref_basis,
    vec_scale,
    vec_sub,
)

DEFAULT_MAX_DIM = 24


class ConeError(ValueError):
    pass


def max_dim() -> int:
    """Ambient-dimension cap for double description, overridable by env var."""
    return int(os.environ.get("CONEFACTOR_MAX_DIM", DEFAULT_MAX_DIM))


def canon_ray(v) -> tuple:
    """Scale a ray so its first nonzero entry has absolute value 1.

    Only positive scalings are applied, so the ray itself is unchanged;
    dividing by the plain first nonzero entry would flip rays whose leading
    entry is negative.
    """
    v = as_vec(v)
    for x in v:
        if x:
            s = x if x > 0 else -x
            if s != R1:
                return tuple(e / s for e in v)
            return v
    raise ConeError("zero vector is not a ray")


def _canon_ray_list(rays) -> tuple:
    seen = {}
    for r in rays:
        c = canon_ray(r)
        seen[c] = True
    return tuple(sorted(seen.keys()))


class Frame:
    """A deterministic basis of a linear subspace of R^d, with helpers to
    move vectors and functionals between ambient and coordinate form."""

    def __init__(self, basis: Sequence[Sequence]):
        self.basis = [as_vec(b) for b in basis]
        if not self.basis:
            raise ConeError("empty frame")
        self.dim = len(self.basis[0])
        self.rank = len(self.basis)
        b = RatMatrix.from_rows(self.basis)  # rank x dim
        g = b.matmul(b.transpose())  # Gram matrix, rank x rank
        self.coord_map = inverse(g).matmul(b)  # rank x dim; coords = coord_map @ v

    @classmethod
    def spanning(cls, vectors: Sequence[Sequence]) -> "Frame":
        basis = rref_basis(vectors)
        if not basis:
            raise ConeError("vectors span only the origin")
        return cls(basis)

    def coords(self, v, check: bool = True) -> tuple:
        c = self.coord_map.matvec(as_vec(v))
        if check and self.lift(c) != tuple(as_vec(v)):
            raise ConeError("vector is outside the subspace")
        return c

    def contains(self, v) -> bool:
        c = self.coord_map.matvec(as_vec(v))
        return self.lift(c) == tuple(as_vec(v))

    def lift(self, coords) -> tuple:
        out = [R0] * self.dim
        for ci, b in zip(coords, self.basis):
            if ci:
                for j, bj in enumerate(b):
                    if bj:
                        out[j] += ci * bj
        return tuple(out)

    def functional_coords(self, w) -> tuple:
        """Evaluations of an ambient functional on the basis vectors."""
        w = as_vec(w)
        return tuple(dot(w, b) for b in self.basis)

    def functional_from_coords(self, u) -> tuple:
        """Canonical ambient representative (inside the span) of the
        functional with the given evaluations on the basis."""
        return self.coord_map.rmatvec(as_vec(u))

    def project_functional(self, w) -> tuple:
        return self.functional_from_coords(self.functional_coords(w))


def double_description(ineqs: Sequence[Sequence], dim: int) -> tuple:
    """Extreme rays of {x in R^dim : <a, x> >= 0 for all a in ineqs}.

    Incremental (Motzkin-style) insertion in the given order, with the
    standard combinatorial adjacency test.  Exact rational arithmetic
    throughout.  Raises if the result is not a pointed cone (the inequality
    normals do not span), since callers here always expect proper cones.
    """
    if dim > max_dim():
        raise ConeError(
            f"ambient dimension {dim} exceeds the cap {max_dim()} "
            "(set CONEFACTOR_MAX_DIM to raise it)"
        )
    ineqs = [as_vec(a) for a in ineqs]
    # Lineality basis: start with all of R^dim.
    lineal = [tuple(R1 if j == i else R0 for j in range(dim)) for i in range(dim)]
    rays: list = []  # canonical ray vectors of the pointed part

    def tight_set(v, upto):
        return frozenset(i for i in range(upto) if not dot(ineqs[i], v))

    for idx, a in enumerate(ineqs):
        lin_vals = [dot(a, l) for l in lineal]
        pivot = next((i for i, v in enumerate(lin_vals) if v), None)
        if pivot is not None:
            # Shrink the lineality space; the pivot vector becomes a ray.
            pv = lin_vals[pivot]
            lvec = lineal[pivot]
            lineal = [
                vec_sub(l, vec_scale(lin_vals[i] / pv, lvec))
                for i, l in enumerate(lineal)
                if i != pivot
            ]
            r0 = lvec if pv > 0 else vec_scale(-R1, lvec)
            projected = []
            for v in rays:
                av = dot(a, v)
                if av:
                    v = vec_sub(v, vec_scale(av / pv, lvec))
                projected.append(canon_ray(v))
            rays = sorted(set(projected + [canon_ray(r0)]))
            continue
        pos, zero, neg = [], [], []
        for v in rays:
            av = dot(a, v)
            if av > 0:
                pos.append((v, tight_set(v, idx), av))
            elif av < 0:
                neg.append((v, tight_set(v, idx), av))
            else:
                zero.append((v, tight_set(v, idx)))
        survivors = [v for v, _, _ in pos] + [v for v, _ in zero]
        fresh = []
        for (vp, tp, ap), (vn, tn, an) in itertools.product(pos, neg):
            common = tp & tn
            adjacent = True
            for v3, t3, _ in pos:
                if v3 is not vp and common <= t3:
                    adjacent = False
                    break
            if adjacent:
                for v3, t3, _ in neg:
                    if v3 is not vn and common <= t3:
                        adjacent = False
                        break
            if adjacent:
                for v3, t3 in zero:
                    if common <= t3:
                        adjacent = False
                        break
            if adjacent:
                w = vec_sub(vec_scale(ap, vn), vec_scale(an, vp))
                if any(w):
                    fresh.append(canon_ray(w))
        rays = sorted(set(survivors + fresh))
    if lineal:
        raise ConeError("inequalities do not define a pointed cone")
    return tuple(rays)


@dataclass
class TensorElement:
    """A rational tensor over a product of ambient spaces, stored flat in
    row-major (lexicographic multi-index) order."""

    factors: tuple
    coeffs: tuple

    def __init__(self, factors, coeffs):
        self.factors = tuple(int(f) for f in factors)
        self.coeffs = as_vec(coeffs)
        size = 1
        for f in self.factors:
            size *= f
        if len(self.coeffs) != size:
            raise ConeError(
                f"tensor over factors {self.factors} needs {size} coefficients, "
                f"got {len(self.coeffs)}"
            )

    @classmethod
    def product(cls, vectors: Sequence[Sequence]) -> "TensorElement":
        coeffs = (R1,)
        for v in vectors:
            coeffs = kron_vec(coeffs, as_vec(v))
        return cls(tuple(len(v) for v in vectors), coeffs)

    def pair(self, functionals: Sequence[Sequence]):
        """<f_1 x ... x f_n, self> for ambient functionals f_i."""
        w = TensorElement.product(functionals)
        if w.factors != self.factors:
            raise ConeError("pairing: factor mismatch")
        return dot(w.coeffs, self.coeffs)

    def as_matrix(self) -> RatMatrix:
        if len(self.factors) != 2:
            raise ConeError("as_matrix: only for 2-factor tensors")
        return RatMatrix(self.factors[0], self.factors[1], self.coeffs)

    def contract_first(self, v) -> tuple:
        """Pair the first factor with the ambient vector/functional v."""
        d0 = self.factors[0]
        rest = 1
        for f in self.factors[1:]:
            rest *= f
        v = as_vec(v)
        if len(v) != d0:
            raise ConeError("contract_first: dimension mismatch")
        out = [R0] * rest
        for i, vi in enumerate(v):
            if vi:
                base = i * rest
                for j in range(rest):
                    cj = self.coeffs[base + j]
                    if cj:
                        out[j] += vi * cj
        return tuple(out)

    def __eq__(self, other):
        return (
            isinstance(other, TensorElement)
            and self.factors == other.factors
            and self.coeffs == other.coeffs
        )


class PolyhedralCone:
    """A proper polyhedral cone with generator and facet descriptions.

    ``generators`` are extreme rays (or at least a generating set); ``facets``
    generate the dual cone restricted to the span of the generators.  Either
    list may be supplied; the other is computed on demand by double
    description.  The cone may live in a proper subspace of its ambient
    space.
    """

    def __init__(self, dim: int, generators=None, facets=None):
        if generators is None and facets is None:
            raise ConeError("need generators or facets")
        self.dim = int(dim)
        self._generators = _canon_ray_list(generators) if generators else None
        self._facets = _canon_ray_list(facets) if facets else None
        self._frame: Optional[Frame] = None
        if self._generators is not None:
            for g in self._generators:
                if len(g) != self.dim:
                    raise ConeError("generator of wrong dimension")
        if self._facets is not None:
            for f in self._facets:
                if len(f) != self.dim:
                    raise ConeError("facet of wrong dimension")

    # -- descriptions -------------------------------------------------------

    @property
    def generators(self) -> tuple:
        if self._generators is None:
            thunk = getattr(self, "_generator_thunk", None)
            if thunk is not None:
                self._generators = _canon_ray_list(thunk())
            else:
                # facets given: cone = {x : <f, x> >= 0}, full-dimensional case
                self._generators = double_description(self._facets, self.dim)
        return self._generators

    @property
    def facets(self) -> tuple:
        if self._facets is None:
            gens = self._generators
            frame = self.frame
            if frame.rank == self.dim:
                self._facets = double_description(gens, self.dim)
            else:
                coords = [frame.coords(g) for g in gens]
                duals = double_description(coords, frame.rank)
                self._facets = _canon_ray_list(
                    frame.functional_from_coords(u) for u in duals
                )
        return self._facets

    @property
    def frame(self) -> Frame:
        if self._frame is None:
            if self._generators is not None:
                self._frame = Frame.spanning(self._generators)
            else:
                self._frame = Frame.spanning(self.generators)
        return self._frame

    def validate(self) -> None:
        for f in self.facets:
            for g in self.generators:
                if dot(f, g) < 0:
                    raise ConeError("facet/generator pairing is negative")

    def is_generating(self) -> bool:
        return self.frame.rank == self.dim

    def is_pointed(self) -> bool:
        # pointed <=> the facets of the span-restricted cone span the span
        frame = self.frame
        rows = [frame.functional_coords(f) for f in self.facets]
        return len(rref_basis(rows)) == frame.rank if rows else frame.rank == 0

    def is_proper(self) -> bool:
        return self.is_generating() and self.is_pointed()

    def contains(self, v) -> bool:
        v = as_vec(v)
        if len(v) != self.dim:
            raise ConeError("contains: dimension mismatch")
        if not self.frame.contains(v):
            return False
        return all(dot(f, v) >= 0 for f in self.facets)

    def same_cone(self, other: "PolyhedralCone") -> bool:
        """Set equality, robust to redundant generators/facets."""
        return all(other.contains(g) for g in self.generators) and all(
            self.contains(g) for g in other.generators
        )

    def __repr__(self):
        ng = len(self._generators) if self._generators is not None else "?"
        nf = len(self._facets) if self._facets is not None else "?"
        return f"PolyhedralCone(dim={self.dim}, generators={ng}, facets={nf})"


def dual_cone(c: PolyhedralCone) -> PolyhedralCone:
    """The cone of functionals nonnegative on c, for full-dimensional proper c."""
    if not c.is_generating():
        raise ConeError(
            "dual_cone requires a full-dimensional (generating) cone; "
            "subspace cones carry their dual description in `facets`"
        )
    if not c.is_pointed():
        raise ConeError("dual_cone requires a pointed cone")
    return PolyhedralCone(c.dim, generators=c.facets, facets=c.generators)


def min_tensor(a: PolyhedralCone, b: PolyhedralCone) -> PolyhedralCone:
    """Generators are all products of generators; facets on demand."""
    gens = [kron_vec(ga, gb) for ga in a.generators for gb in b.generators]
    return PolyhedralCone(a.dim * b.dim, generators=gens)


def max_tensor(a: PolyhedralCone, b: PolyhedralCone) -> PolyhedralCone:
    """Facets are all products of the factors' facets; generators on demand.

    The span of the product cone is the tensor product of the factor spans,
    so the generator description, when requested, is computed there.
    """
    facets = [kron_vec(fa, fb) for fa in a.facets for fb in b.facets]
    cone = PolyhedralCone(a.dim * b.dim, facets=facets)
    span = [
        kron_vec(u, v) for u in a.frame.basis for v in b.frame.basis
    ]
    cone._frame = Frame.spanning(span)

    # generators on demand: double description in span coordinates
    def _gens():
        frame = cone._frame
        rows = [frame.functional_coords(f) for f in facets]
        rays = double_description(rows, frame.rank)
        return [frame.lift(r) for r in rays]

    cone._generator_thunk = _gens
    return cone


def member_max(xi: TensorElement, a: PolyhedralCone, b: PolyhedralCone) -> bool:
    """xi in a (x)max b: nonnegative against every facet product, and inside
    the tensor product of the spans."""
    if xi.factors != (a.dim, b.dim):
        raise ConeError(
            f"member_max: tensor factors {xi.factors} vs cones ({a.dim}, {b.dim})"
        )
    m = xi.as_matrix()
    # span check: every row must lie in span(b), every column in span(a)
    for i in range(m.rows):
        if not b.frame.contains(m.row(i)):
            return False
    mt = m.transpose()
    for j in range(mt.rows):
        if not a.frame.contains(mt.row(j)):
            return False
    for fa in a.facets:
        va = m.rmatvec(fa)
        for fb in b.facets:
            if dot(va, fb) < 0:
                return False
    return True


@dataclass
class SeparabilityResult:
    separable: bool
    # when separable: list of (weight, generator_of_a, generator_of_b)
    decomposition: Optional[list] = None
    # otherwise: ambient functional, >= 0 on all generator products, < 0 on xi
    witness: Optional[tuple] = None

    def __bool__(self):
        return self.separable


def member_min(
    xi: TensorElement, a: PolyhedralCone, b: PolyhedralCone
) -> SeparabilityResult:
    """Exact separability test in a (x)min b.

    LP over nonnegative combinations of all generator pairs.  If infeasible,
    the Farkas certificate yields a witness W with <W, g_a x g_b> >= 0 for
    every generator pair and <W, xi> < 0.
    """
    if xi.factors != (a.dim, b.dim):
        raise ConeError(
            f"member_min: tensor factors {xi.factors} vs cones ({a.dim}, {b.dim})"
        )
    if not member_max(xi, a, b):
        raise ConeError("not in ambient tensor cone")
    pairs = [(ga, gb) for ga in a.generators for gb in b.generators]
    cols = [kron_vec(ga, gb) for ga, gb in pairs]
    n = len(cols)
    rows = list(zip(*cols))  # (dim_a*dim_b) x n
    prob = LinearProgram(
        c=[R0] * n,
        a_eq=RatMatrix.from_rows([list(r) for r in rows]),
        b_eq=list(xi.coeffs),
    )
    res = lp_solve(prob)
    if res.status == "Optimal":
        decomposition = [
            (w, pairs[j][0], pairs[j][1]) for j, w in enumerate(res.x) if w
        ]
        if not decomposition:  # xi == 0
            decomposition = []
        return SeparabilityResult(separable=True, decomposition=decomposition)
    u, _ = res.dual
    witness = tuple(-ui for ui in u)
    for col in cols:
        assert dot(witness, col) >= 0
    assert dot(witness, xi.coeffs) < 0
    return SeparabilityResult(separable=False, witness=witness)
