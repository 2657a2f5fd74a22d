"""State spaces over polyhedral cones, and the maps between them.

A `Gpt` is a cone together with a distinguished strictly positive functional
(the order unit); its state space is the slice where that functional equals
one.  Linear maps between such spaces are wrapped in `GptMap`; channels are
the positive, normalization-preserving ones.  Maps correspond one-to-one to
two-leg tensors through the evaluation tensor `chi_tensor`, and a map whose
tensor is separable factorizes exactly through a classical simplex
(`min_factor`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .cone import (
    ConeError,
    Frame,
    PolyhedralCone,
    SeparabilityResult,
    TensorElement,
    dual_cone,
    member_min,
)
from .ratlin import (
    R0,
    R1,
    RatMatrix,
    as_vec,
    dot,
    rat,
)


class GptError(ValueError):
    pass


class Gpt:
    """A triple (vector space, cone, order unit).

    The unit must be strictly positive on every cone generator, which makes
    the state space a bounded polytope.  ``basis`` optionally fixes the
    canonical basis of the cone's span; by default a deterministic
    row-reduced basis of the generators is used.
    """

    def __init__(self, dim: int, cone: PolyhedralCone, unit, basis=None, name: str = ""):
        self.dim = int(dim)
        if cone.dim != self.dim:
            raise GptError(f"cone dimension {cone.dim} != ambient {self.dim}")
        self.cone = cone
        self.unit = as_vec(unit)
        if len(self.unit) != self.dim:
            raise GptError("unit of wrong dimension")
        for g in cone.generators:
            if dot(self.unit, g) <= 0:
                raise GptError(
                    "order unit must be strictly positive on every generator"
                )
        self.name = name
        if basis is not None:
            self.frame = Frame([as_vec(b) for b in basis])
            if self.frame.rank != cone.frame.rank:
                raise GptError("supplied basis does not span the cone's span")
            for b in self.frame.basis:
                if not cone.frame.contains(b):
                    raise GptError("supplied basis leaves the cone's span")
        else:
            self.frame = cone.frame
        self._vertices = None
        self._dual_cone = None

    @property
    def rank(self) -> int:
        return self.frame.rank

    def state_vertices(self) -> tuple:
        """Cone generators rescaled onto the unit slice."""
        if self._vertices is None:
            verts = []
            for g in self.cone.generators:
                h = dot(self.unit, g)
                verts.append(tuple(x / h for x in g))
            self._vertices = tuple(verts)
        return self._vertices

    def effect_cone(self) -> PolyhedralCone:
        """The cone of positive functionals, with canonical in-span
        representatives; its generators are the extreme effect rays."""
        if self._dual_cone is None:
            frame = self.frame
            coords = [frame.coords(g) for g in self.cone.generators]
            from .cone import double_description

            rays = double_description(coords, frame.rank)
            gens = [frame.functional_from_coords(r) for r in rays]
            facets = [frame.project_functional(g) for g in self.cone.generators]
            self._dual_cone = PolyhedralCone(self.dim, generators=gens, facets=facets)
        return self._dual_cone

    def contains_state(self, v) -> bool:
        v = as_vec(v)
        return self.cone.contains(v) and dot(self.unit, v) == 1

    def in_relative_interior(self, v) -> bool:
        """Strict positivity on every facet that is not identically zero on
        the span, plus unit normalization."""
        v = as_vec(v)
        if not self.cone.contains(v) or dot(self.unit, v) != 1:
            return False
        for f in self.cone.facets:
            if any(dot(f, b) for b in self.frame.basis):
                if dot(f, v) == 0:
                    return False
        return True

    def unit_coords(self) -> tuple:
        return self.frame.functional_coords(self.unit)

    def __repr__(self):
        label = self.name or f"dim={self.dim}"
        return f"Gpt({label}, vertices={len(self.cone.generators)})"


@dataclass
class GptMap:
    """A linear map between the ambient spaces of two Gpts."""

    source: Gpt
    target: Gpt
    matrix: RatMatrix

    def __post_init__(self):
        if self.matrix.rows != self.target.dim or self.matrix.cols != self.source.dim:
            raise GptError(
                f"map matrix is {self.matrix.rows}x{self.matrix.cols}, expected "
                f"{self.target.dim}x{self.source.dim}"
            )

    def apply(self, v):
        return self.matrix.matvec(as_vec(v))

    def adjoint_apply(self, w):
        """Pullback of an ambient functional on the target."""
        return self.matrix.rmatvec(as_vec(w))

    def compose(self, inner: "GptMap") -> "GptMap":
        if inner.target.dim != self.source.dim:
            raise GptError("compose: dimension mismatch")
        return GptMap(inner.source, self.target, self.matrix.matmul(inner.matrix))

    def equals_on_source(self, other: "GptMap") -> bool:
        """Equality as linear maps on the source span."""
        return all(
            self.apply(b) == other.apply(b) for b in self.source.frame.basis
        )


def identity_map(g: Gpt) -> GptMap:
    return GptMap(g, g, RatMatrix.identity(g.dim))


def is_channel(f: GptMap) -> bool:
    """Positive (generators land in the target cone) and unital (the pullback
    of the target unit agrees with the source unit on the source span)."""
    for g in f.source.cone.generators:
        if not f.target.cone.contains(f.apply(g)):
            return False
    pulled = f.adjoint_apply(f.target.unit)
    for b in f.source.frame.basis:
        if dot(pulled, b) != dot(f.source.unit, b):
            return False
    return True


def is_positive_map(f: GptMap) -> bool:
    return all(f.target.cone.contains(f.apply(g)) for g in f.source.cone.generators)


def dual_basis(g: Gpt) -> tuple:
    """Canonical functionals a_i with a_i(e_j) = delta_ij on the span basis."""
    n = g.rank
    return tuple(
        g.frame.functional_from_coords([R1 if j == i else R0 for j in range(n)])
        for i in range(n)
    )


def chi_tensor(g: Gpt) -> TensorElement:
    """The evaluation tensor sum_i a_i (x) e_i over the canonical basis.

    Its coefficient matrix is the orthogonal projector onto the span; for a
    full-dimensional space it is the identity matrix.
    """
    duals = dual_basis(g)
    coeffs = [R0] * (g.dim * g.dim)
    for a, e in zip(duals, g.frame.basis):
        for p, ap in enumerate(a):
            if ap:
                row = p * g.dim
                for q, eq in enumerate(e):
                    if eq:
                        coeffs[row + q] += ap * eq
    return TensorElement((g.dim, g.dim), coeffs)


def map_to_tensor(f: GptMap) -> TensorElement:
    """sum_i a_i (x) f(e_i): first leg carries source functionals, second the
    target.  f is positive iff the tensor lies in the maximal tensor product
    of the source's effect cone with the target cone."""
    duals = dual_basis(f.source)
    d_a, d_b = f.source.dim, f.target.dim
    coeffs = [R0] * (d_a * d_b)
    for a, e in zip(duals, f.source.frame.basis):
        img = f.apply(e)
        for p, ap in enumerate(a):
            if ap:
                row = p * d_b
                for q, iq in enumerate(img):
                    if iq:
                        coeffs[row + q] += ap * iq
    return TensorElement((d_a, d_b), coeffs)


def tensor_to_map(xi: TensorElement, source: Gpt, target: Gpt) -> GptMap:
    """Inverse of map_to_tensor: the matrix is the transposed coefficient
    table, restricted to the source span."""
    if xi.factors != (source.dim, target.dim):
        raise GptError(
            f"tensor factors {xi.factors}, expected ({source.dim}, {target.dim})"
        )
    return GptMap(source, target, xi.as_matrix().transpose())


def dual_state_space(g: Gpt, rho) -> Gpt:
    """The state space of positive functionals normalized at rho.

    Requires rho in the relative interior of the state space: on the boundary
    some nonzero positive functional vanishes at rho and the slice is
    unbounded.  Only full-dimensional spaces are supported, mirroring
    `dual_cone`.
    """
    rho = as_vec(rho)
    if not g.cone.is_generating():
        raise GptError("dual_state_space requires a full-dimensional cone")
    if not g.contains_state(rho):
        raise GptError("base state must lie in the state space")
    if not g.in_relative_interior(rho):
        raise GptError(
            "dual state space is unbounded: the base state lies on the "
            "boundary, so some nonzero positive functional vanishes on it"
        )
    return Gpt(g.dim, dual_cone(g.cone), rho, name=f"dual({g.name or g.dim})")


def simplex_gpt(k: int) -> Gpt:
    """The classical k-outcome space: nonnegative orthant with the all-ones unit."""
    if k < 1:
        raise GptError("simplex needs k >= 1")
    gens = [[R1 if j == i else R0 for j in range(k)] for i in range(k)]
    cone = PolyhedralCone(k, generators=gens, facets=gens)
    return Gpt(k, cone, [R1] * k, name=f"simplex:{k}")


def min_factor(f: GptMap) -> Optional[tuple]:
    """Factor f through a classical simplex if its tensor is separable.

    Returns (psi1, psi2) with psi2 o psi1 == f exactly, psi2 a channel, and
    psi1 mapping the unit slice into the simplex (a channel whenever f is);
    None when the tensor is entangled.  The simplex size is the number of
    terms in the separability decomposition.
    """
    for g in f.source.cone.generators:
        img = f.apply(g)
        if not f.target.cone.contains(img):
            raise GptError("min_factor: map is not positive")
        if dot(f.target.unit, img) != dot(f.source.unit, g):
            raise GptError("min_factor: map does not preserve normalization")
    xi = map_to_tensor(f)
    eff = f.source.effect_cone()
    res = member_min(xi, eff, f.target.cone)
    if not res.separable:
        return None
    # Rescale each leg onto the state slice (generators of the target cone
    # have strictly positive unit value) and merge legs that share a state,
    # summing their functional parts.
    by_state = {}
    for w, a_vec, b_vec in res.decomposition:
        h = dot(f.target.unit, b_vec)
        state = tuple(x / h for x in b_vec)
        scaled = tuple(w * h * x for x in a_vec)
        if state in by_state:
            by_state[state] = tuple(p + q for p, q in zip(by_state[state], scaled))
        else:
            by_state[state] = scaled
    terms = [(R1, a_vec, state) for state, a_vec in sorted(by_state.items())]
    lam = len(terms)
    s = simplex_gpt(lam)
    psi1 = GptMap(
        f.source,
        s,
        RatMatrix.from_rows([[w * x for x in a_vec] for w, a_vec, _ in terms]),
    )
    psi2 = GptMap(
        s,
        f.target,
        RatMatrix.from_cols([list(b_vec) for _, _, b_vec in terms]),
    )
    return psi1, psi2
