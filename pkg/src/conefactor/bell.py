"""Bipartite no-signaling behaviors, local models, and the CHSH witnesses.

Behaviors are two-party no-signaling tables; their tensors fill the maximal
tensor product of two column-stochastic cones, and the local ones are exactly
the separable tensors.  The two-setting/two-outcome scenario carries exactly
eight extremal witnesses; they arise from the eight linear isomorphisms
between the square state space and its dual, and every witness on a
(2,2)-by-(k,g) scenario is a post-processing of one fixed member of that
family (`reduce_to_chsh`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .cone import TensorElement
from .gpt import GptMap, is_positive_map
from .polysimplex import (
    NsDistribution,
    PolysimplexSpace,
    make_polysimplex,
    ns_encode,
)
from .ratlin import (
    R0,
    R1,
    LinearProgram,
    RatMatrix,
    dot,
    linsolve,
    lp_solve,
    rat,
)


class BellError(ValueError):
    pass


Behavior = NsDistribution  # two-party case; shapes [(k, g), (l, r)]


def behavior(shapes, probs) -> NsDistribution:
    d = NsDistribution(shapes, probs)
    if d.n != 2:
        raise BellError("behaviors are two-party tables")
    return d


def product_behavior(shapes, p_first, p_second) -> NsDistribution:
    """p(a|x) * q(b|y) from two single-party tables [x][a] and [y][b]."""
    (k, g), (l, r) = shapes
    probs = []
    for x in range(g):
        for y in range(r):
            for a in range(k):
                for b in range(l):
                    probs.append(rat(p_first[x][a]) * rat(p_second[y][b]))
    return NsDistribution(shapes, probs)


def deterministic_behavior(shapes, strat_first, strat_second) -> NsDistribution:
    (k, g), (l, r) = shapes
    pf = [[R1 if a == strat_first[x] else R0 for a in range(k)] for x in range(g)]
    ps = [[R1 if b == strat_second[y] else R0 for b in range(l)] for y in range(r)]
    return product_behavior(shapes, pf, ps)


@dataclass
class LhvModel:
    """Weights over pairs of deterministic strategies."""

    shapes: tuple
    weights: dict  # (strategy_first, strategy_second) -> weight

    def reproduces(self, p: NsDistribution) -> bool:
        if sum(self.weights.values()) != 1:
            return False
        if any(w < 0 for w in self.weights.values()):
            return False
        (k, g), (l, r) = self.shapes
        for xs in p.setting_tuples():
            for a in p.outcome_tuples():
                total = R0
                for (sa, sb), w in self.weights.items():
                    if sa[xs[0]] == a[0] and sb[xs[1]] == a[1]:
                        total += w
                if total != p.p(a, xs):
                    return False
        return True


def has_lhv(p: NsDistribution) -> Optional[LhvModel]:
    """LP over the deterministic strategy products."""
    if p.n != 2:
        raise BellError("has_lhv expects a two-party behavior")
    (k, g), (l, r) = p.shapes
    strats_a = list(itertools.product(range(k), repeat=g))
    strats_b = list(itertools.product(range(l), repeat=r))
    pairs = [(sa, sb) for sa in strats_a for sb in strats_b]
    nv = len(pairs)
    rows = []
    rhs = []
    for xs in p.setting_tuples():
        for a in p.outcome_tuples():
            row = [R0] * nv
            for j, (sa, sb) in enumerate(pairs):
                if sa[xs[0]] == a[0] and sb[xs[1]] == a[1]:
                    row[j] = R1
            rows.append(row)
            rhs.append(p.p(a, xs))
    prob = LinearProgram(c=[R0] * nv, a_eq=RatMatrix.from_rows(rows), b_eq=rhs)
    res = lp_solve(prob)
    if res.status != "Optimal":
        return None
    weights = {pairs[j]: w for j, w in enumerate(res.x) if w}
    model = LhvModel(shapes=p.shapes, weights=weights)
    assert model.reproduces(p)
    return model


@dataclass
class WitnessTensor:
    """A functional over two column-stochastic legs, nonnegative on every
    product of vertices; negative values certify nonlocality."""

    shapes: tuple  # ((k, g), (l, r))
    tensor: TensorElement
    name: str = ""

    def __post_init__(self):
        (k, g), (l, r) = self.shapes
        spa, spb = PolysimplexSpace(k, g), PolysimplexSpace(l, r)
        if self.tensor.factors != (spa.dim, spb.dim):
            raise BellError("witness coefficients of wrong shape")

    def is_valid(self) -> bool:
        (k, g), (l, r) = self.shapes
        spa, spb = PolysimplexSpace(k, g), PolysimplexSpace(l, r)
        for oa in spa.vertex_assignments():
            va = spa.vertex(oa)
            left = self.tensor.contract_first(va)
            for ob in spb.vertex_assignments():
                if dot(left, spb.vertex(ob)) < 0:
                    return False
        return True


def evaluate_witness(w: WitnessTensor, p: NsDistribution):
    """Exact pairing of the witness with the behavior's tensor."""
    if p.n != 2 or tuple(p.shapes) != tuple(w.shapes):
        raise BellError(
            f"behavior shaped {tuple(p.shapes)} does not fit witness {tuple(w.shapes)}"
        )
    return dot(w.tensor.coeffs, ns_encode(p).coeffs)


# -- the eight square-isomorphism witnesses ---------------------------------

# Vertices of the two-setting binary space listed around the square, and the
# dual square of extreme effects.  With outcomes/settings counted from zero:
# vertex j is the deterministic assignment, effect c the coordinate readout.
_X_ORDER = [(0, 0), (0, 1), (1, 1), (1, 0)]  # x_1 .. x_4
_PHI_ORDER = [(1, 1), (1, 0), (0, 1), (0, 0)]  # phi_1 .. phi_4  (as (a, x))


def _phi_on_x() -> list:
    """Evaluation table V[c][j] = phi_{c+1}(x_{j+1})."""
    sp = PolysimplexSpace(2, 2)
    table = []
    for (a, x) in _PHI_ORDER:
        eff = sp.effect(a, x)
        table.append([dot(eff, sp.vertex(o)) for o in _X_ORDER])
    return table


def square_isomorphisms() -> list:
    """The eight dihedral assignments j -> tau(j) of vertices to dual
    vertices, rotations first, then reflections; index 0 is the base one."""
    taus = []
    for s in range(4):
        taus.append(tuple((j + 1 + s) % 4 for j in range(4)))
    for s in range(4):
        taus.append(tuple((s - j) % 4 for j in range(4)))
    return taus


def _witness_from_assignment(tau) -> WitnessTensor:
    """The tensor with <W, X_j (x) X_i> = phi_{tau(j)}(x_i).

    Built by expanding the bilinear form over the dual basis of the three
    independent vertices x_2, x_3, x_4 and substituting the effect
    representatives f_2 = phi_4, f_3 = phi_2 - phi_3, f_4 = phi_3; all
    coefficients stay 0/+-1.
    """
    sp = PolysimplexSpace(2, 2)
    v = _phi_on_x()
    # representatives of the dual basis, as sparse {flat index: coeff}
    reps = {
        1: {sp.idx(*_PHI_ORDER[3]): R1},  # f_2 = phi_4
        2: {sp.idx(*_PHI_ORDER[1]): R1, sp.idx(*_PHI_ORDER[2]): -R1},  # f_3
        3: {sp.idx(*_PHI_ORDER[2]): R1},  # f_4 = phi_3
    }
    coeffs = [R0] * (sp.dim * sp.dim)
    for p_idx in (1, 2, 3):
        for q_idx in (1, 2, 3):
            c = v[tau[p_idx]][q_idx]
            if not c:
                continue
            for i, ci in reps[p_idx].items():
                for j, cj in reps[q_idx].items():
                    coeffs[i * sp.dim + j] += c * ci * cj
    return WitnessTensor(
        shapes=((2, 2), (2, 2)),
        tensor=TensorElement((sp.dim, sp.dim), coeffs),
        name=f"chsh[{tau}]",
    )


def chsh_family() -> list:
    """All eight witnesses of the two-setting binary scenario.

    The first member is the base isomorphism; on a behavior p it evaluates to
    p(0,0|0,1) + p(1,0|0,0) + p(0,1|1,0) - p(0,0|1,1), and the family is its
    orbit under the symmetries of the square.
    """
    family = [_witness_from_assignment(tau) for tau in square_isomorphisms()]
    for w in family:
        if not w.is_valid():
            raise BellError("internal: square isomorphism yielded an invalid witness")
    return family


def base_chsh() -> WitnessTensor:
    return _witness_from_assignment(square_isomorphisms()[0])


def _base_iso_matrices():
    """Ambient matrices for the base square isomorphism.

    Returns (L, Linv, LtInv): L carries the vertex x_j to the canonical
    in-span representative of phi_{tau(j)} and Linv undoes that; LtInv
    inverts the adjoint of L on the span, which is the operator that peels
    the base isomorphism off the first leg of a witness stored in
    argument-first slot order.  All three act on the square's
    three-dimensional span and kill its orthogonal complement.
    """
    from .cone import Frame

    sp = PolysimplexSpace(2, 2)
    sq_frame = make_polysimplex(2, 2).frame
    tau = square_isomorphisms()[0]
    xs = [sp.vertex(o) for o in _X_ORDER]
    phis = [sq_frame.project_functional(sp.effect(a, x)) for (a, x) in _PHI_ORDER]
    indep = [xs[1], xs[2], xs[3]]
    targets = [phis[tau[1]], phis[tau[2]], phis[tau[3]]]
    frame_x = Frame(indep)
    frame_t = Frame(targets)
    lmat = RatMatrix.from_cols(targets).matmul(frame_x.coord_map)
    linv = RatMatrix.from_cols(indep).matmul(frame_t.coord_map)
    lt = lmat.transpose()
    frame_lt = Frame([lt.matvec(b) for b in sq_frame.basis])
    ltinv = RatMatrix.from_cols([list(b) for b in sq_frame.basis]).matmul(
        frame_lt.coord_map
    )
    return lmat, linv, ltinv


def push_behavior(p: NsDistribution, xi_star: GptMap) -> TensorElement:
    """(id (x) map)(P): apply the map to the second leg of the behavior."""
    (k1, g1), _ = p.shapes
    xi = ns_encode(p)
    spa = PolysimplexSpace(k1, g1)
    m = xi.as_matrix()  # (k1 g1) x (k2 g2)
    pushed = m.matmul(xi_star.matrix.transpose())
    return TensorElement((spa.dim, xi_star.matrix.rows), pushed.entries())


def chsh_pairing(w: WitnessTensor, q: TensorElement):
    """Frobenius pairing of a witness with a square-by-square tensor."""
    return dot(w.tensor.coeffs, q.coeffs)


def reduce_to_chsh(w: WitnessTensor) -> GptMap:
    """Express a (2,2)-by-(k,g) witness as a post-processing of the base one.

    Peels the base isomorphism off the first leg (through the span-inverse of
    its adjoint), reads the remainder as a positive map from the (k,g) cone
    into the square cone, and returns that map.  The defining identity

        evaluate_witness(w, P) == chsh_pairing(base_chsh(), push_behavior(P, map))

    is verified on the spanning set of deterministic product behaviors
    before returning.
    """
    (ka, ga), (k, g) = w.shapes
    if (ka, ga) != (2, 2):
        raise BellError("reduction expects a (2,2) first party")
    if not w.is_valid():
        raise BellError("not a witness: negative on a product of vertices")
    _, _, ltinv = _base_iso_matrices()
    spa = PolysimplexSpace(2, 2)
    spb = PolysimplexSpace(k, g)
    sq_frame = make_polysimplex(2, 2).frame
    t = w.tensor.as_matrix()  # (4) x (k*g) over functional coordinates
    cols = []
    for q in range(spb.dim):
        func = tuple(t.data[p][q] for p in range(spa.dim))
        cols.append(ltinv.matvec(sq_frame.project_functional(func)))
    xi_mat = RatMatrix.from_cols(cols)  # 4 x (k*g): states (x) functionals
    source = make_polysimplex(k, g)
    target = make_polysimplex(2, 2)
    out = GptMap(source, target, xi_mat)
    if not is_positive_map(out):
        raise BellError("internal: reduction produced a non-positive map")
    base = base_chsh()
    for sa in itertools.product(range(2), repeat=2):
        for sb in itertools.product(*(range(k) for _ in range(g))):
            p = deterministic_behavior(w.shapes, sa, sb)
            if evaluate_witness(w, p) != chsh_pairing(base, push_behavior(p, out)):
                raise BellError("internal: reduction identity failed")
    return out
