"""Symmetric extensions of multimeter and behavior tensors.

An order-n extension of a two-leg tensor replaces its column-stochastic leg
by n copies whose averaged readout (the order-n reduction map) gives the
original back.  Extendability interpolates between no constraint (n = 1) and
separability (n = number of settings); it is equivalent to families of
partial joint measurements, respectively restricted local models, tied
together by no-signaling constraints.  Both sides of each equivalence are
independent exact LPs here, so they can be cross-checked against each other.

Extension tensors are searched in the symmetric range of the copied legs:
averaging any extension over leg permutations stays inside the maximal
tensor product and commutes with the reduction map, so the restriction loses
no feasibility while shrinking the LP substantially.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .gpt import Gpt, dual_basis
from .meters import Multimeter
from .polysimplex import NsDistribution, PolysimplexSpace, make_polysimplex, ns_encode
from .ratlin import (
    R0,
    R1,
    RatMatrix,
    cone_affine_feasible,
    dot,
    rat,
)

MAX_N = 4
MAX_KG = 3


class ExtendError(ValueError):
    pass


def _check_caps(k: int, g: int, n: int):
    if n < 1:
        raise ExtendError("extension order must be at least 1")
    if n > MAX_N or k > MAX_KG or g > MAX_KG:
        raise ExtendError(
            f"extension LP with n={n}, k={k}, g={g} exceeds the supported "
            f"range n <= {MAX_N}, k, g <= {MAX_KG}"
        )


def symmetrizer(n: int, d: int) -> RatMatrix:
    """The projector onto the symmetric subspace of the n-fold tensor power
    of R^d: the average of all leg permutations."""
    if n < 1:
        raise ExtendError("need n >= 1")
    size = d**n
    out = RatMatrix(size, size)
    perms = list(itertools.permutations(range(n)))
    weight = rat(1, len(perms))
    for idx in itertools.product(range(d), repeat=n):
        row = 0
        for i in idx:
            row = row * d + i
        for pi in perms:
            col = 0
            for pos in range(n):
                col = col * d + idx[pi[pos]]
            out.data[row][col] += weight
    return out


@dataclass
class ReductionMap:
    """The order-n averaged readout from n column-stochastic legs to one:
    each leg in turn is kept while the unit functional eats the others."""

    k: int
    g: int
    n: int
    matrix: RatMatrix  # (k*g) x (k*g)^n

    def apply_to_coeffs(self, coeffs):
        return self.matrix.matvec(coeffs)


def reduction_map(k: int, g: int, n: int) -> ReductionMap:
    sp = PolysimplexSpace(k, g)
    d = sp.dim
    unit = sp.unit
    mat = RatMatrix(d, d**n)
    frac = rat(1, n)
    for idx in itertools.product(range(d), repeat=n):
        col = 0
        for i in idx:
            col = col * d + i
        for keep in range(n):
            w = frac
            for pos in range(n):
                if pos != keep:
                    w *= unit[idx[pos]]
            if w:
                mat.data[idx[keep]][col] += w
    return ReductionMap(k=k, g=g, n=n, matrix=mat)


# ---------------------------------------------------------------------------
# symmetric-leg parametrization shared by both extension LPs
# ---------------------------------------------------------------------------

class _SymLegs:
    """Symmetrized products of span-basis vectors over the n copied legs.

    Each column is a multiset of basis indices standing for the sum of the
    distinct arrangements of the corresponding basis product; the class
    provides exact pairings against products of effect rays and span
    coordinates of reduction-map images.
    """

    def __init__(self, k: int, g: int, n: int):
        self.sp = PolysimplexSpace(k, g)
        self.n = n
        self.cs = make_polysimplex(k, g)
        self.basis = self.cs.frame.basis
        self.m = len(self.basis)
        self.multisets = list(
            itertools.combinations_with_replacement(range(self.m), n)
        )
        self.effects = [
            self.sp.effect(a, x) for a in range(self.sp.k) for x in range(self.sp.g)
        ]
        self.eff_on_basis = [[dot(e, b) for b in self.basis] for e in self.effects]
        self.eff_multisets = list(
            itertools.combinations_with_replacement(range(len(self.effects)), n)
        )
        self._arrangements = {
            ms: sorted(set(itertools.permutations(ms))) for ms in self.multisets
        }

    def effect_pairings(self) -> list:
        """pairings[e][c] = <effect multiset e (one arrangement), symmetrized
        basis product c>; symmetry makes the arrangement choice irrelevant."""
        table = []
        for em in self.eff_multisets:
            row = []
            for ms in self.multisets:
                total = R0
                for arr in self._arrangements[ms]:
                    prod = R1
                    for e_idx, b_idx in zip(em, arr):
                        v = self.eff_on_basis[e_idx][b_idx]
                        if not v:
                            prod = R0
                            break
                        prod *= v
                    if prod:
                        total += prod
                row.append(total)
            table.append(row)
        return table

    def reduced_coords(self) -> list:
        """reduced[c] = span coordinates of the reduction image of column c."""
        unit = self.sp.unit
        unit_on_basis = [dot(unit, b) for b in self.basis]
        frac = rat(1, self.n)
        out = []
        for ms in self.multisets:
            acc = [R0] * self.m
            for arr in self._arrangements[ms]:
                for keep in range(self.n):
                    w = frac
                    for pos in range(self.n):
                        if pos != keep:
                            w *= unit_on_basis[arr[pos]]
                            if not w:
                                break
                    if w:
                        acc[arr[keep]] += w
            out.append(acc)
        return out


def _extension_feasible(first_values, target_coords, sym: _SymLegs) -> bool:
    """Is there a tensor in span(first leg) x sym-span(copied legs) that is
    nonnegative against every first-leg ray paired with every effect-ray
    product and whose reduction has the given span coordinates?

    ``first_values[r][s]`` are the evaluations of the first-leg rays against
    the first-leg basis; ``target_coords[s][t]`` the target tensor expanded
    over (first-leg basis) x (single-leg span basis).
    """
    ns = len(target_coords)
    ncols = len(sym.multisets)
    nv = ns * ncols
    pairings = sym.effect_pairings()
    ineqs = []
    for rvals in first_values:
        nz_s = [(s, v) for s, v in enumerate(rvals) if v]
        if not nz_s:
            continue
        for prow in pairings:
            row = [R0] * nv
            nonzero = False
            for s, rv in nz_s:
                base = s * ncols
                for c, pv in enumerate(prow):
                    if pv:
                        row[base + c] = rv * pv
                        nonzero = True
            if nonzero:
                ineqs.append(row)
    reduced = sym.reduced_coords()
    eq_rows = []
    eq_rhs = []
    for s in range(ns):
        for t in range(sym.m):
            row = [R0] * nv
            base = s * ncols
            for c in range(ncols):
                v = reduced[c][t]
                if v:
                    row[base + c] = v
            eq_rows.append(row)
            eq_rhs.append(target_coords[s][t])
    return cone_affine_feasible(ineqs, eq_rows, eq_rhs).feasible


def is_n_extendable_multimeter(m: Multimeter, n: int) -> bool:
    """Feasibility of an order-n extension of the multimeter tensor.

    The candidate lives in (effect span of the state space) x (n symmetric
    column-stochastic legs), must evaluate nonnegatively against every state
    vertex paired with every product of effect rays, and must reduce back to
    the multimeter tensor.
    """
    _check_caps(m.k, m.g, n)
    if n == 1:
        return True
    sym = _SymLegs(m.k, m.g, n)
    space = m.space
    duals = dual_basis(space)
    first_values = [[dot(a, v) for a in duals] for v in space.cone.generators]
    sp = sym.sp
    cs_frame = sym.cs.frame
    target_coords = []
    for e_s in space.frame.basis:
        img = m.outcome_table(e_s)
        amb = [R0] * sp.dim
        for x in range(m.g):
            for a in range(m.k):
                amb[sp.idx(a, x)] = img[x][a]
        target_coords.append(cs_frame.coords(tuple(amb)))
    return _extension_feasible(first_values, target_coords, sym)


def is_n_extendable_behavior(p: NsDistribution, n: int) -> bool:
    """Feasibility of an order-n extension of a square-shaped behavior."""
    if p.n != 2 or p.shapes[0] != p.shapes[1]:
        raise ExtendError("behavior extensions need two parties of equal shape")
    k, g = p.shapes[0]
    _check_caps(k, g, n)
    if n > g:
        raise ExtendError("extension order exceeds the setting count")
    if n == 1:
        return True
    sym = _SymLegs(k, g, n)
    cs = sym.cs
    duals = dual_basis(cs)
    # first leg is a state leg: rays to test against are the effect rays
    first_values = [
        [dot(e, b) for b in cs.frame.basis] for e in sym.effects
    ]
    xi = ns_encode(p).as_matrix()
    target_coords = []
    for a_s in duals:
        amb = xi.rmatvec(a_s)
        target_coords.append(cs.frame.coords(tuple(amb)))
    return _extension_feasible(first_values, target_coords, sym)


# ---------------------------------------------------------------------------
# n-wise compatibility with cross no-signaling constraints
# ---------------------------------------------------------------------------

@dataclass
class NwiseJointFamily:
    """One joint effect table per size-n setting subset, with matching
    single-setting marginals and aligned cross-subset marginals."""

    subsets: tuple  # sorted tuples of settings
    tables: dict  # subset -> {outcome tuple -> ambient effect vector}

    def reproduces(self, m: Multimeter) -> bool:
        basis = m.space.frame.basis
        k = m.k
        for subset in self.subsets:
            table = self.tables[subset]
            for e in table.values():
                for v in m.space.cone.generators:
                    if dot(e, v) < 0:
                        return False
            for i, x in enumerate(subset):
                for a in range(k):
                    acc = [R0] * m.space.dim
                    for outcomes, e in table.items():
                        if outcomes[i] == a:
                            acc = [p + q for p, q in zip(acc, e)]
                    for b in basis:
                        if dot(acc, b) != dot(m.effects[x][a], b):
                            return False
        for sub1, sub2 in itertools.combinations(self.subsets, 2):
            common = sorted(set(sub1) & set(sub2))
            if len(common) != len(sub1) - 1:
                continue
            if not self._cross_match(m, sub1, sub2, tuple(common)):
                return False
        return True

    def _cross_match(self, m, sub1, sub2, common) -> bool:
        k = m.k
        basis = m.space.frame.basis
        pos1 = [sub1.index(x) for x in common]
        pos2 = [sub2.index(x) for x in common]
        extra1 = [i for i in range(len(sub1)) if i not in pos1][0]
        extra2 = [i for i in range(len(sub2)) if i not in pos2][0]
        for bs in itertools.product(range(k), repeat=len(common)):
            acc1 = [R0] * m.space.dim
            for outcomes, e in self.tables[sub1].items():
                if all(outcomes[p] == b for p, b in zip(pos1, bs)):
                    acc1 = [p + q for p, q in zip(acc1, e)]
            acc2 = [R0] * m.space.dim
            for outcomes, e in self.tables[sub2].items():
                if all(outcomes[p] == b for p, b in zip(pos2, bs)):
                    acc2 = [p + q for p, q in zip(acc2, e)]
            for b in basis:
                if dot(acc1, b) != dot(acc2, b):
                    return False
        return True


def nwise_compatible_ns(m: Multimeter, n: int) -> Optional[NwiseJointFamily]:
    """Joint measurements for every size-n subset of settings, coupled by
    no-signaling marginal constraints across subsets, as one LP.

    The tables are parametrized by nonnegative weights over the extreme
    effect rays; for n = 1 the family is the multimeter itself.
    """
    if not (1 <= n <= m.g):
        raise ExtendError("subset size must satisfy 1 <= n <= g")
    if n == 1:
        subsets = tuple((x,) for x in range(m.g))
        tables = {
            (x,): {(a,): m.effects[x][a] for a in range(m.k)} for x in range(m.g)
        }
        return NwiseJointFamily(subsets=subsets, tables=tables)
    gens = m.space.effect_cone().generators
    ngen = len(gens)
    basis = m.space.frame.basis
    subsets = list(itertools.combinations(range(m.g), n))
    outcomes = list(itertools.product(range(m.k), repeat=n))
    var_index = {}
    for sub in subsets:
        for out in outcomes:
            for t in range(ngen):
                var_index[(sub, out, t)] = len(var_index)
    nv = len(var_index)
    rows = []
    rhs = []

    def add_row(coeffs, value):
        row = [R0] * nv
        for key, c in coeffs.items():
            row[var_index[key]] += c
        rows.append(row)
        rhs.append(value)

    gen_on_basis = [[dot(gvec, b) for b in basis] for gvec in gens]
    for sub in subsets:
        for i, x in enumerate(sub):
            for a in range(m.k):
                for bi, b in enumerate(basis):
                    coeffs = {}
                    for out in outcomes:
                        if out[i] != a:
                            continue
                        for t in range(ngen):
                            v = gen_on_basis[t][bi]
                            if v:
                                coeffs[(sub, out, t)] = coeffs.get((sub, out, t), R0) + v
                    add_row(coeffs, dot(m.effects[x][a], b))
    for sub1, sub2 in itertools.combinations(subsets, 2):
        common = sorted(set(sub1) & set(sub2))
        if len(common) != n - 1:
            continue
        pos1 = [sub1.index(x) for x in common]
        pos2 = [sub2.index(x) for x in common]
        for bs in itertools.product(range(m.k), repeat=n - 1):
            for bi, b in enumerate(basis):
                coeffs = {}
                for out in outcomes:
                    if all(out[p] == v for p, v in zip(pos1, bs)):
                        for t in range(ngen):
                            val = gen_on_basis[t][bi]
                            if val:
                                coeffs[(sub1, out, t)] = coeffs.get((sub1, out, t), R0) + val
                    if all(out[p] == v for p, v in zip(pos2, bs)):
                        for t in range(ngen):
                            val = gen_on_basis[t][bi]
                            if val:
                                coeffs[(sub2, out, t)] = coeffs.get((sub2, out, t), R0) - val
                add_row(coeffs, R0)
    from .ratlin import LinearProgram, lp_solve

    prob = LinearProgram(c=[R0] * nv, a_eq=RatMatrix.from_rows(rows), b_eq=rhs)
    res = lp_solve(prob)
    if res.status != "Optimal":
        return None
    tables = {}
    for sub in subsets:
        table = {}
        for out in outcomes:
            e = [R0] * m.space.dim
            for t in range(ngen):
                w = res.x[var_index[(sub, out, t)]]
                if w:
                    e = [p + w * q for p, q in zip(e, gens[t])]
            table[out] = tuple(e)
        tables[sub] = table
    fam = NwiseJointFamily(subsets=tuple(subsets), tables=tables)
    assert fam.reproduces(m)
    return fam


# ---------------------------------------------------------------------------
# restricted local models with cross no-signaling constraints
# ---------------------------------------------------------------------------

def gn_lhv_ns(p: NsDistribution, n: int) -> bool:
    """Restricted local models: one local-weight vector per size-n subset of
    the second party's settings, reproducing the restricted behavior, with
    cross-subset no-signaling marginal constraints, as a single LP."""
    if p.n != 2 or p.shapes[0] != p.shapes[1]:
        raise ExtendError("restricted local models need two parties of equal shape")
    k, g = p.shapes[0]
    if not (1 <= n <= g):
        raise ExtendError("subset size must satisfy 1 <= n <= g")
    subsets = list(itertools.combinations(range(g), n))
    strat_a = list(itertools.product(range(k), repeat=g))
    strat_b = list(itertools.product(range(k), repeat=n))
    var_index = {}
    for sub in subsets:
        for sa in strat_a:
            for sb in strat_b:
                var_index[(sub, sa, sb)] = len(var_index)
    nv = len(var_index)
    rows = []
    rhs = []

    def add_row(coeffs, value):
        row = [R0] * nv
        for key, c in coeffs.items():
            row[var_index[key]] += c
        rows.append(row)
        rhs.append(value)

    for sub in subsets:
        for x in range(g):
            for i, y in enumerate(sub):
                for a in range(k):
                    for b in range(k):
                        coeffs = {}
                        for sa in strat_a:
                            if sa[x] != a:
                                continue
                            for sb in strat_b:
                                if sb[i] == b:
                                    coeffs[(sub, sa, sb)] = (
                                        coeffs.get((sub, sa, sb), R0) + R1
                                    )
                        add_row(coeffs, p.p((a, b), (x, y)))
    for sub1, sub2 in itertools.combinations(subsets, 2):
        common = sorted(set(sub1) & set(sub2))
        if len(common) != n - 1:
            continue
        pos1 = [sub1.index(y) for y in common]
        pos2 = [sub2.index(y) for y in common]
        j1 = [i for i in range(n) if i not in pos1][0]
        j2 = [i for i in range(n) if i not in pos2][0]
        for i in range(g):
            for ai in range(k):
                for bs in itertools.product(range(k), repeat=n - 1):
                    coeffs = {}
                    for sa in strat_a:
                        if sa[i] != ai:
                            continue
                        for sb in strat_b:
                            if all(sb[pp] == v for pp, v in zip(pos1, bs)):
                                coeffs[(sub1, sa, sb)] = (
                                    coeffs.get((sub1, sa, sb), R0) + R1
                                )
                    for sa in strat_a:
                        if sa[i] != ai:
                            continue
                        for sb in strat_b:
                            if all(sb[pp] == v for pp, v in zip(pos2, bs)):
                                coeffs[(sub2, sa, sb)] = (
                                    coeffs.get((sub2, sa, sb), R0) - R1
                                )
                    add_row(coeffs, R0)
    from .ratlin import LinearProgram, lp_solve

    prob = LinearProgram(c=[R0] * nv, a_eq=RatMatrix.from_rows(rows), b_eq=rhs)
    res = lp_solve(prob)
    return res.status == "Optimal"
