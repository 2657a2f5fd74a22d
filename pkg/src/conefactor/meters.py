"""Multimeters: compatibility, robustness, classical simulation, and friends.

A multimeter is a table of g measurements with k outcomes each, given by
effect functionals on a polyhedral state space; equivalently a channel into
the k x g column-stochastic space.  All decision procedures below are single
exact LPs: joint measurements and noise models are parametrized by
nonnegative weights over the extreme rays of the effect cone, which keeps the
LPs small and free of redundant degeneracy.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .cone import TensorElement
from .gpt import Gpt, GptMap, GptError, identity_map, is_channel, map_to_tensor
from .polysimplex import (
    PolysimplexSpace,
    SimulationData,
    make_polysimplex,
    polysimplex_shape,
)
from .ratlin import (
    R0,
    R1,
    LinearProgram,
    RatMatrix,
    as_vec,
    dot,
    lp_solve,
    rat,
)


class MeterError(ValueError):
    pass


class Multimeter:
    """Effects ``effects[x][a]`` of g measurements with k outcomes on a Gpt.

    Invariants: every effect is nonnegative on the state space, and for each
    setting the effects sum to the order unit (as functionals on the span).
    """

    def __init__(self, space: Gpt, effects: Sequence[Sequence]):
        self.space = space
        self.effects = tuple(tuple(as_vec(e) for e in row) for row in effects)
        if not self.effects:
            raise MeterError("need at least one measurement")
        self.g = len(self.effects)
        self.k = len(self.effects[0])
        if any(len(row) != self.k for row in self.effects):
            raise MeterError("all measurements must share one outcome count")
        for row in self.effects:
            for e in row:
                if len(e) != space.dim:
                    raise MeterError("effect of wrong dimension")
                for v in space.cone.generators:
                    if dot(e, v) < 0:
                        raise MeterError("effect is negative on a state")
            total = [sum(col) for col in zip(*row)]
            for b in space.frame.basis:
                if dot(total, b) != dot(space.unit, b):
                    raise MeterError("effects of a measurement must sum to the unit")

    def effect(self, a: int, x: int) -> tuple:
        return self.effects[x][a]

    def outcome_table(self, state) -> tuple:
        return tuple(
            tuple(dot(self.effects[x][a], state) for a in range(self.k))
            for x in range(self.g)
        )

    def __repr__(self):
        return f"Multimeter(k={self.k}, g={self.g} on {self.space!r})"


def as_channel(m: Multimeter) -> GptMap:
    """The channel into the k x g column-stochastic space."""
    sp = PolysimplexSpace(m.k, m.g)
    target = make_polysimplex(m.k, m.g)
    mat = RatMatrix(sp.dim, m.space.dim)
    for x in range(m.g):
        for a in range(m.k):
            mat.data[sp.idx(a, x)] = list(m.effects[x][a])
    f = GptMap(m.space, target, mat)
    if not is_channel(f):
        raise MeterError("multimeter table does not define a channel")
    return f


def meter_tensor(m: Multimeter) -> TensorElement:
    """The two-leg tensor of the multimeter channel: effect leg first,
    column-stochastic leg second; compatibility equals its separability."""
    return map_to_tensor(as_channel(m))


def meter_tensor_separability(m: Multimeter):
    """Separability of the multimeter tensor in (effect cone) x (column-
    stochastic cone); an independent route to the compatibility decision."""
    from .cone import member_min

    cs = make_polysimplex(m.k, m.g)
    return member_min(meter_tensor(m), m.space.effect_cone(), cs.cone)


def trivial_multimeter(space: Gpt, table) -> Multimeter:
    """Effects proportional to the unit: ``table[x][a]`` times the unit."""
    effects = [
        [tuple(rat(p) * u for u in space.unit) for p in row] for row in table
    ]
    return Multimeter(space, effects)


def identity_multimeter(ps: Gpt) -> Multimeter:
    """On a polysimplex, the setting-wise readout measurements (the identity
    channel viewed as a multimeter)."""
    k, g = polysimplex_shape(ps)
    sp = PolysimplexSpace(k, g)
    return Multimeter(ps, [[sp.effect(a, x) for a in range(k)] for x in range(g)])


@dataclass
class JointMeasurement:
    """A parent measurement plus classical post-processing.

    ``effects[j]`` are the parent effects, ``post[j][x][a]`` the conditional
    probability of reporting outcome a for setting x given parent outcome j.
    """

    effects: tuple
    post: tuple

    def reproduces(self, m: Multimeter) -> bool:
        for e in self.effects:
            for v in m.space.cone.generators:
                if dot(e, v) < 0:
                    return False
        total = [sum(col) for col in zip(*self.effects)]
        for b in m.space.frame.basis:
            if dot(total, b) != dot(m.space.unit, b):
                return False
        for x in range(m.g):
            for a in range(m.k):
                combo = [R0] * m.space.dim
                for j, e in enumerate(self.effects):
                    w = self.post[j][x][a]
                    if w:
                        combo = [c + w * ei for c, ei in zip(combo, e)]
                for b in m.space.frame.basis:
                    if dot(combo, b) != dot(m.effects[x][a], b):
                        return False
        return True


def _effect_generators(space: Gpt) -> tuple:
    return space.effect_cone().generators


def _response_tuples(k: int, g: int, extra: int = 0):
    """Deterministic response functions [g] -> [k]; duplicating a few of
    them (``extra``) changes nothing about feasibility and exists to exercise
    the claim that k^g outcomes suffice."""
    tuples = list(itertools.product(range(k), repeat=g))
    return tuples + tuples[:extra]


def is_compatible(m: Multimeter, extra_outcomes: int = 0) -> Optional[JointMeasurement]:
    """A single parent measurement reproducing every row of the multimeter.

    The parent is searched with one outcome per deterministic response
    function (k^g of them), each effect a nonnegative combination of extreme
    effect rays; the LP constraints force the response-consistent sums to
    match the given effects.  Infeasibility decides incompatibility exactly.
    """
    gens = _effect_generators(m.space)
    responses = _response_tuples(m.k, m.g, extra_outcomes)
    nresp, ngen = len(responses), len(gens)
    basis = m.space.frame.basis
    nv = nresp * ngen
    rows = []
    rhs = []
    for x in range(m.g):
        for a in range(m.k):
            for b in basis:
                row = [R0] * nv
                for j, resp in enumerate(responses):
                    if resp[x] == a:
                        for t, gen in enumerate(gens):
                            val = dot(gen, b)
                            if val:
                                row[j * ngen + t] += val
                rows.append(row)
                rhs.append(dot(m.effects[x][a], b))
    prob = LinearProgram(c=[R0] * nv, a_eq=RatMatrix.from_rows(rows), b_eq=rhs)
    res = lp_solve(prob)
    if res.status != "Optimal":
        return None
    effects = []
    post = []
    for j, resp in enumerate(responses):
        e = [R0] * m.space.dim
        for t, gen in enumerate(gens):
            w = res.x[j * ngen + t]
            if w:
                e = [c + w * gi for c, gi in zip(e, gen)]
        effects.append(tuple(e))
        post.append(
            tuple(
                tuple(R1 if resp[x] == a else R0 for a in range(m.k))
                for x in range(m.g)
            )
        )
    jm = JointMeasurement(effects=tuple(effects), post=tuple(post))
    assert jm.reproduces(m)
    return jm


def compatibility_robustness(m: Multimeter):
    """Largest weight at which the multimeter, mixed with free trivial noise,
    stays compatible.

    One LP: maximize lam subject to existence of unnormalized noise weights
    q[x][a] >= 0 with sum_a q[x][a] = 1 - lam and a joint measurement for
    lam*M + q*unit.  The noise is conditioned on the setting, not merely
    uniform.
    """
    gens = _effect_generators(m.space)
    responses = _response_tuples(m.k, m.g)
    nresp, ngen = len(responses), len(gens)
    basis = m.space.frame.basis
    # variables: lam, q[x][a] (g*k), weights (nresp*ngen)
    nq = m.g * m.k
    nv = 1 + nq + nresp * ngen

    def qvar(x, a):
        return 1 + x * m.k + a

    def wvar(j, t):
        return 1 + nq + j * ngen + t

    rows = []
    rhs = []
    unit_vals = {id(b): dot(m.space.unit, b) for b in basis}
    for x in range(m.g):
        for a in range(m.k):
            for b in basis:
                row = [R0] * nv
                row[0] = -dot(m.effects[x][a], b)
                row[qvar(x, a)] = -dot(m.space.unit, b)
                for j, resp in enumerate(responses):
                    if resp[x] == a:
                        for t, gen in enumerate(gens):
                            val = dot(gen, b)
                            if val:
                                row[wvar(j, t)] += val
                rows.append(row)
                rhs.append(R0)
    for x in range(m.g):
        row = [R0] * nv
        row[0] = R1
        for a in range(m.k):
            row[qvar(x, a)] = R1
        rows.append(row)
        rhs.append(R1)
    cap = [R0] * nv
    cap[0] = -R1
    prob = LinearProgram(
        c=[R1] + [R0] * (nv - 1),
        a_eq=RatMatrix.from_rows(rows),
        b_eq=rhs,
        a_ge=RatMatrix.from_rows([cap]),
        b_ge=[-R1],
    )
    res = lp_solve(prob)
    if res.status != "Optimal":
        raise MeterError("robustness LP failed; multimeter table is malformed")
    return res.optimum


def classical_simulates(n: Multimeter, m: Multimeter) -> Optional[SimulationData]:
    """Decide whether choosing settings of ``n`` by classical dice and
    post-processing its outcomes reproduces ``m`` exactly.

    LP over gamma[a,b,x,y] >= 0 with outcome-independent column weights and
    sum_{y,b} gamma * N_effect(b,y) == M_effect(a,x) on the span.
    """
    if n.space is not m.space:
        if n.space.dim != m.space.dim or not n.space.cone.same_cone(m.space.cone):
            raise MeterError("multimeters live on different state spaces")
        for b in m.space.frame.basis:
            if dot(n.space.unit, b) != dot(m.space.unit, b):
                raise MeterError("multimeters disagree on the order unit")
    k, g = m.k, m.g
    l, r = n.k, n.g
    basis = m.space.frame.basis
    nv = k * l * g * r

    def var(a, b, x, y):
        return ((a * l + b) * g + x) * r + y

    rows = []
    rhs = []
    for x in range(g):
        for a in range(k):
            for bas in basis:
                row = [R0] * nv
                for y in range(r):
                    for b in range(l):
                        val = dot(n.effects[y][b], bas)
                        if val:
                            row[var(a, b, x, y)] += val
                rows.append(row)
                rhs.append(dot(m.effects[x][a], bas))
    for x in range(g):
        for y in range(r):
            for b in range(1, l):
                row = [R0] * nv
                for a in range(k):
                    row[var(a, 0, x, y)] += R1
                    row[var(a, b, x, y)] -= R1
                rows.append(row)
                rhs.append(R0)
    prob = LinearProgram(c=[R0] * nv, a_eq=RatMatrix.from_rows(rows), b_eq=rhs)
    res = lp_solve(prob)
    if res.status != "Optimal":
        return None
    gamma = {key: res.x[var(*key)] for key in itertools.product(range(k), range(l), range(g), range(r))}
    pi = []
    nu = []
    uniform = tuple(rat(1, k) for _ in range(k))
    for x in range(g):
        pi_row = []
        nu_row = []
        for y in range(r):
            w = sum(gamma[(a, 0, x, y)] for a in range(k))
            pi_row.append(w)
            if w:
                nu_row.append(
                    tuple(
                        tuple(gamma[(a, b, x, y)] / w for a in range(k))
                        for b in range(l)
                    )
                )
            else:
                nu_row.append(tuple(uniform for _ in range(l)))
        pi.append(tuple(pi_row))
        nu.append(tuple(nu_row))
    return SimulationData(pi=tuple(pi), nu=tuple(nu))


def apply_simulation(n: Multimeter, sim: SimulationData) -> Multimeter:
    """The multimeter produced by running ``sim`` on top of ``n``."""
    g = sim.g
    k = len(sim.nu[0][0][0])
    effects = []
    for x in range(g):
        row = []
        for a in range(k):
            e = [R0] * n.space.dim
            for y in range(n.g):
                w = sim.pi[x][y]
                if not w:
                    continue
                for b in range(n.k):
                    c = w * sim.nu[x][y][b][a]
                    if c:
                        e = [p + c * q for p, q in zip(e, n.effects[y][b])]
            row.append(tuple(e))
        effects.append(row)
    return Multimeter(n.space, effects)


def _merge_proportional(effects):
    """Sum effects that lie on a common ray; drop zero effects."""
    merged = []
    for e in effects:
        if all(not x for x in e):
            continue
        placed = False
        for i, f in enumerate(merged):
            # e proportional to f?
            ratio = None
            ok = True
            for a, b in zip(e, f):
                if (a == 0) != (b == 0):
                    ok = False
                    break
                if a:
                    q = a / b
                    if ratio is None:
                        ratio = q
                    elif q != ratio:
                        ok = False
                        break
            if ok and ratio is not None and ratio > 0:
                merged[i] = tuple(a + b for a, b in zip(f, e))
                placed = True
                break
        if not placed:
            merged.append(tuple(e))
    return merged


def is_simulation_irreducible(m: Multimeter) -> bool:
    """Extremal simulation irreducibility of a single measurement: after
    merging proportional effects, every effect must lie on an extreme ray of
    the effect cone and the effects must be linearly independent."""
    if m.g != 1:
        raise MeterError("simulation irreducibility concerns one measurement")
    frame = m.space.frame
    effects = _merge_proportional([frame.project_functional(e) for e in m.effects[0]])
    rays = [frame.project_functional(g) for g in _effect_generators(m.space)]

    def on_ray(e):
        for ray in rays:
            ratio = None
            ok = True
            for a, b in zip(e, ray):
                if (a == 0) != (b == 0):
                    ok = False
                    break
                if a:
                    q = a / b
                    if ratio is None:
                        ratio = q
                    elif q != ratio:
                        ok = False
                        break
            if ok and ratio is not None and ratio > 0:
                return True
        return False

    if not all(on_ray(e) for e in effects):
        return False
    from .ratlin import rref_basis

    return len(rref_basis(effects)) == len(effects)


def can_factor_identity(l: int, r: int, k: int, g: int) -> bool:
    """Whether the identity on the (l, r) space factors through the (k, g)
    one: possible exactly when the smaller table embeds, k >= l and g >= r."""
    if min(l, r, k, g) < 1:
        raise MeterError("shape parameters must be positive")
    return k >= l and g >= r


def identity_embedding_pair(l: int, r: int, k: int, g: int):
    """The explicit embed/restrict channel pair behind can_factor_identity.

    Embedding pads with zero outcome rows and fills extra settings with a
    deterministic first-outcome readout; restriction forwards the first l-1
    outcomes and lumps the tail.  Their composite is the identity.
    """
    if not can_factor_identity(l, r, k, g):
        raise MeterError(f"identity on ({l},{r}) does not factor through ({k},{g})")
    src = make_polysimplex(l, r)
    mid = make_polysimplex(k, g)
    sps, spm = PolysimplexSpace(l, r), PolysimplexSpace(k, g)
    emb = RatMatrix(spm.dim, sps.dim)
    for x in range(g):
        for a in range(k):
            if x < r and a < l:
                emb[spm.idx(a, x), sps.idx(a, x)] = R1
            elif x >= r and a == 0:
                # deterministic extra setting: report outcome 0 always
                for b in range(l):
                    emb[spm.idx(a, x), sps.idx(b, 0)] = R1
    restr = RatMatrix(sps.dim, spm.dim)
    for y in range(r):
        for b in range(l):
            if b < l - 1:
                restr[sps.idx(b, y), spm.idx(b, y)] = R1
            else:
                for a in range(l - 1, k):
                    restr[sps.idx(b, y), spm.idx(a, y)] = R1
    psi = GptMap(src, mid, emb)
    phi = GptMap(mid, src, restr)
    if not (is_channel(psi) and is_channel(phi)):
        raise MeterError("internal: embedding pair is not a channel pair")
    if not phi.compose(psi).equals_on_source(identity_map(src)):
        raise MeterError("internal: embedding pair does not compose to identity")
    return psi, phi


def verify_kb_simulation(
    m: Multimeter, ops: Sequence[GptMap], n_tables: Sequence[Sequence[Sequence]]
) -> bool:
    """Check the defining identity of simulating ``m`` through another space.

    ``ops`` are the branches of an instrument out of m's space; ``n_tables``
    is, per branch, a g x k table of effects on the branch target.  Verifies
    that every op is positive, that the ops sum to a channel, that each
    branch table is a valid multimeter, and that pulling the branch effects
    back through the ops reproduces m exactly.  This is a certificate check;
    no search is performed.
    """
    if not ops or len(ops) != len(n_tables):
        raise MeterError("need one effect table per instrument branch")
    target = ops[0].target
    for op in ops:
        if op.source is not m.space and op.source.dim != m.space.dim:
            raise MeterError("instrument branch with wrong source")
        if op.target.dim != target.dim:
            raise MeterError("instrument branches must share a target")
        for gvec in m.space.cone.generators:
            if not op.target.cone.contains(op.apply(gvec)):
                return False
    total = ops[0].matrix.copy()
    for op in ops[1:]:
        for i in range(total.rows):
            total.data[i] = [p + q for p, q in zip(total.data[i], op.matrix.data[i])]
    if not is_channel(GptMap(m.space, target, total)):
        return False
    for table in n_tables:
        if len(table) != m.g or any(len(row) != m.k for row in table):
            raise MeterError("branch effect table with wrong shape")
        for row in table:
            for e in row:
                for v in target.cone.generators:
                    if dot(e, v) < 0:
                        return False
            s = [sum(col) for col in zip(*row)]
            for b in target.frame.basis:
                if dot(s, b) != dot(target.unit, b):
                    return False
    for x in range(m.g):
        for a in range(m.k):
            pulled = [R0] * m.space.dim
            for op, table in zip(ops, n_tables):
                part = op.adjoint_apply(table[x][a])
                pulled = [p + q for p, q in zip(pulled, part)]
            for b in m.space.frame.basis:
                if dot(pulled, b) != dot(m.effects[x][a], b):
                    return False
    return True
