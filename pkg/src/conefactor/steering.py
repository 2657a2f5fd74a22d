"""Assemblages: local ensemble models, robustness, and realization checks.

An assemblage is a table of subnormalized states with a setting-independent
total.  It is the state-side mirror of a multimeter: encoded as a tensor with
one column-stochastic leg and one state leg, it has a local-hidden-state
model exactly when that tensor is separable, and all such questions below
are single exact LPs over ensemble weights on the state-space vertices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .cone import TensorElement
from .gpt import Gpt, dual_state_space
from .meters import Multimeter
from .polysimplex import PolysimplexSpace, SimulationData
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


class SteeringError(ValueError):
    pass


class Assemblage:
    """Subnormalized states ``sigma[x][a]`` with equal per-setting totals."""

    def __init__(self, space: Gpt, sigma: Sequence[Sequence]):
        self.space = space
        self.sigma = tuple(tuple(as_vec(s) for s in row) for row in sigma)
        if not self.sigma:
            raise SteeringError("need at least one setting")
        self.g = len(self.sigma)
        self.k = len(self.sigma[0])
        if any(len(row) != self.k for row in self.sigma):
            raise SteeringError("all settings must share one outcome count")
        for row in self.sigma:
            for s in row:
                if len(s) != space.dim:
                    raise SteeringError("assemblage element of wrong dimension")
                if not space.cone.contains(s):
                    raise SteeringError("assemblage element outside the state cone")
        totals = [
            tuple(sum(col) for col in zip(*row)) for row in self.sigma
        ]
        for t in totals[1:]:
            if t != totals[0]:
                raise SteeringError("per-setting totals differ (signaling assemblage)")
        self.bar = totals[0]
        if dot(space.unit, self.bar) != 1:
            raise SteeringError("average state is not normalized")

    def element(self, a: int, x: int) -> tuple:
        return self.sigma[x][a]

    def weights(self) -> tuple:
        """The outcome distributions q[x][a] = unit(sigma[x][a])."""
        return tuple(
            tuple(dot(self.space.unit, s) for s in row) for row in self.sigma
        )

    def __repr__(self):
        return f"Assemblage(k={self.k}, g={self.g} on {self.space!r})"


def assemblage_to_tensor(sigma: Assemblage) -> TensorElement:
    """Tensor with column-stochastic leg first and state leg second; the
    block at (a, x) is the corresponding unnormalized state."""
    sp = PolysimplexSpace(sigma.k, sigma.g)
    d = sigma.space.dim
    coeffs = [R0] * (sp.dim * d)
    for x in range(sigma.g):
        for a in range(sigma.k):
            base = sp.idx(a, x) * d
            for j, v in enumerate(sigma.sigma[x][a]):
                coeffs[base + j] = v
    return TensorElement((sp.dim, d), coeffs)


def assemblage_from_tensor(xi: TensorElement, space: Gpt, k: int, g: int) -> Assemblage:
    sp = PolysimplexSpace(k, g)
    if xi.factors != (sp.dim, space.dim):
        raise SteeringError(
            f"tensor factors {xi.factors}, expected ({sp.dim}, {space.dim})"
        )
    m = xi.as_matrix()
    sigma = [
        [m.row(sp.idx(a, x)) for a in range(k)]
        for x in range(g)
    ]
    for x in range(g):
        for a in range(k):
            if not space.cone.contains(sigma[x][a]):
                raise SteeringError(
                    f"block (a={a}, x={x}) is outside the state cone"
                )
    asm = Assemblage(space, sigma)
    if assemblage_to_tensor(asm) != xi:
        raise SteeringError("tensor carries components outside the state span")
    return asm


@dataclass
class LhsModel:
    """A fixed ensemble with classical responses explaining an assemblage."""

    ensemble: tuple  # unnormalized states B_j
    responses: tuple  # responses[j][x][a]

    def reproduces(self, sigma: Assemblage) -> bool:
        for b in self.ensemble:
            if not sigma.space.cone.contains(b):
                return False
        total = tuple(sum(col) for col in zip(*self.ensemble))
        if total != sigma.bar:
            return False
        for x in range(sigma.g):
            for a in range(sigma.k):
                combo = [R0] * sigma.space.dim
                for j, b in enumerate(self.ensemble):
                    w = self.responses[j][x][a]
                    if w:
                        combo = [c + w * bi for c, bi in zip(combo, b)]
                if tuple(combo) != sigma.sigma[x][a]:
                    return False
        return True


def has_lhs(sigma: Assemblage) -> Optional[LhsModel]:
    """Search a local-hidden-state model with one ensemble member per
    deterministic response function, each a nonnegative mix of vertices."""
    verts = sigma.space.state_vertices()
    responses = list(itertools.product(range(sigma.k), repeat=sigma.g))
    nresp, nvert = len(responses), len(verts)
    d = sigma.space.dim
    nv = nresp * nvert
    rows = []
    rhs = []
    for x in range(sigma.g):
        for a in range(sigma.k):
            for coord in range(d):
                row = [R0] * nv
                for j, resp in enumerate(responses):
                    if resp[x] == a:
                        for t, v in enumerate(verts):
                            if v[coord]:
                                row[j * nvert + t] += v[coord]
                rows.append(row)
                rhs.append(sigma.sigma[x][a][coord])
    prob = LinearProgram(c=[R0] * nv, a_eq=RatMatrix.from_rows(rows), b_eq=rhs)
    res = lp_solve(prob)
    if res.status != "Optimal":
        return None
    ensemble = []
    resp_out = []
    for j, resp in enumerate(responses):
        b = [R0] * d
        for t, v in enumerate(verts):
            w = res.x[j * nvert + t]
            if w:
                b = [c + w * vi for c, vi in zip(b, v)]
        ensemble.append(tuple(b))
        resp_out.append(
            tuple(
                tuple(R1 if resp[x] == a else R0 for a in range(sigma.k))
                for x in range(sigma.g)
            )
        )
    model = LhsModel(ensemble=tuple(ensemble), responses=tuple(resp_out))
    assert model.reproduces(sigma)
    return model


def steering_robustness(sigma: Assemblage):
    """Largest mu at which mu*sigma + noise*sigma_bar has a local model.

    The noise weights are free per (outcome, setting) with per-setting total
    1 - mu, exactly mirroring the measurement-side robustness; everything is
    one LP.
    """
    verts = sigma.space.state_vertices()
    responses = list(itertools.product(range(sigma.k), repeat=sigma.g))
    nresp, nvert = len(responses), len(verts)
    d = sigma.space.dim
    nq = sigma.g * sigma.k
    nv = 1 + nq + nresp * nvert

    def qvar(x, a):
        return 1 + x * sigma.k + a

    def wvar(j, t):
        return 1 + nq + j * nvert + t

    rows = []
    rhs = []
    for x in range(sigma.g):
        for a in range(sigma.k):
            for coord in range(d):
                row = [R0] * nv
                row[0] = -sigma.sigma[x][a][coord]
                row[qvar(x, a)] = -sigma.bar[coord]
                for j, resp in enumerate(responses):
                    if resp[x] == a:
                        for t, v in enumerate(verts):
                            if v[coord]:
                                row[wvar(j, t)] += v[coord]
                rows.append(row)
                rhs.append(R0)
    for x in range(sigma.g):
        row = [R0] * nv
        row[0] = R1
        for a in range(sigma.k):
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
        raise SteeringError("robustness LP failed; assemblage is malformed")
    return res.optimum


def assemblage_as_multimeter(sigma: Assemblage) -> Multimeter:
    """View the assemblage as a multimeter on the dual state space based at
    its average state; the elements act there as effects and sum to the new
    order unit by construction."""
    dual = dual_state_space(sigma.space, sigma.bar)
    return Multimeter(dual, [list(row) for row in sigma.sigma])


def verify_realization(
    sigma: Assemblage, w: TensorElement, meters: Multimeter
) -> bool:
    """Check sigma[x][a] == (effect (x) id)(w) for every effect of ``meters``.

    ``w`` must be a normalized element of the maximal tensor product of the
    measured space with the assemblage's space (the weakest tensor product,
    hence the most permissive realization check).
    """
    ka = meters.space
    kb = sigma.space
    if w.factors != (ka.dim, kb.dim):
        raise SteeringError(
            f"state tensor factors {w.factors}, expected ({ka.dim}, {kb.dim})"
        )
    if meters.k != sigma.k or meters.g != sigma.g:
        raise SteeringError("multimeter and assemblage shapes differ")
    mat = w.as_matrix()
    for i in range(mat.rows):
        if not kb.frame.contains(mat.row(i)):
            raise SteeringError("state tensor leaves the second span")
    mt = mat.transpose()
    for i in range(mt.rows):
        if not ka.frame.contains(mt.row(i)):
            raise SteeringError("state tensor leaves the first span")
    for fa in ka.cone.facets:
        va = mat.rmatvec(fa)
        for fb in kb.cone.facets:
            if dot(va, fb) < 0:
                raise SteeringError("state tensor is not in the maximal tensor product")
    if w.pair([ka.unit, kb.unit]) != 1:
        raise SteeringError("state tensor is not normalized")
    for x in range(sigma.g):
        for a in range(sigma.k):
            produced = w.contract_first(meters.effect(a, x))
            if produced != sigma.sigma[x][a]:
                return False
    return True


def classical_simulates_assemblage(
    target: Assemblage, source: Assemblage
) -> Optional[SimulationData]:
    """Setting dice plus outcome post-processing turning ``source`` into
    ``target``; both must share the average state."""
    if target.space is not source.space:
        if target.space.dim != source.space.dim or not target.space.cone.same_cone(
            source.space.cone
        ):
            raise SteeringError("assemblages live on different state spaces")
    if target.bar != source.bar:
        raise SteeringError("assemblages have different average states")
    k, g = target.k, target.g
    l, r = source.k, source.g
    d = target.space.dim
    nv = k * l * g * r

    def var(a, b, x, y):
        return ((a * l + b) * g + x) * r + y

    rows = []
    rhs = []
    for x in range(g):
        for a in range(k):
            for coord in range(d):
                row = [R0] * nv
                for y in range(r):
                    for b in range(l):
                        val = source.sigma[y][b][coord]
                        if val:
                            row[var(a, b, x, y)] += val
                rows.append(row)
                rhs.append(target.sigma[x][a][coord])
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
    gamma = {
        key: res.x[var(*key)]
        for key in itertools.product(range(k), range(l), range(g), range(r))
    }
    pi = []
    nu = []
    uniform = tuple(rat(1, k) for _ in range(k))
    for x in range(g):
        pi_row = []
        nu_row = []
        for y in range(r):
            wsum = sum(gamma[(a, 0, x, y)] for a in range(k))
            pi_row.append(wsum)
            if wsum:
                nu_row.append(
                    tuple(
                        tuple(gamma[(a, b, x, y)] / wsum for a in range(k))
                        for b in range(l)
                    )
                )
            else:
                nu_row.append(tuple(uniform for _ in range(l)))
        pi.append(tuple(pi_row))
        nu.append(tuple(nu_row))
    return SimulationData(pi=tuple(pi), nu=tuple(nu))


def apply_simulation_assemblage(source: Assemblage, sim: SimulationData) -> Assemblage:
    g = sim.g
    k = len(sim.nu[0][0][0])
    d = source.space.dim
    sigma = []
    for x in range(g):
        row = []
        for a in range(k):
            s = [R0] * d
            for y in range(source.g):
                w = sim.pi[x][y]
                if not w:
                    continue
                for b in range(source.k):
                    c = w * sim.nu[x][y][b][a]
                    if c:
                        s = [p + c * q for p, q in zip(s, source.sigma[y][b])]
            row.append(tuple(s))
        sigma.append(row)
    return Assemblage(source.space, sigma)
