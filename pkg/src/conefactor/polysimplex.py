"""Column-stochastic state spaces and their no-signaling tensor calculus.

The space of k x g column-stochastic matrices is the universal target of a
g-setting, k-outcome measurement device.  This module builds it as a `Gpt`
(in full k*g ambient coordinates, with the equal-column-sum constraint carried
by the cone), provides the canonical state/effect bases, converts channels
between two such spaces to and from classical pre/post-processing data, and
encodes n-party no-signaling probability tables as tensors over n copies.

Index conventions: outcomes a and settings x are 0-based internally; the flat
ambient index of matrix entry (a, x) is a*g + x.  Probability tables are flat
in lexicographic (settings, outcomes) order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .cone import PolyhedralCone, TensorElement
from .gpt import Gpt, GptMap, GptError, is_channel
from .ratlin import (
    R0,
    R1,
    RatMatrix,
    as_vec,
    dot,
    lp_solve,
    LinearProgram,
    rat,
)


class PolysimplexError(ValueError):
    pass


class PolysimplexSpace:
    """The k-outcome, g-setting column-stochastic space with its bases.

    Vertices are the 0/1 matrices picking one outcome per setting; the
    coordinate functionals m(a, x) generate the effect cone, one per matrix
    entry, and sum over outcomes to the order unit for every setting.
    """

    def __init__(self, k: int, g: int):
        if k < 1 or g < 1:
            raise PolysimplexError("need k >= 1 and g >= 1")
        self.k = k
        self.g = g
        self.dim = k * g

    def idx(self, a: int, x: int) -> int:
        return a * self.g + x

    def effect(self, a: int, x: int) -> tuple:
        """The coordinate functional m_a^(x) reading entry (a, x)."""
        if not (0 <= a < self.k and 0 <= x < self.g):
            raise PolysimplexError(f"effect ({a},{x}) out of range")
        return tuple(
            R1 if i == self.idx(a, x) else R0 for i in range(self.dim)
        )

    @property
    def unit(self) -> tuple:
        u = rat(1, self.g)
        return tuple(u for _ in range(self.dim))

    def vertex(self, outcomes: Sequence[int]) -> tuple:
        if len(outcomes) != self.g:
            raise PolysimplexError("vertex needs one outcome per setting")
        v = [R0] * self.dim
        for x, a in enumerate(outcomes):
            v[self.idx(a, x)] = R1
        return tuple(v)

    def vertex_assignments(self):
        return itertools.product(range(self.k), repeat=self.g)

    @property
    def s_base(self) -> tuple:
        """The vertex with every setting on the last outcome."""
        return self.vertex([self.k - 1] * self.g)

    def e_basis_vector(self, a: int, x: int) -> tuple:
        if not (0 <= a < self.k - 1):
            raise PolysimplexError("e-basis uses outcomes below the last one")
        v = [R0] * self.dim
        v[self.idx(a, x)] = R1
        v[self.idx(self.k - 1, x)] = -R1
        return tuple(v)

    def span_basis(self) -> list:
        basis = [self.s_base]
        for x in range(self.g):
            for a in range(self.k - 1):
                basis.append(self.e_basis_vector(a, x))
        return basis

    def cone(self) -> PolyhedralCone:
        gens = [self.vertex(o) for o in self.vertex_assignments()]
        facets = [self.effect(a, x) for a in range(self.k) for x in range(self.g)]
        return PolyhedralCone(self.dim, generators=gens, facets=facets)

    def gpt(self) -> Gpt:
        return Gpt(
            self.dim,
            self.cone(),
            self.unit,
            basis=self.span_basis(),
            name=f"polysimplex:{self.k},{self.g}",
        )


def make_polysimplex(k: int, g: int) -> Gpt:
    """The Gpt with k^g vertices and k*g effect rays, both written directly."""
    return PolysimplexSpace(k, g).gpt()


def polysimplex_shape(g: Gpt) -> tuple:
    """Recover (k, g) from a Gpt built by make_polysimplex."""
    name = g.name or ""
    if not name.startswith("polysimplex:"):
        raise PolysimplexError(f"not a polysimplex Gpt: {name!r}")
    k_str, g_str = name.split(":", 1)[1].split(",")
    return int(k_str), int(g_str)


def noisy_polysimplex(k: int, g: int, ts: Sequence) -> Gpt:
    """The polysimplex shrunk per setting by factors t_x toward its center.

    Vertices are center + t_x-scaled offsets column by column; the effect
    rays are the per-column thin-cone functionals.  t_x = 1 recovers the
    plain space, t_x = 0 collapses that column to the uniform distribution.
    """
    ps = PolysimplexSpace(k, g)
    ts = [rat(t) for t in ts]
    if len(ts) != g:
        raise PolysimplexError("need one noise parameter per setting")
    for t in ts:
        if t < 0 or t > 1:
            raise PolysimplexError("noise parameters must lie in [0, 1]")
    gens = []
    for outcomes in ps.vertex_assignments():
        v = [R0] * ps.dim
        for x, a in enumerate(outcomes):
            base = (1 - ts[x]) / k
            for b in range(k):
                v[ps.idx(b, x)] = base + (ts[x] if b == a else R0)
        gens.append(tuple(v))
    facets = []
    for a in range(k):
        for x in range(g):
            f = [R0] * ps.dim
            f[ps.idx(a, x)] += R1
            for b in range(k):
                f[ps.idx(b, x)] -= (1 - ts[x]) / k
            facets.append(tuple(f))
    cone = PolyhedralCone(ps.dim, generators=gens, facets=facets)
    basis = ps.span_basis() if all(t > 0 for t in ts) else None
    label = ",".join(str(t) for t in ts)
    return Gpt(ps.dim, cone, ps.unit, basis=basis, name=f"noisy-polysimplex:{k},{g};{label}")


# ---------------------------------------------------------------------------
# Descent-set combinatorics
# ---------------------------------------------------------------------------

def descent_perms(n: int, m: int) -> list:
    """Permutations of range(n) with descent set contained in {m} (1-based
    descent position m), i.e. the identity plus all single-descent-at-m
    permutations.  There are C(n, m) of them: one per m-subset, obtained by
    listing the subset ascending and then its complement ascending."""
    if not (1 <= m <= n - 1):
        raise PolysimplexError("descent position must satisfy 1 <= m <= n-1")
    perms = []
    for subset in itertools.combinations(range(n), m):
        rest = [i for i in range(n) if i not in subset]
        perms.append(tuple(list(subset) + rest))
    return perms


# ---------------------------------------------------------------------------
# No-signaling probability tables
# ---------------------------------------------------------------------------

class NsDistribution:
    """An n-party conditional probability table with no-signaling marginals.

    ``shapes`` is a list of per-party (k, g) pairs; ``probs`` is flat in
    lexicographic (settings, outcomes) order.  Validation checks
    nonnegativity, normalization for every setting tuple, and for each party
    that the marginal over its outcome does not depend on its setting (which
    forces the same for every subset of parties).
    """

    def __init__(self, shapes: Sequence, probs: Sequence, validate: bool = True):
        self.shapes = tuple((int(k), int(g)) for k, g in shapes)
        self.n = len(self.shapes)
        if self.n < 1:
            raise PolysimplexError("need at least one party")
        self.ks = tuple(k for k, _ in self.shapes)
        self.gs = tuple(g for _, g in self.shapes)
        size = 1
        for k, g in self.shapes:
            size *= k * g
        self.probs = as_vec(probs)
        if len(self.probs) != size:
            raise PolysimplexError(
                f"probability table needs {size} entries, got {len(self.probs)}"
            )
        if validate:
            self.validate()

    # -- index helpers ------------------------------------------------------

    def _flat(self, outcomes, settings) -> int:
        idx = 0
        for g, x in zip(self.gs, settings):
            idx = idx * g + x
        for k, a in zip(self.ks, outcomes):
            idx = idx * k + a
        return idx

    def p(self, outcomes, settings):
        return self.probs[self._flat(tuple(outcomes), tuple(settings))]

    def setting_tuples(self):
        return itertools.product(*(range(g) for g in self.gs))

    def outcome_tuples(self):
        return itertools.product(*(range(k) for k in self.ks))

    # -- validation ---------------------------------------------------------

    def validate(self) -> None:
        for q in self.probs:
            if q < 0:
                raise PolysimplexError("negative probability entry")
        for xs in self.setting_tuples():
            total = sum(self.p(a, xs) for a in self.outcome_tuples())
            if total != 1:
                raise PolysimplexError(f"probabilities for settings {xs} sum to {total}")
        for i in range(self.n):
            if not self._party_no_signaling(i):
                raise PolysimplexError(f"party {i} signals through its setting")

    def _party_no_signaling(self, i: int) -> bool:
        other_gs = [g for j, g in enumerate(self.gs) if j != i]
        other_ks = [k for j, k in enumerate(self.ks) if j != i]
        for other_x in itertools.product(*(range(g) for g in other_gs)):
            for other_a in itertools.product(*(range(k) for k in other_ks)):
                ref = None
                for xi in range(self.gs[i]):
                    xs = list(other_x[:i]) + [xi] + list(other_x[i:])
                    marg = R0
                    for ai in range(self.ks[i]):
                        a = list(other_a[:i]) + [ai] + list(other_a[i:])
                        marg += self.p(a, xs)
                    if ref is None:
                        ref = marg
                    elif marg != ref:
                        return False
        return True

    def marginal_without(self, i: int) -> "NsDistribution":
        """Trace out party i (its setting is irrelevant by no-signaling)."""
        shapes = [s for j, s in enumerate(self.shapes) if j != i]
        out = []
        for xs in itertools.product(*(range(g) for _, g in shapes)):
            for a in itertools.product(*(range(k) for k, _ in shapes)):
                full_x = list(xs[:i]) + [0] + list(xs[i:])
                total = R0
                for ai in range(self.ks[i]):
                    full_a = list(a[:i]) + [ai] + list(a[i:])
                    total += self.p(full_a, full_x)
                out.append(total)
        return NsDistribution(shapes, out, validate=False)

    def __eq__(self, other):
        return (
            isinstance(other, NsDistribution)
            and self.shapes == other.shapes
            and self.probs == other.probs
        )


def uniform_ns(shapes) -> NsDistribution:
    shapes = [(int(k), int(g)) for k, g in shapes]
    denom = 1
    for k, _ in shapes:
        denom *= k
    size = denom
    for _, g in shapes:
        size *= g
    return NsDistribution(shapes, [rat(1, denom)] * size)


# ---------------------------------------------------------------------------
# Tensor codec
# ---------------------------------------------------------------------------

def ns_encode(p: NsDistribution) -> TensorElement:
    """Expand a no-signaling table in the product state basis.

    Terms are enumerated by the descent-set permutation families: for each
    block size m, every permutation with at most one descent at m contributes
    the basis product with its ascending first block carrying difference
    vectors and the rest carrying the base vertex; the coefficient is the
    corresponding marginal of the table with the remaining settings pinned to
    the first one.  The resulting ambient coefficient at a pure coordinate
    multi-index equals the corresponding probability, which is what the
    decoder reads off.
    """
    spaces = [PolysimplexSpace(k, g) for k, g in p.shapes]
    n = p.n
    factors = tuple(sp.dim for sp in spaces)
    size = 1
    for f in factors:
        size *= f
    coeffs = [R0] * size

    def add_term(legs, coeff):
        if not coeff:
            return
        positions = [0]
        values = [coeff]
        for leg in legs:
            new_pos = []
            new_val = []
            for base, val in zip(positions, values):
                for j, lj in enumerate(leg):
                    if lj:
                        new_pos.append(base * len(leg) + j)
                        new_val.append(val * lj)
            positions, values = new_pos, new_val
        for pos, val in zip(positions, values):
            coeffs[pos] += val

    def block_coefficient(block, outcomes, settings):
        """Marginal over the parties off the block, their settings pinned to 0."""
        xs = [0] * n
        for i, x in zip(block, settings):
            xs[i] = x
        total = R0
        rest = [i for i in range(n) if i not in block]
        for extra in itertools.product(*(range(p.ks[i]) for i in rest)):
            a = [0] * n
            for i, o in zip(block, outcomes):
                a[i] = o
            for i, o in zip(rest, extra):
                a[i] = o
            total += p.p(a, xs)
        return total

    # all-base term
    add_term([sp.s_base for sp in spaces], R1)
    # full block: one term per settings/outcomes assignment below the top outcome
    blocks = [tuple(range(n))]
    # descent-indexed blocks of size 1..n-1
    for m in range(1, n):
        for perm in descent_perms(n, m):
            blocks.append(tuple(sorted(perm[:m])))
    for block in blocks:
        for settings in itertools.product(*(range(p.gs[i]) for i in block)):
            for outcomes in itertools.product(*(range(p.ks[i] - 1) for i in block)):
                coeff = block_coefficient(block, outcomes, settings)
                legs = []
                pos = {i: t for t, i in enumerate(block)}
                for i, sp in enumerate(spaces):
                    if i in pos:
                        legs.append(sp.e_basis_vector(outcomes[pos[i]], settings[pos[i]]))
                    else:
                        legs.append(sp.s_base)
                add_term(legs, coeff)
    return TensorElement(factors, coeffs)


def ns_decode(xi: TensorElement, shapes) -> NsDistribution:
    """Read the probability table back off the tensor.

    The input must lie in the n-fold maximal tensor product of the
    column-stochastic cones: every product of effect rays must evaluate
    nonnegatively (the violating functional is reported otherwise), the
    per-party span constraints must hold, and the unit pairing must be one.
    """
    spaces = [PolysimplexSpace(k, g) for k, g in shapes]
    if xi.factors != tuple(sp.dim for sp in spaces):
        raise PolysimplexError(
            f"tensor factors {xi.factors} do not match shapes {tuple(shapes)}"
        )
    n = len(spaces)
    # span and no-signaling consistency come from re-encoding below; first
    # collect the candidate table and check facet products / normalization.
    probs = []
    for xs in itertools.product(*(range(sp.g) for sp in spaces)):
        for a in itertools.product(*(range(sp.k) for sp in spaces)):
            flat = 0
            for sp, ai, xi_ in zip(spaces, a, xs):
                flat = flat * sp.dim + sp.idx(ai, xi_)
            q = xi.coeffs[flat]
            if q < 0:
                labels = " x ".join(
                    f"m[a={ai},x={xi_}]" for ai, xi_ in zip(a, xs)
                )
                raise PolysimplexError(
                    f"effect product {labels} evaluates to {q} < 0"
                )
            probs.append(q)
    unit_pairing = xi.pair([sp.unit for sp in spaces])
    if unit_pairing != 1:
        raise PolysimplexError(f"unit pairing is {unit_pairing}, expected 1")
    try:
        dist = NsDistribution(list(shapes), probs)
    except PolysimplexError as exc:
        raise PolysimplexError(f"tensor is not a no-signaling element: {exc}")
    if ns_encode(dist) != xi:
        raise PolysimplexError(
            "tensor has components outside the product of state spans"
        )
    return dist


# ---------------------------------------------------------------------------
# Channels between polysimplices <-> classical simulation data
# ---------------------------------------------------------------------------

@dataclass
class SimulationData:
    """Pre-processing pi[x][y] (choose setting y given requested x) and
    post-processing nu[x][y][b][a] (report a given observed b)."""

    pi: tuple
    nu: tuple

    def __post_init__(self):
        self.pi = tuple(tuple(rat(v) for v in row) for row in self.pi)
        self.nu = tuple(
            tuple(tuple(tuple(rat(v) for v in dist) for dist in per_b) for per_b in per_y)
            for per_y in self.nu
        )
        for row in self.pi:
            if any(v < 0 for v in row):
                raise PolysimplexError("negative pre-processing weight")
            if sum(row) != 1:
                raise PolysimplexError("pre-processing rows must sum to one")
        for per_y in self.nu:
            for per_b in per_y:
                for dist in per_b:
                    if any(v < 0 for v in dist):
                        raise PolysimplexError("negative post-processing weight")
                    if sum(dist) != 1:
                        raise PolysimplexError("post-processing rows must sum to one")

    @property
    def g(self):
        return len(self.pi)

    @property
    def r(self):
        return len(self.pi[0]) if self.pi else 0


def channel_from_sim(sim: SimulationData, source_shape, target_shape) -> GptMap:
    """The channel whose matrix entry ((a,x),(b,y)) is pi[x][y]*nu[x][y][b][a]."""
    l, r = source_shape
    k, g = target_shape
    if sim.g != g or sim.r != r:
        raise PolysimplexError("simulation data shaped for different spaces")
    src = make_polysimplex(l, r)
    tgt = make_polysimplex(k, g)
    sps, spt = PolysimplexSpace(l, r), PolysimplexSpace(k, g)
    mat = RatMatrix(spt.dim, sps.dim)
    for x in range(g):
        for y in range(r):
            w = sim.pi[x][y]
            if not w:
                continue
            for b in range(l):
                dist = sim.nu[x][y][b]
                if len(dist) != k:
                    raise PolysimplexError("post-processing over wrong outcome count")
                col = sps.idx(b, y)
                for a in range(k):
                    if dist[a]:
                        mat[spt.idx(a, x), col] += w * dist[a]
    return GptMap(src, tgt, mat)


def _gamma_from_matrix(f: GptMap, sps: PolysimplexSpace, spt: PolysimplexSpace):
    """Read gamma straight off the matrix when it is already in canonical
    form: entrywise nonnegative with per-(x,y) column sums independent of b."""
    k, g, l, r = spt.k, spt.g, sps.k, sps.g
    gamma = {}
    for a in range(k):
        for x in range(g):
            row = f.matrix.data[spt.idx(a, x)]
            for b in range(l):
                for y in range(r):
                    v = row[sps.idx(b, y)]
                    if v < 0:
                        return None
                    gamma[(a, b, x, y)] = v
    for x in range(g):
        for y in range(r):
            sums = [
                sum(gamma[(a, b, x, y)] for a in range(k)) for b in range(l)
            ]
            if any(s != sums[0] for s in sums):
                return None
    return gamma


def _gamma_by_lp(f: GptMap, sps: PolysimplexSpace, spt: PolysimplexSpace):
    """Recover some nonnegative gamma reproducing the channel's effects.

    One equality per (effect, span-basis vector): sum_{y,b} gamma * m_b^(y)
    evaluated on the basis vector equals the effect's value there.  The
    channel characterization guarantees feasibility; the simplex solver makes
    the choice deterministic.
    """
    k, g, l, r = spt.k, spt.g, sps.k, sps.g
    basis = sps.span_basis()
    var_index = {}
    for a in range(k):
        for x in range(g):
            for b in range(l):
                for y in range(r):
                    var_index[(a, b, x, y)] = len(var_index)
    rows = []
    rhs = []
    for a in range(k):
        for x in range(g):
            row_func = f.matrix.data[spt.idx(a, x)]
            for bas in basis:
                row = [R0] * len(var_index)
                for b in range(l):
                    for y in range(r):
                        val = bas[sps.idx(b, y)]
                        if val:
                            row[var_index[(a, b, x, y)]] = val
                rows.append(row)
                rhs.append(dot(row_func, bas))
    prob = LinearProgram(
        c=[R0] * len(var_index),
        a_eq=RatMatrix.from_rows(rows),
        b_eq=rhs,
    )
    res = lp_solve(prob)
    if res.status != "Optimal":
        raise PolysimplexError("map admits no classical-simulation form")
    return {key: res.x[j] for key, j in var_index.items()}


def channel_decompose(f: GptMap) -> SimulationData:
    """Recover (pi, nu) data from a channel between two polysimplices.

    The per-setting weights come from the gamma column sums (independent of
    the observed outcome for a channel); where a setting is never consulted
    the post-processing defaults to uniform.  Rebuilding a channel from the
    result reproduces the same linear map on the source space.
    """
    try:
        l, r = polysimplex_shape(f.source)
        k, g = polysimplex_shape(f.target)
    except PolysimplexError:
        raise PolysimplexError("channel_decompose expects polysimplex endpoints")
    if not is_channel(f):
        raise PolysimplexError("map is not a channel")
    sps, spt = PolysimplexSpace(l, r), PolysimplexSpace(k, g)
    gamma = _gamma_from_matrix(f, sps, spt)
    if gamma is None:
        gamma = _gamma_by_lp(f, sps, spt)
    pi = []
    nu = []
    uniform = tuple(rat(1, k) for _ in range(k))
    for x in range(g):
        pi_row = []
        nu_per_y = []
        for y in range(r):
            w = sum(gamma[(a, 0, x, y)] for a in range(k))
            for b in range(1, l):
                wb = sum(gamma[(a, b, x, y)] for a in range(k))
                if wb != w:
                    raise PolysimplexError(
                        "gamma column sums depend on the observed outcome"
                    )
            pi_row.append(w)
            if w:
                nu_per_y.append(
                    tuple(
                        tuple(gamma[(a, b, x, y)] / w for a in range(k))
                        for b in range(l)
                    )
                )
            else:
                nu_per_y.append(tuple(uniform for _ in range(l)))
        if sum(pi_row) != 1:
            raise PolysimplexError("pre-processing weights do not sum to one")
        pi.append(tuple(pi_row))
        nu.append(tuple(nu_per_y))
    return SimulationData(pi=tuple(pi), nu=tuple(nu))
