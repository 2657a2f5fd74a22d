"""Shared fixtures and exact random samplers for the test suite.

All sampling happens through seeded `random.Random` instances and produces
rational data by construction, so every test is reproducible and every
generated object satisfies its class invariants exactly.
"""

import itertools
import random

import pytest

from conefactor.cone import PolyhedralCone
from conefactor.gpt import Gpt
from conefactor.instances import (
    cube_gpt,
    octahedron_gpt,
    square_gpt,
)
from conefactor.meters import Multimeter
from conefactor.polysimplex import NsDistribution, SimulationData, make_polysimplex
from conefactor.ratlin import R0, R1, dot, rat
from conefactor.steering import Assemblage


@pytest.fixture(scope="session")
def cube():
    return cube_gpt()


@pytest.fixture(scope="session")
def octa():
    return octahedron_gpt()


@pytest.fixture(scope="session")
def square():
    return square_gpt()


def rand_rat(rng, num_max=4, den_max=3):
    return rat(rng.randint(-num_max, num_max), rng.randint(1, den_max))


def rand_nonneg(rng, num_max=4, den_max=3):
    return rat(rng.randint(0, num_max), rng.randint(1, den_max))


def rand_dist(rng, n, num_max=4):
    row = [rat(rng.randint(0, num_max)) for _ in range(n)]
    if not sum(row):
        row[rng.randrange(n)] = R1
    total = sum(row)
    return tuple(v / total for v in row)


# ---------------------------------------------------------------------------
# multimeters
# ---------------------------------------------------------------------------

_SCALES = [R0, rat(1, 4), rat(1, 2), rat(3, 4), R1, R1, R1]


def random_multimeter(space: Gpt, k: int, g: int, rng: random.Random) -> Multimeter:
    """Valid by construction: each measurement splits the unit by repeatedly
    carving off a random positive multiple of a random extreme effect, capped
    so the remainder stays nonnegative on every vertex; the bias toward the
    full cap produces plenty of incompatible tables."""
    gens = list(space.effect_cone().generators)
    verts = space.state_vertices()
    effects = []
    for _ in range(g):
        remainder = list(space.unit)
        row = []
        for _ in range(k - 1):
            e = [R0] * space.dim
            for gen in rng.sample(gens, min(len(gens), rng.randint(1, 2))):
                c = rand_nonneg(rng, 3, 2)
                if c:
                    e = [p + c * q for p, q in zip(e, gen)]
            cap = None
            for v in verts:
                ev = dot(e, v)
                if ev > 0:
                    ratio = dot(remainder, v) / ev
                    cap = ratio if cap is None else min(cap, ratio)
            if cap is None:
                row.append(tuple([R0] * space.dim))
                continue
            s = cap * rng.choice(_SCALES)
            eff = tuple(s * x for x in e)
            remainder = [p - q for p, q in zip(remainder, eff)]
            row.append(eff)
        row.append(tuple(remainder))
        effects.append(row)
    return Multimeter(space, effects)


def random_simulation(rng, l, r, k, g) -> SimulationData:
    pi = tuple(rand_dist(rng, r) for _ in range(g))
    nu = tuple(
        tuple(tuple(rand_dist(rng, k) for _ in range(l)) for _ in range(r))
        for _ in range(g)
    )
    return SimulationData(pi=pi, nu=nu)


# ---------------------------------------------------------------------------
# assemblages
# ---------------------------------------------------------------------------

def random_state(space: Gpt, rng, interior=False):
    verts = space.state_vertices()
    w = [rat(rng.randint(0, 4)) for _ in verts]
    if interior:
        w = [x + R1 for x in w]
    if not sum(w):
        w[rng.randrange(len(w))] = R1
    total = sum(w)
    out = [R0] * space.dim
    for wi, v in zip(w, verts):
        if wi:
            out = [p + (wi / total) * q for p, q in zip(out, v)]
    return tuple(out)


def random_assemblage(space: Gpt, k: int, g: int, rng, interior_bar=False) -> Assemblage:
    """Split a random average state into k branches per setting by carving
    off capped multiples of random cone directions, mirroring the multimeter
    sampler on the state side."""
    bar = random_state(space, rng, interior=interior_bar)
    facets = space.cone.facets
    verts = space.state_vertices()
    sigma = []
    for _ in range(g):
        remainder = list(bar)
        row = []
        for _ in range(k - 1):
            c = [R0] * space.dim
            for v in rng.sample(list(verts), min(len(verts), rng.randint(1, 2))):
                w = rand_nonneg(rng, 3, 2)
                if w:
                    c = [p + w * q for p, q in zip(c, v)]
            cap = None
            for f in facets:
                fc = dot(f, c)
                if fc > 0:
                    ratio = dot(f, remainder) / fc
                    cap = ratio if cap is None else min(cap, ratio)
            if cap is None:
                row.append(tuple([R0] * space.dim))
                continue
            s = cap * rng.choice(_SCALES)
            el = tuple(s * x for x in c)
            remainder = [p - q for p, q in zip(remainder, el)]
            row.append(el)
        row.append(tuple(remainder))
        sigma.append(row)
    return Assemblage(space, sigma)


# ---------------------------------------------------------------------------
# behaviors
# ---------------------------------------------------------------------------

def random_local_behavior(shapes, rng, terms=5) -> NsDistribution:
    """A random mixture of products of deterministic strategies, any number
    of parties; always a valid no-signaling table."""
    shapes = [(int(k), int(g)) for k, g in shapes]
    acc = {}
    weights = [rat(rng.randint(0, 4)) for _ in range(terms)]
    if not sum(weights):
        weights[0] = R1
    total = sum(weights)
    for w in weights:
        if not w:
            continue
        strats = [tuple(rng.randrange(k) for _ in range(g)) for k, g in shapes]
        for xs in itertools.product(*(range(g) for _, g in shapes)):
            outs = tuple(strats[i][xs[i]] for i in range(len(shapes)))
            key = (outs, xs)
            acc[key] = acc.get(key, R0) + w / total
    probs = []
    for xs in itertools.product(*(range(g) for _, g in shapes)):
        for outs in itertools.product(*(range(k) for k, _ in shapes)):
            probs.append(acc.get((outs, xs), R0))
    return NsDistribution(shapes, probs)


def lifted_pr_box(shapes) -> NsDistribution:
    """Embed the maximally nonlocal binary box into a square shape by
    reusing the first setting for every extra one."""
    (k, g), (l, r) = shapes
    assert k == 2 and l == 2
    half = rat(1, 2)
    probs = []
    for x in range(g):
        for y in range(r):
            xb = min(x, 1)
            yb = min(y, 1)
            for a in range(2):
                for b in range(2):
                    hit = (a ^ b) == (xb & yb)
                    probs.append(half if hit else R0)
    return NsDistribution(shapes, probs)


def random_behavior(shapes, rng) -> NsDistribution:
    """A mix of a random local point with a nonlocal vertex at a random
    exact visibility; spans both sides of the local set."""
    local = random_local_behavior(shapes, rng)
    (k, g), (l, r) = shapes
    if k == 2 and l == 2:
        box = lifted_pr_box(shapes)
        lam = rat(rng.randint(0, 8), 8)
        probs = [lam * b + (1 - lam) * p for b, p in zip(box.probs, local.probs)]
        return NsDistribution(shapes, probs)
    return local
