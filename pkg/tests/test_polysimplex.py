"""Column-stochastic spaces, descent combinatorics, codecs, channel data."""

import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from conefactor.gpt import identity_map, is_channel
from conefactor.polysimplex import (
    NsDistribution,
    PolysimplexError,
    PolysimplexSpace,
    SimulationData,
    channel_decompose,
    channel_from_sim,
    descent_perms,
    make_polysimplex,
    noisy_polysimplex,
    ns_decode,
    ns_encode,
    uniform_ns,
)
from conefactor.ratlin import R0, R1, dot, rat

from conftest import random_local_behavior, random_simulation


@pytest.mark.parametrize("k,g", [(2, 2), (2, 3), (3, 2), (3, 3), (4, 1), (1, 2)])
def test_vertex_and_facet_counts(k, g):
    ps = make_polysimplex(k, g)
    assert len(ps.cone.generators) == k**g
    assert len(ps.cone.facets) == k * g
    assert ps.rank == g * (k - 1) + 1


def test_square_condition():
    sp = PolysimplexSpace(2, 2)
    v = {o: sp.vertex(o) for o in sp.vertex_assignments()}
    left = [a + b for a, b in zip(v[(0, 0)], v[(1, 1)])]
    right = [a + b for a, b in zip(v[(0, 1)], v[(1, 0)])]
    assert left == right


def test_single_setting_is_simplex():
    ps = make_polysimplex(3, 1)
    assert sorted(ps.state_vertices()) == [
        (R0, R0, R1),
        (R0, R1, R0),
        (R1, R0, R0),
    ]


def test_effects_sum_to_unit():
    for k, g in [(2, 2), (3, 2), (2, 3)]:
        sp = PolysimplexSpace(k, g)
        gpt = make_polysimplex(k, g)
        for x in range(g):
            total = [R0] * sp.dim
            for a in range(k):
                total = [p + q for p, q in zip(total, sp.effect(a, x))]
            for b in gpt.frame.basis:
                assert dot(total, b) == dot(gpt.unit, b)


def test_state_effect_bases_are_dual():
    sp = PolysimplexSpace(3, 2)
    basis = sp.span_basis()
    functionals = [sp.unit] + [
        sp.effect(a, x) for x in range(2) for a in range(2)
    ]
    for i, f in enumerate(functionals):
        for j, b in enumerate(basis):
            assert dot(f, b) == (R1 if i == j else R0)


# ---------------------------------------------------------------------------
# descent permutations
# ---------------------------------------------------------------------------

def brute_descent(n, m):
    out = []
    for p in itertools.permutations(range(n)):
        desc = {i + 1 for i in range(n - 1) if p[i] > p[i + 1]}
        if desc <= {m}:
            out.append(p)
    return sorted(out)


def test_descent_small():
    assert sorted(descent_perms(2, 1)) == [(0, 1), (1, 0)]
    assert len(descent_perms(3, 1)) == 3


@pytest.mark.parametrize("n,m", [(n, m) for n in range(2, 7) for m in range(1, n)])
def test_descent_matches_bruteforce_and_count(n, m):
    got = sorted(descent_perms(n, m))
    assert got == brute_descent(n, m)
    assert len(got) == math.comb(n, m)


def test_descent_4_2_has_descents_only_at_2():
    for p in descent_perms(4, 2):
        desc = {i + 1 for i in range(3) if p[i] > p[i + 1]}
        assert desc <= {2}
    assert len(descent_perms(4, 2)) == 6


# ---------------------------------------------------------------------------
# codec
# ---------------------------------------------------------------------------

def test_uniform_roundtrip():
    for shapes in ([(2, 2), (2, 2)], [(2, 2), (3, 2)], [(2, 2)] * 3):
        u = uniform_ns(shapes)
        assert ns_decode(ns_encode(u), shapes) == u


def test_tensor_entries_are_probabilities():
    rng = random.Random(8)
    shapes = [(2, 2), (3, 2)]
    p = random_local_behavior(shapes, rng)
    xi = ns_encode(p)
    sps = [PolysimplexSpace(k, g) for k, g in shapes]
    for xs in itertools.product(range(2), range(2)):
        for ab in itertools.product(range(2), range(3)):
            flat = sps[0].idx(ab[0], xs[0]) * sps[1].dim + sps[1].idx(ab[1], xs[1])
            assert xi.coeffs[flat] == p.p(ab, xs)


def test_two_party_block_formula():
    """The encoder agrees term by term with the direct four-block expansion:
    joint weights on difference products, single-party marginals against the
    base vertex, and a unit constant."""
    rng = random.Random(15)
    for _ in range(20):
        k, g = rng.choice([(2, 2), (3, 2), (2, 3)])
        l, r = rng.choice([(2, 2), (3, 2)])
        shapes = [(k, g), (l, r)]
        p = random_local_behavior(shapes, rng)
        spa, spb = PolysimplexSpace(k, g), PolysimplexSpace(l, r)
        coeffs = [R0] * (spa.dim * spb.dim)

        def add(u, v, c):
            if not c:
                return
            for i, ui in enumerate(u):
                if ui:
                    for j, vj in enumerate(v):
                        if vj:
                            coeffs[i * spb.dim + j] += c * ui * vj

        add(spa.s_base, spb.s_base, R1)
        for x in range(g):
            for y in range(r):
                for a in range(k - 1):
                    for b in range(l - 1):
                        add(
                            spa.e_basis_vector(a, x),
                            spb.e_basis_vector(b, y),
                            p.p((a, b), (x, y)),
                        )
        for x in range(g):
            for a in range(k - 1):
                marg = sum(p.p((a, b), (x, 0)) for b in range(l))
                add(spa.e_basis_vector(a, x), spb.s_base, marg)
        for y in range(r):
            for b in range(l - 1):
                marg = sum(p.p((a, b), (0, y)) for a in range(k))
                add(spa.s_base, spb.e_basis_vector(b, y), marg)
        assert tuple(coeffs) == ns_encode(p).coeffs


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=30, deadline=None)
def test_codec_roundtrip_multiparty(seed):
    rng = random.Random(seed)
    n = rng.choice([2, 3, 4])
    shape = rng.choice([(2, 2), (2, 3), (3, 2)])
    shapes = [shape] * n
    p = random_local_behavior(shapes, rng, terms=rng.randint(1, 6))
    xi = ns_encode(p)
    assert ns_decode(xi, shapes) == p


def test_decode_rejects_negative_entry():
    u = uniform_ns([(2, 2), (2, 2)])
    xi = ns_encode(u)
    coeffs = list(xi.coeffs)
    coeffs[0] -= 1
    from conefactor.cone import TensorElement

    with pytest.raises(PolysimplexError, match="effect product"):
        ns_decode(TensorElement(xi.factors, coeffs), [(2, 2), (2, 2)])


def test_ns_validation_catches_signaling():
    # a table whose first-party marginal depends on its setting
    probs = []
    for x1, x2 in itertools.product(range(2), repeat=2):
        for a1, a2 in itertools.product(range(2), repeat=2):
            if x1 == 0:
                val = rat(1, 4)
            else:
                val = rat(1, 2) if a1 == 0 and a2 == x2 else R0
                if a1 == 1:
                    val = R0
                elif a2 != x2:
                    val = R0
                else:
                    val = rat(1, 2) if a2 == x2 else R0
            probs.append(val)
    with pytest.raises(PolysimplexError):
        NsDistribution([(2, 2), (2, 2)], probs)


# ---------------------------------------------------------------------------
# channels and simulation data
# ---------------------------------------------------------------------------

def test_identity_channel_decompose_roundtrip():
    sim = SimulationData(
        pi=((1, 0), (0, 1)),
        nu=(
            (((1, 0), (0, 1)), ((1, 0), (0, 1))),
            (((1, 0), (0, 1)), ((1, 0), (0, 1))),
        ),
    )
    f = channel_from_sim(sim, (2, 2), (2, 2))
    assert f.equals_on_source(identity_map(make_polysimplex(2, 2)))
    back = channel_from_sim(channel_decompose(f), (2, 2), (2, 2))
    assert back.matrix == f.matrix


def test_constant_channel_decompose():
    # everything maps to the all-first-outcome vertex
    sp = PolysimplexSpace(2, 2)
    target_vertex = sp.vertex((0, 0))
    pi = ((1,), (1,))
    nu = ((((1, 0), (1, 0), (1, 0)),), (((1, 0), (1, 0), (1, 0)),))
    sim = SimulationData(pi=pi, nu=nu)
    f = channel_from_sim(sim, (3, 1), (2, 2))
    for v in f.source.state_vertices():
        assert f.apply(v) == target_vertex
    d = channel_decompose(f)
    for x in range(2):
        for y in range(1):
            for b in range(3):
                assert d.nu[x][y][b][0] == 1


def test_random_simulation_roundtrip():
    rng = random.Random(31)
    for _ in range(20):
        l, r = rng.choice([(2, 1), (2, 2), (3, 2), (3, 1)])
        k, g = rng.choice([(2, 1), (2, 2), (3, 2), (2, 3)])
        sim = random_simulation(rng, l, r, k, g)
        f = channel_from_sim(sim, (l, r), (k, g))
        assert is_channel(f)
        back = channel_from_sim(channel_decompose(f), (l, r), (k, g))
        assert back.matrix == f.matrix


def test_decompose_requires_channel():
    sp = PolysimplexSpace(2, 2)
    from conefactor.gpt import GptMap
    from conefactor.ratlin import RatMatrix

    bad = GptMap(
        make_polysimplex(2, 2),
        make_polysimplex(2, 2),
        RatMatrix.from_rows([[2, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]),
    )
    with pytest.raises(PolysimplexError, match="not a channel"):
        channel_decompose(bad)


# ---------------------------------------------------------------------------
# noisy spaces
# ---------------------------------------------------------------------------

def test_noisy_polysimplex_limits():
    plain = make_polysimplex(2, 2)
    full = noisy_polysimplex(2, 2, [1, 1])
    assert full.cone.same_cone(plain.cone)
    point = noisy_polysimplex(2, 2, [0, 0])
    assert len(point.cone.generators) == 1
    assert point.state_vertices()[0] == (rat(1, 2),) * 4


def test_noisy_triangle_two_thirds():
    tri = noisy_polysimplex(3, 1, [rat(2, 3)])
    assert sorted(tri.state_vertices()) == [
        (rat(1, 9), rat(1, 9), rat(7, 9)),
        (rat(1, 9), rat(7, 9), rat(1, 9)),
        (rat(7, 9), rat(1, 9), rat(1, 9)),
    ]


def test_noisy_states_inside_plain():
    rng = random.Random(2)
    for _ in range(10):
        k, g = rng.choice([(2, 2), (3, 2), (2, 3)])
        ts = [rat(rng.randint(0, 4), 4) for _ in range(g)]
        noisy = noisy_polysimplex(k, g, ts)
        plain = make_polysimplex(k, g)
        for v in noisy.state_vertices():
            assert plain.cone.contains(v)
    # equality only at full strength
    shrunk = noisy_polysimplex(2, 2, [1, rat(1, 2)])
    plain = make_polysimplex(2, 2)
    assert not all(shrunk.cone.contains(v) for v in plain.state_vertices())
