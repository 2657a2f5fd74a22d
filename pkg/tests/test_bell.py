"""Behaviors, local models, the witness family, and witness reduction."""

import itertools
import random

import pytest

from conefactor.bell import (
    BellError,
    WitnessTensor,
    base_chsh,
    chsh_family,
    chsh_pairing,
    deterministic_behavior,
    evaluate_witness,
    has_lhv,
    product_behavior,
    push_behavior,
    reduce_to_chsh,
    square_isomorphisms,
)
from conefactor.cone import TensorElement, member_min
from conefactor.instances import pr_box
from conefactor.polysimplex import (
    NsDistribution,
    PolysimplexSpace,
    make_polysimplex,
    ns_encode,
    uniform_ns,
)
from conefactor.ratlin import R0, R1, dot, rat

from conftest import lifted_pr_box, random_behavior, random_local_behavior, random_simulation

SQ2 = [(2, 2), (2, 2)]


def test_product_behavior_local():
    p = product_behavior(SQ2, [[rat(1, 3), rat(2, 3)], [rat(1, 2), rat(1, 2)]],
                         [[rat(1, 4), rat(3, 4)], [R1, R0]])
    model = has_lhv(p)
    assert model is not None and model.reproduces(p)


def test_pr_box_nonlocal_and_noisy_local():
    pr = pr_box()
    assert has_lhv(pr) is None
    u = uniform_ns(SQ2)
    half = rat(1, 2)
    mixed = NsDistribution(SQ2, [half * a + half * b for a, b in zip(pr.probs, u.probs)])
    assert has_lhv(mixed) is not None


def test_lhv_matches_tensor_separability():
    rng = random.Random(1)
    cs = make_polysimplex(2, 2)
    seen = set()
    for _ in range(30):
        p = random_behavior(SQ2, rng)
        local = has_lhv(p) is not None
        sep = member_min(ns_encode(p), cs.cone, cs.cone).separable
        assert local == sep
        seen.add(local)
    assert seen == {True, False}


# ---------------------------------------------------------------------------
# the witness family
# ---------------------------------------------------------------------------

# Four-term evaluation formulas in one-based (outcomes | settings) notation.
# Seven of the eight family members have such a published four-term display
# that is consistent with its correlator form; the eighth member is pinned
# below through the correlator forms, which cover the whole family.
FORMULAS_1BASED = [
    [(1, (1, 2, 2, 1)), (1, (2, 1, 1, 1)), (1, (1, 1, 1, 2)), (-1, (1, 1, 2, 2))],
    [(1, (1, 2, 2, 1)), (1, (1, 1, 1, 1)), (-1, (1, 2, 1, 2)), (1, (2, 2, 2, 2))],
    [(1, (2, 2, 1, 1)), (1, (1, 2, 1, 2)), (-1, (2, 2, 2, 2)), (1, (2, 1, 2, 1))],
    [(1, (1, 1, 1, 1)), (1, (2, 2, 2, 1)), (-1, (2, 1, 2, 2)), (1, (2, 1, 1, 2))],
    [(1, (1, 2, 1, 1)), (1, (2, 1, 1, 2)), (-1, (1, 1, 2, 2)), (1, (1, 1, 2, 1))],
    [(1, (1, 2, 1, 2)), (1, (2, 1, 1, 1)), (-1, (1, 1, 2, 1)), (1, (1, 1, 2, 2))],
    [(1, (1, 1, 1, 2)), (1, (2, 2, 1, 1)), (-1, (1, 2, 2, 1)), (1, (1, 2, 2, 2))],
]

# the correlator bounds: 4 positions of the minus sign, lower and upper bound
CORRELATOR_FORMS = [
    (signs, side)
    for signs in [(1, 1, 1, -1), (1, 1, -1, 1), (1, -1, 1, 1), (-1, 1, 1, 1)]
    for side in (+1, -1)
]


def eval_formula(formula, p):
    total = R0
    for sign, (a, b, x, y) in formula:
        total += sign * p.p((a - 1, b - 1), (x - 1, y - 1))
    return total


def eval_correlator_witness(form, p):
    """(2 -/+ signed correlator sum) / 4: the witness value of one bound."""
    signs, side = form

    def corr(x, y):
        return (
            p.p((0, 0), (x, y))
            - p.p((0, 1), (x, y))
            - p.p((1, 0), (x, y))
            + p.p((1, 1), (x, y))
        )

    s = (
        signs[0] * corr(0, 0)
        + signs[1] * corr(0, 1)
        + signs[2] * corr(1, 0)
        + signs[3] * corr(1, 1)
    )
    return (2 - side * s) / 4


def all_deterministic():
    out = []
    for sa in itertools.product(range(2), repeat=2):
        for sb in itertools.product(range(2), repeat=2):
            out.append(deterministic_behavior(SQ2, sa, sb))
    return out


def test_family_size_and_validity():
    fam = chsh_family()
    assert len(fam) == 8
    for w in fam:
        assert w.is_valid()


def test_base_tensor_term_for_term():
    """The base witness is exactly the four-term table of the first formula:
    one coefficient per probability, nothing else."""
    base = base_chsh()
    sp = PolysimplexSpace(2, 2)
    expected = {}
    for sign, (a, b, x, y) in FORMULAS_1BASED[0]:
        expected[(sp.idx(a - 1, x - 1), sp.idx(b - 1, y - 1))] = rat(sign)
    m = base.tensor.as_matrix()
    for i in range(4):
        for j in range(4):
            assert m.data[i][j] == expected.get((i, j), R0)


def test_family_is_exactly_the_correlator_bounds():
    """As functionals on behaviors, the family is in bijection with the
    eight correlator bounds (four minus-sign positions, two sides each)."""
    fam = chsh_family()
    dets = all_deterministic()
    profile_fam = {
        i: tuple(evaluate_witness(w, p) for p in dets) for i, w in enumerate(fam)
    }
    profile_corr = {
        j: tuple(eval_correlator_witness(f, p) for p in dets)
        for j, f in enumerate(CORRELATOR_FORMS)
    }
    matched = {}
    for i, prof in profile_fam.items():
        hits = [j for j, fp in profile_corr.items() if fp == prof]
        assert len(hits) == 1, f"family member {i} matches bounds {hits}"
        matched[i] = hits[0]
    assert sorted(matched.values()) == list(range(8))


def test_four_term_displays_match_distinct_members():
    fam = chsh_family()
    dets = all_deterministic()
    profile_fam = {
        i: tuple(evaluate_witness(w, p) for p in dets) for i, w in enumerate(fam)
    }
    hits = []
    for f in FORMULAS_1BASED:
        prof = tuple(eval_formula(f, p) for p in dets)
        matches = [i for i, fp in profile_fam.items() if fp == prof]
        assert len(matches) == 1
        hits.append(matches[0])
    assert len(set(hits)) == len(FORMULAS_1BASED)


def test_nonnegative_on_deterministic_products():
    fam = chsh_family()
    for w in fam:
        for p in all_deterministic():
            assert evaluate_witness(w, p) >= 0


def test_pr_box_minimum_minus_half():
    fam = chsh_family()
    pr = pr_box()
    values = [evaluate_witness(w, pr) for w in fam]
    assert min(values) == rat(-1, 2)
    assert sum(1 for v in values if v < 0) == 1


def test_correlator_form_cross_check():
    """Rewriting the base value through the two-setting correlators: four
    times the witness value equals two minus the cyclic correlator sum."""
    rng = random.Random(2)
    for _ in range(20):
        p = random_behavior(SQ2, rng)

        def corr(x, y):
            return (
                p.p((0, 0), (x, y))
                - p.p((0, 1), (x, y))
                - p.p((1, 0), (x, y))
                + p.p((1, 1), (x, y))
            )

        s = corr(0, 0) + corr(1, 0) + corr(1, 1) - corr(0, 1)
        assert 4 * evaluate_witness(base_chsh(), p) == 2 - s


def test_witness_completeness_on_the_square():
    """Locality is equivalent to passing all eight witnesses."""
    rng = random.Random(3)
    fam = chsh_family()
    agree_local = agree_nonlocal = 0
    for _ in range(200):
        p = random_behavior(SQ2, rng)
        local = has_lhv(p) is not None
        passes = all(evaluate_witness(w, p) >= 0 for w in fam)
        assert local == passes
        if local:
            agree_local += 1
        else:
            agree_nonlocal += 1
    assert agree_local and agree_nonlocal


def test_uniform_behavior_evaluates_as_center_product():
    fam = chsh_family()
    u = uniform_ns(SQ2)
    center = tuple(rat(1, 2) for _ in range(4))  # uniform square state
    for w in fam:
        direct = evaluate_witness(w, u)
        paired = w.tensor.pair([center, center])
        assert direct == paired


def test_evaluate_witness_shape_mismatch():
    w = base_chsh()
    p = uniform_ns([(2, 2), (2, 3)])
    with pytest.raises(BellError, match="does not fit"):
        evaluate_witness(w, p)


# ---------------------------------------------------------------------------
# reduction
# ---------------------------------------------------------------------------

def test_reduce_base_identity_pairing():
    base = base_chsh()
    out = reduce_to_chsh(base)  # verifies the identity internally
    # the induced map is positive on the square cone
    cs = make_polysimplex(2, 2)
    for v in cs.cone.generators:
        assert cs.cone.contains(out.apply(v))


def test_family_members_reduce():
    for w in chsh_family():
        reduce_to_chsh(w)


def test_random_constructed_witnesses_reduce():
    """Witnesses born as post-processings of the base reduce back, with the
    pairing identity verified on a spanning family."""
    from conefactor.polysimplex import channel_from_sim

    rng = random.Random(4)
    base = base_chsh()
    t = base.tensor.as_matrix()
    for _ in range(10):
        k, g = rng.choice([(2, 2), (2, 3), (3, 2), (3, 3)])
        sim = random_simulation(rng, k, g, 2, 2)
        psi = channel_from_sim(sim, (k, g), (2, 2))
        wmat = t.matmul(psi.matrix)
        w = WitnessTensor(
            shapes=((2, 2), (k, g)),
            tensor=TensorElement((4, k * g), wmat.entries()),
        )
        assert w.is_valid()
        out = reduce_to_chsh(w)
        src = make_polysimplex(k, g)
        for v in src.cone.generators:
            assert make_polysimplex(2, 2).cone.contains(out.apply(v))


def test_reduce_rejects_non_witness():
    sp = PolysimplexSpace(2, 2)
    coeffs = [R0] * 16
    coeffs[0] = -R1
    bad = WitnessTensor(shapes=((2, 2), (2, 2)), tensor=TensorElement((4, 4), coeffs))
    with pytest.raises(BellError, match="not a witness"):
        reduce_to_chsh(bad)
