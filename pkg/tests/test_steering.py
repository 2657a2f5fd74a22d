"""Assemblages: codecs, local models, robustness, realization checks."""

import random

import pytest

from conefactor.cone import TensorElement, member_min
from conefactor.instances import (
    octahedron_counterexample_assemblage,
    octahedron_face_multimeter,
)
from conefactor.meters import Multimeter, compatibility_robustness
from conefactor.polysimplex import PolysimplexSpace, make_polysimplex
from conefactor.ratlin import R0, R1, dot, kron_vec, rat
from conefactor.steering import (
    Assemblage,
    SteeringError,
    assemblage_as_multimeter,
    assemblage_from_tensor,
    assemblage_to_tensor,
    classical_simulates_assemblage,
    apply_simulation_assemblage,
    has_lhs,
    steering_robustness,
    verify_realization,
)

from conftest import random_assemblage, random_multimeter, random_simulation, random_state


def trivial_assemblage(space, table):
    bar = random_state(space, random.Random(0), interior=True)
    sigma = [[tuple(rat(q) * b for b in bar) for q in row] for row in table]
    return Assemblage(space, sigma)


def test_counterexample_data(octa):
    sig = octahedron_counterexample_assemblage()
    assert sig.k == 2 and sig.g == 3
    assert sig.bar == (R0, R0, R0, R1)
    assert sig.element(0, 0) == (rat(1, 2), R0, R0, rat(1, 2))


def test_counterexample_tensor_blocks():
    sig = octahedron_counterexample_assemblage()
    xi = assemblage_to_tensor(sig)
    sp = PolysimplexSpace(2, 3)
    m = xi.as_matrix()
    assert m.row(sp.idx(0, 0)) == (rat(1, 2), R0, R0, rat(1, 2))


def test_counterexample_robustness_is_one_third():
    sig = octahedron_counterexample_assemblage()
    assert steering_robustness(sig) == rat(1, 3)
    assert has_lhs(sig) is None


def test_counterexample_gap_against_dichotomic_floor():
    sig = octahedron_counterexample_assemblage()
    rs = steering_robustness(sig)
    rm = compatibility_robustness(octahedron_face_multimeter())
    assert rs < rm


def test_counterexample_as_multimeter_is_cube_table():
    sig = octahedron_counterexample_assemblage()
    mm = assemblage_as_multimeter(sig)
    assert (mm.k, mm.g) == (2, 3)
    assert compatibility_robustness(mm) == rat(1, 3)


def test_rs_bounded_by_rm_of_dual_multimeter(octa, cube):
    rng = random.Random(1)
    for _ in range(10):
        space = rng.choice([octa, cube])
        sig = random_assemblage(space, 2, rng.choice([2, 3]), rng, interior_bar=True)
        if not space.in_relative_interior(sig.bar):
            continue
        rs = steering_robustness(sig)
        rm = compatibility_robustness(assemblage_as_multimeter(sig))
        assert rs <= rm


def test_trivial_assemblage(octa):
    triv = trivial_assemblage(octa, [[rat(1, 2), rat(1, 2)], [rat(1, 3), rat(2, 3)]])
    model = has_lhs(triv)
    assert model is not None
    assert steering_robustness(triv) == 1
    xi = assemblage_to_tensor(triv)
    cs = make_polysimplex(2, 2)
    assert member_min(xi, cs.cone, octa.cone).separable


def test_tensor_roundtrip_random(octa):
    rng = random.Random(2)
    for _ in range(20):
        sig = random_assemblage(octa, rng.choice([2, 3]), rng.choice([2, 3]), rng)
        xi = assemblage_to_tensor(sig)
        back = assemblage_from_tensor(xi, octa, sig.k, sig.g)
        assert back.sigma == sig.sigma


def test_from_tensor_rejects_cone_violation(octa):
    sig = octahedron_counterexample_assemblage()
    xi = assemblage_to_tensor(sig)
    coeffs = list(xi.coeffs)
    coeffs[3] = -coeffs[3] - 1  # corrupt the normalization coordinate
    with pytest.raises(SteeringError):
        assemblage_from_tensor(TensorElement(xi.factors, coeffs), octa, 2, 3)


def test_lhs_matches_tensor_separability(octa, cube):
    rng = random.Random(3)
    seen = set()
    for _ in range(25):
        space = rng.choice([octa, cube])
        k, g = rng.choice([(2, 2), (2, 3), (3, 2)])
        sig = random_assemblage(space, k, g, rng)
        model = has_lhs(sig)
        cs = make_polysimplex(k, g)
        sep = member_min(assemblage_to_tensor(sig), cs.cone, space.cone).separable
        assert (model is not None) == sep
        seen.add(sep)
        if model is not None:
            assert model.reproduces(sig)
    assert seen == {True, False}


def test_robustness_outcome_relabeling_invariance(octa):
    rng = random.Random(4)
    sig = random_assemblage(octa, 2, 2, rng)
    flipped = Assemblage(octa, [list(reversed(row)) for row in sig.sigma])
    assert steering_robustness(sig) == steering_robustness(flipped)


def test_verify_realization_product_state(octa, cube):
    """A product state yields the trivial assemblage: every element is the
    effect weight times the fixed second-party state."""
    rng = random.Random(5)
    e_mm = random_multimeter(cube, 2, 2, rng)
    u = random_state(cube, rng)
    v = random_state(octa, rng)
    w = TensorElement((cube.dim, octa.dim), kron_vec(u, v))
    sigma = [
        [tuple(dot(e_mm.effects[x][a], u) * vi for vi in v) for a in range(2)]
        for x in range(2)
    ]
    sig = Assemblage(octa, sigma)
    assert verify_realization(sig, w, e_mm)


def test_verify_realization_chi_construction(octa):
    """The evaluation tensor of the dual state space realizes any assemblage
    whose elements act as the measurement effects."""
    from conefactor.gpt import chi_tensor, dual_state_space

    sig = octahedron_counterexample_assemblage()
    dual = dual_state_space(octa, sig.bar)
    mm = assemblage_as_multimeter(sig)
    chi = chi_tensor(octa)  # in A(octa) x V(octa); first leg is dual's states
    assert verify_realization(sig, chi, mm)


def test_verify_realization_detects_perturbation(octa, cube):
    rng = random.Random(6)
    e_mm = random_multimeter(cube, 2, 2, rng)
    u = random_state(cube, rng)
    v = random_state(octa, rng)
    w = TensorElement((cube.dim, octa.dim), kron_vec(u, v))
    sigma = [
        [tuple(dot(e_mm.effects[x][a], u) * vi for vi in v) for a in range(2)]
        for x in range(2)
    ]
    bad = [row[:] for row in sigma]
    bad[0][0] = tuple(x + (octa.unit[i] / 9) for i, x in enumerate(bad[0][0]))
    bad[0][1] = tuple(x - (octa.unit[i] / 9) for i, x in enumerate(bad[0][1]))
    sig = Assemblage(octa, bad)
    assert not verify_realization(sig, w, e_mm)


def test_classical_simulation_self_and_constructive(octa):
    rng = random.Random(7)
    sig = random_assemblage(octa, 2, 2, rng)
    assert classical_simulates_assemblage(sig, sig) is not None
    sim = random_simulation(rng, sig.k, sig.g, 2, 3)
    target = apply_simulation_assemblage(sig, sim)
    got = classical_simulates_assemblage(target, sig)
    assert got is not None
    assert apply_simulation_assemblage(sig, got).sigma == target.sigma


def test_classical_simulation_reduces_to_lhs(octa):
    """Simulating from the vertex-ensemble assemblage with one setting is
    exactly a local model search."""
    rng = random.Random(8)
    for _ in range(6):
        sig = random_assemblage(octa, 2, 2, rng)
        model = has_lhs(sig)
        # source: the one-setting assemblage listing a fixed ensemble
        ens = model.ensemble if model else None
        if model is None:
            continue
        members = [b for b in ens if any(b)]
        source = Assemblage(octa, [members])
        got = classical_simulates_assemblage(sig, source)
        assert got is not None


def test_simulation_requires_matching_average(octa):
    rng = random.Random(9)
    a = random_assemblage(octa, 2, 2, rng)
    b = random_assemblage(octa, 2, 2, rng)
    if a.bar == b.bar:
        return
    with pytest.raises(SteeringError, match="average"):
        classical_simulates_assemblage(a, b)


def test_boundary_average_state_rejected(octa):
    vert = octa.state_vertices()[0]
    sigma = [[tuple(x / 2 for x in vert), tuple(x / 2 for x in vert)]]
    sig = Assemblage(octa, sigma)
    with pytest.raises(Exception, match="unbounded"):
        assemblage_as_multimeter(sig)
