"""State spaces, channels, the map/tensor dictionary, and simplex factoring."""

import random

import pytest

from conefactor.cone import PolyhedralCone, member_max
from conefactor.gpt import (
    Gpt,
    GptError,
    GptMap,
    chi_tensor,
    dual_state_space,
    identity_map,
    is_channel,
    map_to_tensor,
    min_factor,
    simplex_gpt,
    tensor_to_map,
)
from conefactor.meters import as_channel, is_compatible
from conefactor.polysimplex import make_polysimplex
from conefactor.ratlin import R0, R1, RatMatrix, dot, rat

from conftest import random_multimeter


def test_state_vertices_simplex():
    s3 = simplex_gpt(3)
    assert sorted(s3.state_vertices()) == [
        (R0, R0, R1),
        (R0, R1, R0),
        (R1, R0, R0),
    ]


def test_state_vertices_polysimplex_square(square):
    verts = square.state_vertices()
    assert len(verts) == 4
    # square relation: the two diagonal pairs share their sum
    s = sorted(verts)
    assert tuple(a + b for a, b in zip(s[0], s[3])) == tuple(
        a + b for a, b in zip(s[1], s[2])
    )


def test_state_vertices_cube(cube):
    verts = cube.state_vertices()
    assert len(verts) == 8
    assert all(v[3] == 1 and all(abs(c) == 1 for c in v[:3]) for v in verts)


def test_unit_must_be_strictly_positive(cube):
    with pytest.raises(GptError, match="strictly positive"):
        Gpt(4, cube.cone, [1, 0, 0, 0])


def test_is_channel_identity_and_scaling(cube):
    assert is_channel(identity_map(cube))
    double = GptMap(cube, cube, RatMatrix.from_rows(
        [[2 if i == j else 0 for j in range(4)] for i in range(4)]
    ))
    assert not is_channel(double)


def test_channel_from_simulation_data_is_channel(square):
    rng = random.Random(3)
    m = random_multimeter(square, 2, 2, rng)
    assert is_channel(as_channel(m))


def test_chi_tensor_simplex_identity():
    for d in (2, 3, 4):
        assert chi_tensor(simplex_gpt(d)).as_matrix() == RatMatrix.identity(d)


def test_chi_in_max_tensor(cube, octa, square):
    for g in (cube, octa, square):
        chi = chi_tensor(g)
        assert member_max(chi, g.effect_cone(), g.cone)


def test_tensor_map_roundtrip_random(cube, octa):
    rng = random.Random(4)
    for _ in range(20):
        cols = []
        for _ in range(4):
            v = [R0] * 4
            for gen in octa.cone.generators:
                c = rat(rng.randint(0, 3), rng.randint(1, 2))
                v = [p + c * q for p, q in zip(v, gen)]
            cols.append(v)
        f = GptMap(cube, octa, RatMatrix.from_cols(cols))
        back = tensor_to_map(map_to_tensor(f), cube, octa)
        assert f.equals_on_source(back)


def test_chi_roundtrip_is_identity(cube, square):
    for g in (cube, square):
        f = tensor_to_map(chi_tensor(g), g, g)
        assert f.equals_on_source(identity_map(g))


def test_dual_state_space_simplex_scaling():
    s3 = simplex_gpt(3)
    q = (rat(1, 2), rat(1, 3), rat(1, 6))
    ds = dual_state_space(s3, q)
    assert sorted(ds.state_vertices()) == [
        (R0, R0, rat(6)),
        (R0, rat(3), R0),
        (rat(2), R0, R0),
    ]


def test_dual_state_space_boundary_rejected():
    s3 = simplex_gpt(3)
    with pytest.raises(GptError, match="unbounded"):
        dual_state_space(s3, (rat(1, 2), rat(1, 2), R0))


def test_dual_state_space_octa_gives_cube(octa, cube):
    ds = dual_state_space(octa, (R0, R0, R0, R1))
    assert ds.cone.same_cone(cube.cone)


def test_bidual_state_space(octa):
    center = (R0, R0, R0, R1)
    ds = dual_state_space(octa, center)
    back = dual_state_space(ds, octa.unit)
    assert back.cone.same_cone(octa.cone)


def test_min_factor_constant_map(cube, octa):
    y0 = octa.state_vertices()[0]
    const = GptMap(
        cube,
        octa,
        RatMatrix.from_rows([[y * u for u in cube.unit] for y in y0]),
    )
    out = min_factor(const)
    assert out is not None
    psi1, psi2 = out
    assert psi1.target.dim == 1
    assert psi2.compose(psi1).equals_on_source(const)
    assert is_channel(psi1) and is_channel(psi2)


def test_min_factor_matches_compatibility(square, cube):
    rng = random.Random(12)
    seen_both = set()
    for _ in range(25):
        space = rng.choice([square, cube])
        m = random_multimeter(space, 2, 2, rng)
        f = as_channel(m)
        factored = min_factor(f)
        compatible = is_compatible(m) is not None
        assert (factored is not None) == compatible
        seen_both.add(compatible)
        if factored is not None:
            psi1, psi2 = factored
            assert psi2.compose(psi1).equals_on_source(f)
            assert is_channel(psi2)
            # the first leg lands on the simplex's state slice
            assert is_channel(psi1)
    assert seen_both == {True, False}


def test_min_factor_rejects_nonchannel(cube):
    bad = GptMap(cube, cube, RatMatrix.from_rows(
        [[2 if i == j else 0 for j in range(4)] for i in range(4)]
    ))
    with pytest.raises(GptError):
        min_factor(bad)
