"""Named built-in state spaces, multimeters, assemblages, and behaviors.

Everything the command line can reference by keyword lives here, so the
standard experiments run with zero hand-entered data.  Coordinates follow the
four-dimensional embedding with the normalization coordinate last: the cube
state space is {(x, y, z, 1) : -1 <= x, y, z <= 1} and the octahedron is its
dual, with unit (0, 0, 0, 1) for both.
"""

from __future__ import annotations

import itertools

from .cone import PolyhedralCone
from .gpt import Gpt, simplex_gpt
from .meters import Multimeter
from .polysimplex import NsDistribution, make_polysimplex
from .ratlin import R0, R1, rat
from .steering import Assemblage


def cube_gpt() -> Gpt:
    verts = [
        [x, y, z, 1] for x in (1, -1) for y in (1, -1) for z in (1, -1)
    ]
    return Gpt(4, PolyhedralCone(4, generators=verts), [0, 0, 0, 1], name="cube")


def octahedron_gpt() -> Gpt:
    verts = [
        [1, 0, 0, 1],
        [-1, 0, 0, 1],
        [0, 1, 0, 1],
        [0, -1, 0, 1],
        [0, 0, 1, 1],
        [0, 0, -1, 1],
    ]
    return Gpt(
        4, PolyhedralCone(4, generators=verts), [0, 0, 0, 1], name="octahedron"
    )


def square_gpt() -> Gpt:
    """The two-setting binary polysimplex, the square state space."""
    return make_polysimplex(2, 2)


def gpt_by_name(name: str) -> Gpt:
    """Load a state space by keyword: simplex:k, polysimplex:k,g, cube,
    octahedron, square."""
    name = name.strip()
    if name == "cube":
        return cube_gpt()
    if name == "octahedron":
        return octahedron_gpt()
    if name == "square":
        return square_gpt()
    if name.startswith("simplex:"):
        return simplex_gpt(int(name.split(":", 1)[1]))
    if name.startswith("polysimplex:"):
        k_str, g_str = name.split(":", 1)[1].split(",")
        return make_polysimplex(int(k_str), int(g_str))
    raise ValueError(f"unknown state space keyword: {name!r}")


def cube_face_multimeter() -> Multimeter:
    """The three axis measurements on the cube (right/bottom/front faces)."""
    cube = cube_gpt()
    half = rat(1, 2)
    rows = []
    for axis in range(3):
        plus = [R0, R0, R0, half]
        plus[axis] = half
        minus = [R0, R0, R0, half]
        minus[axis] = -half
        rows.append([tuple(plus), tuple(minus)])
    return Multimeter(cube, rows)


def octahedron_face_multimeter() -> Multimeter:
    """The four dichotomic face-pair measurements on the octahedron."""
    octa = octahedron_gpt()
    half = rat(1, 2)
    rows = []
    for signs in [(1, 1, 1), (1, 1, -1), (1, -1, 1), (1, -1, -1)]:
        e = tuple(half * s for s in signs) + (half,)
        comp = tuple(u - v for u, v in zip(octa.unit, e))
        rows.append([e, comp])
    return Multimeter(octa, rows)


def octahedron_counterexample_assemblage() -> Assemblage:
    """Opposing octahedron vertices, halved: the assemblage with local
    robustness at most one third while every dichotomic multimeter on the
    octahedron stays compatible to one half, so no measurement on the
    octahedron can realize it."""
    octa = octahedron_gpt()
    half = rat(1, 2)

    def v(x, y, z):
        return (half * x, half * y, half * z, half)

    sigma = [
        [v(1, 0, 0), v(-1, 0, 0)],
        [v(0, 0, 1), v(0, 0, -1)],
        [v(0, 1, 0), v(0, -1, 0)],
    ]
    return Assemblage(octa, sigma)


def pr_box() -> NsDistribution:
    """The maximally nonlocal no-signaling box on the 2x2 scenario.

    With outcomes and settings counted from zero, the outcome pair is
    uniformly random subject to a1 xor a2 = x1 and x2: perfectly correlated
    unless both settings are the second one, then perfectly anticorrelated.
    This labeling violates exactly one member of the standard witness family.
    """
    shapes = [(2, 2), (2, 2)]
    probs = []
    for x1, x2 in itertools.product(range(2), repeat=2):
        for a1, a2 in itertools.product(range(2), repeat=2):
            hit = (a1 ^ a2) == (x1 & x2)
            probs.append(rat(1, 2) if hit else R0)
    return NsDistribution(shapes, probs)


MULTIMETERS = {
    "cube-multimeter": cube_face_multimeter,
    "octa-faces": octahedron_face_multimeter,
}

ASSEMBLAGES = {
    "octa-counterexample": octahedron_counterexample_assemblage,
}

BEHAVIORS = {
    "pr-box": pr_box,
}
