"""JSON codecs: every scalar travels as an exact "num/den" string.

Integers serialize without the denominator ("3"); everything round-trips
bit-exactly.  State spaces may be given inline or by keyword (see
`instances.gpt_by_name`).
"""

from __future__ import annotations

from typing import Any

from .cone import PolyhedralCone, TensorElement
from .gpt import Gpt
from .instances import gpt_by_name
from .meters import Multimeter
from .polysimplex import NsDistribution, SimulationData
from .ratlin import RatMatrix, rat, rat_str
from .steering import Assemblage


def enc_scalar(x) -> str:
    return rat_str(x)


def dec_scalar(s):
    if isinstance(s, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(s, (int, str)):
        return rat(s)
    raise ValueError(f"expected an integer or 'num/den' string, got {s!r}")


def enc_vec(v) -> list:
    return [enc_scalar(x) for x in v]


def dec_vec(v) -> tuple:
    return tuple(dec_scalar(x) for x in v)


def enc_matrix(m: RatMatrix) -> list:
    return [enc_vec(row) for row in m.data]


def dec_matrix(rows) -> RatMatrix:
    return RatMatrix.from_rows([dec_vec(r) for r in rows])


def enc_cone(c: PolyhedralCone) -> dict:
    return {
        "dim": c.dim,
        "generators": [enc_vec(g) for g in c.generators],
        "facets": [enc_vec(f) for f in c.facets],
    }


def dec_cone(d: dict) -> PolyhedralCone:
    return PolyhedralCone(
        int(d["dim"]),
        generators=[dec_vec(g) for g in d["generators"]] or None,
        facets=[dec_vec(f) for f in d.get("facets", [])] or None,
    )


def enc_gpt(g: Gpt) -> Any:
    if g.name:
        return g.name
    return {"dim": g.dim, "cone": enc_cone(g.cone), "unit": enc_vec(g.unit)}


def dec_gpt(d: Any) -> Gpt:
    if isinstance(d, str):
        return gpt_by_name(d)
    return Gpt(int(d["dim"]), dec_cone(d["cone"]), dec_vec(d["unit"]))


def enc_multimeter(m: Multimeter) -> dict:
    return {
        "gpt": enc_gpt(m.space),
        "k": m.k,
        "g": m.g,
        "effects": [[enc_vec(e) for e in row] for row in m.effects],
    }


def dec_multimeter(d: dict) -> Multimeter:
    space = dec_gpt(d["gpt"])
    effects = [[dec_vec(e) for e in row] for row in d["effects"]]
    m = Multimeter(space, effects)
    if "k" in d and int(d["k"]) != m.k:
        raise ValueError("declared outcome count disagrees with the table")
    if "g" in d and int(d["g"]) != m.g:
        raise ValueError("declared setting count disagrees with the table")
    return m


def enc_assemblage(a: Assemblage) -> dict:
    return {
        "gpt": enc_gpt(a.space),
        "k": a.k,
        "g": a.g,
        "sigma": [[enc_vec(s) for s in row] for row in a.sigma],
    }


def dec_assemblage(d: dict) -> Assemblage:
    space = dec_gpt(d["gpt"])
    sigma = [[dec_vec(s) for s in row] for row in d["sigma"]]
    a = Assemblage(space, sigma)
    if "k" in d and int(d["k"]) != a.k:
        raise ValueError("declared outcome count disagrees with the table")
    if "g" in d and int(d["g"]) != a.g:
        raise ValueError("declared setting count disagrees with the table")
    return a


def enc_ns(p: NsDistribution) -> dict:
    ks = [k for k, _ in p.shapes]
    gs = [g for _, g in p.shapes]
    return {
        "parties": p.n,
        "k": ks[0] if len(set(ks)) == 1 else ks,
        "g": gs[0] if len(set(gs)) == 1 else gs,
        "probs": enc_vec(p.probs),
    }


def dec_ns(d: dict) -> NsDistribution:
    n = int(d["parties"])
    ks = d["k"]
    gs = d["g"]
    if isinstance(ks, int):
        ks = [ks] * n
    if isinstance(gs, int):
        gs = [gs] * n
    shapes = list(zip(map(int, ks), map(int, gs)))
    return NsDistribution(shapes, dec_vec(d["probs"]))


def enc_tensor(t: TensorElement) -> dict:
    return {"factors": list(t.factors), "coeffs": enc_vec(t.coeffs)}


def dec_tensor(d: dict) -> TensorElement:
    return TensorElement(tuple(d["factors"]), dec_vec(d["coeffs"]))


def enc_simulation(s: SimulationData) -> dict:
    return {
        "pi": [[enc_scalar(v) for v in row] for row in s.pi],
        "nu": [
            [[[enc_scalar(v) for v in dist] for dist in per_b] for per_b in per_y]
            for per_y in s.nu
        ],
    }


def dec_simulation(d: dict) -> SimulationData:
    return SimulationData(
        pi=tuple(tuple(dec_scalar(v) for v in row) for row in d["pi"]),
        nu=tuple(
            tuple(
                tuple(tuple(dec_scalar(v) for v in dist) for dist in per_b)
                for per_b in per_y
            )
            for per_y in d["nu"]
        ),
    )
