"""Factorizations of noisy column-stochastic spaces through smaller ones.

The embedding of a noise-shrunk polysimplex into its noiseless version
sometimes factors through a polysimplex with fewer outcomes or settings;
operationally, sufficiently noisy measurement tables can be simulated by
simpler devices.  This module verifies such factorization certificates,
builds the three closed-form constructions (two noisy binary measurements
through one three-outcome measurement up to noise 1/3, a noisy three-outcome
measurement through two binary ones up to 2/5, and the standard four-outcome
joint measurement up to 1/2), checks the equivalent polytope-inclusion
certificates, and runs a seeded alternating-LP search for factorizations at
other parameters.  The search is a heuristic: a returned certificate is
verified exactly, but exhausting the iteration budget proves nothing.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Optional

from .gpt import Gpt, GptMap, is_channel
from .polysimplex import (
    PolysimplexSpace,
    SimulationData,
    channel_from_sim,
    make_polysimplex,
    noisy_polysimplex,
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


class FactorError(ValueError):
    pass


@dataclass
class FactorizationCertificate:
    """Channels phi (noisy source to middle) and psi (middle to target) whose
    composite is the coordinate embedding of the noisy space."""

    source: Gpt
    middle: Gpt
    target: Gpt
    phi: GptMap
    psi: GptMap

    def __post_init__(self):
        if self.source.dim != self.target.dim:
            raise FactorError(
                "source and target must share ambient coordinates "
                f"({self.source.dim} vs {self.target.dim})"
            )


def verify_factorization(cert: FactorizationCertificate) -> bool:
    """Channel-hood of both legs plus the exact composite identity on every
    vertex of the noisy state space."""
    phi, psi = cert.phi, cert.psi
    if phi.source is not cert.source or phi.target is not cert.middle:
        if (phi.source.dim, phi.target.dim) != (cert.source.dim, cert.middle.dim):
            raise FactorError("phi endpoints do not match the certificate")
    if (psi.matrix.rows, psi.matrix.cols) != (cert.target.dim, cert.middle.dim):
        raise FactorError("psi endpoints do not match the certificate")
    if not is_channel(phi) or not is_channel(psi):
        return False
    comp = psi.compose(phi)
    for v in cert.source.cone.generators:
        if comp.apply(v) != tuple(as_vec(v)):
            return False
    return True


def _functional_check(name, func, vertices):
    """Raise, naming the witness, if a functional goes negative on a vertex."""
    for v in vertices:
        val = dot(func, v)
        if val < 0:
            raise FactorError(
                f"construction leaves the cone: effect {name} evaluates to "
                f"{val} on a noisy vertex"
            )


def three_outcome_joint(t) -> FactorizationCertificate:
    """Two binary measurements at noise t factored through one three-outcome
    measurement; valid exactly up to t = 1/3.

    The three effects read the first outcome of the second setting, the
    first outcome of the first setting minus half of that, and the unit
    remainder; the middle states are chosen so the composite reproduces the
    coordinates.
    """
    t = rat(t)
    if t < 0 or t > 1:
        raise FactorError("noise parameter must lie in [0, 1]")
    source = noisy_polysimplex(2, 2, [t, t])
    middle = make_polysimplex(3, 1)
    target = make_polysimplex(2, 2)
    sp = PolysimplexSpace(2, 2)
    half = rat(1, 2)
    x1 = sp.effect(0, 0)
    y1 = sp.effect(0, 1)
    unit = sp.unit
    a_eff = y1
    b_eff = tuple(p - half * q for p, q in zip(x1, y1))
    c_eff = tuple(u - p - half * q for u, p, q in zip(unit, x1, y1))
    verts = source.cone.generators
    _functional_check("A", a_eff, verts)
    _functional_check("B", b_eff, verts)
    _functional_check("C", c_eff, verts)
    phi = GptMap(source, middle, RatMatrix.from_rows([a_eff, b_eff, c_eff]))
    # middle states sent to: A -> ((1/2, 1), (1/2, 0)), B -> id matrix, C -> flip
    p_a = [half, R1, half, R0]
    p_b = [R1, R0, R0, R1]
    p_c = [R0, R0, R1, R1]
    psi = GptMap(middle, target, RatMatrix.from_cols([p_a, p_b, p_c]))
    cert = FactorizationCertificate(
        source=source, middle=middle, target=target, phi=phi, psi=psi
    )
    if not verify_factorization(cert):
        raise FactorError("internal: three-outcome construction failed to verify")
    return cert


def binary_pair_post(t) -> FactorizationCertificate:
    """A noisy three-outcome measurement post-processed from two binary
    measurements; valid exactly up to t = 2/5."""
    t = rat(t)
    if t < 0 or t > 1:
        raise FactorError("noise parameter must lie in [0, 1]")
    source = noisy_polysimplex(3, 1, [t])
    middle = make_polysimplex(2, 2)
    target = make_polysimplex(3, 1)
    spm = PolysimplexSpace(2, 2)
    r1 = (R1, R0, R0)
    r2 = (R0, R1, R0)
    unit = (R1, R1, R1)
    f52 = rat(5, 2)
    f54 = rat(5, 4)
    half = rat(1, 2)
    x1 = tuple(f52 * a + f52 * b - u for a, b, u in zip(r1, r2, unit))
    y1 = tuple(-f54 * a + f54 * b + half * u for a, b, u in zip(r1, r2, unit))
    verts = source.cone.generators
    _functional_check("X1", x1, verts)
    _functional_check("1-X1", tuple(u - v for u, v in zip(unit, x1)), verts)
    _functional_check("Y1", y1, verts)
    _functional_check("1-Y1", tuple(u - v for u, v in zip(unit, y1)), verts)
    rows = [None] * spm.dim
    rows[spm.idx(0, 0)] = list(x1)
    rows[spm.idx(1, 0)] = [u - v for u, v in zip(unit, x1)]
    rows[spm.idx(0, 1)] = list(y1)
    rows[spm.idx(1, 1)] = [u - v for u, v in zip(unit, y1)]
    phi = GptMap(source, middle, RatMatrix.from_rows(rows))
    # reconstruction: r1 = X1/5 - 2Y1/5 + 2/5, r2 = X1/5 + 2Y1/5, r3 = 3/5 - 2X1/5
    f15, f25, f35 = rat(1, 5), rat(2, 5), rat(3, 5)
    u_cs = spm.unit
    e_x1 = spm.effect(0, 0)
    e_y1 = spm.effect(0, 1)
    row0 = [f15 * a - f25 * b + f25 * u for a, b, u in zip(e_x1, e_y1, u_cs)]
    row1 = [f15 * a + f25 * b for a, b in zip(e_x1, e_y1)]
    row2 = [f35 * u - f25 * a for a, u in zip(e_x1, u_cs)]
    psi = GptMap(middle, target, RatMatrix.from_rows([row0, row1, row2]))
    cert = FactorizationCertificate(
        source=source, middle=middle, target=target, phi=phi, psi=psi
    )
    if not verify_factorization(cert):
        raise FactorError("internal: binary-pair construction failed to verify")
    return cert


def four_outcome_joint(t) -> FactorizationCertificate:
    """The standard joint measurement: two noisy binary measurements through
    one four-outcome measurement; valid exactly up to t = 1/2."""
    t = rat(t)
    if t < 0 or t > 1:
        raise FactorError("noise parameter must lie in [0, 1]")
    source = noisy_polysimplex(2, 2, [t, t])
    middle = make_polysimplex(4, 1)
    target = make_polysimplex(2, 2)
    sp = PolysimplexSpace(2, 2)
    half = rat(1, 2)
    quarter = rat(1, 4)
    unit = sp.unit
    rows = []
    labels = []
    for i in range(2):
        for j in range(2):
            eff = tuple(
                half * a + half * b - quarter * u
                for a, b, u in zip(sp.effect(i, 0), sp.effect(j, 1), unit)
            )
            labels.append(f"G[{i}{j}]")
            rows.append(eff)
    verts = source.cone.generators
    for name, eff in zip(labels, rows):
        _functional_check(name, eff, verts)
    phi = GptMap(source, middle, RatMatrix.from_rows(rows))
    cols = []
    for i in range(2):
        for j in range(2):
            cols.append(list(sp.vertex((i, j))))
    psi = GptMap(middle, target, RatMatrix.from_cols(cols))
    cert = FactorizationCertificate(
        source=source, middle=middle, target=target, phi=phi, psi=psi
    )
    if not verify_factorization(cert):
        raise FactorError("internal: four-outcome construction failed to verify")
    return cert


# ---------------------------------------------------------------------------
# heuristic alternating search
# ---------------------------------------------------------------------------

def _channel_constraint_blocks(source: Gpt, target: Gpt, nv, var):
    """Equality and inequality rows forcing a matrix (entries indexed by
    ``var(r, c)``) to be a channel from source to target."""
    eq_rows, eq_rhs, ge_rows, ge_rhs = [], [], [], []
    tdim, sdim = target.dim, source.dim
    # positivity: facet evaluations of generator images
    for v in source.cone.generators:
        for f in target.cone.facets:
            row = [R0] * nv
            for r_i in range(tdim):
                if f[r_i]:
                    for c_i in range(sdim):
                        if v[c_i]:
                            row[var(r_i, c_i)] += f[r_i] * v[c_i]
            ge_rows.append(row)
            ge_rhs.append(R0)
        # span membership of the image (needed when the target cone spans a
        # proper subspace): image minus its span projection must vanish
        frame = target.frame
        proj = frame.coord_map  # rank x tdim
        # (I - B^T (BB^T)^-1 B) applied... build once outside would be nicer,
        # but dims are tiny here.
    basis_t = target.frame.basis
    coord_map = target.frame.coord_map
    lift_rows = []
    for r_i in range(tdim):
        lift_rows.append(
            [
                sum(basis_t[s][r_i] * coord_map.data[s][c_i] for s in range(len(basis_t)))
                for c_i in range(tdim)
            ]
        )
    for v in source.cone.generators:
        for r_i in range(tdim):
            row = [R0] * nv
            row_proj = lift_rows[r_i]
            for rr in range(tdim):
                coeff = (R1 if rr == r_i else R0) - row_proj[rr]
                if coeff:
                    for c_i in range(sdim):
                        if v[c_i]:
                            row[var(rr, c_i)] += coeff * v[c_i]
            eq_rows.append(row)
            eq_rhs.append(R0)
    # unitality on the source span
    for b in source.frame.basis:
        for_unit = [R0] * nv
        for r_i in range(tdim):
            if target.unit[r_i]:
                for c_i in range(sdim):
                    if b[c_i]:
                        for_unit[var(r_i, c_i)] += target.unit[r_i] * b[c_i]
        eq_rows.append(for_unit)
        eq_rhs.append(dot(source.unit, b))
    return eq_rows, eq_rhs, ge_rows, ge_rhs


def _best_response(fixed: GptMap, solve_first_leg: bool, source, middle, target):
    """One see-saw half-step: fix one leg, minimize the total coordinate
    deviation of the composite from the identity over the other leg."""
    if solve_first_leg:
        unknown_src, unknown_tgt = source, middle
    else:
        unknown_src, unknown_tgt = middle, target
    rdim, cdim = unknown_tgt.dim, unknown_src.dim
    nmat = rdim * cdim
    verts = source.cone.generators
    nslack = len(verts) * source.dim
    nv = nmat + nslack

    def var(r, c):
        return r * cdim + c

    def svar(i, coord):
        return nmat + i * source.dim + coord

    eq_rows, eq_rhs, ge_rows, ge_rhs = _channel_constraint_blocks(
        unknown_src, unknown_tgt, nv, var
    )
    # composite deviation: for each source vertex and coordinate,
    # s >= +(comp - v), s >= -(comp - v)
    for i, v in enumerate(verts):
        if solve_first_leg:
            # comp = psi_fixed @ X @ v: linear in X
            image_rows = fixed.matrix  # target.dim x middle.dim
            for coord in range(source.dim):
                pos = [R0] * nv
                for mid_r in range(middle.dim):
                    w = image_rows.data[coord][mid_r]
                    if w:
                        for c_i in range(cdim):
                            if v[c_i]:
                                pos[var(mid_r, c_i)] += w * v[c_i]
                neg = [-x for x in pos]
                pos[svar(i, coord)] += R1
                neg[svar(i, coord)] += R1
                ge_rows.append(pos)
                ge_rhs.append(v[coord])
                ge_rows.append(neg)
                ge_rhs.append(-v[coord])
        else:
            mid_v = fixed.apply(v)
            for coord in range(source.dim):
                pos = [R0] * nv
                for c_i in range(middle.dim):
                    if mid_v[c_i]:
                        pos[var(coord, c_i)] += mid_v[c_i]
                neg = [-x for x in pos]
                pos[svar(i, coord)] += R1
                neg[svar(i, coord)] += R1
                ge_rows.append(pos)
                ge_rhs.append(v[coord])
                ge_rows.append(neg)
                ge_rhs.append(-v[coord])
    c_obj = [R0] * nv
    for j in range(nmat, nv):
        c_obj[j] = -R1
    lower = [None] * nmat + [R0] * nslack
    prob = LinearProgram(
        c=c_obj,
        a_eq=RatMatrix.from_rows(eq_rows) if eq_rows else None,
        b_eq=eq_rhs,
        a_ge=RatMatrix.from_rows(ge_rows),
        b_ge=ge_rhs,
        lower=lower,
    )
    res = lp_solve(prob)
    if res.status != "Optimal":
        raise FactorError("internal: see-saw subproblem failed")
    mat = RatMatrix(rdim, cdim, res.x[:nmat])
    return GptMap(unknown_src, unknown_tgt, mat), -res.optimum


def random_channel_data(rng: random.Random, l: int, r: int, k: int, g: int) -> SimulationData:
    """A random pre/post-processing pair with small rational weights."""

    def rand_dist(n):
        row = [rat(rng.randint(0, 4)) for _ in range(n)]
        if not sum(row):
            row[rng.randrange(n)] = R1
        total = sum(row)
        return tuple(v / total for v in row)

    pi = tuple(rand_dist(r) for _ in range(g))
    nu = tuple(
        tuple(tuple(rand_dist(k) for _ in range(l)) for _ in range(r))
        for _ in range(g)
    )
    return SimulationData(pi=pi, nu=nu)


def seesaw_search(
    source: Gpt,
    middle: Gpt,
    target: Gpt,
    iters: int = 50,
    seed: int = 0,
) -> Optional[FactorizationCertificate]:
    """Alternating exact LPs looking for a factorization of the coordinate
    embedding of ``source`` through ``middle``.

    The first leg starts as a random pre/post-processing channel restricted
    to the noisy cone (a seeded choice); each half-step minimizes the total
    coordinate deviation of the composite from the identity.  A certificate
    is returned only after full verification.  Returning None is
    inconclusive: the search is a heuristic and proves no impossibility.
    """
    k, g = polysimplex_shape(target)
    l, r = polysimplex_shape(middle)
    rng = random.Random(seed)
    sim = random_channel_data(rng, k, g, l, r)
    wide = channel_from_sim(sim, (k, g), (l, r))
    phi = GptMap(source, middle, wide.matrix)
    psi = None
    last = None
    for _ in range(max(1, iters)):
        psi, dist = _best_response(phi, solve_first_leg=False, source=source, middle=middle, target=target)
        if dist == 0:
            break
        phi, dist = _best_response(psi, solve_first_leg=True, source=source, middle=middle, target=target)
        if dist == 0:
            break
        if last is not None and dist >= last:
            break  # stalled at a positive local optimum
        last = dist
    if psi is None or dist != 0:
        return None
    cert = FactorizationCertificate(
        source=source, middle=middle, target=target, phi=phi, psi=psi
    )
    if not verify_factorization(cert):
        return None
    return cert


# ---------------------------------------------------------------------------
# polytope inclusion certificates
# ---------------------------------------------------------------------------

def reduced_coords(ambient, k: int, g: int) -> tuple:
    """Drop the last outcome of every setting: the affine coordinates of the
    state polytope, ordered by outcome-major flat index."""
    sp = PolysimplexSpace(k, g)
    v = as_vec(ambient)
    return tuple(v[sp.idx(a, x)] for a in range(k - 1) for x in range(g))


def lift_reduced(coords, k: int, g: int, total=R1) -> tuple:
    sp = PolysimplexSpace(k, g)
    coords = as_vec(coords)
    out = [R0] * sp.dim
    for a in range(k - 1):
        for x in range(g):
            out[sp.idx(a, x)] = coords[a * g + x]
    for x in range(g):
        acc = total
        for a in range(k - 1):
            acc -= out[sp.idx(a, x)]
        out[sp.idx(k - 1, x)] = acc
    return tuple(out)


@dataclass
class InclusionCertificate:
    """An affine image T of the middle polytope plus a projection.

    ``amap``/``offset`` give the affine map from the middle polytope's
    reduced coordinates (dimension m) into R^m; ``projection`` maps R^m onto
    the target's reduced coordinates (dimension n).  The certificate holds if
    the noisy polytope, zero-padded into R^m, sits inside T while the
    projection of T sits inside the noiseless polytope.
    """

    middle_shape: tuple  # (l, g')
    source_shape: tuple  # (k, g)
    ts: tuple
    amap: RatMatrix  # m x m
    offset: tuple  # length m
    projection: RatMatrix  # n x m


def _hull_membership(point, hull_points) -> bool:
    n = len(point)
    nv = len(hull_points)
    rows = [[hp[c] for hp in hull_points] for c in range(n)]
    rows.append([R1] * nv)
    rhs = list(point) + [R1]
    prob = LinearProgram(
        c=[R0] * nv, a_eq=RatMatrix.from_rows(rows), b_eq=rhs
    )
    return lp_solve(prob).status == "Optimal"


def verify_inclusion_certificate(cert: InclusionCertificate) -> bool:
    """Both polytope inclusions, decided by vertex-in-hull LPs."""
    l, gm = cert.middle_shape
    k, g = cert.source_shape
    m = gm * (l - 1)
    n = g * (k - 1)
    if m < n:
        raise FactorError("middle polytope has too few affine dimensions")
    if (cert.amap.rows, cert.amap.cols) != (m, m) or len(cert.offset) != m:
        raise FactorError("affine map data of wrong shape")
    if (cert.projection.rows, cert.projection.cols) != (n, m):
        raise FactorError("projection of wrong shape")
    spm = PolysimplexSpace(l, gm)
    t_vertices = []
    for outcomes in spm.vertex_assignments():
        u = reduced_coords(spm.vertex(outcomes), l, gm)
        img = tuple(p + q for p, q in zip(cert.amap.matvec(u), cert.offset))
        t_vertices.append(img)
    noisy = noisy_polysimplex(k, g, cert.ts)
    for w in noisy.cone.generators:
        scale = dot(noisy.unit, w)
        state = tuple(x / scale for x in w)
        padded = reduced_coords(state, k, g) + (R0,) * (m - n)
        if not _hull_membership(padded, t_vertices):
            return False
    target_vertices = [
        reduced_coords(PolysimplexSpace(k, g).vertex(o), k, g)
        for o in PolysimplexSpace(k, g).vertex_assignments()
    ]
    for tv in t_vertices:
        if not _hull_membership(cert.projection.matvec(tv), target_vertices):
            return False
    return True


def inclusion_from_factorization(cert: FactorizationCertificate) -> InclusionCertificate:
    """T is the image of the middle polytope under the second leg, padded
    into the middle's coordinate dimension; the projection just forgets the
    padding."""
    k, g = polysimplex_shape(cert.target)
    l, gm = polysimplex_shape(cert.middle)
    m = gm * (l - 1)
    n = g * (k - 1)
    if m < n:
        raise FactorError("middle polytope has too few affine dimensions")
    spm = PolysimplexSpace(l, gm)
    cols = []
    base_img = cert.psi.apply(lift_reduced((R0,) * m, l, gm))
    offset = reduced_coords(base_img, k, g) + (R0,) * (m - n)
    for j in range(m):
        unit_coord = tuple(R1 if i == j else R0 for i in range(m))
        img = cert.psi.apply(lift_reduced(unit_coord, l, gm))
        col = reduced_coords(img, k, g) + (R0,) * (m - n)
        cols.append(tuple(p - q for p, q in zip(col, offset)))
    amap = RatMatrix.from_cols([list(c) for c in cols])
    proj = RatMatrix(n, m)
    for i in range(n):
        proj[i, i] = R1
    ts = _noise_vector(cert.source, k, g)
    return InclusionCertificate(
        middle_shape=(l, gm),
        source_shape=(k, g),
        ts=ts,
        amap=amap,
        offset=tuple(offset),
        projection=proj,
    )


def _noise_vector(noisy: Gpt, k: int, g: int) -> tuple:
    name = noisy.name or ""
    if ";" in name:
        return tuple(rat(t) for t in name.split(";", 1)[1].split(","))
    raise FactorError("source is not a noisy polysimplex")


def factorization_from_inclusion(cert: InclusionCertificate) -> FactorizationCertificate:
    """Rebuild channels from a verified inclusion certificate.

    The second leg is the projection composed with the affine map; the first
    leg is found by one LP, choosing images of the noisy vertices inside the
    middle polytope consistently with linearity and the composite identity.
    """
    l, gm = cert.middle_shape
    k, g = cert.source_shape
    source = noisy_polysimplex(k, g, cert.ts)
    middle = make_polysimplex(l, gm)
    target = make_polysimplex(k, g)
    spm = PolysimplexSpace(l, gm)
    mid_verts = [spm.vertex(o) for o in spm.vertex_assignments()]

    # second leg on states: reduced coords -> project(affine image), lifted
    def psi_state(state):
        u = reduced_coords(state, l, gm)
        red = cert.projection.matvec(
            tuple(p + q for p, q in zip(cert.amap.matvec(u), cert.offset))
        )
        return lift_reduced(red, k, g)

    frame = middle.frame
    images = [psi_state(v) for v in mid_verts]
    # linear extension over the span, canonical on its complement
    img_mat = RatMatrix.from_cols([list(i) for i in images])
    vert_frame_coords = RatMatrix.from_cols(
        [list(frame.coords(v)) for v in mid_verts]
    )
    from .ratlin import linsolve

    rows = []
    for r_i in range(target.dim):
        sol = linsolve(
            vert_frame_coords.transpose(),
            [img_mat.data[r_i][j] for j in range(len(mid_verts))],
        )
        if sol is None:
            raise FactorError("inclusion certificate is not affinely consistent")
        rows.append(sol)
    psi_span = RatMatrix.from_rows(rows)  # target.dim x rank
    psi_mat = psi_span.matmul(frame.coord_map)
    psi = GptMap(middle, target, psi_mat)
    # phi by LP: images of noisy vertices inside the middle polytope with
    # linear consistency and exact composite identity
    verts = source.cone.generators
    nmat = middle.dim * source.dim
    hull = mid_verts
    nhull = len(hull)
    nv = nmat + len(verts) * nhull

    def var(r_i, c_i):
        return r_i * source.dim + c_i

    def hvar(i, j):
        return nmat + i * nhull + j

    eq_rows = []
    eq_rhs = []
    for i, v in enumerate(verts):
        # phi(v) = sum_j lambda_ij hull_j ; sum_j lambda_ij = unit(v)
        for coord in range(middle.dim):
            row = [R0] * nv
            for c_i in range(source.dim):
                if v[c_i]:
                    row[var(coord, c_i)] += v[c_i]
            for j, h in enumerate(hull):
                if h[coord]:
                    row[hvar(i, j)] -= h[coord]
            eq_rows.append(row)
            eq_rhs.append(R0)
        row = [R0] * nv
        for j in range(nhull):
            row[hvar(i, j)] = R1
        eq_rows.append(row)
        eq_rhs.append(dot(source.unit, v))
        # composite identity on this vertex
        for coord in range(source.dim):
            row = [R0] * nv
            for mid_r in range(middle.dim):
                w = psi_mat.data[coord][mid_r]
                if w:
                    for c_i in range(source.dim):
                        if v[c_i]:
                            row[var(mid_r, c_i)] += w * v[c_i]
            eq_rows.append(row)
            eq_rhs.append(v[coord])
    lower = [None] * nmat + [R0] * (nv - nmat)
    prob = LinearProgram(
        c=[R0] * nv,
        a_eq=RatMatrix.from_rows(eq_rows),
        b_eq=eq_rhs,
        lower=lower,
    )
    res = lp_solve(prob)
    if res.status != "Optimal":
        raise FactorError(
            "no linear first leg is compatible with this inclusion certificate"
        )
    phi = GptMap(source, middle, RatMatrix(middle.dim, source.dim, res.x[:nmat]))
    out = FactorizationCertificate(
        source=source, middle=middle, target=target, phi=phi, psi=psi
    )
    if not verify_factorization(out):
        raise FactorError("internal: rebuilt certificate failed verification")
    return out
