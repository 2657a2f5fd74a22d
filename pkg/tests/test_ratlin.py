"""Scalar layer, linear solving, and the exact simplex."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from conefactor.ratlin import (
    R0,
    R1,
    LinearProgram,
    RatMatrix,
    RatlinError,
    check_feasible,
    cone_affine_feasible,
    dot,
    inverse,
    linsolve,
    lp_solve,
    rank,
    rat,
    rat_str,
    verify_farkas,
    verify_optimal_dual,
)


def test_rat_basics():
    assert rat(2, 4) == rat(1, 2)
    assert rat("-2/5").numerator == -2
    assert rat("-2/5").denominator == 5
    assert rat("3") == 3
    assert rat(5, -10) == rat(-1, 2)
    assert rat(-1, 2).denominator == 2  # canonical positive denominator


def test_rat_rejects_floats():
    with pytest.raises(RatlinError):
        rat(0.5)


@pytest.mark.parametrize(
    "value,expected",
    [(rat(3), "3"), (rat(-2, 5), "-2/5"), (rat(0), "0"), (rat(7, 21), "1/3")],
)
def test_rat_str(value, expected):
    assert rat_str(value) == expected


def test_matrix_shapes_and_ops():
    m = RatMatrix.from_rows([[1, 2], [3, 4]])
    assert m.matvec((1, 1)) == (rat(3), rat(7))
    assert m.transpose().row(0) == (rat(1), rat(3))
    assert (m * RatMatrix.identity(2)) == m
    with pytest.raises(RatlinError):
        RatMatrix(2, 2, [1, 2, 3])


def test_linsolve_identity_and_diagonal():
    i3 = RatMatrix.identity(3)
    assert linsolve(i3, (5, 6, 7)) == (rat(5), rat(6), rat(7))
    d = RatMatrix.from_rows([[2, 0], [0, 3]])
    assert linsolve(d, (1, 1)) == (rat(1, 2), rat(1, 3))


def test_linsolve_inconsistent():
    a = RatMatrix.from_rows([[1, 1], [1, 1]])
    assert linsolve(a, (1, 2)) is None


def test_linsolve_underdetermined_free_vars_zero():
    a = RatMatrix.from_rows([[1, 1, 0]])
    assert linsolve(a, (2,)) == (rat(2), R0, R0)


def test_rank_and_inverse():
    a = RatMatrix.from_rows([[1, 2], [2, 4]])
    assert rank(a) == 1
    b = RatMatrix.from_rows([[2, 1], [1, 1]])
    assert b.matmul(inverse(b)) == RatMatrix.identity(2)
    with pytest.raises(RatlinError):
        inverse(a)


# ---------------------------------------------------------------------------
# LP engine
# ---------------------------------------------------------------------------

def test_lp_single_bound():
    # maximize x subject to x <= 1/3, x >= 0
    p = LinearProgram(c=[1], a_ge=RatMatrix.from_rows([[-1]]), b_ge=[rat(-1, 3)])
    r = lp_solve(p)
    assert r.status == "Optimal"
    assert r.optimum == rat(1, 3)
    assert verify_optimal_dual(p, r)


def test_lp_infeasible_farkas():
    p = LinearProgram(c=[0], a_ge=RatMatrix.from_rows([[1], [-1]]), b_ge=[1, 0])
    r = lp_solve(p)
    assert r.status == "Infeasible"
    assert verify_farkas(p, r)


def test_lp_simplex_feasibility():
    p = LinearProgram(c=[0] * 4, a_eq=RatMatrix.from_rows([[1, 1, 1, 1]]), b_eq=[1])
    r = lp_solve(p)
    assert r.status == "Optimal"
    assert check_feasible(p, r.x)


def test_lp_unbounded():
    assert lp_solve(LinearProgram(c=[1])).status == "Unbounded"


def test_lp_dimension_mismatch_reports_block():
    with pytest.raises(RatlinError, match="equality block"):
        LinearProgram(c=[1, 2], a_eq=RatMatrix.from_rows([[1, 0]]), b_eq=[1, 2])
    with pytest.raises(RatlinError, match="inequality block"):
        LinearProgram(c=[1], a_ge=RatMatrix.from_rows([[1, 0]]), b_ge=[1])


def test_lp_deterministic():
    rng = random.Random(11)
    rows = [[rat(rng.randint(-3, 3)) for _ in range(5)] for _ in range(4)]
    p1 = LinearProgram(
        c=[1, 2, 3, 4, 5],
        a_ge=RatMatrix.from_rows(rows),
        b_ge=[rat(-2)] * 4,
        lower=[0, 0, 0, 0, 0],
    )
    p2 = LinearProgram(
        c=[1, 2, 3, 4, 5],
        a_ge=RatMatrix.from_rows([r[:] for r in rows]),
        b_ge=[rat(-2)] * 4,
        lower=[0, 0, 0, 0, 0],
    )
    r1, r2 = lp_solve(p1), lp_solve(p2)
    assert (r1.status, r1.optimum, r1.x, r1.dual) == (r2.status, r2.optimum, r2.x, r2.dual)


def _random_lp(rng):
    n = rng.randint(1, 6)
    me, mg = rng.randint(0, 3), rng.randint(0, 4)
    lower = [None if rng.random() < 0.3 else rat(rng.randint(-2, 2)) for _ in range(n)]
    def cell():
        return rat(rng.randint(-4, 4), rng.randint(1, 3))
    return LinearProgram(
        c=[cell() for _ in range(n)],
        a_eq=RatMatrix.from_rows([[cell() for _ in range(n)] for _ in range(me)]) if me else None,
        b_eq=[cell() for _ in range(me)],
        a_ge=RatMatrix.from_rows([[cell() for _ in range(n)] for _ in range(mg)]) if mg else None,
        b_ge=[cell() for _ in range(mg)],
        lower=lower,
    )


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=80, deadline=None)
def test_lp_certificates_random(seed):
    """Every answer is self-certifying: Optimal results satisfy all
    constraints exactly and carry a dual proof of optimality (strong duality
    holds with exact equality); Infeasible results carry a Farkas witness."""
    p = _random_lp(random.Random(seed))
    r = lp_solve(p)
    if r.status == "Optimal":
        assert check_feasible(p, r.x)
        assert dot(p.c, r.x) == r.optimum
        assert verify_optimal_dual(p, r)
    elif r.status == "Infeasible":
        assert verify_farkas(p, r)


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=40, deadline=None)
def test_cone_affine_feasible_random(seed):
    """The alternative-system solver agrees with itself either way: a point
    satisfying everything, or an exact combination proving emptiness."""
    rng = random.Random(seed)
    dim = rng.randint(2, 5)
    ni = rng.randint(1, 8)
    ne = rng.randint(1, 3)
    ineqs = [[rat(rng.randint(-2, 2)) for _ in range(dim)] for _ in range(ni)]
    eqs = [[rat(rng.randint(-2, 2)) for _ in range(dim)] for _ in range(ne)]
    while all(all(not x for x in row) for row in eqs):
        eqs[0][0] = R1
    rhs = [rat(rng.randint(-2, 2)) for _ in range(ne)]
    res = cone_affine_feasible(ineqs, eqs, rhs)
    if res.feasible:
        x = res.point
        assert all(dot(a, x) >= 0 for a in ineqs)
        assert all(dot(l, x) == t for l, t in zip(eqs, rhs))
    else:
        y, z = res.certificate
        assert all(v >= 0 for v in y)
        combo = [R0] * dim
        for w, a in zip(y, ineqs):
            combo = [c + w * ai for c, ai in zip(combo, a)]
        for w, l in zip(z, eqs):
            combo = [c + w * li for c, li in zip(combo, l)]
        assert all(not c for c in combo)
        assert dot(z, rhs) > 0
