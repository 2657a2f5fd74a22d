"""Exact rational scalars, dense matrices, linear solving, and a rational simplex LP.

Everything in this package runs on a single scalar type: arbitrary-precision
rationals, kept in lowest terms with a positive denominator.  gmpy2's ``mpq``
is used when available (it is an order of magnitude faster than
``fractions.Fraction``); the stdlib Fraction is a drop-in fallback.  All
results are exact: an Optimal LP solution satisfies every constraint with zero
residual, and an Infeasible verdict carries a Farkas certificate that can be
checked by pure rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

try:
    from gmpy2 import mpq as _mpq

    _RAT_TYPES = None
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    from fractions import Fraction as _mpq

    _RAT_TYPES = None

Rational = type(_mpq(0))

R0 = _mpq(0)
R1 = _mpq(1)


class RatlinError(ValueError):
    """Base error for this module (dimension mismatches, bad input)."""


def rat(num, den=None) -> Rational:
    """Build a rational from ints, strings like ``-2/5``, or other rationals.

    Floats are rejected: they would silently smuggle binary rounding into a
    codebase whose whole point is exactness.
    """
    if isinstance(num, float) or isinstance(den, float):
        raise RatlinError("floats are not allowed; pass ints, strings or rationals")
    if den is None:
        return _mpq(num)
    return _mpq(num) / _mpq(den)


def rat_str(x) -> str:
    """Serialize a rational as ``num/den``, or just ``num`` for integers."""
    x = _mpq(x)
    return str(x)


def as_vec(xs) -> tuple:
    return tuple(rat(x) for x in xs)


def dot(u: Sequence, v: Sequence) -> Rational:
    if len(u) != len(v):
        raise RatlinError(f"dot: length mismatch {len(u)} vs {len(v)}")
    s = R0
    for a, b in zip(u, v):
        if a and b:
            s += a * b
    return s


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, u):
    c = rat(c)
    return tuple(c * a for a in u)


def is_zero_vec(u) -> bool:
    return all(not a for a in u)


class RatMatrix:
    """Dense matrix of rationals, row-major."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, entries=None):
        self.rows = rows
        self.cols = cols
        if entries is None:
            self.data = [[R0] * cols for _ in range(rows)]
        else:
            entries = [rat(e) for e in entries]
            if len(entries) != rows * cols:
                raise RatlinError(
                    f"matrix {rows}x{cols} needs {rows * cols} entries, got {len(entries)}"
                )
            self.data = [entries[i * cols : (i + 1) * cols] for i in range(rows)]

    @classmethod
    def from_rows(cls, rows) -> "RatMatrix":
        rows = [list(map(rat, r)) for r in rows]
        if not rows:
            raise RatlinError("from_rows: need at least one row")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise RatlinError("from_rows: ragged rows")
        m = cls(len(rows), n)
        m.data = rows
        return m

    @classmethod
    def from_cols(cls, cols) -> "RatMatrix":
        return cls.from_rows(cols).transpose()

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        m = cls(n, n)
        for i in range(n):
            m.data[i][i] = R1
        return m

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def __setitem__(self, ij, val):
        i, j = ij
        self.data[i][j] = rat(val)

    def row(self, i) -> tuple:
        return tuple(self.data[i])

    def col(self, j) -> tuple:
        return tuple(r[j] for r in self.data)

    def entries(self) -> tuple:
        return tuple(x for r in self.data for x in r)

    def copy(self) -> "RatMatrix":
        m = RatMatrix(self.rows, self.cols)
        m.data = [r[:] for r in self.data]
        return m

    def transpose(self) -> "RatMatrix":
        m = RatMatrix(self.cols, self.rows)
        m.data = [list(c) for c in zip(*self.data)]
        return m

    def matvec(self, v: Sequence) -> tuple:
        if len(v) != self.cols:
            raise RatlinError(f"matvec: {self.rows}x{self.cols} vs vector of {len(v)}")
        return tuple(dot(r, v) for r in self.data)

    def rmatvec(self, v: Sequence) -> tuple:
        """v^T A, i.e. the adjoint applied to a functional."""
        if len(v) != self.rows:
            raise RatlinError(f"rmatvec: {self.rows}x{self.cols} vs vector of {len(v)}")
        out = [R0] * self.cols
        for vi, row in zip(v, self.data):
            if vi:
                for j, a in enumerate(row):
                    if a:
                        out[j] += vi * a
        return tuple(out)

    def matmul(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise RatlinError(
                f"matmul: {self.rows}x{self.cols} times {other.rows}x{other.cols}"
            )
        ot = other.transpose()
        out = RatMatrix(self.rows, other.cols)
        out.data = [[dot(r, c) for c in ot.data] for r in self.data]
        return out

    def __mul__(self, other):
        if isinstance(other, RatMatrix):
            return self.matmul(other)
        return NotImplemented

    def __eq__(self, other):
        return (
            isinstance(other, RatMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __repr__(self):
        body = "; ".join(" ".join(rat_str(x) for x in r) for r in self.data)
        return f"RatMatrix({self.rows}x{self.cols}: {body})"


def kron(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    out = RatMatrix(a.rows * b.rows, a.cols * b.cols)
    for i in range(a.rows):
        for j in range(a.cols):
            aij = a.data[i][j]
            if not aij:
                continue
            for p in range(b.rows):
                brow = b.data[p]
                orow = out.data[i * b.rows + p]
                off = j * b.cols
                for q in range(b.cols):
                    if brow[q]:
                        orow[off + q] = aij * brow[q]
    return out


def kron_vec(u: Sequence, v: Sequence) -> tuple:
    return tuple(a * b for a in u for b in v)


def _eliminate(rows, ncols):
    """Row-reduce in place; returns list of (pivot_row, pivot_col)."""
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                pr = i
                break
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        pv = rows[r][c]
        if pv != R1:
            inv = R1 / pv
            rows[r] = [x * inv for x in rows[r]]
        prow = rows[r]
        nz = [(j, prow[j]) for j in range(c, len(prow)) if prow[j]]
        for i in range(len(rows)):
            if i == r:
                continue
            f = rows[i][c]
            if f:
                ri = rows[i]
                for j, pvj in nz:
                    ri[j] -= f * pvj
        pivots.append((r, c))
        r += 1
        if r == len(rows):
            break
    return pivots


def linsolve(a: RatMatrix, b: Sequence) -> Optional[tuple]:
    """Exact solution of ``a x = b``; None if inconsistent.

    Underdetermined systems return the solution with all free variables set
    to zero, under the natural left-to-right column order, so results are
    reproducible.
    """
    if a.rows != len(b):
        raise RatlinError(f"linsolve: {a.rows} rows vs rhs of length {len(b)}")
    aug = [row[:] + [rat(x)] for row, x in zip(a.data, b)]
    pivots = _eliminate(aug, a.cols)
    for i in range(len(pivots), a.rows):
        if aug[i][a.cols]:
            return None
    x = [R0] * a.cols
    for r, c in pivots:
        x[c] = aug[r][a.cols]
    return tuple(x)


def rank(a: RatMatrix) -> int:
    rows = [r[:] for r in a.data]
    return len(_eliminate(rows, a.cols))


def rref_basis(vectors: Sequence[Sequence]) -> list:
    """A deterministic basis (as reduced rows) of the span of the given vectors."""
    if not vectors:
        return []
    rows = [list(map(rat, v)) for v in vectors]
    n = len(rows[0])
    pivots = _eliminate(rows, n)
    return [tuple(rows[r]) for r, _ in pivots]


def inverse(a: RatMatrix) -> RatMatrix:
    if a.rows != a.cols:
        raise RatlinError("inverse: matrix not square")
    n = a.rows
    aug = [row[:] + [R1 if i == j else R0 for j in range(n)] for i, row in enumerate(a.data)]
    pivots = _eliminate(aug, n)
    if len(pivots) < n:
        raise RatlinError("inverse: matrix is singular")
    inv = RatMatrix(n, n)
    for r, c in pivots:
        inv.data[c] = aug[r][n:]
    return inv


# ---------------------------------------------------------------------------
# Linear programming
# ---------------------------------------------------------------------------

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"


@dataclass
class LinearProgram:
    """maximize c.x  s.t.  a_eq x = b_eq,  a_ge x >= b_ge,  x_j >= lower[j].

    ``lower[j] is None`` means x_j is free.  ``lower`` defaults to all-zero
    (the common case in this package).
    """

    c: Sequence
    a_eq: Optional[RatMatrix] = None
    b_eq: Sequence = ()
    a_ge: Optional[RatMatrix] = None
    b_ge: Sequence = ()
    lower: Optional[Sequence] = None

    def __post_init__(self):
        self.c = as_vec(self.c)
        n = len(self.c)
        if self.a_eq is None:
            self.a_eq = RatMatrix(0, n)
        self.b_eq = as_vec(self.b_eq)
        if self.a_eq.rows != len(self.b_eq):
            raise RatlinError(
                f"equality block: {self.a_eq.rows} rows but rhs of length {len(self.b_eq)}"
            )
        if self.a_eq.cols != n:
            raise RatlinError(
                f"equality block: {self.a_eq.cols} columns but {n} objective coefficients"
            )
        if self.a_ge is None:
            self.a_ge = RatMatrix(0, n)
        self.b_ge = as_vec(self.b_ge)
        if self.a_ge.rows != len(self.b_ge):
            raise RatlinError(
                f"inequality block: {self.a_ge.rows} rows but rhs of length {len(self.b_ge)}"
            )
        if self.a_ge.cols != n:
            raise RatlinError(
                f"inequality block: {self.a_ge.cols} columns but {n} objective coefficients"
            )
        if self.lower is None:
            self.lower = tuple(R0 for _ in range(n))
        else:
            self.lower = tuple(None if l is None else rat(l) for l in self.lower)
            if len(self.lower) != n:
                raise RatlinError("lower bounds: wrong length")

    @property
    def nvars(self) -> int:
        return len(self.c)


@dataclass
class LPResult:
    status: str
    optimum: Optional[Rational] = None
    x: Optional[tuple] = None
    # Dual data, as a pair (u, v) of multiplier vectors for the equality and
    # inequality blocks.  For Optimal results (u, v) witnesses optimality:
    #   v >= 0,  w := c - a_eq^T u + a_ge^T v  has w_j = 0 on free variables
    #   and w_j <= 0 on bounded ones, and
    #   optimum == u.b_eq - v.b_ge + sum_j w_j * lower_j.
    # For Infeasible results (u, v) is a Farkas certificate:
    #   v >= 0,  s := a_eq^T u + a_ge^T v  has s_j = 0 on free variables and
    #   s_j <= 0 on bounded ones, and  u.b_eq + v.b_ge - sum_j s_j*lower_j > 0.
    dual: Optional[tuple] = None


def verify_optimal_dual(p: LinearProgram, res: LPResult) -> bool:
    u, v = res.dual
    if any(vi < 0 for vi in v):
        return False
    w = list(p.c)
    for ui, row in zip(u, p.a_eq.data):
        for j, a in enumerate(row):
            if a:
                w[j] -= ui * a
    for vi, row in zip(v, p.a_ge.data):
        for j, a in enumerate(row):
            if a:
                w[j] += vi * a
    obj = dot(u, p.b_eq) - dot(v, p.b_ge)
    for j, l in enumerate(p.lower):
        if l is None:
            if w[j]:
                return False
        else:
            if w[j] > 0:
                return False
            obj += w[j] * l
    return obj == res.optimum


def verify_farkas(p: LinearProgram, res: LPResult) -> bool:
    u, v = res.dual
    if any(vi < 0 for vi in v):
        return False
    s = [R0] * p.nvars
    for ui, row in zip(u, p.a_eq.data):
        for j, a in enumerate(row):
            if a:
                s[j] += ui * a
    for vi, row in zip(v, p.a_ge.data):
        for j, a in enumerate(row):
            if a:
                s[j] += vi * a
    gap = dot(u, p.b_eq) + dot(v, p.b_ge)
    for j, l in enumerate(p.lower):
        if l is None:
            if s[j]:
                return False
        else:
            if s[j] > 0:
                return False
            gap -= s[j] * l
    return gap > 0


def check_feasible(p: LinearProgram, x: Sequence) -> bool:
    """Exact feasibility check of a point against every constraint block."""
    x = as_vec(x)
    if len(x) != p.nvars:
        return False
    for row, b in zip(p.a_eq.data, p.b_eq):
        if dot(row, x) != b:
            return False
    for row, b in zip(p.a_ge.data, p.b_ge):
        if dot(row, x) < b:
            return False
    for xi, l in zip(x, p.lower):
        if l is not None and xi < l:
            return False
    return True


_DANTZIG_LIMIT_FACTOR = 4


class _Tableau:
    """Dense simplex tableau for  min cost.z  s.t.  rows.z = rhs, z >= 0."""

    def __init__(self, rows, rhs, ncols):
        self.m = len(rows)
        self.ncols = ncols
        self.t = [rows[i] + [rhs[i]] for i in range(self.m)]
        self.obj = [R0] * (ncols + 1)
        self.basis = [-1] * self.m
        self.blocked = set()  # columns that may never enter (artificials)

    def price_out(self, costs):
        """Set objective row for given costs and current basis."""
        self.obj = list(costs) + [R0]
        for i, bv in enumerate(self.basis):
            cb = costs[bv]
            if cb:
                row = self.t[i]
                o = self.obj
                for j, rv in enumerate(row):
                    if rv:
                        o[j] -= cb * rv
        # obj[-1] now holds -(objective value)

    def pivot(self, r, c):
        t = self.t
        prow = t[r]
        pv = prow[c]
        if pv != R1:
            inv = R1 / pv
            t[r] = prow = [x * inv if x else x for x in prow]
        nz = [(j, prow[j]) for j in range(self.ncols + 1) if prow[j]]
        for i in range(self.m):
            if i == r:
                continue
            row = t[i]
            f = row[c]
            if f:
                for j, pvj in nz:
                    row[j] -= f * pvj
        o = self.obj
        f = o[c]
        if f:
            for j, pvj in nz:
                o[j] -= f * pvj
        self.basis[r] = c

    def entering(self, iteration, dantzig_limit):
        o = self.obj
        if iteration < dantzig_limit:
            best = None
            best_val = R0
            for j in range(self.ncols):
                if j in self.blocked:
                    continue
                v = o[j]
                if v < best_val:
                    best_val = v
                    best = j
            return best
        for j in range(self.ncols):
            if o[j] < 0 and j not in self.blocked:
                return j
        return None

    def leaving(self, c):
        t = self.t
        best_ratio = None
        best_row = None
        for i in range(self.m):
            a = t[i][c]
            if a > 0:
                ratio = t[i][-1] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and self.basis[i] < self.basis[best_row])
                ):
                    best_ratio = ratio
                    best_row = i
        return best_row

    def run(self, stop_at_zero=False):
        dantzig_limit = _DANTZIG_LIMIT_FACTOR * (self.m + self.ncols)
        iteration = 0
        while True:
            # Phase 1 minimizes a sum of artificials, which is bounded below
            # by 0; once the objective reaches 0 the basis is feasible and
            # further (degenerate) pivoting is wasted work.
            if stop_at_zero and not self.obj[-1]:
                return OPTIMAL
            c = self.entering(iteration, dantzig_limit)
            if c is None:
                return OPTIMAL
            r = self.leaving(c)
            if r is None:
                return UNBOUNDED
            self.pivot(r, c)
            iteration += 1


def lp_solve(p: LinearProgram) -> LPResult:
    """Exact two-phase simplex.

    Pivoting uses Dantzig's rule with lowest-index tie-breaking for an initial
    bounded number of iterations and then switches permanently to Bland's rule,
    which guarantees termination; all choices are index-based, so the solver is
    deterministic: identical inputs give identical outputs.
    """
    n = p.nvars
    n_eq, n_ge = p.a_eq.rows, p.a_ge.rows
    m = n_eq + n_ge

    # Column layout: variable columns (1 per bounded var, 2 per free var),
    # then one surplus column per >= row, then artificials.
    var_cols = []  # (kind, var index) with kind '+' or '-'
    for j, l in enumerate(p.lower):
        var_cols.append(("+", j))
        if l is None:
            var_cols.append(("-", j))
    nv = len(var_cols)

    # Shifted rhs: substitute x_j = z_j + lower_j.
    shift = [l if l is not None else R0 for l in p.lower]

    def build_row(arow):
        row = [R0] * nv
        for k, (kind, j) in enumerate(var_cols):
            a = arow[j]
            if a:
                row[k] = a if kind == "+" else -a
        return row

    rows = []
    rhs = []
    for arow, b in zip(p.a_eq.data, p.b_eq):
        rows.append(build_row(arow))
        rhs.append(b - dot(arow, shift))
    for arow, b in zip(p.a_ge.data, p.b_ge):
        rows.append(build_row(arow))
        rhs.append(b - dot(arow, shift))

    # Surplus columns for >= rows.
    ns = n_ge
    for i in range(m):
        rows[i].extend([R0] * ns)
    for i in range(n_ge):
        rows[n_eq + i][nv + i] = -R1

    # Flip rows to make rhs >= 0.
    flip = [R1] * m
    for i in range(m):
        if rhs[i] < 0:
            flip[i] = -R1
            rows[i] = [-x for x in rows[i]]
            rhs[i] = -rhs[i]

    # Initial basis: a surplus column where it has +1 (flipped >= rows),
    # otherwise an artificial column.
    art_col = {}  # row -> column index
    ref_col = {}  # row -> (column index, kind) for dual recovery
    ncols = nv + ns
    basis0 = [-1] * m
    for i in range(n_ge):
        r = n_eq + i
        if flip[r] == -R1:
            basis0[r] = nv + i
            ref_col[r] = (nv + i, "surplus")
    extra = []
    for i in range(m):
        if basis0[i] == -1:
            art_col[i] = ncols + len(extra)
            extra.append(i)
    ncols_total = ncols + len(extra)
    for i in range(m):
        rows[i].extend([R0] * len(extra))
    for i, r in enumerate(extra):
        rows[r][ncols + i] = R1
        basis0[r] = ncols + i
    for r in range(m):
        if r in art_col:
            ref_col[r] = (art_col[r], "artificial")
        elif r not in ref_col:
            ref_col[r] = (nv + (r - n_eq), "surplus")

    tab = _Tableau(rows, rhs, ncols_total)
    tab.basis = basis0[:]

    def recover_dual(costs):
        """Row multipliers y (internal) from reduced costs of reference columns."""
        y = []
        for r in range(m):
            col, kind = ref_col[r]
            cred = tab.obj[col]
            c0 = costs[col]
            if kind == "artificial":
                y.append(c0 - cred)
            else:  # surplus column equals -flip[r]*e_r
                y.append(flip[r] * (cred - c0))
        # user-space multipliers
        return tuple(flip[r] * y[r] for r in range(m))

    # Phase 1
    if extra:
        costs1 = [R0] * ncols_total
        for i in art_col.values():
            costs1[i] = R1
        tab.price_out(costs1)
        status = tab.run(stop_at_zero=True)
        assert status == OPTIMAL  # phase-1 objective is bounded below by 0
        if tab.obj[-1] != 0:  # -(min sum of artificials) != 0 -> infeasible
            y = recover_dual(costs1)
            u = tuple(y[:n_eq])
            v = tuple(y[n_eq:])
            return LPResult(status=INFEASIBLE, dual=(u, v))
        # Drive artificials out of the basis; drop rows that are redundant.
        art_set = set(art_col.values())
        tab.blocked = art_set
        drop_rows = []
        for r in range(m):
            bv = tab.basis[r]
            if bv in art_set:
                pc = None
                for j in range(ncols):
                    if tab.t[r][j]:
                        pc = j
                        break
                if pc is None:
                    drop_rows.append(r)
                else:
                    tab.pivot(r, pc)
        if drop_rows:
            keep = [r for r in range(m) if r not in set(drop_rows)]
            tab.t = [tab.t[r] for r in keep]
            tab.basis = [tab.basis[r] for r in keep]
            tab.m = len(keep)
            kept_rows = keep
        else:
            kept_rows = list(range(m))
    else:
        kept_rows = list(range(m))
        tab.blocked = set()

    # Phase 2: minimize -c over the feasible region.
    costs2 = [R0] * ncols_total
    for k, (kind, j) in enumerate(var_cols):
        costs2[k] = -p.c[j] if kind == "+" else p.c[j]
    tab.price_out(costs2)
    status = tab.run()
    if status == UNBOUNDED:
        return LPResult(status=UNBOUNDED)

    z = [R0] * ncols_total
    for r, bv in enumerate(tab.basis):
        z[bv] = tab.t[r][-1]
    x = list(shift)
    for k, (kind, j) in enumerate(var_cols):
        if kind == "+":
            x[j] += z[k]
        else:
            x[j] -= z[k]
    x = tuple(x)
    optimum = dot(p.c, x)

    # Dual recovery must account for dropped redundant rows: their multiplier
    # is zero.
    y_kept = {}
    for idx, r in enumerate(kept_rows):
        col, kind = ref_col[r]
        cred = tab.obj[col]
        c0 = costs2[col]
        if kind == "artificial":
            y_int = c0 - cred
        else:
            y_int = flip[r] * (cred - c0)
        y_kept[r] = flip[r] * y_int
    y = [y_kept.get(r, R0) for r in range(m)]
    u = tuple(-yi for yi in y[:n_eq])
    v = tuple(y[n_eq:])
    return LPResult(status=OPTIMAL, optimum=optimum, x=x, dual=(u, v))


def lp_feasible(
    a_eq: Optional[RatMatrix],
    b_eq: Sequence,
    a_ge: Optional[RatMatrix],
    b_ge: Sequence,
    nvars: int,
    lower: Optional[Sequence] = None,
) -> LPResult:
    """Feasibility check: solve with a zero objective."""
    p = LinearProgram(
        c=[R0] * nvars, a_eq=a_eq, b_eq=b_eq, a_ge=a_ge, b_ge=b_ge, lower=lower
    )
    return lp_solve(p)


@dataclass
class SectionResult:
    """Outcome of a cone/affine-section feasibility problem.

    ``point`` solves {ineqs.x >= 0, eq_rows.x = rhs} when feasible.  When
    infeasible, ``certificate`` is a pair (y, z), y >= 0, proving emptiness:
    sum_i y_i ineq_i + sum_r z_r eq_row_r = 0 while z.rhs > 0, so any point of
    the section would give 0 = (>=0) + z.rhs > 0.
    """

    feasible: bool
    point: Optional[tuple] = None
    certificate: Optional[tuple] = None


def cone_affine_feasible(ineqs: Sequence[Sequence], eq_rows: Sequence[Sequence], eq_rhs: Sequence) -> SectionResult:
    """Decide {x : <a_i, x> >= 0 for all i,  <l_r, x> = t_r for all r}.

    Solved through the Farkas alternative system, where the (typically very
    many, all-zero right-hand side) cone inequalities become columns instead
    of rows.  This sidesteps the heavy degeneracy such sections cause in a
    primal simplex.  Both answers carry exact certificates: the dual
    multipliers of the alternative LP reconstruct a feasible point, which is
    re-verified against every constraint before being returned.
    """
    ineqs = [as_vec(a) for a in ineqs]
    eq_rows = [as_vec(l) for l in eq_rows]
    eq_rhs = as_vec(eq_rhs)
    if len(eq_rows) != len(eq_rhs):
        raise RatlinError("cone_affine_feasible: eq_rows vs rhs length mismatch")
    if not eq_rows:
        raise RatlinError("cone_affine_feasible: need at least one equality")
    dim = len(eq_rows[0])
    if any(len(a) != dim for a in ineqs) or any(len(l) != dim for l in eq_rows):
        raise RatlinError("cone_affine_feasible: inconsistent dimensions")

    ny, nz = len(ineqs), len(eq_rows)
    # Alternative LP: maximize t.z  s.t.  sum_j y_j a_j + sum_r z_r l_r = 0,
    # t.z <= 1, y >= 0, z free.  Optimum 0 <=> the section is nonempty.
    eq_data = []
    for p in range(dim):
        row = [ineqs[j][p] for j in range(ny)] + [eq_rows[r][p] for r in range(nz)]
        eq_data.append(row)
    a_eq = RatMatrix.from_rows(eq_data) if eq_data else None
    ge_row = [R0] * ny + [-t for t in eq_rhs]
    prob = LinearProgram(
        c=[R0] * ny + list(eq_rhs),
        a_eq=a_eq,
        b_eq=[R0] * dim,
        a_ge=RatMatrix.from_rows([ge_row]),
        b_ge=[-R1],
        lower=[R0] * ny + [None] * nz,
    )
    res = lp_solve(prob)
    assert res.status == OPTIMAL  # always feasible at 0 and bounded by 1
    if res.optimum == 0:
        u, _ = res.dual
        x = tuple(u)
        for a in ineqs:
            if dot(a, x) < 0:
                raise RatlinError("internal: reconstructed point violates a cone row")
        for l, t in zip(eq_rows, eq_rhs):
            if dot(l, x) != t:
                raise RatlinError("internal: reconstructed point misses an equality")
        return SectionResult(feasible=True, point=x)
    y = res.x[:ny]
    z = res.x[ny:]
    return SectionResult(feasible=False, certificate=(tuple(y), tuple(z)))
