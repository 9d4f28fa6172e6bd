"""Combinatorics and exact semistability for the toric family.

A problem is an integer matrix v (m rows, r columns, rank m) whose
columns generate the rays, a complete simplicial fan given by its
maximal cones as 1-based column-index subsets, and a level held as a
rational vector modulo the row space of v.

All decisions are exact: membership in the level cones K / K0, the
support-pattern stability test, and the fan validation all reduce to
rational linear programs or exact elimination.  Ray/column indices are
1-based everywhere on the public surface, matching the JSON format
{"max_cones": [[1], [2]]}.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd

from .errors import InputError, LimitError
from .linalg import CMatrix, kernel_basis, rank_exact
from .lp import LinearProgram

ZERO = Fraction(0)


# -- small exact helpers on Fraction matrices --------------------------


def _solve_square(a_rows, rhs):
    """Solve the square rational system A x = rhs; None if singular."""
    n = len(a_rows)
    aug = [[Fraction(v) for v in row] + [Fraction(rhs[i])] for i, row in enumerate(a_rows)]
    for col in range(n):
        piv = None
        for i in range(col, n):
            if aug[i][col] != 0:
                piv = i
                break
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    return tuple(row[-1] for row in aug)


def _int_rank(rows):
    if not rows or not rows[0]:
        return 0
    return rank_exact(CMatrix([[Fraction(v) for v in row] for row in rows]))


class ToricMatrix:
    """Integer matrix v of shape m x r with rank m, plus coker data.

    p_v projects a row vector a in Q_r onto a fixed basis of the
    cokernel of the adjoint map (the quotient of Q_r by the row space):
    the coordinates are a . B where the columns of B form the exact
    kernel basis of v, computed once by integer row reduction.
    """

    __slots__ = ("v", "m", "r", "coker")

    def __init__(self, v):
        rows = tuple(tuple(int(x) for x in row) for row in v)
        if not rows or not rows[0]:
            raise InputError("v must be a nonempty integer matrix")
        m = len(rows)
        r = len(rows[0])
        if any(len(row) != r for row in rows):
            raise InputError("ragged matrix")
        if _int_rank(rows) != m:
            raise InputError(f"v must have full row rank {m}")
        kern = kernel_basis(CMatrix([[Fraction(x) for x in row] for row in rows]))
        coker = tuple(tuple(x.re for x in vec) for vec in kern)  # (r-m) vectors of length r
        object.__setattr__(self, "v", rows)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "coker", coker)

    def __setattr__(self, name, value):
        raise AttributeError("ToricMatrix is immutable")

    def column(self, j):
        """1-based column j as a tuple of ints."""
        return tuple(self.v[i][j - 1] for i in range(self.m))

    def p_v(self, a):
        """Cokernel coordinates of a level representative a in Q_r."""
        a = [Fraction(x) for x in a]
        if len(a) != self.r:
            raise InputError(f"level representative must have length {self.r}")
        return tuple(sum(ai * bi for ai, bi in zip(a, vec)) for vec in self.coker)

    def to_json(self):
        return [list(row) for row in self.v]


@dataclass(frozen=True)
class ToricLevel:
    """A level: a representative rational vector, read modulo im(v^T)."""

    rep: tuple

    def __init__(self, rep):
        object.__setattr__(self, "rep", tuple(Fraction(x) for x in rep))

    def same_level(self, tm: ToricMatrix, other: "ToricLevel") -> bool:
        return tm.p_v(self.rep) == tm.p_v(other.rep)


@dataclass(frozen=True)
class SupportPattern:
    """The set of coordinates that are allowed to be nonzero (1-based)."""

    support: frozenset

    def __init__(self, support):
        object.__setattr__(self, "support", frozenset(int(j) for j in support))


class Fan:
    """A simplicial fan listed by its maximal cones (1-based ray indices)."""

    __slots__ = ("max_cones",)

    def __init__(self, max_cones):
        cones = tuple(frozenset(int(j) for j in cone) for cone in max_cones)
        object.__setattr__(self, "max_cones", cones)

    def __setattr__(self, name, value):
        raise AttributeError("Fan is immutable")

    def __eq__(self, other):
        if not isinstance(other, Fan):
            return NotImplemented
        return set(self.max_cones) == set(other.max_cones)

    def __hash__(self):
        return hash(frozenset(self.max_cones))

    def to_json(self):
        return {"max_cones": [sorted(c) for c in sorted(self.max_cones, key=sorted)]}

    @staticmethod
    def from_json(obj):
        try:
            return Fan(obj["max_cones"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad fan JSON: {exc}") from exc


def check_P1(tm: ToricMatrix):
    """Every column must be primitive (entry gcd 1).

    Returns (ok, offending_column) with a 1-based column index, or None.
    A zero column fails (it generates nothing).
    """
    for j in range(1, tm.r + 1):
        col = tm.column(j)
        g = 0
        for x in col:
            g = gcd(g, abs(x))
        if g != 1:
            return False, j
    return True, None


def check_P2(tm: ToricMatrix):
    """The row space of v must meet the nonnegative orthant only in 0.

    Decided by an exact LP: maximize sum(x) over x = y v, x >= 0,
    sum(x) <= 1.  Returns (ok, certificate) where the certificate is a
    nonzero nonnegative row-space vector when the check fails.
    """
    prog = LinearProgram()
    xs = prog.vars(tm.r)
    ys = [prog.free_var() for _ in range(tm.m)]
    for j in range(tm.r):
        coeffs = {xs[j]: 1}
        for i in range(tm.m):
            coeffs[ys[i]] = coeffs.get(ys[i], 0) - Fraction(tm.v[i][j])
        prog.add_eq(coeffs, 0)
    prog.add_le({x: 1 for x in xs}, 1)
    res = prog.optimize({x: 1 for x in xs}, maximize=True)
    assert res.status == "optimal"
    if res.value == 0:
        return True, None
    cert = tuple(res.x[x] for x in xs)
    return False, cert


def _sample_directions(m, count=1000):
    """Deterministic rational test directions covering all octants."""
    k = 1
    while (2 * k + 1) ** m - 1 < count:
        k += 1
    out = []
    def rec(prefix):
        if len(prefix) == m:
            if any(prefix):
                out.append(tuple(prefix))
            return
        for x in range(-k, k + 1):
            if len(out) >= count:
                return
            rec(prefix + [x])
    rec([])
    return out[:count]


def _cone_matrix(tm, cone):
    cols = sorted(cone)
    return [[Fraction(tm.v[i][j - 1]) for j in cols] for i in range(tm.m)], cols


def validate_fan(fan: Fan, tm: ToricMatrix):
    """Check simpliciality, the fan property, and completeness.

    simplicial: ray generators of every listed cone are independent.
    is_fan: listed cones are distinct, none contains another, and every
    pairwise intersection is the common face spanned by the shared rays
    (decided by exact LPs).
    complete: every ridge lies in exactly two maximal cones sitting on
    opposite sides, the dual graph is connected, and 1000 deterministic
    rational directions are all covered.  For m <= 2 the ridge criterion
    is exact; for m = 3 the sampling is an extra heuristic layer.
    """
    for cone in fan.max_cones:
        for j in cone:
            if not 1 <= j <= tm.r:
                raise InputError(f"ray index {j} outside 1..{tm.r}")

    simplicial = True
    for cone in fan.max_cones:
        mat, cols = _cone_matrix(tm, cone)
        cols_t = [[mat[i][j] for i in range(tm.m)] for j in range(len(cols))]
        if _int_rank(cols_t) != len(cone):
            simplicial = False

    is_fan = simplicial and len(set(fan.max_cones)) == len(fan.max_cones)
    if is_fan:
        for c1, c2 in combinations(fan.max_cones, 2):
            if c1 <= c2 or c2 <= c1:
                is_fan = False
                break
            if not _intersection_is_common_face(tm, c1, c2):
                is_fan = False
                break

    complete = bool(fan.max_cones) and is_fan and all(len(c) == tm.m for c in fan.max_cones)
    if complete:
        complete = _check_complete(fan, tm)
    return {"simplicial": simplicial, "is_fan": is_fan, "complete": complete}


def _intersection_is_common_face(tm, c1, c2):
    """cone(c1) ^ cone(c2) == cone(c1 ^ c2), by LP.

    For simplicial cones the subset cone is automatically a face of
    both, so it is enough to rule out intersection points that need a
    positive coefficient on a non-shared ray.
    """
    shared = c1 & c2
    only1 = sorted(c1 - shared)
    only2 = sorted(c2 - shared)
    l1 = sorted(c1)
    l2 = sorted(c2)
    for extra in list(only1) + list(only2):
        prog = LinearProgram()
        lam = {j: prog.var() for j in l1}
        mu = {j: prog.var() for j in l2}
        for i in range(tm.m):
            coeffs = {}
            for j in l1:
                coeffs[lam[j]] = Fraction(tm.v[i][j - 1])
            for j in l2:
                coeffs[mu[j]] = coeffs.get(mu[j], 0) - Fraction(tm.v[i][j - 1])
            prog.add_eq(coeffs, 0)
        prog.add_le({v: 1 for v in list(lam.values()) + list(mu.values())}, 1)
        target = lam[extra] if extra in c1 else mu[extra]
        res = prog.optimize({target: 1}, maximize=True)
        assert res.status == "optimal"
        if res.value > 0:
            return False
    return True


def _check_complete(fan, tm):
    cones = list(fan.max_cones)
    if tm.m == 1:
        if len(cones) != 2:
            return False
        signs = []
        for cone in cones:
            (j,) = tuple(cone)
            signs.append(1 if tm.v[0][j - 1] > 0 else -1)
        if set(signs) != {-1, 1}:
            return False
    else:
        # ridge pairing: each (m-1)-face in exactly two cones, opposite sides
        adjacency = {i: set() for i in range(len(cones))}
        for idx, cone in enumerate(cones):
            for drop in cone:
                ridge = cone - {drop}
                partners = [k for k, other in enumerate(cones) if k != idx and ridge <= other]
                if len(partners) != 1:
                    return False
                other = cones[partners[0]]
                normal = _ridge_normal(tm, ridge)
                if normal is None:
                    return False
                s1 = _dot_col(tm, normal, drop)
                (other_drop,) = tuple(other - ridge)
                s2 = _dot_col(tm, normal, other_drop)
                if s1 == 0 or s2 == 0 or (s1 > 0) == (s2 > 0):
                    return False
                adjacency[idx].add(partners[0])
        seen = {0}
        stack = [0]
        while stack:
            cur = stack.pop()
            for nxt in adjacency[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if len(seen) != len(cones):
            return False

    inverses = []
    for cone in cones:
        mat, _ = _cone_matrix(tm, cone)
        inv_cols = []
        for i in range(tm.m):
            e = [Fraction(1) if k == i else ZERO for k in range(tm.m)]
            col = _solve_square(mat, e)
            if col is None:
                return False
            inv_cols.append(col)
        # row i of the inverse, as a tuple, for fast mat-vec
        inverses.append([tuple(inv_cols[j][i] for j in range(tm.m)) for i in range(tm.m)])
    for direction in _sample_directions(tm.m):
        x = [Fraction(c) for c in direction]
        covered = False
        for inv in inverses:
            if all(sum(r * xv for r, xv in zip(row, x)) >= 0 for row in inv):
                covered = True
                break
        if not covered:
            return False
    return True


def _ridge_normal(tm, ridge):
    """A nonzero functional vanishing on the rays of the ridge."""
    rows = [[Fraction(x) for x in tm.column(j)] for j in sorted(ridge)]
    if not rows:
        rows = [[ZERO] * tm.m]
    kern = kernel_basis(CMatrix(rows))
    if len(kern) != 1:
        return None
    return tuple(x.re for x in kern[0])


def _dot_col(tm, vec, j):
    col = tm.column(j)
    return sum(v * Fraction(c) for v, c in zip(vec, col))


class FaceFunctional:
    """The unique functional on span(cone) with <f, v_j> = -a_j on its rays."""

    __slots__ = ("cone", "_ray_cols", "_ray_vals", "vector")

    def __init__(self, cone, ray_cols, ray_vals, vector=None):
        object.__setattr__(self, "cone", cone)
        object.__setattr__(self, "_ray_cols", ray_cols)
        object.__setattr__(self, "_ray_vals", ray_vals)
        object.__setattr__(self, "vector", vector)

    def __setattr__(self, name, value):
        raise AttributeError("FaceFunctional is immutable")

    def evaluate(self, x):
        """Value at a point of span(cone); InputError off the span."""
        x = [Fraction(v) for v in x]
        cols = self._ray_cols
        m = len(x)
        k = len(cols)
        aug = [[cols[j][i] for j in range(k)] + [x[i]] for i in range(m)]
        mat = CMatrix([[Fraction(v) for v in row[:-1]] for row in aug])
        rank_a = rank_exact(mat)
        rank_aug = rank_exact(CMatrix([[Fraction(v) for v in row] for row in aug]))
        if rank_aug != rank_a:
            raise InputError("point is outside the span of the cone")
        coeffs = _solve_least(aug, k)
        return sum(c * v for c, v in zip(coeffs, self._ray_vals))


def _solve_least(aug, k):
    """One exact solution of an overdetermined consistent system."""
    rows = [row[:] for row in aug]
    m = len(rows)
    pivots = []
    r = 0
    for c in range(k):
        piv = None
        for i in range(r, m):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    sol = [ZERO] * k
    for row_idx, c in enumerate(pivots):
        sol[c] = rows[row_idx][-1]
    return sol


def face_functional(cone, a, tm: ToricMatrix) -> FaceFunctional:
    """Construct f on span(cone) with <f, v_j> = -a_j for rays j of cone."""
    cone = frozenset(int(j) for j in cone)
    a = [Fraction(x) for x in a]
    if len(a) != tm.r:
        raise InputError(f"level representative must have length {tm.r}")
    cols = [tuple(Fraction(x) for x in tm.column(j)) for j in sorted(cone)]
    cols_rows = [[col[i] for i in range(tm.m)] for col in cols]
    if _int_rank(cols_rows) != len(cols):
        raise InputError("singular system: cone generators are dependent")
    vals = [-a[j - 1] for j in sorted(cone)]
    vector = None
    if len(cone) == tm.m:
        # full-dimensional: solve f^T V = -a_sigma for the global covector
        rows = [[cols[j][i] for j in range(len(cols))] for i in range(tm.m)]
        transposed = [[rows[i][j] for i in range(tm.m)] for j in range(len(cols))]
        vector = _solve_square(transposed, vals)
    return FaceFunctional(cone, cols, vals, vector)


def _pairing_rows(tm, fan):
    """For each full cone sigma and each j not in sigma, the row expressing
    <f_sigma^a, v_j> + a_j as a linear functional of the representative a."""
    out = []
    for cone in fan.max_cones:
        cols = sorted(cone)
        mat = [[Fraction(tm.v[i][j - 1]) for j in cols] for i in range(tm.m)]
        for j in range(1, tm.r + 1):
            if j in cone:
                continue
            w = _solve_square(mat, [Fraction(x) for x in tm.column(j)])
            if w is None:
                raise InputError("non-simplicial cone in membership test")
            # <f,v_j> = -sum_i a_{cols[i]} w_i ; condition <f,v_j> >= -a_j
            row = {j - 1: Fraction(1)}
            for i, cj in enumerate(cols):
                row[cj - 1] = row.get(cj - 1, ZERO) - w[i]
            out.append((cone, j, row))
    return out


def k_membership(fan: Fan, tm: ToricMatrix, a):
    """Membership of the level class p_v(a) in K(Sigma) and K0(Sigma).

    Both sets quantify over representatives a' = a + y v with a' >= 0;
    K needs <f_sigma^{a'}, v_j> >= -a'_j for all full cones and all j,
    K0 needs strictness whenever ray j is not a face of sigma.  Lower
    faces impose nothing new: their functionals are restrictions of the
    full-cone ones.  Decided by exact LP with a maximized slack for the
    strict system.
    """
    a = [Fraction(x) for x in a]
    if len(a) != tm.r:
        raise InputError(f"level representative must have length {tm.r}")
    if any(len(c) != tm.m for c in fan.max_cones):
        raise InputError("membership needs full-dimensional maximal cones")
    rows = _pairing_rows(tm, fan)

    def build(strict):
        prog = LinearProgram()
        ys = [prog.free_var() for _ in range(tm.m)]
        delta = prog.var() if strict else None

        def rep_coeffs(base_row):
            # a'_j = a_j + sum_i y_i v[i][j]; returns (coeffs dict, const)
            coeffs = {}
            const = ZERO
            for jj, cf in base_row.items():
                const += cf * a[jj]
                for i in range(tm.m):
                    coeffs[ys[i]] = coeffs.get(ys[i], ZERO) + cf * Fraction(tm.v[i][jj])
            return coeffs, const

        for j in range(tm.r):
            coeffs, const = rep_coeffs({j: Fraction(1)})
            prog.add_ge(coeffs, -const)
        for _, _, row in rows:
            coeffs, const = rep_coeffs(row)
            if strict:
                coeffs[delta] = coeffs.get(delta, ZERO) - 1
            prog.add_ge(coeffs, -const)
        if strict:
            prog.add_le({delta: 1}, 1)
        return prog, delta

    prog, _ = build(strict=False)
    in_k = prog.feasible() is not None
    in_k0 = False
    if in_k:
        prog, delta = build(strict=True)
        res = prog.optimize({delta: 1}, maximize=True)
        in_k0 = res.status == "optimal" and res.value > 0
    return {"in_K": in_k, "in_K0": in_k0}


def u_membership(pattern: SupportPattern, fan: Fan, r: int) -> bool:
    """Whether the vanishing pattern lies in the fan's admissible set.

    True iff some cone of the fan demands nonzero coordinates only
    inside the support, i.e. {j : ray j not a face of the cone} is
    contained in it.  A face of a maximal cone only demands more
    coordinates, so scanning the maximal cones is exhaustive.  r is the
    total number of coordinates (rays may be unused by the fan).
    """
    supp = pattern.support
    for cone in fan.max_cones:
        needed = set(range(1, r + 1)) - cone
        if needed <= supp:
            return True
    return False


def semistable_lp(pattern: SupportPattern, tm: ToricMatrix, a):
    """Exact stability of a support pattern at level p_v(a).

    semistable: some b >= 0 supported inside the pattern has p_v(b) =
    p_v(a).  stable: additionally some representative is strictly
    positive on the whole support (decided by a maximized slack) and the
    complexified stabilizer of the pattern is trivial, i.e. the columns
    of v outside the support are linearly independent.
    """
    supp = sorted(j for j in pattern.support if 1 <= j <= tm.r)
    if len(supp) != len(pattern.support):
        raise InputError("support indices outside 1..r")
    target = tm.p_v(a)

    def build(strict):
        prog = LinearProgram()
        bs = {j: prog.var() for j in supp}
        delta = prog.var() if strict else None
        for k, vec in enumerate(tm.coker):
            coeffs = {bs[j]: vec[j - 1] for j in supp}
            prog.add_eq(coeffs, target[k])
        if strict:
            for j in supp:
                prog.add_ge({bs[j]: 1, delta: -1}, 0)
            prog.add_le({delta: 1}, 1)
        return prog, delta

    prog, _ = build(strict=False)
    semistable = prog.feasible() is not None

    stable = False
    if semistable:
        off = [j for j in range(1, tm.r + 1) if j not in pattern.support]
        cols = [[Fraction(x) for x in tm.column(j)] for j in off]
        free_stabilizer = _int_rank(cols) == len(off)
        if free_stabilizer:
            if supp:
                prog, delta = build(strict=True)
                res = prog.optimize({delta: 1}, maximize=True)
                stable = res.status == "optimal" and res.value > 0
            else:
                stable = all(t == 0 for t in target)
    return {"semistable": semistable, "stable": stable}


def quotient_nonempty(tm: ToricMatrix, a) -> bool:
    """Feasibility of b >= 0 with p_v(b) = p_v(a)."""
    full = SupportPattern(range(1, tm.r + 1))
    return semistable_lp(full, tm, a)["semistable"]


def chamber_fan_search(tm: ToricMatrix, a):
    """Find a complete simplicial fan whose K0 cone contains the level.

    The candidate maximal cones are exactly the independent m-subsets
    sigma whose complementary support pattern is semistable at the
    level; for a level inside some K0 this set IS the fan, so a single
    validation decides the search.  Returns the Fan or None.
    """
    if tm.r > 12 or tm.m > 3:
        raise LimitError("chamber search limited to r <= 12, m <= 3")
    candidates = []
    for subset in combinations(range(1, tm.r + 1), tm.m):
        cols = [[Fraction(x) for x in tm.column(j)] for j in subset]
        if _int_rank(cols) != tm.m:
            continue
        pattern = SupportPattern(set(range(1, tm.r + 1)) - set(subset))
        if semistable_lp(pattern, tm, a)["semistable"]:
            candidates.append(frozenset(subset))
    if not candidates:
        return None
    fan = Fan(candidates)
    flags = validate_fan(fan, tm)
    if not all(flags.values()):
        return None
    if not k_membership(fan, tm, a)["in_K0"]:
        return None
    return fan
