"""Exact rational linear programming.

Two-phase primal simplex with Bland's rule over Fractions.  Every optimal
answer carries a dual vector, and ``solve`` re-checks strong duality on it
before returning, so a wrong optimum cannot leak out silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from offnash.core import to_rational

LE, EQ, GE = "<=", "==", ">="
_RELATIONS = (LE, EQ, GE)
_FLIP = {LE: GE, GE: LE, EQ: EQ}


class LpError(ValueError):
    """Malformed linear program."""


class CertificateError(AssertionError):
    """The solver produced an optimum its own dual certificate rejects."""


@dataclass(frozen=True)
class Constraint:
    row: tuple[Fraction, ...]
    relation: str
    rhs: Fraction

    def __post_init__(self) -> None:
        if self.relation not in _RELATIONS:
            raise LpError(f"unknown relation {self.relation!r}")
        object.__setattr__(self, "row", tuple(to_rational(a) for a in self.row))
        object.__setattr__(self, "rhs", to_rational(self.rhs))

    def lhs(self, x: Sequence[Fraction]) -> Fraction:
        return sum((a * v for a, v in zip(self.row, x) if a), Fraction(0))

    def holds(self, x: Sequence[Fraction]) -> bool:
        value = self.lhs(x)
        if self.relation == LE:
            return value <= self.rhs
        if self.relation == GE:
            return value >= self.rhs
        return value == self.rhs


@dataclass(frozen=True)
class LinearProgram:
    """Maximize ``objective . x`` subject to ``constraints``.

    ``nonneg[k]`` marks ``x_k >= 0``; unmarked variables are free.
    """

    objective: tuple[Fraction, ...]
    constraints: tuple[Constraint, ...]
    nonneg: tuple[bool, ...] = ()

    def __post_init__(self) -> None:
        objective = tuple(to_rational(c) for c in self.objective)
        n = len(objective)
        if n == 0:
            raise LpError("a linear program needs at least one variable")
        nonneg = tuple(self.nonneg) if self.nonneg else (True,) * n
        if len(nonneg) != n:
            raise LpError("nonneg flags do not match the variable count")
        cons = tuple(
            c if isinstance(c, Constraint) else Constraint(*c) for c in self.constraints
        )
        for c in cons:
            if len(c.row) != n:
                raise LpError("constraint row length does not match the variable count")
        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "nonneg", nonneg)
        object.__setattr__(self, "constraints", cons)

    @property
    def size(self) -> int:
        return len(self.objective)

    def feasible(self, x: Sequence[Fraction]) -> bool:
        if any(flag and v < 0 for flag, v in zip(self.nonneg, x)):
            return False
        return all(c.holds(x) for c in self.constraints)

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, x) if c), Fraction(0))


@dataclass(frozen=True)
class Optimal:
    value: Fraction
    point: tuple[Fraction, ...]
    dual: tuple[Fraction, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class Infeasible:
    pass


@dataclass(frozen=True)
class Unbounded:
    pass


LpOutcome = Union[Optimal, Infeasible, Unbounded]


def _pivot(tab: list[list[Fraction]], basis: list[int], r: int, c: int) -> None:
    row = tab[r]
    inv = 1 / row[c]
    tab[r] = row = [v * inv for v in row]
    for k, other in enumerate(tab):
        if k != r and other[c]:
            f = other[c]
            tab[k] = [a - f * b for a, b in zip(other, row)]
    basis[r] = c


def _run_simplex(
    tab: list[list[Fraction]], basis: list[int], cost: list[Fraction], allowed: int
) -> bool:
    """Maximize ``cost`` over the tableau using columns ``< allowed``.

    Returns False on unboundedness.  Bland's rule: the lowest-index improving
    column enters, the lowest-index basic variable leaves among ratio ties.
    """
    while True:
        enter = -1
        for j in range(allowed):
            reduced = cost[j] - sum(
                (cost[basis[i]] * tab[i][j] for i in range(len(tab)) if tab[i][j]),
                Fraction(0),
            )
            if reduced > 0:
                enter = j
                break
        if enter < 0:
            return True
        leave = -1
        best: Fraction | None = None
        for i, row in enumerate(tab):
            if row[enter] > 0:
                ratio = row[-1] / row[enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave < 0:
            return False
        _pivot(tab, basis, leave, enter)


def _solve_square(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gauss-Jordan on a nonsingular square system."""
    n = len(matrix)
    aug = [list(matrix[i]) + [rhs[i]] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


def solve(lp: LinearProgram) -> LpOutcome:
    n = lp.size
    # Column layout: split variables, then slacks, then artificials.
    var_cols: list[tuple[int, int]] = []  # (original variable, sign)
    for k in range(n):
        var_cols.append((k, 1))
        if not lp.nonneg[k]:
            var_cols.append((k, -1))
    n_struct = len(var_cols)

    signs: list[int] = []
    rows: list[list[Fraction]] = []
    rels: list[str] = []
    rhs: list[Fraction] = []
    for c in lp.constraints:
        s = -1 if c.rhs < 0 else 1
        signs.append(s)
        rows.append([s * c.row[k] * sign for k, sign in var_cols])
        rels.append(_FLIP[c.relation] if s < 0 else c.relation)
        rhs.append(s * c.rhs)
    m = len(rows)

    slack_of = {}
    for i, rel in enumerate(rels):
        if rel != EQ:
            slack_of[i] = n_struct + len(slack_of)
    n_real = n_struct + len(slack_of)
    art_of = {}
    for i, rel in enumerate(rels):
        if rel != LE:
            art_of[i] = n_real + len(art_of)
    width = n_real + len(art_of)

    original: list[list[Fraction]] = []
    basis: list[int] = []
    for i in range(m):
        line = rows[i] + [Fraction(0)] * (width - n_struct)
        if i in slack_of:
            line[slack_of[i]] = Fraction(1 if rels[i] == LE else -1)
        if i in art_of:
            line[art_of[i]] = Fraction(1)
            basis.append(art_of[i])
        else:
            basis.append(slack_of[i])
        original.append(line)
    tab = [line + [rhs[i]] for i, line in enumerate(original)]

    if art_of:
        phase1 = [Fraction(0)] * n_real + [Fraction(-1)] * len(art_of)
        _run_simplex(tab, basis, phase1, width)
        if any(basis[i] >= n_real and tab[i][-1] != 0 for i in range(len(tab))):
            return Infeasible()
        # Drive zero-level artificials out of the basis; drop redundant rows.
        keep = []
        for i in range(len(tab)):
            if basis[i] >= n_real:
                col = next((j for j in range(n_real) if tab[i][j] != 0), -1)
                if col < 0:
                    continue
                _pivot(tab, basis, i, col)
            keep.append(i)
        tab = [tab[i] for i in keep]
        basis = [basis[i] for i in keep]
        original = [original[i] for i in keep]
    else:
        keep = list(range(m))

    cost = [Fraction(0)] * width
    for col, (k, sign) in enumerate(var_cols):
        cost[col] = sign * lp.objective[k]
    if not _run_simplex(tab, basis, cost, n_real):
        return Unbounded()

    std = [Fraction(0)] * width
    for i, b in enumerate(basis):
        std[b] = tab[i][-1]
    point = [Fraction(0)] * n
    for col, (k, sign) in enumerate(var_cols):
        point[k] += sign * std[col]
    value = lp.value(point)

    # Dual prices solve B^T y = c_B on the surviving rows.
    bmat = [[original[i][b] for i in range(len(keep))] for b in basis]
    y_kept = _solve_square(bmat, [cost[b] for b in basis]) if basis else []
    dual = [Fraction(0)] * m
    for pos, i in enumerate(keep):
        dual[i] = signs[i] * y_kept[pos]
    outcome = Optimal(value, tuple(point), tuple(dual))
    if not check_certificate(lp, outcome):
        raise CertificateError("dual certificate failed for an optimal solution")
    return outcome


def check_certificate(lp: LinearProgram, outcome: Optimal) -> bool:
    """Exact strong-duality check of an optimal outcome.

    Primal feasibility, dual feasibility (signs and reduced costs) and equal
    objective values together prove optimality.
    """
    x, y = outcome.point, outcome.dual
    if len(x) != lp.size or len(y) != len(lp.constraints):
        return False
    if not lp.feasible(x) or lp.value(x) != outcome.value:
        return False
    for c, yi in zip(lp.constraints, y):
        if (c.relation == LE and yi < 0) or (c.relation == GE and yi > 0):
            return False
    for k in range(lp.size):
        col = sum((c.row[k] * yi for c, yi in zip(lp.constraints, y) if yi), Fraction(0))
        if lp.nonneg[k] and col < lp.objective[k]:
            return False
        if not lp.nonneg[k] and col != lp.objective[k]:
            return False
    dual_value = sum((c.rhs * yi for c, yi in zip(lp.constraints, y) if yi), Fraction(0))
    return dual_value == outcome.value


@dataclass(frozen=True)
class Extremes:
    """Maximum and minimum of a linear form over a nonempty region."""

    max: Fraction
    min: Fraction
    argmax: tuple[Fraction, ...]
    argmin: tuple[Fraction, ...]


def extremes(
    constraints: Sequence[Constraint], nonneg: Sequence[bool], form: Sequence[Fraction]
) -> Extremes | Infeasible:
    form = tuple(to_rational(c) for c in form)
    hi = solve(LinearProgram(form, tuple(constraints), tuple(nonneg)))
    if isinstance(hi, Infeasible):
        return hi
    lo = solve(LinearProgram(tuple(-c for c in form), tuple(constraints), tuple(nonneg)))
    if not isinstance(hi, Optimal) or not isinstance(lo, Optimal):
        raise AssertionError("linear form unbounded over a region expected to be bounded")
    return Extremes(hi.value, -lo.value, hi.point, lo.point)


def max_and_min(
    constraints: Sequence[Constraint], nonneg: Sequence[bool], form: Sequence[Fraction]
) -> tuple[Fraction, Fraction] | Infeasible:
    ext = extremes(constraints, nonneg, form)
    if isinstance(ext, Infeasible):
        return ext
    return ext.max, ext.min
