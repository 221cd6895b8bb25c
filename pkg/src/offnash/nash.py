"""Equilibrium sets and attainable equilibrium payoffs per regime."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from offnash.core import (
    MixedStrategy,
    Profile,
    Regime,
    StageGame,
    best_rows,
    column_max,
    expected_payoff,
    is_stage_nash,
    transpose,
)
from offnash.lp import EQ, GE, Constraint, Extremes, Infeasible, extremes


@dataclass(frozen=True)
class PureNashSet:
    profiles: tuple[tuple[int, int], ...]

    def __contains__(self, item: object) -> bool:
        return item in self.profiles

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.profiles)

    def __len__(self) -> int:
        return len(self.profiles)


def pure_nash(g: StageGame) -> PureNashSet:
    found = []
    for i in range(g.rows):
        top2 = max(g.u2[i])
        for j in range(g.cols):
            if g.u2[i][j] == top2 and g.u1[i][j] == column_max(g, j):
                found.append((i, j))
    return PureNashSet(tuple(found))


@dataclass(frozen=True)
class MixedPureComponent:
    """Equilibria ``(sigma1, col)`` of the mixed-versus-pure regime for one column.

    ``polytope`` describes Q_col over full-length row vectors; rows outside
    ``br_rows`` are pinned to zero.
    """

    col: int
    br_rows: tuple[int, ...]
    v1_value: Fraction
    polytope: tuple[Constraint, ...]
    nonempty: bool
    u2_min: Fraction | None = None
    u2_max: Fraction | None = None
    argmin: MixedStrategy | None = None
    argmax: MixedStrategy | None = None

    def contains(self, s1: MixedStrategy) -> bool:
        return all(c.holds(s1.probs) for c in self.polytope)


def _br_constraints(g: StageGame, col: int, allowed: tuple[int, ...]) -> list[Constraint]:
    """Simplex over ``allowed`` rows on which ``col`` is a best reply for player 2."""
    m = g.rows
    cons = [Constraint(tuple(Fraction(1) for _ in range(m)), EQ, 1)]
    for i in range(m):
        if i not in allowed:
            cons.append(Constraint(tuple(Fraction(int(k == i)) for k in range(m)), EQ, 0))
    for other in range(g.cols):
        if other != col:
            row = tuple(g.u2[i][col] - g.u2[i][other] for i in range(m))
            cons.append(Constraint(row, GE, 0))
    return cons


def mixed_pure_components(g: StageGame) -> list[MixedPureComponent]:
    comps = []
    for j in range(g.cols):
        rows = best_rows(g, j)
        cons = tuple(_br_constraints(g, j, rows))
        form = tuple(g.u2[i][j] for i in range(g.rows))
        ext = extremes(cons, (True,) * g.rows, form)
        if isinstance(ext, Infeasible):
            comps.append(MixedPureComponent(j, rows, column_max(g, j), cons, False))
            continue
        assert isinstance(ext, Extremes)
        comps.append(
            MixedPureComponent(
                j,
                rows,
                column_max(g, j),
                cons,
                True,
                ext.min,
                ext.max,
                MixedStrategy(ext.argmin),
                MixedStrategy(ext.argmax),
            )
        )
    return comps


@dataclass(frozen=True)
class ExtremeEquilibrium:
    s1: MixedStrategy
    s2: MixedStrategy
    pay1: Fraction
    pay2: Fraction

    @property
    def profile(self) -> Profile:
        return Profile(self.s1, self.s2)


def _solve_system(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    """Unique solution of a square system, or None when singular."""
    n = len(a)
    aug = [list(a[i]) + [b[i]] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


def _polytope_vertices(
    halfspaces: list[tuple[list[Fraction], Fraction]], dim: int
) -> dict[tuple[Fraction, ...], frozenset[int]]:
    """Vertices of {z : h.z <= b for all (h, b)} mapped to their tight labels."""
    out: dict[tuple[Fraction, ...], frozenset[int]] = {}
    for subset in itertools.combinations(range(len(halfspaces)), dim):
        z = _solve_system([halfspaces[k][0] for k in subset], [halfspaces[k][1] for k in subset])
        if z is None:
            continue
        key = tuple(z)
        if key in out:
            continue
        tight = []
        for k, (h, b) in enumerate(halfspaces):
            lhs = sum((x * y for x, y in zip(h, z) if x), Fraction(0))
            if lhs > b:
                break
            if lhs == b:
                tight.append(k)
        else:
            out[key] = frozenset(tight)
    return out


def _normalize(z: tuple[Fraction, ...]) -> MixedStrategy:
    total = sum(z)
    return MixedStrategy(tuple(v / total for v in z))


def extreme_equilibria_mm(g: StageGame) -> list[ExtremeEquilibrium]:
    """All extreme equilibria via vertex enumeration of the best-response polytopes.

    With payoffs shifted positive, P = {x >= 0 : B^T x <= 1} and
    Q = {y >= 0 : A y <= 1}.  Label k < rows means "row k unused or a best
    reply", label rows + j the same for column j.  Completely labeled vertex
    pairs other than the origin, rescaled, are the extreme equilibria.
    """
    m, n = g.rows, g.cols
    low = min(min(min(r) for r in g.u1), min(min(r) for r in g.u2))
    shift = 1 - low if low < 1 else Fraction(0)
    a = [[g.u1[i][j] + shift for j in range(n)] for i in range(m)]
    b = [[g.u2[i][j] + shift for j in range(n)] for i in range(m)]

    p_half: list[tuple[list[Fraction], Fraction]] = []
    for i in range(m):
        p_half.append(([Fraction(-int(k == i)) for k in range(m)], Fraction(0)))
    for j in range(n):
        p_half.append(([b[i][j] for i in range(m)], Fraction(1)))
    q_half: list[tuple[list[Fraction], Fraction]] = []
    for i in range(m):
        q_half.append((list(a[i]), Fraction(1)))
    for j in range(n):
        q_half.append(([Fraction(-int(k == j)) for k in range(n)], Fraction(0)))

    everything = frozenset(range(m + n))
    p_verts = [(x, lab) for x, lab in _polytope_vertices(p_half, m).items() if any(x)]
    q_verts = [(y, lab) for y, lab in _polytope_vertices(q_half, n).items() if any(y)]
    found = {}
    for x, lx in p_verts:
        for y, ly in q_verts:
            if lx | ly == everything:
                s1, s2 = _normalize(x), _normalize(y)
                prof = Profile(s1, s2)
                found[(s1.probs, s2.probs)] = ExtremeEquilibrium(
                    s1, s2, expected_payoff(g, 1, prof), expected_payoff(g, 2, prof)
                )
    return [found[k] for k in sorted(found)]


def support_enumeration(g: StageGame) -> list[ExtremeEquilibrium]:
    """Equilibria of a nondegenerate game by equal-size support enumeration.

    Only complete for nondegenerate games; serves as an independent check on
    :func:`extreme_equilibria_mm`.
    """
    m, n = g.rows, g.cols
    found = {}
    for k in range(1, min(m, n) + 1):
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                # y on cols makes every row in `rows` indifferent at value v.
                sys_y = [[g.u1[i][j] for j in cols] + [Fraction(-1)] for i in rows]
                sys_y.append([Fraction(1)] * k + [Fraction(0)])
                sol_y = _solve_system(sys_y, [Fraction(0)] * k + [Fraction(1)])
                sys_x = [[g.u2[i][j] for i in rows] + [Fraction(-1)] for j in cols]
                sys_x.append([Fraction(1)] * k + [Fraction(0)])
                sol_x = _solve_system(sys_x, [Fraction(0)] * k + [Fraction(1)])
                if sol_y is None or sol_x is None:
                    continue
                if any(v < 0 for v in sol_y[:k]) or any(v < 0 for v in sol_x[:k]):
                    continue
                s1 = MixedStrategy.mix(m, dict(zip(rows, sol_x[:k])))
                s2 = MixedStrategy.mix(n, dict(zip(cols, sol_y[:k])))
                prof = Profile(s1, s2)
                if is_stage_nash(g, prof, Regime.MM):
                    found[(s1.probs, s2.probs)] = ExtremeEquilibrium(
                        s1, s2, expected_payoff(g, 1, prof), expected_payoff(g, 2, prof)
                    )
    return [found[k] for k in sorted(found)]


@dataclass(frozen=True)
class VSummary:
    """Extreme attainable equilibrium payoffs of each player in a regime."""

    regime: Regime
    v1_values: tuple[Fraction, ...]
    v2_values: tuple[Fraction, ...]

    @property
    def empty(self) -> bool:
        return not self.v1_values

    @property
    def v1_unique(self) -> bool:
        return len(self.v1_values) == 1

    @property
    def v2_unique(self) -> bool:
        return len(self.v2_values) == 1

    @property
    def v1_many(self) -> bool:
        return len(self.v1_values) > 1

    @property
    def v2_many(self) -> bool:
        return len(self.v2_values) > 1

    @property
    def v1_min(self) -> Fraction:
        return self.v1_values[0]

    @property
    def v1_max(self) -> Fraction:
        return self.v1_values[-1]

    @property
    def v2_min(self) -> Fraction:
        return self.v2_values[0]

    @property
    def v2_max(self) -> Fraction:
        return self.v2_values[-1]

    def span(self, who: int) -> Fraction:
        values = self.v1_values if who == 1 else self.v2_values
        return values[-1] - values[0]

    def swapped(self) -> VSummary:
        return VSummary(self.regime.swapped(), self.v2_values, self.v1_values)


def v_summary(g: StageGame, regime: Regime) -> VSummary:
    if regime is Regime.PP:
        ne = pure_nash(g)
        v1 = {g.u1[i][j] for i, j in ne}
        v2 = {g.u2[i][j] for i, j in ne}
    elif regime is Regime.MP:
        # u1 is pinned to the column maximum on a component, and u2 ranges
        # over an interval there, so its end points carry all the information.
        live = [c for c in mixed_pure_components(g) if c.nonempty]
        v1 = {c.v1_value for c in live}
        v2 = {c.u2_min for c in live} | {c.u2_max for c in live}
    elif regime is Regime.PM:
        return v_summary(transpose(g), Regime.MP).swapped()
    else:
        eqs = extreme_equilibria_mm(g)
        v1 = {e.pay1 for e in eqs}
        v2 = {e.pay2 for e in eqs}
    return VSummary(regime, tuple(sorted(v1)), tuple(sorted(v2)))
