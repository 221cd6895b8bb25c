"""Membership tests for games admitting locally suboptimal subgame-perfect play.

One decider per regime, plus the cross-regime classification.  Each
``Verdict`` carries evidence that can be checked against the payoff matrices
directly and that the witness module turns into an explicit strategy machine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from offnash.core import (
    MixedStrategy,
    Profile,
    Regime,
    StageGame,
    best_cols,
    best_rows,
    column_max,
    is_best_response,
    transpose,
)
from offnash.lp import EQ, GE, LE, Constraint, LinearProgram, Optimal, solve
from offnash.nash import VSummary, pure_nash, v_summary


class InconsistencyError(AssertionError):
    """A self-check implied by the theory failed; this is a bug, not an input error."""


@dataclass(frozen=True)
class PureOffNash:
    """A pure profile that is not a stage equilibrium."""

    row: int
    col: int


@dataclass(frozen=True)
class PureThreat:
    """A pure profile where only ``player`` fails to best respond.

    ``better`` is a strictly better action for ``player``; the opponent's
    action is a best reply.
    """

    player: int
    row: int
    col: int
    better: int


@dataclass(frozen=True)
class MixedThreat:
    """A profile (mixed strategy, pure action) where only ``player`` errs.

    For ``player == 1`` the strategy is player 1's mixture, ``action`` is the
    column it makes a best reply and ``bad`` a suboptimal row in the support.
    For ``player == 2`` the roles of rows and columns swap.  ``anchor`` is
    set by the mixed-versus-pure decider: the support action all others are
    reconciled against.
    """

    player: int
    strategy: MixedStrategy
    action: int
    bad: int
    anchor: int | None = None

    def profile(self, g: StageGame) -> Profile:
        if self.player == 1:
            return Profile(self.strategy, MixedStrategy.pure(g.cols, self.action))
        return Profile(MixedStrategy.pure(g.rows, self.action), self.strategy)


Evidence = Union[PureOffNash, PureThreat, MixedThreat, None]


@dataclass(frozen=True)
class Verdict:
    regime: Regime
    in_ls: bool
    case_id: int | None = None
    evidence: Evidence = None
    summary: VSummary | None = field(default=None, compare=False)


def _evidence_swapped(ev: Evidence) -> Evidence:
    if isinstance(ev, PureOffNash):
        return PureOffNash(ev.col, ev.row)
    if isinstance(ev, PureThreat):
        return PureThreat(3 - ev.player, ev.col, ev.row, ev.better)
    if isinstance(ev, MixedThreat):
        return MixedThreat(3 - ev.player, ev.strategy, ev.action, ev.bad, ev.anchor)
    return ev


def swap_verdict(v: Verdict) -> Verdict:
    """Re-express a verdict on ``transpose(g)`` in terms of ``g``.

    The case number is kept: for the pure-versus-mixed regime it names the
    mixed-versus-pure case that fired with the players exchanged.
    """
    summary = v.summary.swapped() if v.summary is not None else None
    return Verdict(v.regime.swapped(), v.in_ls, v.case_id, _evidence_swapped(v.evidence), summary)


def pure_off_nash(g: StageGame) -> PureOffNash | None:
    """First pure profile, in row-major order, that is not a stage equilibrium."""
    ne = pure_nash(g)
    for i in range(g.rows):
        for j in range(g.cols):
            if (i, j) not in ne:
                return PureOffNash(i, j)
    return None


def exist_off(g: StageGame) -> bool:
    """Whether any profile, pure or mixed, fails to be a stage equilibrium.

    A non-constant column of u1 gives a row that is not a best reply against
    that column; a non-constant row of u2 does the same for player 2.
    Otherwise every profile is an equilibrium.
    """
    cols_constant = all(len({g.u1[i][j] for i in range(g.rows)}) == 1 for j in range(g.cols))
    rows_constant = all(len(set(g.u2[i])) == 1 for i in range(g.rows))
    return not (cols_constant and rows_constant)


def pure_threat(g: StageGame) -> PureThreat | None:
    """A pure profile where the column is a best reply and the row is not.

    Scans columns in order, then rows; the better row is the first maximizer.
    """
    for j in range(g.cols):
        top = column_max(g, j)
        for i in range(g.rows):
            if g.u1[i][j] < top and j in best_cols(g, i):
                return PureThreat(1, i, j, best_rows(g, j)[0])
    return None


def _indicator(size: int, k: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(i == k)) for i in range(size))


def exist_off_2best(g: StageGame) -> MixedThreat | None:
    """Search for (sigma1, j) with j a best reply to sigma1 but not vice versa.

    For each column j and each row i that is strictly worse than the best row
    against j, maximize sigma1(i) over the mixtures that make j a best reply.
    A positive optimum means the LP vertex puts weight on a bad row.
    """
    m = g.rows
    for j in range(g.cols):
        top = column_max(g, j)
        cons = [Constraint((Fraction(1),) * m, EQ, 1)]
        for other in range(g.cols):
            if other != j:
                cons.append(
                    Constraint(tuple(g.u2[i][j] - g.u2[i][other] for i in range(m)), GE, 0)
                )
        for bad in range(m):
            if g.u1[bad][j] == top:
                continue
            out = solve(LinearProgram(_indicator(m, bad), tuple(cons)))
            if isinstance(out, Optimal) and out.value > 0:
                return MixedThreat(1, MixedStrategy(out.point), j, bad)
    return None


def exist_off_1best(g: StageGame) -> MixedThreat | None:
    """The player-2 version of :func:`exist_off_2best`, in the original coordinates."""
    ev = exist_off_2best(transpose(g))
    return _evidence_swapped(ev) if ev is not None else None


def thm1_decide(g: StageGame) -> Verdict:
    """Pure-versus-pure regime."""
    s = v_summary(g, Regime.PP)
    if s.empty:
        return Verdict(Regime.PP, False, summary=s)
    if s.v1_many and s.v2_many:
        ev = pure_off_nash(g)
        if ev is not None:
            return Verdict(Regime.PP, True, 1, ev, s)
    elif s.v1_many and s.v2_unique:
        threat = pure_threat(g)
        if threat is not None:
            return Verdict(Regime.PP, True, 2, threat, s)
    elif s.v1_unique and s.v2_many:
        threat = pure_threat(transpose(g))
        if threat is not None:
            return Verdict(Regime.PP, True, 3, _evidence_swapped(threat), s)
    return Verdict(Regime.PP, False, summary=s)


def thm2_decide(g: StageGame) -> Verdict:
    """Mixed-versus-mixed regime: dispatch on which payoff sets are singletons."""
    s = v_summary(g, Regime.MM)
    ev: Evidence = None
    case = None
    if s.v1_many and s.v2_many:
        ev, case = pure_off_nash(g), 1
    elif s.v1_many and s.v2_unique:
        ev, case = exist_off_2best(g), 2
    elif s.v1_unique and s.v2_many:
        ev, case = exist_off_1best(g), 3
    if ev is None:
        return Verdict(Regime.MM, False, summary=s)
    return Verdict(Regime.MM, True, case, ev, s)


@dataclass(frozen=True)
class DifferenceSet:
    """All pairwise differences of a finite set of payoffs, with their gcd."""

    values: tuple[Fraction, ...]

    @classmethod
    def of(cls, payoffs: tuple[Fraction, ...] | list[Fraction]) -> DifferenceSet:
        return cls(tuple(sorted({v - w for v in payoffs for w in payoffs})))

    @property
    def gcd(self) -> Fraction | None:
        return rational_gcd([d for d in self.values if d != 0])


def rational_gcd(values: list[Fraction]) -> Fraction | None:
    """Largest rational g with every value an integer multiple of g."""
    if not values:
        return None
    lcm = 1
    for v in values:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    num = 0
    for v in values:
        num = math.gcd(num, abs(v.numerator * (lcm // v.denominator)))
    return Fraction(num, lcm)


def subset_sum_reachable(x: Fraction, d: DifferenceSet) -> bool:
    """Whether x is a finite sum, repetition allowed, of elements of ``d``.

    The set is closed under negation, so such sums form the group gcd * Z.
    """
    g = d.gcd
    if g is None:
        return x == 0
    return (x / g).denominator == 1


def _anchor_lp(
    g: StageGame, col: int, anchor: int, allowed: list[int], bad_rows: list[int]
) -> Optimal | None:
    """Maximize min(mass on anchor, mass on bad rows) over mixtures on ``allowed``
    that keep ``col`` a best reply.  Variables are the row weights then t."""
    m = g.rows
    n = m + 1
    cons = []
    cons.append(Constraint(tuple(Fraction(int(i < m)) for i in range(n)), EQ, 1))
    for i in range(m):
        if i not in allowed:
            cons.append(Constraint(_indicator(n, i), EQ, 0))
    for other in range(g.cols):
        if other != col:
            row = tuple(g.u2[i][col] - g.u2[i][other] for i in range(m)) + (Fraction(0),)
            cons.append(Constraint(row, GE, 0))
    t = _indicator(n, m)
    cons.append(Constraint(tuple(a - b for a, b in zip(t, _indicator(n, anchor))), LE, 0))
    mass_bad = tuple(Fraction(int(i in bad_rows)) for i in range(m)) + (Fraction(0),)
    cons.append(Constraint(tuple(a - b for a, b in zip(t, mass_bad)), LE, 0))
    out = solve(LinearProgram(t, tuple(cons)))
    if isinstance(out, Optimal) and out.value > 0:
        return out
    return None


def mixed_threat_mp(g: StageGame, d: DifferenceSet) -> MixedThreat | None:
    """Evidence for the mixed-versus-pure case where player 1 is threatened.

    Pure candidates are tried first; then, for each column and anchor row,
    one LP over the rows whose payoff gap to the anchor is a sum of elements
    of ``d``.
    """
    threat = pure_threat(g)
    if threat is not None:
        s1 = MixedStrategy.pure(g.rows, threat.row)
        return MixedThreat(1, s1, threat.col, threat.row, threat.row)
    for j in range(g.cols):
        top = column_max(g, j)
        for anchor in range(g.rows):
            allowed = [
                i for i in range(g.rows) if subset_sum_reachable(g.u1[anchor][j] - g.u1[i][j], d)
            ]
            bad = [i for i in allowed if g.u1[i][j] < top]
            if not bad:
                continue
            out = _anchor_lp(g, j, anchor, allowed, bad)
            if out is not None:
                s1 = MixedStrategy(out.point[: g.rows])
                first_bad = next(i for i in bad if s1[i] > 0)
                return MixedThreat(1, s1, j, first_bad, anchor)
    return None


def thm3_decide(g: StageGame) -> Verdict:
    """Mixed-versus-pure regime: player 1 may mix, player 2 plays pure."""
    s = v_summary(g, Regime.MP)
    if s.empty:
        return Verdict(Regime.MP, False, summary=s)
    if s.v1_many and s.v2_many:
        ev = pure_off_nash(g)
        if ev is not None:
            return Verdict(Regime.MP, True, 1, ev, s)
    elif s.v1_many and s.v2_unique:
        ev2 = mixed_threat_mp(g, DifferenceSet.of(s.v1_values))
        if ev2 is not None:
            return Verdict(Regime.MP, True, 2, ev2, s)
    elif s.v1_unique and s.v2_many:
        # Player 1 must best respond, so only rows maximizing the column count;
        # u2 is linear on their simplex, so checking vertices suffices.
        for j in range(g.cols):
            for i in best_rows(g, j):
                better = best_cols(g, i)[0]
                if g.u2[i][better] > g.u2[i][j]:
                    return Verdict(Regime.MP, True, 3, PureThreat(2, i, j, better), s)
    return Verdict(Regime.MP, False, summary=s)


def thm3_decide_pm(g: StageGame) -> Verdict:
    """Pure-versus-mixed regime, solved on the transposed game."""
    return swap_verdict(thm3_decide(transpose(g)))


def decide(g: StageGame, regime: Regime) -> Verdict:
    if regime is Regime.PP:
        return thm1_decide(g)
    if regime is Regime.MP:
        return thm3_decide(g)
    if regime is Regime.PM:
        return thm3_decide_pm(g)
    return thm2_decide(g)


def evidence_holds(g: StageGame, v: Verdict) -> bool:
    """Check a positive verdict's evidence against the payoffs directly."""
    ev = v.evidence
    if isinstance(ev, PureOffNash):
        prof = Profile.pure(g, ev.row, ev.col)
        return not (is_best_response(g, 1, prof) and is_best_response(g, 2, prof))
    if isinstance(ev, PureThreat):
        prof = Profile.pure(g, ev.row, ev.col)
        if ev.player == 1:
            ok = g.u1[ev.better][ev.col] > g.u1[ev.row][ev.col]
        else:
            ok = g.u2[ev.row][ev.better] > g.u2[ev.row][ev.col]
        return ok and is_best_response(g, 3 - ev.player, prof)
    if isinstance(ev, MixedThreat):
        prof = ev.profile(g)
        return (
            not is_best_response(g, ev.player, prof)
            and is_best_response(g, 3 - ev.player, prof)
            and ev.strategy[ev.bad] > 0
        )
    return False


def _cardinality(values: tuple[Fraction, ...]) -> int:
    return min(len(values), 2)


@dataclass(frozen=True)
class DeltaLabel:
    """Membership in each regime and, for each strict inclusion the game
    falls into, the case of the matching characterization (None if it does
    not fall into that difference)."""

    pp_in_ls: bool
    mp_in_ls: bool
    mm_in_ls: bool
    delta_case: dict[str, int | None]
    verdicts: dict[str, Verdict] = field(compare=False, default_factory=dict)


def _lower_case(lower: VSummary, allowed: dict[tuple[int, int], int], name: str) -> int:
    key = (_cardinality(lower.v1_values), _cardinality(lower.v2_values))
    if lower.empty:
        key = (0, 0)
    if key not in allowed:
        raise InconsistencyError(f"{name}: payoff-set sizes {key} cannot separate the regimes")
    return allowed[key]


_PP_TO_MP = {(0, 0): 1, (1, 1): 2, (2, 1): 3}
_MP_TO_MM = {(0, 0): 1, (1, 1): 2, (2, 1): 3, (1, 2): 4}
_PP_TO_MM = {(0, 0): 1, (1, 1): 2, (2, 1): 3, (1, 2): 4}


def classify_all(g: StageGame) -> DeltaLabel:
    pp, mp, mm = thm1_decide(g), thm3_decide(g), thm2_decide(g)
    if (pp.in_ls and not mp.in_ls) or (mp.in_ls and not mm.in_ls):
        raise InconsistencyError(
            f"regime inclusion violated: pp={pp.in_ls} mp={mp.in_ls} mm={mm.in_ls}"
        )
    assert pp.summary is not None and mp.summary is not None
    cases: dict[str, int | None] = {"pp_to_mp": None, "mp_to_mm": None, "pp_to_mm": None}
    if mp.in_ls and not pp.in_ls:
        cases["pp_to_mp"] = _lower_case(pp.summary, _PP_TO_MP, "pp_to_mp")
    if mm.in_ls and not mp.in_ls:
        cases["mp_to_mm"] = _lower_case(mp.summary, _MP_TO_MM, "mp_to_mm")
    if mm.in_ls and not pp.in_ls:
        cases["pp_to_mm"] = _lower_case(pp.summary, _PP_TO_MM, "pp_to_mm")
    return DeltaLabel(
        pp.in_ls, mp.in_ls, mm.in_ls, cases, {"pp": pp, "mp": mp, "mm": mm}
    )
