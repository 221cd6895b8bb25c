"""Independent checks: subgame perfection of machines and a pure-strategy oracle."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from offnash.core import Regime, StageGame, check_regime, is_stage_nash
from offnash.nash import pure_nash
from offnash.witness import StrategyMachine, check_machine

DEFAULT_LADDER_CAP = 10**5

Pair = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class Deviation:
    state: int
    rounds_left: int
    player: int
    action: int
    gain: Fraction


def reachable(g: StageGame, machine: StrategyMachine) -> set[tuple[int, int]]:
    """(state, rounds left) pairs reachable from the start under any outcomes."""
    seen = {(machine.start, machine.horizon)}
    stack = [(machine.start, machine.horizon)]
    while stack:
        state, left = stack.pop()
        if left <= 1:
            continue
        nxt = {
            machine.states[state].next_state(i, j) for i in range(g.rows) for j in range(g.cols)
        }
        for s in nxt:
            if (s, left - 1) not in seen:
                seen.add((s, left - 1))
                stack.append((s, left - 1))
    return seen


def _validate(g: StageGame, machine: StrategyMachine, regime: Regime) -> set[tuple[int, int]]:
    check_machine(g, machine)
    live = reachable(g, machine)
    for state in {s for s, _ in live}:
        check_regime(machine.states[state].emit, regime)
    return live


def continuation_values(g: StageGame, machine: StrategyMachine) -> dict[tuple[int, int], Pair]:
    """Exact expected total payoffs V(state, rounds left) for every reachable pair."""
    live = reachable(g, machine)
    values: dict[tuple[int, int], Pair] = {}
    for state, left in sorted(live, key=lambda p: p[1]):
        s = machine.states[state]
        p, q = s.emit.s1.probs, s.emit.s2.probs
        total1 = total2 = Fraction(0)
        for i in range(g.rows):
            if not p[i]:
                continue
            for j in range(g.cols):
                if not q[j]:
                    continue
                w = p[i] * q[j]
                c1 = c2 = Fraction(0)
                if left > 1:
                    c1, c2 = values[(s.next_state(i, j), left - 1)]
                total1 += w * (g.u1[i][j] + c1)
                total2 += w * (g.u2[i][j] + c2)
        values[(state, left)] = (total1, total2)
    return values


def profitable_deviations(
    g: StageGame, machine: StrategyMachine, regime: Regime = Regime.MM
) -> Iterator[Deviation]:
    """Every profitable one-shot deviation at a reachable (state, rounds left) pair."""
    live = _validate(g, machine, regime)
    values = continuation_values(g, machine)
    for state, left in sorted(live):
        s = machine.states[state]
        p, q = s.emit.s1.probs, s.emit.s2.probs

        def cont(i: int, j: int, who: int) -> Fraction:
            if left == 1:
                return Fraction(0)
            return values[(s.next_state(i, j), left - 1)][who]

        v1, v2 = values[(state, left)]
        for i in range(g.rows):
            dev = sum(
                (q[j] * (g.u1[i][j] + cont(i, j, 0)) for j in range(g.cols) if q[j]),
                Fraction(0),
            )
            if dev > v1:
                yield Deviation(state, left, 1, i, dev - v1)
        for j in range(g.cols):
            dev = sum(
                (p[i] * (g.u2[i][j] + cont(i, j, 1)) for i in range(g.rows) if p[i]),
                Fraction(0),
            )
            if dev > v2:
                yield Deviation(state, left, 2, j, dev - v2)


def is_spe(g: StageGame, machine: StrategyMachine, regime: Regime = Regime.MM) -> bool:
    """One-shot deviation check at every reachable (state, rounds left) pair.

    In a finite horizon a profile is subgame perfect exactly when no player
    gains by changing a single round's action after any history; pure
    deviations suffice because the gain is linear in the deviating mixture.
    """
    return next(profitable_deviations(g, machine, regime), None) is None


def off_nash_states(g: StageGame, machine: StrategyMachine, regime: Regime = Regime.MM) -> list[int]:
    """Reachable states whose emitted profile is not a stage equilibrium."""
    live = _validate(g, machine, regime)
    states = {s for s, _ in live}
    return sorted(s for s in states if not is_stage_nash(g, machine.states[s].emit, regime))


class LadderCapExceeded(RuntimeError):
    def __init__(self, partial: PayoffSetLadder, cap: int) -> None:
        super().__init__(f"more than {cap} payoff vectors at horizon {len(partial.levels) + 1}")
        self.partial = partial
        self.cap = cap


@dataclass(frozen=True)
class LadderLevel:
    t: int
    payoffs: tuple[Pair, ...]
    supportable: tuple[tuple[int, int], ...]

    @property
    def minpay(self) -> Pair | None:
        if not self.payoffs:
            return None
        return (min(p[0] for p in self.payoffs), min(p[1] for p in self.payoffs))


@dataclass(frozen=True)
class PayoffSetLadder:
    levels: tuple[LadderLevel, ...]

    def level(self, t: int) -> LadderLevel:
        return self.levels[t - 1]


def payoff_set_ladder(g: StageGame, t_max: int, cap: int = DEFAULT_LADDER_CAP) -> PayoffSetLadder:
    """Pure subgame-perfect total payoffs of the t-round game for t = 1..t_max.

    A first-round profile is supportable when some continuation payoff from
    the previous level beats each player's deviation gain plus the worst
    continuation that player can be held to.
    """
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    gain1 = [[max(g.u1[k][j] for k in range(g.rows)) - g.u1[i][j] for j in range(g.cols)] for i in range(g.rows)]
    gain2 = [[max(g.u2[i]) - g.u2[i][j] for j in range(g.cols)] for i in range(g.rows)]
    prev: tuple[Pair, ...] = ((Fraction(0), Fraction(0)),)
    levels: list[LadderLevel] = []
    for t in range(1, t_max + 1):
        if prev:
            m1 = min(w[0] for w in prev)
            m2 = min(w[1] for w in prev)
        payoffs: set[Pair] = set()
        support = []
        for i in range(g.rows):
            for j in range(g.cols):
                if not prev:
                    continue
                ws = [w for w in prev if w[0] >= gain1[i][j] + m1 and w[1] >= gain2[i][j] + m2]
                if ws:
                    support.append((i, j))
                    payoffs.update((g.u1[i][j] + w[0], g.u2[i][j] + w[1]) for w in ws)
        level = LadderLevel(t, tuple(sorted(payoffs)), tuple(support))
        if len(payoffs) > cap:
            raise LadderCapExceeded(PayoffSetLadder(tuple(levels)), cap)
        levels.append(level)
        prev = level.payoffs
    return PayoffSetLadder(tuple(levels))


def oracle_min_horizon(g: StageGame, t_max: int, cap: int = DEFAULT_LADDER_CAP) -> int | None:
    """Smallest t <= t_max at which a non-equilibrium first round is supportable."""
    ne = set(pure_nash(g))
    for level in payoff_set_ladder(g, t_max, cap).levels:
        if any(a not in ne for a in level.supportable):
            return level.t
    return None


def oracle_decide_pp(g: StageGame, t_max: int, cap: int = DEFAULT_LADDER_CAP) -> bool:
    return oracle_min_horizon(g, t_max, cap) is not None
