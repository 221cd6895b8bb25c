"""Explicit finite-horizon strategy profiles with a non-equilibrium round.

A witness is a :class:`StrategyMachine`: every state emits a stage profile
and moves on according to the realized pure outcome.  States do not know the
round number; the horizon alone decides when play stops, so a state whose
only transition points to itself means "repeat this equilibrium".

All constructions play one non-equilibrium profile in round 1 and stage
equilibria afterwards, rewarding or punishing through the choice of
continuation equilibria.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from offnash.core import (
    MixedStrategy,
    Profile,
    Regime,
    StageGame,
    best_cols,
    column_max,
    transpose,
)
from offnash.decide import (
    MixedThreat,
    PureOffNash,
    PureThreat,
    Verdict,
    pure_threat,
    rational_gcd,
    swap_verdict,
)
from offnash.nash import extreme_equilibria_mm, mixed_pure_components, pure_nash

DEFAULT_CAP = 10**4


class MalformedMachine(ValueError):
    """A machine that does not define play after every outcome."""


class HorizonCapExceeded(RuntimeError):
    """The certified horizon is larger than the caller allows."""

    def __init__(self, bound: TBound, cap: int) -> None:
        super().__init__(f"witness needs horizon {bound.t_min}, cap is {cap}")
        self.bound = bound
        self.cap = cap


class NotInLS(ValueError):
    """A witness was requested for a verdict that is negative."""


@dataclass(frozen=True)
class Transition:
    """Outcome class ``rows x cols``; ``None`` stands for every action."""

    rows: frozenset[int] | None
    cols: frozenset[int] | None
    target: int

    def matches(self, row: int, col: int) -> bool:
        return (self.rows is None or row in self.rows) and (self.cols is None or col in self.cols)

    def swapped(self) -> Transition:
        return Transition(self.cols, self.rows, self.target)


@dataclass(frozen=True)
class MachineState:
    emit: Profile
    transitions: tuple[Transition, ...]
    label: str = ""

    def next_state(self, row: int, col: int) -> int:
        for t in self.transitions:
            if t.matches(row, col):
                return t.target
        raise MalformedMachine(f"no transition for outcome ({row}, {col})")


@dataclass(frozen=True)
class StrategyMachine:
    horizon: int
    states: tuple[MachineState, ...]
    start: int = 0

    def transposed(self) -> StrategyMachine:
        states = tuple(
            MachineState(s.emit.swapped(), tuple(t.swapped() for t in s.transitions), s.label)
            for s in self.states
        )
        return StrategyMachine(self.horizon, states, self.start)

    def with_horizon(self, horizon: int) -> StrategyMachine:
        return replace(self, horizon=horizon)

    def path(self, outcomes: Sequence[tuple[int, int]]) -> list[int]:
        """States visited when the given pure outcomes are realized."""
        state = self.start
        visited = [state]
        for row, col in outcomes:
            state = self.states[state].next_state(row, col)
            visited.append(state)
        return visited


def check_machine(g: StageGame, machine: StrategyMachine) -> None:
    """Raise :class:`MalformedMachine` unless the machine is complete for ``g``."""
    if machine.horizon < 1:
        raise MalformedMachine("horizon must be at least 1")
    n = len(machine.states)
    if not 0 <= machine.start < n:
        raise MalformedMachine("start state out of range")
    for k, s in enumerate(machine.states):
        if len(s.emit.s1) != g.rows or len(s.emit.s2) != g.cols:
            raise MalformedMachine(f"state {k} emits a profile of the wrong shape")
        for t in s.transitions:
            if not 0 <= t.target < n:
                raise MalformedMachine(f"state {k} points to missing state {t.target}")
            if t.rows is not None and not t.rows <= set(range(g.rows)):
                raise MalformedMachine(f"state {k} names an unknown row")
            if t.cols is not None and not t.cols <= set(range(g.cols)):
                raise MalformedMachine(f"state {k} names an unknown column")
        for row in range(g.rows):
            for col in range(g.cols):
                s.next_state(row, col)


@dataclass(frozen=True)
class TBound:
    """Smallest horizon the construction for ``case_id`` certifies.

    ``params`` keeps the intermediate exact quantities, e.g. the payoff gap
    ``delta`` and the range ``span`` of equilibrium payoffs.
    """

    regime: Regime
    case_id: int
    t_min: int
    params: dict[str, Fraction] = field(default_factory=dict, compare=False)


def _ceil(q: Fraction) -> int:
    return math.ceil(q)


class _Builder:
    def __init__(self) -> None:
        self.states: list[MachineState] = []
        self._loops: dict[tuple[Profile, str], int] = {}

    def add(self, emit: Profile, label: str = "") -> int:
        self.states.append(MachineState(emit, (), label))
        return len(self.states) - 1

    def wire(self, sid: int, transitions: Iterable[Transition]) -> None:
        self.states[sid] = replace(self.states[sid], transitions=tuple(transitions))

    def loop(self, emit: Profile, label: str) -> int:
        key = (emit, label)
        if key not in self._loops:
            sid = self.add(emit, label)
            self.wire(sid, [Transition(None, None, sid)])
            self._loops[key] = sid
        return self._loops[key]

    def chain(self, emits: Sequence[Profile], then: int, label: str) -> int:
        """States playing ``emits`` in order regardless of outcomes, then ``then``."""
        nxt = then
        for k in range(len(emits) - 1, -1, -1):
            sid = self.add(emits[k], f"{label}[{k}]")
            self.wire(sid, [Transition(None, None, nxt)])
            nxt = sid
        return nxt

    def alternate(self, first: Profile, second: Profile, label: str) -> int:
        if first == second:
            return self.loop(first, label)
        a = self.add(first, f"{label}:a")
        b = self.add(second, f"{label}:b")
        self.wire(a, [Transition(None, None, b)])
        self.wire(b, [Transition(None, None, a)])
        return a

    def build(self, horizon: int, start: int) -> StrategyMachine:
        return StrategyMachine(horizon, tuple(self.states), start)


@dataclass(frozen=True)
class _Eq:
    profile: Profile
    pay1: Fraction
    pay2: Fraction


def stage_equilibria(g: StageGame, regime: Regime) -> list[_Eq]:
    """Finitely many equilibria spanning each player's equilibrium payoffs.

    Deterministic order: pure equilibria row-major, mixed-versus-pure
    equilibria by column, extreme equilibria lexicographically.
    """
    if regime is Regime.PP:
        return [
            _Eq(Profile.pure(g, i, j), g.u1[i][j], g.u2[i][j]) for i, j in pure_nash(g)
        ]
    if regime is Regime.MP:
        out = []
        for c in mixed_pure_components(g):
            if not c.nonempty:
                continue
            col = MixedStrategy.pure(g.cols, c.col)
            assert c.argmin is not None and c.argmax is not None
            out.append(_Eq(Profile(c.argmin, col), c.v1_value, c.u2_min))
            if c.argmax != c.argmin:
                out.append(_Eq(Profile(c.argmax, col), c.v1_value, c.u2_max))
        return out
    if regime is Regime.PM:
        return [
            _Eq(e.profile.swapped(), e.pay2, e.pay1)
            for e in stage_equilibria(transpose(g), Regime.MP)
        ]
    return [_Eq(e.profile, e.pay1, e.pay2) for e in extreme_equilibria_mm(g)]


def _first(eqs: list[_Eq], key: Callable[[_Eq], Fraction], value: Fraction) -> Profile:
    return next(e.profile for e in eqs if key(e) == value)


class _Extremes:
    def __init__(self, eqs: list[_Eq]) -> None:
        self.eqs = eqs
        p1 = [e.pay1 for e in eqs]
        p2 = [e.pay2 for e in eqs]
        self.max1 = _first(eqs, lambda e: e.pay1, max(p1))
        self.min1 = _first(eqs, lambda e: e.pay1, min(p1))
        self.max2 = _first(eqs, lambda e: e.pay2, max(p2))
        self.min2 = _first(eqs, lambda e: e.pay2, min(p2))
        self.span1 = max(p1) - min(p1)
        self.span2 = max(p2) - min(p2)

    def with_pay1(self, value: Fraction) -> Profile:
        return _first(self.eqs, lambda e: e.pay1, value)


@dataclass
class _Plan:
    bound: TBound
    build: Callable[[int], StrategyMachine]


def _pure_start(g: StageGame, row: int, col: int) -> Profile:
    return Profile.pure(g, row, col)


def _plan_all_deviations(g: StageGame, regime: Regime, ev: PureOffNash, case: int) -> _Plan:
    """Both players threatened: alternate the two favourite equilibria on path."""
    x = _Extremes(stage_equilibria(g, regime))
    r, c = ev.row, ev.col
    d1 = column_max(g, c) - g.u1[r][c]
    d2 = max(g.u2[r]) - g.u2[r][c]
    k = _ceil(max(d1 / x.span1, d2 / x.span2))
    bound = TBound(regime, case, 2 * k + 1, {"delta1": d1, "delta2": d2, "span1": x.span1, "span2": x.span2})

    def build(horizon: int) -> StrategyMachine:
        b = _Builder()
        start = b.add(_pure_start(g, r, c), "first round")
        on_path = b.alternate(x.max1, x.max2, "reward both")
        punish1 = b.alternate(x.min1, x.max2, "punish player 1")
        punish2 = b.alternate(x.max1, x.min2, "punish player 2")
        b.wire(
            start,
            [
                Transition(frozenset({r}), frozenset({c}), on_path),
                Transition(None, frozenset({c}), punish1),
                Transition(frozenset({r}), None, punish2),
                Transition(None, None, on_path),
            ],
        )
        return b.build(horizon, start)

    return _Plan(bound, build)


def _plan_threat(
    g: StageGame,
    regime: Regime,
    case: int,
    victim: int,
    first: Profile,
    obey: frozenset[int],
    delta: Fraction,
) -> _Plan:
    """One player is threatened: play ``first``, then reward iff the victim's
    action lies in ``obey`` and punish otherwise."""
    x = _Extremes(stage_equilibria(g, regime))
    span = x.span1 if victim == 1 else x.span2
    bound = TBound(regime, case, _ceil(delta / span) + 1, {"delta": delta, "span": span})

    def build(horizon: int) -> StrategyMachine:
        b = _Builder()
        start = b.add(first, "first round")
        if victim == 1:
            reward, punish = b.loop(x.max1, "reward"), b.loop(x.min1, "punish")
            ok = Transition(obey, None, reward)
        else:
            reward, punish = b.loop(x.max2, "reward"), b.loop(x.min2, "punish")
            ok = Transition(None, obey, reward)
        b.wire(start, [ok, Transition(None, None, punish)])
        return b.build(horizon, start)

    return _Plan(bound, build)


def _plan_pure_threat(g: StageGame, regime: Regime, case: int, ev: PureThreat) -> _Plan:
    if ev.player == 1:
        delta = g.u1[ev.better][ev.col] - g.u1[ev.row][ev.col]
        obey = frozenset({ev.row})
    else:
        delta = g.u2[ev.row][ev.better] - g.u2[ev.row][ev.col]
        obey = frozenset({ev.col})
    return _plan_threat(g, regime, case, ev.player, _pure_start(g, ev.row, ev.col), obey, delta)


def realize_difference(delta: Fraction, values: Sequence[Fraction]) -> list[tuple[Fraction, Fraction]]:
    """Write ``delta`` as a sum of differences ``hi - lo`` of elements of ``values``.

    Returns the (hi, lo) pairs.  A breadth-first search over a bounded window
    gives a shortest sum when the window is small; otherwise Bezout
    coefficients over consecutive gaps are used.
    """
    vals = sorted(set(values))
    if delta == 0:
        return []
    steps: dict[Fraction, tuple[Fraction, Fraction]] = {}
    for hi in vals:
        for lo in vals:
            if hi != lo:
                steps.setdefault(hi - lo, (hi, lo))
    if not steps:
        raise ValueError("no nonzero differences available")
    g = rational_gcd(list(steps))
    assert g is not None
    if (delta / g).denominator != 1:
        raise ValueError(f"{delta} is not a sum of payoff differences")
    if delta in steps:
        return [steps[delta]]
    reach = abs(delta) + max(steps)
    if reach / g <= 50_000:
        found = _bfs_realize(delta, steps, reach)
        if found is not None:
            return found
    return _bezout_realize(delta, vals)


def _bfs_realize(
    delta: Fraction, steps: dict[Fraction, tuple[Fraction, Fraction]], reach: Fraction
) -> list[tuple[Fraction, Fraction]] | None:
    order = sorted(steps)
    parent: dict[Fraction, tuple[Fraction, Fraction] | None] = {Fraction(0): None}
    queue = deque([Fraction(0)])
    while queue:
        cur = queue.popleft()
        for d in order:
            nxt = cur + d
            if abs(nxt) > reach or nxt in parent:
                continue
            parent[nxt] = (cur, d)
            if nxt == delta:
                out = []
                node = nxt
                while parent[node] is not None:
                    prev, step = parent[node]  # type: ignore[misc]
                    out.append(steps[step])
                    node = prev
                return out[::-1]
            queue.append(nxt)
    return None


def _bezout_realize(delta: Fraction, vals: list[Fraction]) -> list[tuple[Fraction, Fraction]]:
    gaps = [vals[k + 1] - vals[k] for k in range(len(vals) - 1)]
    lcm = 1
    for e in gaps + [delta]:
        lcm = lcm * e.denominator // math.gcd(lcm, e.denominator)
    ints = [int(e * lcm) for e in gaps]
    coeffs = [1] + [0] * (len(ints) - 1)
    acc = ints[0]
    for k in range(1, len(ints)):
        gcd, s, t = _ext_gcd(acc, ints[k])
        coeffs = [c * s for c in coeffs]
        coeffs[k] = t
        acc = gcd
    mult = int(delta * lcm) // acc
    out: list[tuple[Fraction, Fraction]] = []
    for k, c in enumerate(coeffs):
        pair = (vals[k + 1], vals[k]) if c * mult > 0 else (vals[k], vals[k + 1])
        out.extend([pair] * abs(c * mult))
    return out


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return a, 1, 0
    g, s, t = _ext_gcd(b, a % b)
    return g, t, s - (a // b) * t


def _plan_mp_segments(g: StageGame, case: int, ev: MixedThreat) -> _Plan:
    """Player 1 mixes over rows with different payoffs; later equilibria
    repay each row's gap to the anchor so that every support row ties."""
    x = _Extremes(stage_equilibria(g, Regime.MP))
    col = ev.action
    anchor = ev.anchor if ev.anchor is not None else ev.strategy.support()[0]
    support = ev.strategy.support()
    v1 = sorted({e.pay1 for e in x.eqs})
    terms = {
        r: realize_difference(g.u1[anchor][col] - g.u1[r][col], v1)
        for r in support
        if r != anchor
    }
    total = sum(len(t) for t in terms.values())
    column = [g.u1[i][col] for i in range(g.rows)]
    spread = max(column) - min(column)
    t_min = _ceil(2 + total + spread / x.span1)
    bound = TBound(
        Regime.MP, case, t_min, {"segments": Fraction(total), "spread": spread, "span": x.span1}
    )

    def build(horizon: int) -> StrategyMachine:
        b = _Builder()
        start = b.add(Profile(ev.strategy, MixedStrategy.pure(g.cols, col)), "first round")
        reward, punish = b.loop(x.max1, "reward"), b.loop(x.min1, "punish")

        def track(row: int | None) -> int:
            emits = []
            for r in sorted(terms):
                for hi, lo in terms[r]:
                    emits.append(x.with_pay1(hi if r == row else lo))
            tail = reward if row is not None else punish
            return b.chain(emits, tail, f"after row {row}" if row is not None else "after other rows")

        rules = [Transition(frozenset({r}), None, track(r)) for r in support]
        rules.append(Transition(None, None, track(None)))
        b.wire(start, rules)
        return b.build(horizon, start)

    return _Plan(bound, build)


def _plan_mm_player1(g: StageGame, case: int, ev: MixedThreat) -> _Plan:
    """Player 1 threatened in the mixed-versus-mixed regime (player 2's
    equilibrium payoff is unique)."""
    threat = pure_threat(g)
    if threat is not None:
        return _plan_pure_threat(g, Regime.MM, case, threat)
    x = _Extremes(stage_equilibria(g, Regime.MM))
    wide = next((i for i in range(g.rows) if len(best_cols(g, i)) >= 2), None)
    if wide is not None:
        return _plan_two_replies(g, case, ev, x, wide)
    return _plan_crossing(g, case, x)


def _plan_two_replies(
    g: StageGame, case: int, ev: MixedThreat, x: _Extremes, wide: int
) -> _Plan:
    """A row with two best replies lets a mixed reply tune player 1's reward."""
    j1, j2 = best_cols(g, wide)[:2]
    if g.u1[wide][j1] < g.u1[wide][j2]:
        j1, j2 = j2, j1
    col = ev.action
    support = ev.strategy.support()
    pay = {i: g.u1[i][col] for i in support}
    best = max(pay.values())
    gap_s = best - min(pay.values())
    column = [g.u1[i][col] for i in range(g.rows)]
    gap_a = max(column) - min(column)
    span = x.span1
    t_min = _ceil(3 + gap_s / span + gap_a / span)
    t1 = _ceil(gap_s / span) + 1
    denom = g.u1[wide][j1] - g.u1[wide][j2] + (t1 - 1) * span
    lam = {}
    for i in support:
        num = best - pay[i]
        lam[i] = Fraction(0) if num == 0 else num / denom
        if not 0 <= lam[i] <= 1:
            raise AssertionError("tuning weight outside [0, 1]")
    bound = TBound(
        Regime.MM, case, t_min,
        {"support_gap": gap_s, "spread": gap_a, "span": span, "t1": Fraction(t1)},
    )

    def build(horizon: int) -> StrategyMachine:
        b = _Builder()
        start = b.add(ev.profile(g), "first round")
        reward, punish = b.loop(x.max1, "reward"), b.loop(x.min1, "punish")
        delayed = b.chain([x.min1] * (t1 - 1), reward, "delayed reward")
        rules = []
        for i in support:
            mix = MixedStrategy.mix(g.cols, {j1: lam[i], j2: 1 - lam[i]})
            sid = b.add(Profile(MixedStrategy.pure(g.rows, wide), mix), f"tune row {i}")
            b.wire(sid, [Transition(None, frozenset({j1}), reward), Transition(None, None, delayed)])
            rules.append(Transition(frozenset({i}), None, sid))
        rules.append(Transition(None, None, punish))
        b.wire(start, rules)
        return b.build(horizon, start)

    return _Plan(bound, build)


def _plan_crossing(g: StageGame, case: int, x: _Extremes) -> _Plan:
    """Every row has a unique best reply and every pure profile where player 2
    best responds is an equilibrium.  Mix two such equilibrium rows at a
    weight where player 2 has two best replies."""
    pairs = [(i, best_cols(g, i)[0]) for i in range(g.rows)]
    choice = None
    for a in range(len(pairs)):
        for c in range(a + 1, len(pairs)):
            (i1, j1), (i2, j2) = pairs[a], pairs[c]
            if j1 != j2 and g.u1[i1][j1] != g.u1[i2][j2]:
                choice = (i1, i2)
                break
        if choice:
            break
    if choice is None:
        raise AssertionError("no pair of equilibrium rows with distinct replies")
    i1, i2 = choice

    def lines(lam: Fraction) -> list[Fraction]:
        return [lam * g.u2[i1][j] + (1 - lam) * g.u2[i2][j] for j in range(g.cols)]

    candidates = set()
    for j in range(g.cols):
        for k in range(j + 1, g.cols):
            # lam*(a_j - a_k) + (1-lam)*(b_j - b_k) = 0
            da = g.u2[i1][j] - g.u2[i1][k]
            db = g.u2[i2][j] - g.u2[i2][k]
            if da != db:
                lam = db / (db - da)
                if 0 < lam < 1:
                    candidates.add(lam)
    lam1, tied = None, ()
    for lam in sorted(candidates):
        vals = lines(lam)
        top = max(vals)
        tied = tuple(j for j in range(g.cols) if vals[j] == top)
        if len(tied) >= 2:
            lam1 = lam
            break
    if lam1 is None:
        raise AssertionError("no crossing of player 2's best replies")
    k1, k2 = tied[0], tied[1]
    if g.u1[i1][k1] < g.u1[i2][k1]:
        i1, i2, lam1 = i2, i1, 1 - lam1
    sigma = MixedStrategy.mix(g.rows, {i1: lam1, i2: 1 - lam1})
    span = x.span1
    obey = frozenset({i1, i2})

    if g.u1[i1][k1] == g.u1[i2][k1]:
        delta = column_max(g, k1) - g.u1[i1][k1]
        bound = TBound(Regime.MM, case, _ceil(delta / span) + 1, {"delta": delta, "span": span})

        def build_equal(horizon: int) -> StrategyMachine:
            b = _Builder()
            start = b.add(Profile(sigma, MixedStrategy.pure(g.cols, k1)), "first round")
            reward, punish = b.loop(x.max1, "reward"), b.loop(x.min1, "punish")
            b.wire(start, [Transition(obey, None, reward), Transition(None, None, punish)])
            return b.build(horizon, start)

        return _Plan(bound, build_equal)

    d1 = g.u1[i1][k1] - g.u1[i2][k1]
    d2 = g.u1[i1][k2] - g.u1[i2][k2]
    spread = max(
        g.u1[a][j] - g.u1[i][j] for a in range(g.rows) for i in (i1, i2) for j in (k1, k2)
    )
    t_min = _ceil(3 + spread / span + abs(d2) / span)
    t1 = math.floor(abs(d2) / span) + 1
    rho = d1 / (d1 + t1 * span - d2)
    if not 0 < rho < 1:
        raise AssertionError("reply weight outside (0, 1)")
    reply = MixedStrategy.mix(g.cols, {k2: rho, k1: 1 - rho})
    bound = TBound(
        Regime.MM, case, t_min,
        {"d1": d1, "d2": d2, "spread": spread, "span": span, "t1": Fraction(t1)},
    )

    def build_unequal(horizon: int) -> StrategyMachine:
        b = _Builder()
        start = b.add(Profile(sigma, reply), "first round")
        reward, punish = b.loop(x.max1, "reward"), b.loop(x.min1, "punish")
        delayed = b.chain([x.min1] * t1, reward, "delayed reward")
        b.wire(
            start,
            [
                Transition(frozenset({i1}), frozenset({k2}), delayed),
                Transition(obey, frozenset({k1, k2}), reward),
                Transition(None, None, punish),
            ],
        )
        return b.build(horizon, start)

    return _Plan(bound, build_unequal)


def _transposed_plan(plan: _Plan, regime: Regime, case: int) -> _Plan:
    b = plan.bound
    return _Plan(
        TBound(regime, case, b.t_min, b.params),
        lambda horizon: plan.build(horizon).transposed(),
    )


def _plan(g: StageGame, verdict: Verdict) -> _Plan:
    if not verdict.in_ls:
        raise NotInLS(f"game is not in the {verdict.regime.value} class")
    regime, case, ev = verdict.regime, verdict.case_id, verdict.evidence
    assert case is not None
    if regime is Regime.PM:
        inner = _plan(transpose(g), swap_verdict(verdict))
        return _transposed_plan(inner, Regime.PM, case)
    if isinstance(ev, PureOffNash):
        return _plan_all_deviations(g, regime, ev, case)
    if regime is Regime.PP:
        assert isinstance(ev, PureThreat)
        return _plan_pure_threat(g, regime, case, ev)
    if regime is Regime.MP:
        if isinstance(ev, PureThreat):
            return _plan_pure_threat(g, regime, case, ev)
        assert isinstance(ev, MixedThreat)
        if ev.strategy.is_pure():
            row = ev.strategy.pure_action()
            better = max(range(g.rows), key=lambda i: (g.u1[i][ev.action], -i))
            return _plan_pure_threat(g, regime, case, PureThreat(1, row, ev.action, better))
        return _plan_mp_segments(g, case, ev)
    assert isinstance(ev, MixedThreat)
    if ev.player == 1:
        return _plan_mm_player1(g, case, ev)
    flipped = swap_verdict(verdict)
    inner = _plan_mm_player1(transpose(g), case, flipped.evidence)  # type: ignore[arg-type]
    return _transposed_plan(inner, Regime.MM, case)


def t_bound(g: StageGame, verdict: Verdict) -> TBound:
    return _plan(g, verdict).bound


def build_witness(
    g: StageGame,
    verdict: Verdict,
    regime: Regime | None = None,
    horizon: int | None = None,
    cap: int = DEFAULT_CAP,
) -> tuple[TBound, StrategyMachine]:
    """Build a machine for ``verdict``; ``horizon`` defaults to the certified minimum.

    Any horizon at least ``t_min`` works: every construction ends in
    repeated equilibria whose ranking does not depend on their length.
    """
    if regime is not None and regime is not verdict.regime:
        raise ValueError(f"verdict is for regime {verdict.regime.value}, not {regime.value}")
    plan = _plan(g, verdict)
    horizon = plan.bound.t_min if horizon is None else horizon
    if horizon < plan.bound.t_min:
        raise ValueError(f"horizon {horizon} is below the certified {plan.bound.t_min}")
    if horizon > cap:
        raise HorizonCapExceeded(plan.bound, cap)
    return plan.bound, plan.build(horizon)


def grim_trigger_machine(
    g: StageGame,
    cooperate: tuple[int, int],
    punish: tuple[int, int],
    finale: tuple[int, int],
    horizon: int,
    tail: int = 2,
) -> StrategyMachine:
    """Play ``cooperate`` until the last ``tail`` rounds, then ``finale``.

    Any departure from ``cooperate`` switches to ``punish`` for good.
    """
    b = _Builder()
    grim = b.loop(Profile.pure(g, *punish), "grim")
    end = b.loop(Profile.pure(g, *finale), "finale")
    coop = Profile.pure(g, *cooperate)
    nxt = end
    for k in range(max(horizon - tail, 0) - 1, -1, -1):
        sid = b.add(coop, f"cooperate[{k}]")
        b.wire(
            sid,
            [
                Transition(frozenset({cooperate[0]}), frozenset({cooperate[1]}), nxt),
                Transition(None, None, grim),
            ],
        )
        nxt = sid
    return b.build(horizon, nxt)


__all__ = [
    "DEFAULT_CAP",
    "HorizonCapExceeded",
    "MachineState",
    "MalformedMachine",
    "NotInLS",
    "StrategyMachine",
    "TBound",
    "Transition",
    "build_witness",
    "check_machine",
    "grim_trigger_machine",
    "realize_difference",
    "stage_equilibria",
    "t_bound",
]
