import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import games
from offnash.core import MixedStrategy, Profile, Regime, is_stage_nash, make_game
from offnash.decide import decide, thm1_decide
from offnash.games import BUILTIN, large_t, none_to_new_ne, off_nash
from offnash.verify import is_spe, off_nash_states, profitable_deviations
from offnash.witness import (
    HorizonCapExceeded,
    MachineState,
    MalformedMachine,
    NotInLS,
    StrategyMachine,
    Transition,
    _Extremes,
    _plan_crossing,
    build_witness,
    check_machine,
    realize_difference,
    stage_equilibria,
    t_bound,
)


def round_trip(g, regime, horizon=None):
    v = decide(g, regime)
    bound, m = build_witness(g, v, regime, horizon=horizon)
    assert is_spe(g, m, regime)
    off = off_nash_states(g, m, regime)
    assert off == [m.start]
    # Only the opening round leaves equilibrium play.
    for s in m.states:
        if s is not m.states[m.start]:
            assert is_stage_nash(g, s.emit, regime)
    return bound, m


class TestOpeningThreat:
    def test_bound(self):
        g = off_nash()
        b = t_bound(g, thm1_decide(g))
        assert b.t_min == 2 and b.params["delta"] == 1 and b.params["span"] == 2

    def test_two_round_machine(self):
        g = off_nash()
        bound, m = round_trip(g, Regime.PP)
        assert m.horizon == 2
        assert m.states[m.start].emit == Profile.pure(g, 1, 0)
        first = m.states[m.start]
        for col in range(2):
            assert m.states[first.next_state(0, col)].emit == Profile.pure(g, 1, 1)
            assert m.states[first.next_state(1, col)].emit == Profile.pure(g, 0, 0)

    def test_mixed_pure_opening(self):
        g = none_to_new_ne()
        _, m = round_trip(g, Regime.MP)
        assert m.states[m.start].emit == Profile.pure(g, 1, 0)


@pytest.mark.parametrize("name", sorted(BUILTIN))
@pytest.mark.parametrize("regime", list(Regime), ids=lambda r: r.value)
def test_builtin_round_trip(name, regime):
    g = BUILTIN[name]()
    v = decide(g, regime)
    if not v.in_ls:
        with pytest.raises(NotInLS):
            build_witness(g, v)
        return
    bound, _ = round_trip(g, regime)
    for horizon in range(bound.t_min, bound.t_min + 4):
        round_trip(g, regime, horizon)


@settings(max_examples=120, deadline=None)
@given(games(), st.sampled_from(list(Regime)))
def test_random_round_trip(g, regime):
    if decide(g, regime).in_ls:
        round_trip(g, regime)


def test_horizon_guards():
    g = off_nash()
    v = thm1_decide(g)
    with pytest.raises(HorizonCapExceeded) as info:
        build_witness(g, v, horizon=50, cap=10)
    assert info.value.bound.t_min == 2
    with pytest.raises(ValueError):
        build_witness(g, v, horizon=1)
    with pytest.raises(ValueError):
        build_witness(g, v, Regime.MM)


def test_crossing_replies():
    # Both rows have a unique best reply and mixing them ties player 2.
    g = make_game([[3, 0], [1, 1]], [[2, 0], [0, 2]])
    plan = _plan_crossing(g, 3, _Extremes(stage_equilibria(g, Regime.MM)))
    assert plan.bound.t_min == 5
    assert plan.bound.params["d1"] == 2 and plan.bound.params["d2"] == -1
    m = plan.build(plan.bound.t_min)
    assert m.states[m.start].emit == Profile(
        MixedStrategy((F(1, 2), F(1, 2))), MixedStrategy((F(3, 5), F(2, 5)))
    )
    assert list(profitable_deviations(g, m)) == []
    assert off_nash_states(g, m) == [m.start]


class TestRealizeDifference:
    def test_direct(self):
        assert realize_difference(F(1), [F(2), F(3)]) == [(F(3), F(2))]

    def test_sum(self):
        pairs = realize_difference(F(5, 2), [F(0), F(1, 2), F(2)])
        assert sum(hi - lo for hi, lo in pairs) == F(5, 2)

    def test_unreachable(self):
        with pytest.raises(ValueError):
            realize_difference(F(1, 2), [F(2), F(3)])

    @given(
        st.lists(st.integers(-20, 20), min_size=2, max_size=4, unique=True),
        st.integers(-30, 30),
    )
    def test_integer_sums(self, values, k):
        vals = [F(v) for v in values]
        g = 0
        for a in values:
            for b in values:
                g = math.gcd(g, a - b)
        delta = F(k * g)
        pairs = realize_difference(delta, vals)
        assert sum((hi - lo for hi, lo in pairs), F(0)) == delta
        assert all(hi in vals and lo in vals for hi, lo in pairs)


class TestMachines:
    def test_uncovered_outcome(self):
        g = off_nash()
        s = MachineState(Profile.pure(g, 0, 0), (Transition(frozenset({0}), None, 0),))
        with pytest.raises(MalformedMachine):
            check_machine(g, StrategyMachine(2, (s,)))

    def test_bad_target(self):
        g = off_nash()
        s = MachineState(Profile.pure(g, 0, 0), (Transition(None, None, 3),))
        with pytest.raises(MalformedMachine):
            check_machine(g, StrategyMachine(2, (s,)))

    def test_transpose_round_trip(self):
        g = off_nash()
        _, m = build_witness(g, thm1_decide(g))
        assert m.transposed().transposed() == m


def parametric_machine(alpha, horizon):
    """Open with a1/c1 mixed against b2; reward a1 with a tilted equilibrium."""
    g = large_t(alpha)
    rho = (2 - F(alpha)) / (horizon - 1)
    punish = MachineState(Profile.pure(g, 1, 1), (Transition(None, None, 0),), "punish")
    reward = MachineState(
        Profile(MixedStrategy.pure(3, 1), MixedStrategy((rho, 1 - rho))),
        (Transition(None, None, 1),),
        "reward",
    )
    opening = MachineState(
        Profile(MixedStrategy((F(1, 4), F(0), F(3, 4))), MixedStrategy.pure(2, 1)),
        (Transition(frozenset({0}), None, 1), Transition(None, None, 0)),
        "opening",
    )
    return g, StrategyMachine(horizon, (punish, reward, opening), start=2)


@pytest.mark.parametrize("alpha", [F(1, 2), F(1), F(3, 2)])
def test_parametric_game_threshold(alpha):
    # Horizons above 3 - alpha leave room to repay the a1 mass exactly.
    for horizon in range(int(3 - alpha) + 1, 9):
        g, m = parametric_machine(alpha, horizon)
        assert is_spe(g, m)
        assert off_nash_states(g, m) == [2]


def test_parametric_game_witness():
    for alpha in (F(1, 2), F(1), F(3, 2)):
        g = large_t(alpha)
        round_trip(g, Regime.MM)
