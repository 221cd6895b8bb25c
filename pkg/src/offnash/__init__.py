"""Non-equilibrium stage play inside subgame-perfect equilibria of finitely
repeated two-player games: decide it, build a witness, check the witness."""

from offnash.core import MixedStrategy, Profile, Regime, StageGame, make_game, transpose
from offnash.decide import DeltaLabel, Verdict, classify_all, decide
from offnash.nash import VSummary, extreme_equilibria_mm, pure_nash, v_summary
from offnash.verify import is_spe, off_nash_states, oracle_decide_pp, payoff_set_ladder
from offnash.witness import StrategyMachine, TBound, build_witness, t_bound

__all__ = [
    "DeltaLabel",
    "MixedStrategy",
    "Profile",
    "Regime",
    "StageGame",
    "StrategyMachine",
    "TBound",
    "VSummary",
    "Verdict",
    "build_witness",
    "classify_all",
    "decide",
    "extreme_equilibria_mm",
    "is_spe",
    "make_game",
    "off_nash_states",
    "oracle_decide_pp",
    "payoff_set_ladder",
    "pure_nash",
    "t_bound",
    "transpose",
    "v_summary",
]
