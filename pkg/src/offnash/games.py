"""Small reference games used by the tests, the docs and ``offnash game``."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

from offnash.core import GameError, StageGame, make_game, to_rational


def off_nash() -> StageGame:
    """Two rounds suffice for a non-equilibrium first round."""
    return make_game([[3, 0], [2, 1]], [[1, 1], [1, 1]])


def off_nash_dom() -> StageGame:
    """A cooperative profile sustained by a grim trigger and a good ending."""
    return make_game(
        [[3, 0, 0], [4, 2, 0], [0, 1, 1]],
        [[3, 4, 0], [0, 2, 1], [0, 0, 1]],
    )


def every_ne() -> StageGame:
    """Every profile is an equilibrium."""
    return make_game([[0, 1], [0, 1]], [[0, 0], [1, 1]])


def large_t(alpha: Fraction | int | str = 1) -> StageGame:
    """The parametric game; smaller ``alpha`` pushes the first usable horizon out."""
    a = to_rational(alpha)
    if a >= 2:
        raise GameError("alpha must be below 2")
    return make_game([[3, a], [3, 2], [a, 2]], [[2, 1], [2, 2], [1, 2]])


def no_best_response() -> StageGame:
    return make_game([[3, 1], [3, 2], [1, 2]], [[2, 1], [2, 2], [1, 2]])


def none_to_new_ne() -> StageGame:
    """No pure equilibrium, yet mixing by player 1 creates some."""
    return make_game([[4, 1, 2, 0], [0, 1, 2, 4]], [[0, 3, 3, 4], [4, 3, 3, 0]])


def new_ne() -> StageGame:
    return make_game([[4, 1, 0], [0, 1, 4]], [[4, 3, 0], [0, 3, 4]])


def none_to_new_ne_flip() -> StageGame:
    return make_game([[0, 4], [3, 3], [3, 3], [4, 0]], [[4, 0], [1, 1], [2, 2], [0, 4]])


def new_ne_flip() -> StageGame:
    return make_game([[4, 0], [3, 3], [0, 4]], [[4, 0], [1, 1], [0, 4]])


def no_multiset_sum() -> StageGame:
    """Payoff gaps of one half cannot be paid back with whole-number differences."""
    return make_game(
        [[3, "3/2"], [3, 2], ["5/2", 2]],
        [[2, 1], [2, 2], [1, 2]],
    )


def no_best_response_flip() -> StageGame:
    return make_game([[2, 2, 1], [1, 2, 2]], [[3, 3, 1], [1, 2, 2]])


BUILTIN: dict[str, Callable[[], StageGame]] = {
    "off_nash": off_nash,
    "off_nash_dom": off_nash_dom,
    "every_ne": every_ne,
    "large_t": large_t,
    "no_best_response": no_best_response,
    "none_to_new_ne": none_to_new_ne,
    "new_ne": new_ne,
    "none_to_new_ne_flip": none_to_new_ne_flip,
    "new_ne_flip": new_ne_flip,
    "no_multiset_sum": no_multiset_sum,
    "no_best_response_flip": no_best_response_flip,
}
