"""Exact numbers, two-player stage games, strategies and best responses."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction
Matrix = tuple[tuple[Fraction, ...], ...]

_RATIONAL = re.compile(r"([+-]?\d+)(?:/(\d+))?")


class GameError(ValueError):
    """Raised for malformed games, strategies or dimension mismatches."""


class RegimeError(ValueError):
    """Raised when a mixed strategy sits in a slot the regime keeps pure."""


def to_rational(value: object) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string into an exact Fraction.

    Floats are refused: most of them do not denote the rational a user typed.
    """
    if isinstance(value, bool):
        raise GameError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        match = _RATIONAL.fullmatch(value.strip())
        if match is None:
            raise GameError(f"not a rational: {value!r}")
        if match.group(2) is not None and int(match.group(2)) == 0:
            raise GameError(f"zero denominator: {value!r}")
        return Fraction(value.strip())
    raise GameError(f"not a rational: {value!r}")


def render_rational(q: Fraction) -> int | str:
    """Canonical rendering: a bare int when integral, else ``"p/q"``."""
    if q.denominator == 1:
        return q.numerator
    return f"{q.numerator}/{q.denominator}"


class Regime(enum.Enum):
    PP = "pp"
    MP = "mp"
    PM = "pm"
    MM = "mm"

    def pure_slots(self) -> tuple[bool, bool]:
        """Which of (player 1, player 2) are restricted to pure actions."""
        return {
            Regime.PP: (True, True),
            Regime.MP: (False, True),
            Regime.PM: (True, False),
            Regime.MM: (False, False),
        }[self]

    def swapped(self) -> Regime:
        return {Regime.MP: Regime.PM, Regime.PM: Regime.MP}.get(self, self)


@dataclass(frozen=True)
class MixedStrategy:
    probs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        probs = tuple(to_rational(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if not probs:
            raise GameError("empty strategy")
        if any(p < 0 for p in probs):
            raise GameError("negative probability")
        if sum(probs) != 1:
            raise GameError("probabilities must sum to 1")

    @classmethod
    def pure(cls, size: int, action: int) -> MixedStrategy:
        if not 0 <= action < size:
            raise GameError(f"action {action} out of range for {size} actions")
        return cls(tuple(Fraction(int(k == action)) for k in range(size)))

    @classmethod
    def mix(cls, size: int, weights: dict[int, Fraction]) -> MixedStrategy:
        """Build a strategy from a sparse {action: probability} map."""
        return cls(tuple(to_rational(weights.get(k, 0)) for k in range(size)))

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, k: int) -> Fraction:
        return self.probs[k]

    def support(self) -> tuple[int, ...]:
        return tuple(k for k, p in enumerate(self.probs) if p > 0)

    def is_pure(self) -> bool:
        return len(self.support()) == 1

    def pure_action(self) -> int:
        (action,) = self.support()
        return action


@dataclass(frozen=True)
class Profile:
    s1: MixedStrategy
    s2: MixedStrategy

    @classmethod
    def pure(cls, g: StageGame, row: int, col: int) -> Profile:
        return cls(MixedStrategy.pure(g.rows, row), MixedStrategy.pure(g.cols, col))

    def swapped(self) -> Profile:
        return Profile(self.s2, self.s1)

    def is_pure(self) -> bool:
        return self.s1.is_pure() and self.s2.is_pure()


def _default_labels(count: int, player: int) -> tuple[str, ...]:
    letters = "abcdefghijklmnopqrstuvwxyz"
    return tuple(
        f"{letters[k]}{player}" if k < len(letters) else f"x{k}_{player}"
        for k in range(count)
    )


def _as_matrix(rows: Iterable[Iterable[object]]) -> Matrix:
    return tuple(tuple(to_rational(x) for x in row) for row in rows)


@dataclass(frozen=True)
class StageGame:
    """A finite two-player game; player 1 picks rows, player 2 picks columns."""

    u1: Matrix
    u2: Matrix
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        u1 = _as_matrix(self.u1)
        u2 = _as_matrix(self.u2)
        if not u1 or not u1[0]:
            raise GameError("a game needs at least one row and one column")
        rows, cols = len(u1), len(u1[0])
        for name, m in (("u1", u1), ("u2", u2)):
            if len(m) != rows or any(len(r) != cols for r in m):
                raise GameError(f"{name} must be a {rows}x{cols} matrix")
        row_labels = tuple(self.row_labels) or _default_labels(rows, 1)
        col_labels = tuple(self.col_labels) or _default_labels(cols, 2)
        if len(row_labels) != rows or len(col_labels) != cols:
            raise GameError("label count does not match the payoff dimensions")
        if len(set(row_labels)) != rows or len(set(col_labels)) != cols:
            raise GameError("action labels must be distinct")
        object.__setattr__(self, "u1", u1)
        object.__setattr__(self, "u2", u2)
        object.__setattr__(self, "row_labels", row_labels)
        object.__setattr__(self, "col_labels", col_labels)

    @property
    def rows(self) -> int:
        return len(self.u1)

    @property
    def cols(self) -> int:
        return len(self.u1[0])

    def payoff(self, who: int) -> Matrix:
        if who == 1:
            return self.u1
        if who == 2:
            return self.u2
        raise GameError(f"player index must be 1 or 2, got {who}")

    def actions(self, who: int) -> int:
        return self.rows if who == 1 else self.cols


def _check_profile(g: StageGame, p: Profile) -> None:
    if len(p.s1) != g.rows or len(p.s2) != g.cols:
        raise GameError(
            f"profile of shape {len(p.s1)}x{len(p.s2)} does not fit a {g.rows}x{g.cols} game"
        )


def row_payoffs(g: StageGame, who: int, s2: MixedStrategy) -> list[Fraction]:
    """Payoff of each pure row against ``s2``."""
    m = g.payoff(who)
    return [sum((q * x for q, x in zip(s2.probs, m[i]) if q), Fraction(0)) for i in range(g.rows)]


def col_payoffs(g: StageGame, who: int, s1: MixedStrategy) -> list[Fraction]:
    """Payoff of each pure column against ``s1``."""
    m = g.payoff(who)
    return [
        sum((s1.probs[i] * m[i][j] for i in range(g.rows) if s1.probs[i]), Fraction(0))
        for j in range(g.cols)
    ]


def expected_payoff(g: StageGame, who: int, p: Profile) -> Fraction:
    _check_profile(g, p)
    per_row = row_payoffs(g, who, p.s2)
    return sum((x * v for x, v in zip(p.s1.probs, per_row) if x), Fraction(0))


def is_best_response(g: StageGame, who: int, p: Profile) -> bool:
    # Payoff is linear in the player's own mixture, so the best mixed reply
    # is never better than the best pure one.
    _check_profile(g, p)
    if who == 1:
        options = row_payoffs(g, 1, p.s2)
    elif who == 2:
        options = col_payoffs(g, 2, p.s1)
    else:
        raise GameError(f"player index must be 1 or 2, got {who}")
    return expected_payoff(g, who, p) == max(options)


def check_regime(p: Profile, regime: Regime) -> None:
    pure1, pure2 = regime.pure_slots()
    if pure1 and not p.s1.is_pure():
        raise RegimeError(f"player 1 must play a pure action in regime {regime.value}")
    if pure2 and not p.s2.is_pure():
        raise RegimeError(f"player 2 must play a pure action in regime {regime.value}")


def is_stage_nash(g: StageGame, p: Profile, regime: Regime = Regime.MM) -> bool:
    check_regime(p, regime)
    return is_best_response(g, 1, p) and is_best_response(g, 2, p)


def transpose(g: StageGame) -> StageGame:
    """Swap the players: the old column player now picks rows."""
    u1 = tuple(tuple(g.u2[i][j] for i in range(g.rows)) for j in range(g.cols))
    u2 = tuple(tuple(g.u1[i][j] for i in range(g.rows)) for j in range(g.cols))
    return StageGame(u1, u2, g.col_labels, g.row_labels)


def column_max(g: StageGame, col: int) -> Fraction:
    return max(g.u1[i][col] for i in range(g.rows))


def best_rows(g: StageGame, col: int) -> tuple[int, ...]:
    top = column_max(g, col)
    return tuple(i for i in range(g.rows) if g.u1[i][col] == top)


def best_cols(g: StageGame, row: int) -> tuple[int, ...]:
    top = max(g.u2[row])
    return tuple(j for j in range(g.cols) if g.u2[row][j] == top)


def make_game(
    u1: Sequence[Sequence[object]],
    u2: Sequence[Sequence[object]],
    row_labels: Sequence[str] | None = None,
    col_labels: Sequence[str] | None = None,
) -> StageGame:
    """Convenience constructor accepting nested lists of ints, Fractions or "p/q"."""
    return StageGame(
        tuple(tuple(r) for r in u1),
        tuple(tuple(r) for r in u2),
        tuple(row_labels or ()),
        tuple(col_labels or ()),
    )
