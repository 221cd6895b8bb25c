from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from offnash.cli import generate_games
from offnash.core import MixedStrategy, StageGame, make_game

F = Fraction


def ensemble(low: int, high: int, count: int, seed: int) -> list[StageGame]:
    """Games with 2..3 rows and columns, cycling through the four shapes."""
    shapes = [(2, 2), (2, 3), (3, 2), (3, 3)]
    out: list[StageGame] = []
    for k, (r, c) in enumerate(shapes):
        n = count // len(shapes) + (1 if k < count % len(shapes) else 0)
        out.extend(generate_games(r, c, low, high, n, seed + k))
    return out


@st.composite
def games(draw, max_rows: int = 3, max_cols: int = 3, low: int = 0, high: int = 3) -> StageGame:
    rows = draw(st.integers(1, max_rows))
    cols = draw(st.integers(1, max_cols))
    cell = st.integers(low, high)
    u1 = draw(st.lists(st.lists(cell, min_size=cols, max_size=cols), min_size=rows, max_size=rows))
    u2 = draw(st.lists(st.lists(cell, min_size=cols, max_size=cols), min_size=rows, max_size=rows))
    return make_game(u1, u2)


@st.composite
def mixtures(draw, size: int) -> MixedStrategy:
    weights = draw(st.lists(st.integers(0, 6), min_size=size, max_size=size))
    if not any(weights):
        weights[draw(st.integers(0, size - 1))] = 1
    total = sum(weights)
    return MixedStrategy(tuple(F(w, total) for w in weights))


def simplex_grid(size: int, steps: int = 4) -> list[MixedStrategy]:
    """Every mixture whose probabilities are multiples of 1/steps."""
    out = []
    for combo in itertools.product(range(steps + 1), repeat=size):
        if sum(combo) == steps:
            out.append(MixedStrategy(tuple(F(c, steps) for c in combo)))
    return out


@pytest.fixture
def tmp_game(tmp_path):
    """Write a game document and return its path."""
    from offnash.cli import game_to_doc
    import json

    def write(g: StageGame, name: str = "game.json") -> str:
        path = tmp_path / name
        path.write_text(json.dumps(game_to_doc(g)))
        return str(path)

    return write


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
