import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from offnash.core import best_rows
from offnash.games import no_best_response, none_to_new_ne
from offnash.lp import (
    EQ,
    GE,
    LE,
    Constraint,
    Infeasible,
    LinearProgram,
    LpError,
    Optimal,
    Unbounded,
    check_certificate,
    max_and_min,
    solve,
)
from offnash.nash import _br_constraints


def _gauss(a, b):
    n = len(a)
    m = [list(r) + [v] for r, v in zip(a, b)]
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c] != 0), None)
        if p is None:
            return None
        m[c], m[p] = m[p], m[c]
        m[c] = [v / m[c][c] for v in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [m[i][n] for i in range(n)]


def brute_force(lp: LinearProgram):
    """Optimal value by trying every basis of tight constraints; None if infeasible."""
    n = lp.size
    rows = [(c.row, c.rhs) for c in lp.constraints]
    rows += [(tuple(F(int(k == i)) for k in range(n)), F(0)) for i in range(n) if lp.nonneg[i]]
    best = None
    for subset in itertools.combinations(range(len(rows)), n):
        x = _gauss([rows[k][0] for k in subset], [rows[k][1] for k in subset])
        if x is None or not lp.feasible(x):
            continue
        v = lp.value(x)
        if best is None or v > best:
            best = v
    return best


class TestExamples:
    def test_simplex_corner(self):
        out = solve(LinearProgram((1, 0), [((1, 1), EQ, 1)]))
        assert out == Optimal(F(1), (F(1), F(0)))

    def test_infeasible(self):
        out = solve(LinearProgram((1,), [((1,), GE, 2), ((1,), LE, 1)]))
        assert isinstance(out, Infeasible)

    def test_unbounded(self):
        assert isinstance(solve(LinearProgram((1, 1), [((1, -1), LE, 1)])), Unbounded)

    def test_free_variable(self):
        out = solve(LinearProgram((-1,), [((1,), GE, -3)], nonneg=(False,)))
        assert out.value == 3 and out.point == (F(-3),)

    def test_threat_program(self):
        # Maximize the weight on c1 while keeping a2 a best reply.
        g = no_best_response()
        cons = [((1, 1, 1), EQ, 1)]
        cons.append((tuple(g.u2[i][0] - g.u2[i][1] for i in range(3)), GE, 0))
        out = solve(LinearProgram((0, 0, 1), cons))
        assert out.value == F(1, 2)
        assert out.point == (F(1, 2), F(0), F(1, 2))

    def test_component_range(self):
        g = none_to_new_ne()
        cons = _br_constraints(g, 1, best_rows(g, 1))
        form = tuple(g.u2[i][1] for i in range(2))
        assert max_and_min(cons, (True, True), form) == (3, 3)

    def test_full_simplex_range(self):
        g = none_to_new_ne()
        form = tuple(g.u2[i][0] for i in range(2))
        assert max_and_min([((1, 1), EQ, 1)], (True, True), form) == (4, 0)

    def test_constant_form(self):
        assert max_and_min([((1, 1, 1), EQ, 1)], (True,) * 3, (0, 0, 0)) == (0, 0)
        assert isinstance(max_and_min([((1, 1), EQ, -1)], (True, True), (1, 0)), Infeasible)

    def test_bad_input(self):
        with pytest.raises(LpError):
            LinearProgram((1,), [((1, 1), LE, 1)])
        with pytest.raises(LpError):
            Constraint((1,), "<", 1)


coef = st.integers(-4, 4).map(F)


@st.composite
def boxed_programs(draw):
    n = draw(st.integers(1, 6))
    nonneg = tuple(draw(st.lists(st.booleans(), min_size=n, max_size=n)))
    k = draw(st.integers(0, 12 - n - nonneg.count(False)))
    relation = st.sampled_from([LE, GE, EQ, LE, LE])
    cons = [
        Constraint(tuple(draw(st.lists(coef, min_size=n, max_size=n))), draw(relation), draw(st.integers(-6, 6)))
        for _ in range(k)
    ]
    # A box keeps every program bounded, so brute force sees the optimum.
    for i in range(n):
        e = tuple(F(int(j == i)) for j in range(n))
        cons.append(Constraint(e, LE, draw(st.integers(0, 5))))
        if not nonneg[i]:
            cons.append(Constraint(e, GE, -draw(st.integers(0, 5))))
    return LinearProgram(tuple(draw(st.lists(coef, min_size=n, max_size=n))), tuple(cons), nonneg)


@settings(max_examples=150, deadline=None)
@given(boxed_programs())
def test_matches_vertex_enumeration(lp):
    out = solve(lp)
    best = brute_force(lp)
    if best is None:
        assert isinstance(out, Infeasible)
    else:
        assert isinstance(out, Optimal)
        assert out.value == best
        assert lp.feasible(out.point) and lp.value(out.point) == best
        assert check_certificate(lp, out)


@settings(max_examples=100, deadline=None)
@given(boxed_programs())
def test_deterministic(lp):
    a, b = solve(lp), solve(lp)
    assert a == b
    if isinstance(a, Optimal):
        assert a.point == b.point and a.dual == b.dual


def test_certificate_rejects_a_wrong_value():
    lp = LinearProgram((1, 0), [((1, 1), EQ, 1)])
    out = solve(lp)
    assert check_certificate(lp, out)
    assert not check_certificate(lp, Optimal(F(1, 2), (F(1, 2), F(1, 2)), out.dual))
