"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line that the terminal summary prints at the
end of the run (see ``pytest_terminal_summary`` in conftest.py).
"""

import functools
import importlib
import json
import random
import subprocess
import sys
import time
from fractions import Fraction as F

import pytest

import offnash.lp as lp_module
from conftest import ensemble
from offnash.core import Profile, Regime
from offnash.decide import DifferenceSet, classify_all, decide, subset_sum_reachable, thm1_decide
from offnash.games import (
    every_ne,
    large_t,
    new_ne,
    no_best_response,
    no_best_response_flip,
    no_multiset_sum,
    none_to_new_ne,
    none_to_new_ne_flip,
    off_nash,
    off_nash_dom,
)
from offnash.nash import extreme_equilibria_mm, support_enumeration, v_summary
from offnash.verify import is_spe, off_nash_states, oracle_decide_pp, oracle_min_horizon
from offnash.witness import build_witness, t_bound
from test_decide import bounded_sum
from test_nash import nondegenerate_games

# ``offnash.decide`` as an attribute is the re-exported function, not the module.
decide_module = importlib.import_module("offnash.decide")

RESULTS: dict[int, str] = {}
SEED = 20240601
ENSEMBLE_03 = ensemble(0, 3, 500, SEED)
ENSEMBLE_05 = ensemble(0, 5, 500, SEED + 100)
ORACLE_T = 8


def criterion(number: int, title: str):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                RESULTS[number] = f"criterion {number} FAIL  {title}: {type(exc).__name__}: {exc}"
                raise
            took = time.perf_counter() - start
            RESULTS[number] = f"criterion {number} PASS  {title}: {detail} ({took:.1f}s)"

        return run

    return wrap


def positive_pairs(games):
    for g in games:
        for regime in Regime:
            v = decide(g, regime)
            if v.in_ls:
                yield g, regime, v


GOLDEN = [
    ("off_nash", off_nash, {"pp": True}, None),
    ("every_ne", every_ne, {"pp": False, "mp": False, "pm": False, "mm": False}, None),
    ("no_best_response", no_best_response, {"pp": False, "mp": True, "mm": True}, ("pp_to_mp", 3)),
    ("none_to_new_ne", none_to_new_ne, {"pp": False, "mp": True, "mm": True}, ("pp_to_mp", 1)),
    ("new_ne", new_ne, {"pp": False, "mp": True, "mm": True}, ("pp_to_mp", 2)),
    ("no_multiset_sum", no_multiset_sum, {"pp": False, "mp": False, "mm": True}, ("mp_to_mm", 3)),
    ("none_to_new_ne_flip", none_to_new_ne_flip, {"pp": False, "mp": False, "mm": True}, ("mp_to_mm", 1)),
    ("no_best_response_flip", no_best_response_flip, {"pp": False, "mp": False, "mm": True}, ("mp_to_mm", 4)),
    ("large_t(1)", lambda: large_t(1), {"mm": True}, None),
    ("off_nash_dom", off_nash_dom, {"pp": True}, None),
]


@criterion(1, "golden classifications")
def test_criterion_1_golden():
    slowest = 0.0
    for name, factory, flags, case in GOLDEN:
        start = time.perf_counter()
        g = factory()
        label = classify_all(g)
        got = {"pp": label.pp_in_ls, "mp": label.mp_in_ls, "mm": label.mm_in_ls}
        got["pm"] = decide(g, Regime.PM).in_ls
        took = time.perf_counter() - start
        slowest = max(slowest, took)
        for regime, want in flags.items():
            assert got[regime] == want, f"{name}: {regime} in_ls is {got[regime]}"
        if case is not None:
            assert label.delta_case[case[0]] == case[1], f"{name}: {label.delta_case}"
        assert took < 1.0, f"{name} took {took:.2f}s"
    return f"{len(GOLDEN)} games, slowest {slowest:.2f}s"


@criterion(2, "pure regime decider vs payoff-set oracle")
def test_criterion_2_oracle():
    positive = checked = 0
    for g in ENSEMBLE_03:
        v = thm1_decide(g)
        if v.in_ls:
            positive += 1
            bound = t_bound(g, v).t_min
            if bound <= ORACLE_T:
                checked += 1
                assert oracle_decide_pp(g, bound), f"oracle misses a positive game at T={bound}: {g}"
        else:
            assert oracle_min_horizon(g, ORACLE_T) is None, f"oracle finds off-Nash play: {g}"
    assert len(ENSEMBLE_03) >= 500
    return f"{len(ENSEMBLE_03)} games, {positive} positive, {checked} confirmed at their bound"


@criterion(3, "witness round-trip")
def test_criterion_3_witness():
    g = off_nash()
    _, m = build_witness(g, thm1_decide(g), cap=10**4)
    assert m.horizon == 2
    assert m.states[m.start].emit == Profile.pure(g, 1, 0)
    goldens = [factory() for _, factory, _, _ in GOLDEN]
    count = 0
    for g, regime, v in positive_pairs(goldens + ENSEMBLE_03):
        _, m = build_witness(g, v, regime, cap=10**4)
        assert is_spe(g, m, regime), f"{regime.value} witness is not subgame perfect: {g}"
        assert off_nash_states(g, m, regime), f"{regime.value} witness never leaves equilibrium: {g}"
        count += 1
    return f"{count} (game, regime) witnesses verified"


@criterion(4, "regime inclusions and payoff-set lemmas")
def test_criterion_4_inclusions():
    violations = []
    for g in ENSEMBLE_03 + ENSEMBLE_05:
        label = classify_all(g)
        pp, mp = v_summary(g, Regime.PP), v_summary(g, Regime.MP)
        checks = {
            "pp implies mp": label.mp_in_ls or not label.pp_in_ls,
            "mp implies mm": label.mm_in_ls or not label.mp_in_ls,
            "lemma 5": not (pp.v1_unique and pp.v2_many and not label.pp_in_ls and label.mp_in_ls),
            "lemma 6": not (pp.v1_many and pp.v2_many and label.mp_in_ls and not label.pp_in_ls),
            "lemma 7": not (mp.v1_many and mp.v2_many and label.mm_in_ls and not label.mp_in_ls),
            "lemma 8": not (pp.v1_many and pp.v2_many and label.mm_in_ls and not label.pp_in_ls),
        }
        violations += [(name, g) for name, ok in checks.items() if not ok]
    assert not violations, violations[:3]
    return f"{len(ENSEMBLE_03) + len(ENSEMBLE_05)} games, 0 violations"


@criterion(5, "equilibrium machinery self-checks")
def test_criterion_5_machinery(monkeypatch):
    games = nondegenerate_games(200, SEED)
    for g in games:
        assert extreme_equilibria_mm(g) == support_enumeration(g), g

    inner_checks = []
    original_check = lp_module.check_certificate
    original_solve = lp_module.solve
    optimal = []

    def spy_check(lp, outcome):
        ok = original_check(lp, outcome)
        inner_checks.append(ok)
        return ok

    def spy_solve(lp):
        out = original_solve(lp)
        if isinstance(out, lp_module.Optimal):
            # Re-check independently of the solver's own self-test.
            optimal.append(original_check(lp, out))
        return out

    monkeypatch.setattr(lp_module, "check_certificate", spy_check)
    for module in (lp_module, decide_module):
        monkeypatch.setattr(module, "solve", spy_solve)
    for g in ENSEMBLE_03 + ENSEMBLE_05:
        for regime in Regime:
            decide(g, regime)
    assert optimal and all(optimal) and all(inner_checks)
    assert len(inner_checks) == len(optimal), "a solve returned without its certificate check"

    rng = random.Random(SEED)
    instances = 0
    for _ in range(1200):
        payoffs = [F(rng.randint(-6, 6), rng.choice([1, 2, 3, 4])) for _ in range(rng.randint(1, 3))]
        x = F(rng.randint(-8, 8), rng.choice([1, 2, 4]))
        d = DifferenceSet.of(payoffs)
        got = subset_sum_reachable(x, d)
        if bounded_sum(x, d.values, 8):
            assert got, (x, d)
        g_ = d.gcd
        assert got == (x == 0 if g_ is None else (x / g_).denominator == 1)
        instances += 1
    return f"{len(games)} nondegenerate games, {len(optimal)} certified solves, {instances} subset-sum instances"


def offnash(*argv: str) -> bytes:
    cmd = [sys.executable, "-m", "offnash.cli", *argv]
    return subprocess.run(cmd, capture_output=True, check=True).stdout


@criterion(6, "reproducible reports")
def test_criterion_6_reproducible(tmp_path):
    gen = ("gen", "--rows", "3", "--cols", "3", "--high", "3", "--count", "12", "--seed", "77")
    first = offnash(*gen, "--out-dir", str(tmp_path / "a"))
    assert first == offnash(*gen, "--out-dir", str(tmp_path / "b"))
    paths = sorted(str(p) for p in (tmp_path / "a").glob("*.json"))
    for p in paths:
        assert (tmp_path / "b" / p.rsplit("/", 1)[1]).read_bytes() == open(p, "rb").read()

    serial = offnash("classify", *paths)
    assert serial == offnash("classify", *paths)
    assert serial == offnash("classify", *paths, "--jobs", "4")
    assert serial == offnash("classify", *paths, "--jobs", "2")

    compared = 3
    for p, report in zip(paths, json.loads(serial)["reports"]):
        for regime, verdict in report["regimes"].items():
            if verdict["in_ls"]:
                w = offnash("witness", p, "--regime", regime)
                assert w == offnash("witness", p, "--regime", regime)
                (tmp_path / "w.json").write_bytes(w)
                v = offnash("verify", p, str(tmp_path / "w.json"), "--regime", regime)
                assert v == offnash("verify", p, str(tmp_path / "w.json"), "--regime", regime)
                compared += 2
        o = offnash("oracle", p, "--tmax", "4")
        assert o == offnash("oracle", p, "--tmax", "4")
        compared += 1
    return f"{compared} command outputs byte-identical across runs and --jobs 1/2/4"


@pytest.fixture(scope="module", autouse=True)
def _publish():
    yield
    sys.modules["conftest"].ACCEPTANCE.update(RESULTS)
