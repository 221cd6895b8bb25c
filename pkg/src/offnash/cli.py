"""Command-line front end.

Games, machines and reports are JSON documents.  Rationals are written as
bare integers or ``"p/q"`` strings, never as decimals.

Exit codes: 0 success, 2 unparseable input, 3 invalid game or machine,
4 the game is not in the requested class, 5 a size cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from offnash.core import (
    GameError,
    MixedStrategy,
    Profile,
    Regime,
    RegimeError,
    StageGame,
    render_rational,
    to_rational,
)
from offnash.decide import (
    MixedThreat,
    PureOffNash,
    PureThreat,
    Verdict,
    classify_all,
    decide,
)
from offnash.games import BUILTIN, large_t
from offnash.nash import VSummary
from offnash.verify import LadderCapExceeded, is_spe, off_nash_states, payoff_set_ladder
from offnash.witness import (
    DEFAULT_CAP,
    HorizonCapExceeded,
    MachineState,
    MalformedMachine,
    StrategyMachine,
    TBound,
    Transition,
    build_witness,
)

EXIT_PARSE, EXIT_SEMANTIC, EXIT_NOT_IN_LS, EXIT_CAP = 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


# -- games ------------------------------------------------------------------


def _load_json(text: str, source: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def game_from_doc(doc: Any) -> StageGame:
    if not isinstance(doc, dict):
        raise GameError("a game document must be a JSON object")
    extra = sorted(set(doc) - {"rows", "cols", "u1", "u2"})
    if extra:
        raise GameError(f"unexpected fields {extra}; only two-player games are supported")
    missing = [k for k in ("rows", "cols", "u1", "u2") if k not in doc]
    if missing:
        raise GameError(f"missing fields {missing}")
    rows, cols = doc["rows"], doc["cols"]
    if not isinstance(rows, list) or not all(isinstance(x, str) for x in rows):
        raise GameError("rows must be a list of labels")
    if not isinstance(cols, list) or not all(isinstance(x, str) for x in cols):
        raise GameError("cols must be a list of labels")
    for name in ("u1", "u2"):
        m = doc[name]
        if not isinstance(m, list) or not all(isinstance(r, list) for r in m):
            raise GameError(f"{name} must be a matrix")
        if len(m) != len(rows) or any(len(r) != len(cols) for r in m):
            raise GameError(f"{name} must be {len(rows)}x{len(cols)}")
    return StageGame(
        tuple(tuple(to_rational(x) for x in r) for r in doc["u1"]),
        tuple(tuple(to_rational(x) for x in r) for r in doc["u2"]),
        tuple(rows),
        tuple(cols),
    )


def game_to_doc(g: StageGame) -> dict[str, Any]:
    return {
        "rows": list(g.row_labels),
        "cols": list(g.col_labels),
        "u1": [[render_rational(x) for x in r] for r in g.u1],
        "u2": [[render_rational(x) for x in r] for r in g.u2],
    }


def parse_game(text: str, source: str = "<game>") -> StageGame:
    doc = _load_json(text, source)
    try:
        return game_from_doc(doc)
    except GameError as exc:
        raise CliError(EXIT_SEMANTIC, f"{source}: {exc}") from exc


def dumps_game(g: StageGame) -> str:
    """Canonical one-line serialization; ``parse_game`` inverts it."""
    return json.dumps(game_to_doc(g), separators=(",", ":"))


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc.strerror}") from exc


def load_game(path: str) -> StageGame:
    return parse_game(_read(path), path)


# -- reports ----------------------------------------------------------------


def _vector(s: MixedStrategy) -> list[int | str]:
    return [render_rational(p) for p in s.probs]


def evidence_doc(g: StageGame, ev: object) -> dict[str, Any] | None:
    if isinstance(ev, PureOffNash):
        return {"kind": "pure_off_nash", "row": g.row_labels[ev.row], "col": g.col_labels[ev.col]}
    if isinstance(ev, PureThreat):
        better = g.row_labels[ev.better] if ev.player == 1 else g.col_labels[ev.better]
        return {
            "kind": "pure_threat",
            "player": ev.player,
            "row": g.row_labels[ev.row],
            "col": g.col_labels[ev.col],
            "better": better,
        }
    if isinstance(ev, MixedThreat):
        own, other = (g.row_labels, g.col_labels) if ev.player == 1 else (g.col_labels, g.row_labels)
        return {
            "kind": "mixed_threat",
            "player": ev.player,
            "strategy": _vector(ev.strategy),
            "action": other[ev.action],
            "bad": own[ev.bad],
            "anchor": own[ev.anchor] if ev.anchor is not None else None,
        }
    return None


def summary_doc(s: VSummary | None) -> dict[str, Any] | None:
    if s is None:
        return None
    return {
        "empty": s.empty,
        "v1": [render_rational(v) for v in s.v1_values],
        "v2": [render_rational(v) for v in s.v2_values],
        "v1_unique": s.v1_unique,
        "v2_unique": s.v2_unique,
    }


def verdict_doc(g: StageGame, v: Verdict) -> dict[str, Any]:
    return {
        "in_ls": v.in_ls,
        "case": v.case_id,
        "evidence": evidence_doc(g, v.evidence),
        "payoffs": summary_doc(v.summary),
    }


def bound_doc(b: TBound) -> dict[str, Any]:
    return {
        "regime": b.regime.value,
        "case": b.case_id,
        "t_min": b.t_min,
        "params": {k: render_rational(v) for k, v in sorted(b.params.items())},
    }


def machine_to_doc(g: StageGame, m: StrategyMachine) -> dict[str, Any]:
    def labels(sel: frozenset[int] | None, names: tuple[str, ...]) -> list[str] | str:
        return "*" if sel is None else [names[k] for k in sorted(sel)]

    return {
        "horizon": m.horizon,
        "start": m.start,
        "states": [
            {
                "label": s.label,
                "emit": [_vector(s.emit.s1), _vector(s.emit.s2)],
                "transitions": [
                    {
                        "rows": labels(t.rows, g.row_labels),
                        "cols": labels(t.cols, g.col_labels),
                        "next": t.target,
                    }
                    for t in s.transitions
                ],
            }
            for s in m.states
        ],
    }


def machine_from_doc(g: StageGame, doc: Any) -> StrategyMachine:
    """Parse a machine document; a whole witness report is accepted too."""
    try:
        if isinstance(doc, dict) and "machine" in doc:
            doc = doc["machine"]
        if not isinstance(doc, dict):
            raise MalformedMachine("a machine document must be a JSON object")
        horizon, start, states = doc["horizon"], doc.get("start", 0), doc["states"]
        if not isinstance(horizon, int) or not isinstance(start, int) or not isinstance(states, list):
            raise MalformedMachine("horizon and start must be integers, states a list")

        def select(sel: Any, names: tuple[str, ...]) -> frozenset[int] | None:
            if sel == "*":
                return None
            if not isinstance(sel, list):
                raise MalformedMachine(f"bad outcome class {sel!r}")
            index = {n: k for k, n in enumerate(names)}
            try:
                return frozenset(index[x] for x in sel)
            except KeyError as exc:
                raise MalformedMachine(f"unknown action {exc.args[0]!r}") from exc

        parsed = []
        for s in states:
            emit = s["emit"]
            if not isinstance(emit, list) or len(emit) != 2:
                raise MalformedMachine("emit must hold two probability vectors")
            profile = Profile(
                MixedStrategy(tuple(to_rational(x) for x in emit[0])),
                MixedStrategy(tuple(to_rational(x) for x in emit[1])),
            )
            trans = tuple(
                Transition(select(t["rows"], g.row_labels), select(t["cols"], g.col_labels), t["next"])
                for t in s["transitions"]
            )
            parsed.append(MachineState(profile, trans, str(s.get("label", ""))))
        return StrategyMachine(horizon, tuple(parsed), start)
    except (KeyError, TypeError) as exc:
        raise MalformedMachine(f"missing or mistyped field: {exc}") from exc
    except GameError as exc:
        raise MalformedMachine(str(exc)) from exc


# -- commands ---------------------------------------------------------------

_ORDER = (Regime.PP, Regime.MP, Regime.PM, Regime.MM)


def classify_doc(g: StageGame, source: str, regime: str = "all") -> dict[str, Any]:
    report: dict[str, Any] = {"game": source}
    if regime == "all":
        label = classify_all(g)
        verdicts = dict(label.verdicts)
        verdicts["pm"] = decide(g, Regime.PM)
        report["regimes"] = {r.value: verdict_doc(g, verdicts[r.value]) for r in _ORDER}
        report["delta"] = dict(label.delta_case)
    else:
        report["regimes"] = {regime: verdict_doc(g, decide(g, Regime(regime)))}
    return report


def _classify_job(job: tuple[str, str, str]) -> dict[str, Any]:
    text, source, regime = job
    return classify_doc(parse_game(text, source), source, regime)


def cmd_classify(paths: Sequence[str], regime: str = "all", jobs: int = 1) -> dict[str, Any]:
    texts = [(_read(p), p, regime) for p in paths]
    for text, source, _ in texts:
        parse_game(text, source)
    if jobs > 1 and len(texts) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_classify_job, texts))
    else:
        reports = [_classify_job(t) for t in texts]
    if len(reports) == 1:
        return reports[0]
    return {"reports": reports}


def cmd_witness(
    path: str, regime: str, cap: int = DEFAULT_CAP, horizon: int | None = None
) -> dict[str, Any]:
    g = load_game(path)
    reg = Regime(regime)
    v = decide(g, reg)
    if not v.in_ls:
        raise CliError(EXIT_NOT_IN_LS, f"{path}: not in the {regime} class")
    try:
        bound, machine = build_witness(g, v, reg, horizon=horizon, cap=cap)
    except HorizonCapExceeded as exc:
        raise CliError(
            EXIT_CAP, f"{path}: witness needs horizon {exc.bound.t_min}, above the cap {cap}"
        ) from exc
    except ValueError as exc:
        raise CliError(EXIT_SEMANTIC, f"{path}: {exc}") from exc
    spe = is_spe(g, machine, reg)
    off = off_nash_states(g, machine, reg)
    if not spe or not off:
        raise AssertionError("constructed witness failed its own verification")
    return {
        "game": path,
        "regime": regime,
        "verdict": verdict_doc(g, v),
        "t_bound": bound_doc(bound),
        "machine": machine_to_doc(g, machine),
        "check": {"is_spe": spe, "off_nash_states": off},
    }


def cmd_verify(game_path: str, machine_path: str, regime: str) -> dict[str, Any]:
    g = load_game(game_path)
    doc = _load_json(_read(machine_path), machine_path)
    reg = Regime(regime)
    try:
        machine = machine_from_doc(g, doc)
        spe = is_spe(g, machine, reg)
        off = off_nash_states(g, machine, reg)
    except (MalformedMachine, RegimeError) as exc:
        raise CliError(EXIT_SEMANTIC, f"{machine_path}: {exc}") from exc
    return {
        "game": game_path,
        "machine": machine_path,
        "regime": regime,
        "is_spe": spe,
        "off_nash_states": off,
        "locally_suboptimal": spe and bool(off),
    }


def cmd_oracle(path: str, t_max: int, cap: int) -> dict[str, Any]:
    g = load_game(path)
    if t_max < 1:
        raise CliError(EXIT_SEMANTIC, "--tmax must be at least 1")
    try:
        ladder = payoff_set_ladder(g, t_max, cap)
    except LadderCapExceeded as exc:
        raise CliError(EXIT_CAP, f"{path}: {exc}") from exc
    from offnash.nash import pure_nash

    ne = set(pure_nash(g))
    levels = []
    first = None
    for level in ladder.levels:
        off = [a for a in level.supportable if a not in ne]
        if off and first is None:
            first = level.t
        levels.append(
            {
                "t": level.t,
                "payoff_count": len(level.payoffs),
                "minpay": None if level.minpay is None else [render_rational(x) for x in level.minpay],
                "supportable": [[g.row_labels[i], g.col_labels[j]] for i, j in level.supportable],
                "off_nash": [[g.row_labels[i], g.col_labels[j]] for i, j in off],
            }
        )
    return {"game": path, "t_max": t_max, "levels": levels, "min_offnash_horizon": first}


def generate_games(
    rows: int, cols: int, low: int, high: int, count: int, seed: int
) -> list[StageGame]:
    """Uniform integer-payoff games, reproducible from ``seed``."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        u1 = [[rng.randint(low, high) for _ in range(cols)] for _ in range(rows)]
        u2 = [[rng.randint(low, high) for _ in range(cols)] for _ in range(rows)]
        out.append(StageGame(tuple(map(tuple, u1)), tuple(map(tuple, u2))))
    return out


# -- entry point ------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="offnash",
        description="Decide and exhibit non-equilibrium play inside subgame-perfect "
        "equilibria of finitely repeated two-player games.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="classify one or more game files")
    c.add_argument("paths", nargs="+")
    c.add_argument("--regime", choices=["pp", "mp", "pm", "mm", "all"], default="all")
    c.add_argument("--jobs", type=int, default=1, help="worker processes for batches")

    w = sub.add_parser("witness", help="build and self-check a witness machine")
    w.add_argument("path")
    w.add_argument("--regime", choices=["pp", "mp", "pm", "mm"], required=True)
    w.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest horizon to build")
    w.add_argument("--horizon", type=int, default=None, help="horizon (default: certified minimum)")

    v = sub.add_parser("verify", help="check a machine for subgame perfection")
    v.add_argument("game")
    v.add_argument("machine")
    v.add_argument("--regime", choices=["pp", "mp", "pm", "mm"], required=True)

    o = sub.add_parser("oracle", help="pure-strategy payoff-set oracle")
    o.add_argument("path")
    o.add_argument("--tmax", type=int, required=True)
    o.add_argument("--cap", type=int, default=10**5, help="largest payoff set per level")

    gen = sub.add_parser("gen", help="generate random integer-payoff games as JSON lines")
    gen.add_argument("--rows", type=int, required=True)
    gen.add_argument("--cols", type=int, required=True)
    gen.add_argument("--low", type=int, default=0)
    gen.add_argument("--high", type=int, required=True)
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out-dir", default=None, help="also write one file per game here")

    s = sub.add_parser("game", help="print a built-in game")
    s.add_argument("name", choices=sorted(BUILTIN))
    s.add_argument("--alpha", default=None, help="parameter of large_t, e.g. 1 or 1/2")
    return p


def _emit(doc: Any) -> None:
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")


def run(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "classify":
            _emit(cmd_classify(args.paths, args.regime, max(args.jobs, 1)))
        elif args.command == "witness":
            _emit(cmd_witness(args.path, args.regime, args.cap, args.horizon))
        elif args.command == "verify":
            _emit(cmd_verify(args.game, args.machine, args.regime))
        elif args.command == "oracle":
            _emit(cmd_oracle(args.path, args.tmax, args.cap))
        elif args.command == "gen":
            if args.low > args.high or args.rows < 1 or args.cols < 1 or args.count < 0:
                raise CliError(EXIT_SEMANTIC, "need rows, cols >= 1, count >= 0 and low <= high")
            games = generate_games(args.rows, args.cols, args.low, args.high, args.count, args.seed)
            if args.out_dir:
                out = Path(args.out_dir)
                out.mkdir(parents=True, exist_ok=True)
                for k, g in enumerate(games):
                    (out / f"game_{k:05d}.json").write_text(json.dumps(game_to_doc(g), indent=2) + "\n")
            for g in games:
                sys.stdout.write(dumps_game(g) + "\n")
        elif args.command == "game":
            if args.alpha is not None and args.name != "large_t":
                raise CliError(EXIT_SEMANTIC, "--alpha only applies to large_t")
            try:
                g = large_t(args.alpha) if args.alpha is not None else BUILTIN[args.name]()
            except GameError as exc:
                raise CliError(EXIT_SEMANTIC, str(exc)) from exc
            _emit(game_to_doc(g))
    except CliError as exc:
        print(f"offnash: error: {exc}", file=sys.stderr)
        return exc.code
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
