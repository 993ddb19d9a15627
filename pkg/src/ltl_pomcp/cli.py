"""Command line interface (``ltl-pomcp``)."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .automata import ltl_to_ldba
from .benchmarks import BenchmarkSpec, generate
from .graph import MEC, mec_decomposition
from .harness import (
    SEED_ENV,
    ConfigError,
    ExperimentConfig,
    load_automaton,
    parse_config,
    run_experiment,
    write_csv,
)
from .hoa import export_hoa
from .ltl import parse_ltl
from .pomdp import format_pomdp
from .product import build_product, format_product, parse_product
from .reward import sound_reward
from .support import CertifiedStructure, certify, underlying_mdp


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=1) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", help="model file")
    p.add_argument("--family", choices=["toy", "motivating", "grid", "rocksample", "hallway"])
    p.add_argument("--n", type=int)


def _formula_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ltl", help="LTL formula, translated by the builtin pipeline")
    p.add_argument("--hoa", help="HOA automaton file")
    p.add_argument("--formula", help="library formula name, e.g. phi5")


def _config_from(args) -> ExperimentConfig:
    seed = args.seed
    if os.environ.get(SEED_ENV):
        seed = int(os.environ[SEED_ENV])
    return ExperimentConfig(
        family=args.family, n=args.n, model=args.model, formula=args.formula, ltl=args.ltl, hoa=args.hoa,
        episodes=getattr(args, "episodes", 1), sims=getattr(args, "sims", 30_000),
        depth=getattr(args, "depth", 200), particles=getattr(args, "particles", 10_000),
        ucb=getattr(args, "ucb", 1.0), seed=seed, jobs=getattr(args, "jobs", 1),
        memo=not getattr(args, "no_memo", False),
    )


def _mecs_json(mecs: list[MEC], names, actions) -> list[dict]:
    out = []
    for m in sorted(mecs, key=lambda m: sorted(m.states)):
        out.append({
            "states": sorted(names[s] for s in m.states),
            "actions": {names[s]: sorted(actions[a] for a in m.actions[s]) for s in sorted(m.states)},
        })
    return out


# ---------------------------------------------------------------- commands


def cmd_translate(args) -> int:
    f = parse_ltl(args.ltl)
    ap = tuple(args.ap.split(",")) if args.ap else tuple(sorted(f.atoms()))
    a = ltl_to_ldba(f, ap)
    text = export_hoa(a, name=args.ltl)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"states: {a.num_states}", file=sys.stderr)
    return 0


def cmd_product(args) -> int:
    cfg = _config_from(args)
    cfg.validate()
    from .harness import load_model

    m = load_model(cfg)
    p = build_product(m, load_automaton(cfg, m))
    text = format_product(p)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    s, o, t = p.sizes()
    print(f"sizes: {s} / {o} / {t}", file=sys.stderr)
    return 0


def cmd_analyze(args) -> int:
    p = parse_product(Path(args.product).read_text())
    if args.emit in ("mecs", "amecs"):
        mecs = mec_decomposition(underlying_mdp(p))
        if args.emit == "amecs":
            mecs = [m for m in mecs if m.states & p.accepting]
        _emit(_mecs_json(mecs, p.state_names, p.action_names), args.out)
    else:
        cs, _ = certify(p, prune=not args.no_prune)
        _emit(cs.to_json()["winning_supports"], args.out)
    return 0


def cmd_certify(args) -> int:
    p = parse_product(Path(args.product).read_text())
    cs, b = certify(p, prune=not args.no_prune)
    d = cs.to_json()
    d["bsmdp_supports"] = len(b.states)
    _emit(d, args.out)
    return 0


def _restrict_to(cs: CertifiedStructure, supports: list[list[str]]) -> CertifiedStructure:
    g = cs.graph
    idx = g.p.state_index
    keep = set()
    for names in supports:
        sid = g.ids.get(frozenset(idx[n] for n in names))
        if sid is None or sid not in cs.winning:
            raise ConfigError(f"support {names} is not certified for this product")
        keep.add(sid)
    return CertifiedStructure(g, cs.accepting, frozenset(keep), cs.components, cs.component_of)


def cmd_reward(args) -> int:
    p = parse_product(Path(args.product).read_text())
    cs, _ = certify(p)
    if args.certified:
        cs = _restrict_to(cs, json.loads(Path(args.certified).read_text())["winning_supports"])
    b = {}
    for tok in args.belief.split(","):
        name, _, val = tok.strip().rpartition(":")
        if name not in p.state_index:
            raise ConfigError(f"unknown product state {name!r}")
        b[p.state_index[name]] = float(val)
    total = sum(b.values())
    if abs(total - 1) > 1e-6:
        raise ConfigError(f"belief sums to {total}, not 1")
    value, theta = sound_reward(b, cs)
    _emit({"reward": value, "theta_star": sorted(p.state_names[s] for s in theta) if theta else None}, None)
    return 0


def cmd_plan(args) -> int:
    cfg = _config_from(args)
    cfg.out_json = args.out
    rec = run_experiment(cfg)
    lo, hi = rec.ci95
    print(f"Pr = {rec.pr_hat:.3f} [{lo:.3f}, {hi:.3f}] over {rec.episodes} episodes", file=sys.stderr)
    if not args.out:
        _emit(rec.to_json(), None)
    return 0


def cmd_bench(args) -> int:
    m = generate(BenchmarkSpec(args.family, args.n))
    text = format_pomdp(m)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_experiment(args) -> int:
    cfg = parse_config(Path(args.config).read_text())
    if args.jobs:
        cfg.jobs = args.jobs
    rec = run_experiment(cfg)
    sys.stdout.write(write_csv(None, [rec]))
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ltl-pomcp", description="Certified planning for LTL objectives in POMDPs.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("translate", help="LTL to limit-deterministic automaton (HOA)")
    p.add_argument("--ltl", required=True)
    p.add_argument("--ap", help="comma-separated proposition order")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_translate)

    p = sub.add_parser("product", help="build the product model")
    _model_args(p)
    _formula_args(p)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_product, seed=0)

    p = sub.add_parser("analyze", help="end components of a product file")
    p.add_argument("--product", required=True)
    p.add_argument("--emit", choices=["mecs", "amecs", "winning"], default="amecs")
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("certify", help="certified winning supports of a product file")
    p.add_argument("--product", required=True)
    p.add_argument("--no-prune", action="store_true", help="keep supports outside accepting end components")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("reward", help="sound reward of a belief")
    p.add_argument("--product", required=True)
    p.add_argument("--certified", help="certified JSON; restricts to its winning supports")
    p.add_argument("--belief", required=True, help='"state:prob,state:prob"')
    p.set_defaults(fn=cmd_reward)

    p = sub.add_parser("plan", help="run planning episodes")
    _model_args(p)
    _formula_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episodes", type=int, default=1)
    p.add_argument("--sims", type=int, default=30_000)
    p.add_argument("--depth", type=int, default=200)
    p.add_argument("--particles", type=int, default=10_000)
    p.add_argument("--ucb", type=float, default=1.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-memo", action="store_true", help="re-root one tree per episode instead of memoising per belief")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("bench", help="benchmark models")
    bsub = p.add_subparsers(dest="bench_cmd", required=True)
    g = bsub.add_parser("generate")
    g.add_argument("--family", required=True, choices=["toy", "motivating", "grid", "rocksample", "hallway"])
    g.add_argument("--n", type=int)
    g.add_argument("--out")
    g.set_defaults(fn=cmd_bench)

    p = sub.add_parser("experiment", help="run a configured experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int)
    p.set_defaults(fn=cmd_experiment)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
