"""End-to-end acceptance checks, one summary line per criterion.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary block at
the end of the run lists PASS or FAIL for each criterion. The grid runs use
the full planner configuration and take a few minutes each.
"""

import json
import random
import time
from collections import Counter

import pytest

from acceptance_log import report
from ltl_pomcp.automata import accepts_lasso, letter_names, ltl_to_ldba
from ltl_pomcp.benchmarks import FORMULAS, BenchmarkSpec, fixture_automaton, generate
from ltl_pomcp.graph import mec_decomposition
from ltl_pomcp.harness import ExperimentConfig, run_experiment
from ltl_pomcp.ltl import evaluate_lasso, parse_ltl
from ltl_pomcp.planner import Planner, PlannerConfig, run_episodes
from ltl_pomcp.product import build_product
from ltl_pomcp.reward import sound_reward
from ltl_pomcp.support import certify, underlying_mdp
from oracles import (
    language_corpus,
    lasso_words,
    policy_success_rate,
    sample_partially_winning_beliefs,
)
from test_graph import brute_force_mecs, random_mdp
from test_support import (
    random_products,
    reachable_beliefs,
    support_policy_oracle,
)

pytestmark = pytest.mark.slow


# ---------------------------------------------------------------- 1: toy


TOY_PW = {
    ("s7_0", "s8_0"),
    ("s7_sink", "s8_0"),
    ("s7_0", "s7_sink", "s8_0"),
    ("s8_0", "s8_sink"),
    ("s7_0", "s8_0", "s8_sink"),
    ("s7_sink", "s8_0", "s8_sink"),
    ("s7_0", "s7_sink", "s8_0", "s8_sink"),
}


def test_1a_toy_certification(toy_certified):
    cs = toy_certified
    p = cs.graph.p
    winning = [cs.graph.name(w) for w in cs.winning]
    acts = {p.action_names[a] for w in cs.winning for a in cs.component_actions(w)}
    pw = cs.partially_winning_map()
    pw_names = {tuple(cs.graph.name(k)) for k in pw}
    contained = {tuple(tuple(cs.graph.name(x)) for x in v) for v in pw.values()}
    ok = winning == [["s8_0"]] and acts == {"r", "d"} and pw_names == TOY_PW and contained == {(("s8_0",),)}
    report("1a toy certification", ok, f"winning={winning} actions={sorted(acts)} partially winning={len(pw)} entries")


def test_1b_toy_trace(toy_certified):
    p = toy_certified.graph.p
    r = Planner(p, toy_certified, PlannerConfig(seed=0)).execute_episode(0)
    counts = r.particles[-1]
    mass = counts.get("s8_0", 0) / sum(counts.values())
    ok = r.actions == ["r", "d", "d", "l", "d", "stop['s8_0']"] and abs(mass - 0.8) <= 0.02 and r.reason == "terminal"
    report("1b toy seeded trace", ok, f"actions={','.join(r.actions)} particle mass on s8_0={mass:.4f}")


def test_1c_toy_success_rate(toy_certified):
    p = toy_certified.graph.p
    t0 = time.perf_counter()
    rs = run_episodes(Planner(p, toy_certified, PlannerConfig(seed=0)), 1000)
    secs = time.perf_counter() - t0
    rate = sum(r.success for r in rs) / len(rs)
    ok = abs(rate - 0.8) <= 0.04 and secs < 300
    report("1c toy 1000 episodes", ok, f"success={rate:.3f} (target 0.8 +- 0.04) in {secs:.1f}s")


# ---------------------------------------------------------------- 2: motivating


def test_2_motivating(motivating_product, motivating_certified):
    p, cs = motivating_product, motivating_certified
    base = lambda xs: sorted({p.state_names[s].split("_")[0] for s in xs})
    amecs = sorted(base(m.states) for m in mec_decomposition(underlying_mdp(p)) if m.states & p.accepting)
    territory = {p.state_index[n] for n in ("s0_0", "s3_0")}
    no_territory = not any(cs.graph.supports[w] & territory for w in cs.winning)
    t0 = time.perf_counter()
    picks = Counter()
    for i in range(100):
        pl = Planner(p, cs, PlannerConfig(sims=30_000, seed=i))
        a, _ = pl.search(p.b0, pl.g.intern(p.b0), random.Random(f"motivating|{i}"))
        picks[pl.action_name(a)] += 1
    ok = amecs == [["s0", "s3"], ["s2", "s5"]] and no_territory and picks["c"] >= 95
    report(
        "2 motivating example",
        ok,
        f"accepting MECs={amecs} winning support over s0/s3={not no_territory} "
        f"c chosen {picks['c']}/100 ({time.perf_counter() - t0:.1f}s)",
    )


# ---------------------------------------------------------------- 3: sizes


SIZES = [
    ("grid", 10, "phi5", (300, 50, 1710)),
    ("grid", 10, "phi6", (300, 50, 1710)),
    ("grid", 10, "phi7", (200, 50, 1140)),
    ("grid", 50, "phi5", (7500, 1250, 30990)),
    ("grid", 50, "phi6", (7500, 1250, 30990)),
    ("grid", 50, "phi7", (5000, 1250, 20660)),
    ("rocksample", 4, "phi3", (1024, 112, 7936)),
    ("rocksample", 4, "phi4", (768, 112, 6208)),
    ("rocksample", 5, "phi3", (1600, 132, 12480)),
    ("rocksample", 5, "phi4", (1200, 132, 9760)),
]


def test_3_product_sizes():
    bad = []
    for fam, n, name, want in SIZES:
        got = build_product(generate(BenchmarkSpec(fam, n)), fixture_automaton(name)).sizes()
        if got != want:
            bad.append(f"{fam}({n}) {name}: {got} != {want}")
    report("3 product sizes", not bad, "; ".join(bad) or f"all {len(SIZES)} combinations exact")


# ---------------------------------------------------------------- 4: grid


GRID = {"phi6": (1.0, 0.0), "phi5": (0.689, 0.10), "phi7": (0.726, 0.10)}


@pytest.mark.parametrize("name", ["phi6", "phi5", "phi7"])
def test_4_grid_success(name):
    cfg = ExperimentConfig(family="grid", n=10, formula=name, episodes=300, sims=30_000, depth=200, ucb=1.0, seed=0)
    rec = run_experiment(cfg)
    target, tol = GRID[name]
    secs = rec.sr_seconds + rec.pomcp_seconds
    ok = abs(rec.pr_hat - target) <= tol + 1e-9 and secs < 900
    report(f"4 grid(10) {name}", ok, f"Pr={rec.pr_hat:.3f} (target {target} +- {tol}) over 300 episodes in {secs:.0f}s")


# ---------------------------------------------------------------- 5: automaton sizes


def test_5_automaton_sizes():
    sizes = {n: ltl_to_ldba(parse_ltl(FORMULAS[n][0]), FORMULAS[n][1]).num_states for n in ("phi7", "phi5")}
    report("5 automaton sizes", sizes == {"phi7": 2, "phi5": 3}, f"|A_phi7|={sizes['phi7']} |A_phi5|={sizes['phi5']}")


# ---------------------------------------------------------------- 6: properties


def test_6a_filter_support_consistency():
    from ltl_pomcp.support import SupportGraph
    from oracles import random_pomdp

    rng = random.Random(606)
    checked = mismatches = 0
    for _ in range(50):
        m = random_pomdp(rng, rng.randint(2, 20), 2, rng.randint(2, 3))
        g = SupportGraph(m)
        for b, a, o, b2 in reachable_beliefs(m, rng.randint(1, 6)):
            t = g.successor(g.intern(b), a, o)
            checked += 1
            mismatches += t is None or g.supports[t] != frozenset(b2)
    report("6a filter/support consistency", mismatches == 0, f"{checked} transitions over 50 models, {mismatches} mismatches")


def test_6b_certification_oracle():
    from ltl_pomcp.support import certify_bs_amecs

    comps = mismatches = 0
    for p, b, mecs in random_products(100, seed=616):
        cert = {x.states for x in certify_bs_amecs(mecs, b.graph, p.accepting)}
        for x in mecs:
            comps += 1
            mismatches += (x.states in cert) != support_policy_oracle(x, b.graph, p.accepting)
    report("6b certification vs policy oracle", mismatches == 0, f"100 products, {comps} components, {mismatches} mismatches")


def test_6c_mec_oracle():
    rng = random.Random(626)
    mismatches = 0
    for _ in range(200):
        m = random_mdp(rng, rng.randint(1, 8))
        got = {(x.states, frozenset(x.actions.items())) for x in mec_decomposition(m)}
        want = {(c, frozenset(a.items())) for c, a in brute_force_mecs(m.states, m.actions, {k: set(v) for k, v in m.post.items()})}
        mismatches += got != want
    report("6c MEC decomposition vs brute force", mismatches == 0, f"200 MDPs, {mismatches} mismatches")


SOUNDNESS = [
    ("toy", None, "toy"),
    ("motivating", None, "motivating"),
    ("grid", 10, "phi5"),
    ("grid", 10, "phi7"),
    ("rocksample", 4, "phi3"),
    ("rocksample", 4, "phi4"),
]


def test_6d_reward_soundness():
    rng = random.Random(636)
    worst, violations = float("inf"), 0
    for fam, n, name in SOUNDNESS:
        p = build_product(generate(BenchmarkSpec(fam, n)), fixture_automaton(name))
        cs, _ = certify(p)
        for b in sample_partially_winning_beliefs(cs, 20, rng):
            value, theta = sound_reward(b, cs)
            rate = policy_success_rate(p, cs, b, theta, 10_000, rng)
            sigma = (value * (1 - value) / 10_000) ** 0.5
            violations += rate < value - 3 * sigma
            if sigma > 0:
                worst = min(worst, (rate - value) / sigma)
    report("6d reward soundness", violations == 0, f"{6 * 20} beliefs, {violations} below -3 sigma, worst z={worst:.2f}")


def test_6e_language_corpus():
    ap = ("a", "b")
    words = list(lasso_words(4, 3, 3))
    letters = [letter_names(x, ap) for x in range(4)]
    corpus = language_corpus()
    bad = []
    for f in corpus:
        a = ltl_to_ldba(f, ap)
        for prefix, cycle in words:
            if accepts_lasso(a, prefix, cycle) != evaluate_lasso(f, [letters[x] for x in prefix], [letters[x] for x in cycle]):
                bad.append(str(f))
                break
    report("6e automaton language corpus", not bad, f"{len(corpus)} formulas x {len(words)} lasso words, {len(bad)} mismatches" + (f" e.g. {bad[:3]}" if bad else ""))


# ---------------------------------------------------------------- 7: determinism


def test_7_determinism():
    def once(**kw):
        cfg = ExperimentConfig(episodes=kw.pop("episodes"), seed=3, **kw)
        return json.dumps(run_experiment(cfg).to_json(timing=False), sort_keys=True)

    toy_same = once(family="toy", formula="toy", episodes=50) == once(family="toy", formula="toy", episodes=50)
    grid_same = once(family="grid", n=10, formula="phi7", episodes=5, sims=5000) == once(
        family="grid", n=10, formula="phi7", episodes=5, sims=5000
    )
    report("7 determinism", toy_same and grid_same, f"toy identical={toy_same} grid(10) phi7 identical={grid_same}")
