import random

import pytest

from ltl_pomcp.planner import Node, Planner, PlannerConfig, belief_key, run_episodes
from ltl_pomcp.support import certify
from test_support import product_of

ARMS = """
states: s0 good bad
actions: left right
observations: o0 og ob
ap: acc
start: s0:1
label good: acc
obs s0: o0
obs good: og
obs bad: ob
T s0 left : good:0.3 bad:0.7
T s0 right : good:0.9 bad:0.1
T good left : good:1
T good right : good:1
T bad left : bad:1
T bad right : bad:1
"""


def small(seed=0, **kw):
    return PlannerConfig(sims=kw.pop("sims", 2000), depth=kw.pop("depth", 50), particles=kw.pop("particles", 1000), seed=seed, **kw)


@pytest.fixture(scope="module")
def arms():
    p = product_of(ARMS)
    cs, _ = certify(p)
    return p, cs


def test_two_armed_choice(arms):
    p, cs = arms
    pl = Planner(p, cs, small())
    a, root = pl.search(p.b0, cs.graph.intern(p.b0), random.Random(0))
    assert pl.action_name(a) == "right"
    v = pl.root_values(root)
    assert v["right"] == pytest.approx(0.9, abs=0.05)
    assert v["left"] == pytest.approx(0.3, abs=0.1)


def test_two_armed_success_rate(arms):
    p, cs = arms
    pl = Planner(p, cs, small(sims=500))
    rs = run_episodes(pl, 400)
    rate = sum(r.success for r in rs) / len(rs)
    assert abs(rate - 0.9) < 3 * (0.09 / 400) ** 0.5
    assert {r.reason for r in rs} <= {"winning", "dead_end"}


def test_terminal_action_pays_only_inside(toy_certified):
    p = toy_certified.graph.p
    pl = Planner(p, toy_certified, small())
    sid = pl.g.intern([p.state_index["s7_sink"], p.state_index["s8_0"]])
    terms = [a for a in pl.actions(sid) if pl.is_terminal(a)]
    assert [pl.action_name(a) for a in terms] == ["stop['s8_0']"]

    def forced():
        n = Node(sid)
        n.acts, n.an, n.av, n.kids, n.n = tuple(terms), [0], [0.0], [None], 1
        return n

    rng = random.Random(0)
    assert pl.simulate(p.state_index["s8_0"], forced(), 0, rng) == 1.0
    assert pl.simulate(p.state_index["s8_sink"], forced(), 0, rng) == 0.0
    assert pl.simulate(p.state_index["s7_sink"], forced(), 0, rng) == 0.0


def test_rollout_mean_at_switch_belief(toy_certified):
    # uniform rollouts race the terminal action against l, which kills s8
    p = toy_certified.graph.p
    pl = Planner(p, toy_certified, PlannerConfig(depth=200, seed=1))
    sid = pl.g.intern([p.state_index["s7_sink"], p.state_index["s8_0"]])
    rng = random.Random(42)
    states = [p.state_index["s7_sink"], p.state_index["s8_0"]]
    n = 10_000
    mean = sum(pl.rollout(rng.choices(states, [0.2, 0.8])[0], sid, 0, rng) for _ in range(n)) / n
    sigma = (0.4 * 0.6 / n) ** 0.5
    assert abs(mean - 0.4) <= 3 * sigma


def test_values_are_probabilities(toy_certified):
    p = toy_certified.graph.p
    pl = Planner(p, toy_certified, small())
    _, root = pl.search(p.b0, pl.g.intern(p.b0), random.Random(3))
    assert root.n == 2000
    assert all(0.0 <= v <= 1.0 for v in root.av)
    assert sum(root.an) == root.n


def test_determinism(toy_certified):
    p = toy_certified.graph.p
    run = lambda: [r.to_json(timing=False) for r in run_episodes(Planner(p, toy_certified, small(seed=5)), 5)]
    assert run() == run()
    other = [r.to_json(timing=False) for r in run_episodes(Planner(p, toy_certified, small(seed=6)), 5)]
    assert other != run()


def test_rerooting_mode(toy_certified):
    p = toy_certified.graph.p
    pl = Planner(p, toy_certified, small(memo=False))
    rs = run_episodes(pl, 3)
    assert all(r.reason in ("terminal", "winning", "dead_end", "budget") for r in rs)
    assert all(r.actions for r in rs)
    assert not pl.memo


def test_dead_end_episode():
    p = product_of(ARMS.replace("start: s0:1", "start: bad:1"))
    cs, _ = certify(p)
    r = Planner(p, cs, small()).execute_episode(0)
    assert r.reason == "dead_end" and not r.success and r.actions == []


def test_budget_exhaustion():
    # the only way to the goal costs more steps than the budget allows
    text = """
states: c0 c1 c2 c3
actions: go
observations: o
ap: acc
start: c0:1
label c3: acc
obs c0: o
obs c1: o
obs c2: o
obs c3: o
T c0 go : c1:1
T c1 go : c2:1
T c2 go : c3:1
T c3 go : c3:1
"""
    p = product_of(text)
    cs, _ = certify(p)
    r = Planner(p, cs, small(budget=2)).execute_episode(0)
    assert r.reason == "budget" and not r.success
    r = Planner(p, cs, small(budget=5)).execute_episode(0)
    assert r.reason == "winning" and r.success and r.switch_step == 3


def test_config_validation():
    for bad in ({"sims": 0}, {"depth": -1}, {"particles": 0}, {"ucb": -0.5}):
        with pytest.raises(ValueError):
            PlannerConfig(**bad)
    assert PlannerConfig(depth=20).step_budget == 200


def test_belief_key_ignores_zeros():
    assert belief_key({1: 0.5, 0: 0.5, 2: 0.0}) == belief_key({0: 0.5, 1: 0.5})
