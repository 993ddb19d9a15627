import itertools
import random

from ltl_pomcp.graph import (
    ExplicitMDP,
    accepting_mecs,
    almost_sure_buchi_winning,
    almost_sure_reach,
    backward_reachable,
    mec_decomposition,
    sccs,
)
from oracles import _strongly_connected, brute_force_mecs, chain_buchi_winners


def random_mdp(rng, n, max_actions=3, p_acc=0.3):
    actions, post = {}, {}
    for s in range(n):
        k = rng.randint(0, max_actions) if rng.random() < 0.1 else rng.randint(1, max_actions)
        actions[s] = list(range(k))
        for a in actions[s]:
            succ = rng.sample(range(n), rng.randint(1, min(3, n)))
            post[(s, a)] = {t: 1 / len(succ) for t in succ}
    acc = frozenset(s for s in range(n) if rng.random() < p_acc)
    return ExplicitMDP(list(range(n)), actions, post, acc)


def test_sccs_partition_and_connectivity():
    rng = random.Random(5)
    for _ in range(100):
        n = rng.randint(1, 9)
        succ = {s: set(rng.sample(range(n), rng.randint(0, min(3, n)))) for s in range(n)}
        comps = sccs(range(n), succ.__getitem__)
        assert sorted(s for c in comps for s in c) == list(range(n))
        for c in comps:
            assert _strongly_connected(c, succ.__getitem__) or len(c) == 1
        merged = [set(a) | set(b) for a, b in itertools.combinations(comps, 2)]
        assert not any(_strongly_connected(m, succ.__getitem__) for m in merged)


def test_mec_oracle_200_random_mdps():
    rng = random.Random(2024)
    for _ in range(200):
        m = random_mdp(rng, rng.randint(1, 8))
        got = {(x.states, frozenset(x.actions.items())) for x in mec_decomposition(m)}
        want = {
            (c, frozenset(acts.items()))
            for c, acts in brute_force_mecs(m.states, m.actions, {k: set(v) for k, v in m.post.items()})
        }
        assert got == want


def test_mec_examples():
    # two-state loop under a, a leaks to a sink under b
    m = ExplicitMDP(
        [0, 1, 2],
        {0: ["a", "b"], 1: ["a"], 2: ["a"]},
        {(0, "a"): {1: 1.0}, (0, "b"): {2: 1.0}, (1, "a"): {0: 0.5, 1: 0.5}, (2, "a"): {2: 1.0}},
        frozenset({1}),
    )
    mecs = mec_decomposition(m)
    assert [sorted(x.states) for x in mecs] == [[0, 1], [2]]
    assert mecs[0].actions[0] == {"a"}
    assert accepting_mecs(m) == {0, 1}


def brute_force_buchi(m):
    """Union over all memoryless pure strategies of the states they win from."""
    live = [s for s in m.states if m.actions[s]]
    out = set()
    for choice in itertools.product(*(m.actions[s] for s in live)):
        pol = dict(zip(live, choice))
        succ = lambda s: m.post[(s, pol[s])].keys() if s in pol else ()
        # states without actions are dead ends: never accepting infinitely often
        chain = chain_buchi_winners(m.states, succ, m.accepting - (set(m.states) - set(live)))
        out |= {s for s in chain if _no_dead_end(s, succ, pol)}
    return out


def _no_dead_end(s, succ, pol):
    seen, todo = {s}, [s]
    while todo:
        x = todo.pop()
        if x not in pol:
            return False
        for t in succ(x):
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return True


def test_almost_sure_buchi_against_strategy_enumeration():
    rng = random.Random(17)
    for _ in range(150):
        m = random_mdp(rng, rng.randint(1, 6))
        assert almost_sure_buchi_winning(m) == brute_force_buchi(m)


def test_shortcut_over_approximates():
    rng = random.Random(19)
    for _ in range(100):
        m = random_mdp(rng, rng.randint(1, 7))
        assert almost_sure_buchi_winning(m) <= almost_sure_buchi_winning(m, shortcut=True)


def test_reachability():
    m = ExplicitMDP(
        [0, 1, 2, 3],
        {0: ["a"], 1: ["a", "b"], 2: ["a"], 3: ["a"]},
        {(0, "a"): {1: 0.5, 2: 0.5}, (1, "a"): {3: 1.0}, (1, "b"): {0: 1.0}, (2, "a"): {2: 1.0}, (3, "a"): {3: 1.0}},
    )
    assert backward_reachable(m, {3}) == {0, 1, 3}
    assert almost_sure_reach(m, {3}) == {1, 3}
