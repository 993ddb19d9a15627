import random

import pytest

from ltl_pomcp.automata import LDBAStructureError, ltl_to_ldba, ltl_to_nba
from ltl_pomcp.benchmarks import fixture_automaton, grid, motivating, rocksample, toy
from ltl_pomcp.ltl import parse_ltl
from ltl_pomcp.pomdp import ModelError, belief_update
from ltl_pomcp.product import (
    SILENT,
    build_product,
    format_product,
    parse_product,
    restrict_to_reachable,
    validate_product,
)
from oracles import random_pomdp


def test_toy_product_shape(toy_product):
    p = toy_product
    assert p.num_states == 9 * 2
    assert p.belief_by_name(p.b0) == {"s0_0": 1.0}
    acc = {p.state_names[s] for s in p.accepting}
    assert acc == {"s3_0", "s8_0"}
    validate_product(p)


def test_initial_belief_reads_first_label():
    # the automaton reads L(s) on entering s, including the initial state
    m = toy()
    m.labels[0] = frozenset({"s2"})
    p = build_product(m, fixture_automaton("toy"))
    assert p.belief_by_name(p.b0) == {"s0_sink": 1.0}


def test_transitions_follow_the_automaton():
    rng = random.Random(4)
    formulas = ["G F a", "F G a", "a U G !a", "G (a -> X !a)"]
    for _ in range(40):
        m = random_pomdp(rng, rng.randint(2, 8))
        a = ltl_to_ldba(parse_ltl(rng.choice(formulas)), ("a",))
        p = build_product(m, a)
        for (sq, act), row in p.trans.items():
            if act >= m.num_actions:
                continue
            s, q = p.pairs[sq]
            want = {}
            for t, pr in m.trans[(s, act)]:
                q2 = a.successor(q, m.label_letter(t, ("a",)))
                q2 = q2 if q2 is not None else a.num_states  # completion sink
                want[(t, q2)] = pr
            assert {p.pairs[t]: pr for t, pr in row} == want
            for t, _ in row:
                ts, tq = p.pairs[t]
                assert p.z(t, act) == m.z(ts, act)


def test_epsilon_actions():
    m = rocksample(4)
    a = fixture_automaton("phi4")
    p = build_product(m, a)
    eps = p.eps_actions()
    assert [p.action_names[x] for x in eps] == ["eps_1"]
    assert p.obs_names[p.silent_obs] == SILENT
    (x,) = eps
    for s in range(m.num_states):
        src = p.state_index[f"{m.state_names[s]}_0"]
        assert p.trans[(src, x)] == ((p.state_index[f"{m.state_names[s]}_1"], 1.0),)
        assert p.z(src, x) == ((p.silent_obs, 1.0),)
        # only the initial-part copy can take the jump
        assert (p.state_index[f"{m.state_names[s]}_1"], x) not in p.trans
    # the silent observation leaves the belief on the same base states
    b = {src: 1.0}
    assert belief_update(b, x, p.silent_obs, p) == {p.state_index[f"{m.state_names[s]}_1"]: 1.0}


@pytest.mark.parametrize(
    "model, name, sizes",
    [
        (lambda: grid(10), "phi5", (300, 50, 1710)),
        (lambda: grid(10), "phi7", (200, 50, 1140)),
        (lambda: rocksample(4), "phi3", (1024, 112, 7936)),
        (lambda: rocksample(4), "phi4", (768, 112, 6208)),
    ],
)
def test_sizes(model, name, sizes):
    assert build_product(model(), fixture_automaton(name)).sizes() == sizes


def test_reachable_only_subset(toy_product):
    r = build_product(toy(), fixture_automaton("toy"), reachable_only=True)
    assert set(r.state_names) <= set(toy_product.state_names)
    assert r.num_states < toy_product.num_states
    assert restrict_to_reachable(r).state_names == r.state_names


def test_format_round_trip():
    p = build_product(rocksample(4), fixture_automaton("phi4"))
    q = parse_product(format_product(p))
    assert q.sizes() == p.sizes()
    assert q.accepting == p.accepting and q.silent_obs == p.silent_obs
    assert format_product(q) == format_product(p)


def test_missing_proposition():
    with pytest.raises(ModelError):
        build_product(motivating(), fixture_automaton("toy"))


def test_nondeterministic_automaton_rejected():
    nba = ltl_to_nba(parse_ltl("F G a"), ("a",))
    from ltl_pomcp.automata import LDBA

    a = LDBA(nba.ap, nba.labels, nba.initial, frozenset(range(len(nba.labels))), nba.delta, {}, frozenset())
    m = random_pomdp(random.Random(1), 3)
    m.labels = [frozenset({"a"})] * 3
    if all(len(t) <= 1 for t in a.delta.values()):
        pytest.skip("tableau happened to be deterministic")
    with pytest.raises(LDBAStructureError):
        build_product(m, a)
