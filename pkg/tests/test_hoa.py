import pytest

from ltl_pomcp.automata import LDBAStructureError, accepts_lasso, letter_names, ltl_to_ldba
from ltl_pomcp.benchmarks import FORMULAS, fixture_automaton, fixture_hoa_text
from ltl_pomcp.hoa import HOAParseError, export_hoa, import_hoa
from ltl_pomcp.ltl import evaluate_lasso, parse_ltl
from oracles import lasso_words

FIXTURE_SIZES = {"phi1": 3, "phi2": 3, "phi3": 4, "phi4": 3, "phi5": 3, "phi6": 3, "phi7": 2, "toy": 2, "motivating": 1}


def same_language(a, b, n_letters, max_prefix=2, max_cycle=2):
    return all(
        accepts_lasso(a, p, c) == accepts_lasso(b, p, c) for p, c in lasso_words(n_letters, max_prefix, max_cycle)
    )


@pytest.mark.parametrize("name", sorted(FIXTURE_SIZES))
def test_fixture_language(name):
    f, ap = FORMULAS[name]
    a = fixture_automaton(name)
    assert a.ap == ap
    assert a.num_states == FIXTURE_SIZES[name]
    formula = parse_ltl(f, ap)
    cycle = 2 if len(ap) <= 3 else 1
    for p, c in lasso_words(1 << len(ap), 1, cycle):
        want = evaluate_lasso(formula, [letter_names(x, ap) for x in p], [letter_names(x, ap) for x in c])
        assert accepts_lasso(a, p, c) == want, (p, c)


@pytest.mark.parametrize("name", sorted(FIXTURE_SIZES))
def test_round_trip(name):
    a = fixture_automaton(name)
    b = import_hoa(export_hoa(a))
    assert (b.num_states, b.ap, b.initial) == (a.num_states, a.ap, a.initial)
    assert b.delta == a.delta and b.acc == a.acc and b.eps == a.eps
    assert export_hoa(b) == export_hoa(a)


def test_round_trip_translated():
    ap = ("a", "b")
    for text in ("G F a", "F G a & G F b", "a U (b R a)"):
        a = ltl_to_ldba(parse_ltl(text), ap)
        assert same_language(a, import_hoa(export_hoa(a, name=text)), 4)


def test_eps_edges_survive():
    text = fixture_hoa_text("phi4")
    assert "eps-edges" in text
    assert import_hoa(text).eps_edges() == [(0, 1)]


GOOD = """HOA: v1
States: 1
Start: 0
AP: 1 "a"
Acceptance: 1 Inf(0)
--BODY--
State: 0
[0] 0 {0}
[!0] 0
--END--
"""


def test_minimal_document():
    a = import_hoa(GOOD)
    assert accepts_lasso(a, (), (1, 0)) and not accepts_lasso(a, (1,), (0,))


@pytest.mark.parametrize(
    "bad, line",
    [
        (GOOD.replace("HOA: v1\n", ""), 1),
        (GOOD.replace("Acceptance: 1 Inf(0)", "Acceptance: 2 Inf(0)&Fin(1)"), 5),
        (GOOD.replace("[0] 0 {0}", "[0 & ] 0 {0}"), 8),
        (GOOD.replace("[0] 0 {0}", "[3] 0 {0}"), 8),
        (GOOD.replace("--END--\n", ""), 9),
        (GOOD.replace("[!0] 0", "[!0] 4"), 9),
    ],
)
def test_parse_errors_name_line(bad, line):
    with pytest.raises(HOAParseError) as e:
        import_hoa(bad)
    assert e.value.line == line


def test_rejects_non_limit_deterministic():
    text = """HOA: v1
States: 2
Start: 0
AP: 1 "a"
Acceptance: 1 Inf(0)
--BODY--
State: 0
[t] 0
[0] 1
State: 1
[0] 1 {0}
[0] 0
[!0] 0
--END--
"""
    with pytest.raises(LDBAStructureError):
        import_hoa(text)
