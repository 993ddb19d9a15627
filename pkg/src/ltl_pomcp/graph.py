"""Qualitative graph algorithms on explicit finite MDPs.

Strongly connected components, maximal end components, accepting MECs and
the almost-sure Büchi winning region.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping

State = Hashable
Action = Hashable


def sccs(nodes: Iterable[State], successors: Callable[[State], Iterable[State]]) -> list[list[State]]:
    """Tarjan's algorithm, iterative. Components come out in reverse topological order."""
    index: dict[State, int] = {}
    low: dict[State, int] = {}
    on_stack: set[State] = set()
    stack: list[State] = []
    out: list[list[State]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                if w in on_stack and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


@dataclass
class ExplicitMDP:
    """Finite MDP given by successor distributions.

    ``post[(s, a)]`` maps successors to positive probabilities; ``actions[s]``
    lists the enabled actions of ``s`` in canonical order.
    """

    states: list[State]
    actions: dict[State, list[Action]]
    post: dict[tuple[State, Action], dict[State, float]]
    accepting: frozenset = field(default_factory=frozenset)

    def successors(self, s: State, a: Action) -> Iterable[State]:
        return self.post[(s, a)].keys()


@dataclass(frozen=True)
class MEC:
    states: frozenset
    actions: Mapping[State, frozenset]

    def __hash__(self):
        return hash(self.states)


def mec_decomposition(mdp: ExplicitMDP, states: Iterable[State] | None = None) -> list[MEC]:
    """Maximal end components, sorted by their smallest state.

    Repeatedly splits candidate sets into SCCs and strips actions that can
    leave their component until nothing changes.
    """
    cand = set(mdp.states if states is None else states)
    allowed = {s: [a for a in mdp.actions.get(s, ()) if all(t in cand for t in mdp.successors(s, a))] for s in cand}
    comp_of: dict[State, int] = {}
    while True:
        live = [s for s in mdp.states if s in cand and allowed[s]]

        def succ(s):
            seen = set()
            for a in allowed[s]:
                for t in mdp.successors(s, a):
                    if t in cand and allowed.get(t) and t not in seen:
                        seen.add(t)
                        yield t

        comps = sccs(live, succ)
        comp_of = {}
        for i, c in enumerate(comps):
            for s in c:
                comp_of[s] = i
        changed = len(live) != len(cand)
        cand = set(live)
        for s in live:
            keep = [a for a in allowed[s] if all(comp_of.get(t) == comp_of[s] for t in mdp.successors(s, a))]
            if len(keep) != len(allowed[s]):
                changed = True
                allowed[s] = keep
        if not changed:
            break
    order = {s: i for i, s in enumerate(mdp.states)}
    groups: dict[int, list[State]] = {}
    for s in cand:
        groups.setdefault(comp_of[s], []).append(s)
    result = []
    for members in groups.values():
        members.sort(key=order.__getitem__)
        result.append(MEC(frozenset(members), {s: frozenset(allowed[s]) for s in members}))
    result.sort(key=lambda m: min(order[s] for s in m.states))
    return result


def accepting_mecs(mdp: ExplicitMDP, mecs: list[MEC] | None = None) -> frozenset:
    """Union of the states of all MECs that meet the accepting set."""
    if not mdp.accepting:
        return frozenset()
    if mecs is None:
        mecs = mec_decomposition(mdp)
    out: set = set()
    for m in mecs:
        if m.states & mdp.accepting:
            out |= m.states
    return frozenset(out)


def backward_reachable(mdp: ExplicitMDP, target: Iterable[State], within: set | None = None) -> set:
    """States with a positive-probability path into ``target`` (inside ``within`` if given)."""
    dom = set(mdp.states) if within is None else within
    pred: dict[State, set] = {}
    for s in dom:
        for a in mdp.actions.get(s, ()):
            succ = mdp.successors(s, a)
            if within is not None and not all(t in within for t in succ):
                continue
            for t in succ:
                pred.setdefault(t, set()).add(s)
    reach = {t for t in target if t in dom}
    frontier = list(reach)
    while frontier:
        t = frontier.pop()
        for s in pred.get(t, ()):
            if s not in reach:
                reach.add(s)
                frontier.append(s)
    return reach


def almost_sure_reach(mdp: ExplicitMDP, target: Iterable[State]) -> frozenset:
    """States from which ``target`` is reached with probability one under some strategy."""
    target = frozenset(target)
    u = set(mdp.states)
    while True:
        r = backward_reachable(mdp, target, within=u)
        if r == u:
            return frozenset(u)
        u = r


def almost_sure_buchi_winning(mdp: ExplicitMDP, shortcut: bool = False) -> frozenset:
    """Almost-sure winning region for visiting the accepting set infinitely often.

    ``shortcut=True`` returns plain backward reachability of the accepting
    MECs, which over-approximates the exact region in general.
    """
    amec = accepting_mecs(mdp)
    if not amec:
        return frozenset()
    if shortcut:
        return frozenset(backward_reachable(mdp, amec))
    return almost_sure_reach(mdp, amec)
