"""Belief supports, the support-level MDP and its certified winning region.

A support is a frozenset of product-state indices. :class:`SupportGraph`
interns supports to integer ids and memoises their successors, so the same
object serves certification and the planner's support tracking.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping

from .graph import MEC, ExplicitMDP, almost_sure_buchi_winning, mec_decomposition
from .pomdp import DisabledActionError, LabelledPOMDP, ModelError
from .product import ProductPOMDP

LOSING = -1  # id of the losing sink support


class UncertifiedSupportError(ValueError):
    pass


class SupportGraph:
    """Interned supports with memoised observation-grouped successors over a fixed model."""

    def __init__(self, p: LabelledPOMDP):
        self.p = p
        self.supports: list[frozenset[int]] = []
        self.ids: dict[frozenset[int], int] = {}
        self._succ: dict[tuple[int, int], tuple[tuple[int, int], ...]] = {}
        self._enabled: dict[int, tuple[int, ...]] = {}
        self._z: dict[tuple[int, int], tuple[int, ...]] = {}

    def intern(self, theta: Iterable[int]) -> int:
        theta = frozenset(theta)
        i = self.ids.get(theta)
        if i is None:
            if not theta:
                raise ModelError("empty support")
            i = len(self.supports)
            self.supports.append(theta)
            self.ids[theta] = i
        return i

    def enabled(self, sid: int) -> tuple[int, ...]:
        e = self._enabled.get(sid)
        if e is None:
            it = iter(self.supports[sid])
            acts = set(self.p.enabled_set(next(it)))
            for s in it:
                acts &= self.p.enabled_set(s)
            e = tuple(sorted(acts))
            self._enabled[sid] = e
        return e

    def _obs(self, s: int, a: int) -> tuple[int, ...]:
        key = (s, a)
        r = self._z.get(key)
        if r is None:
            r = tuple(o for o, q in self.p.z(s, a) if q > 0)
            self._z[key] = r
        return r

    def successors(self, sid: int, a: int) -> tuple[tuple[int, int], ...]:
        """``((o, successor id), ...)`` sorted by observation."""
        key = (sid, a)
        r = self._succ.get(key)
        if r is not None:
            return r
        if a not in self.enabled(sid):
            raise DisabledActionError(f"action {self.p.action_names[a]} is not enabled in the support")
        groups: dict[int, set[int]] = {}
        for s in self.supports[sid]:
            for t, _ in self.p.trans[(s, a)]:
                for o in self._obs(t, a):
                    groups.setdefault(o, set()).add(t)
        r = tuple((o, self.intern(groups[o])) for o in sorted(groups))
        self._succ[key] = r
        return r

    def successor(self, sid: int, a: int, o: int) -> int | None:
        for oo, t in self.successors(sid, a):
            if oo == o:
                return t
        return None

    def name(self, sid: int) -> list[str]:
        if sid == LOSING:
            return ["<losing>"]
        return [self.p.state_names[s] for s in sorted(self.supports[sid])]


def bsmdp_successors(theta: Iterable[int], a: int, p: LabelledPOMDP) -> dict[int, frozenset[int]]:
    """Successor supports of ``theta`` under ``a``, keyed by the generating observation."""
    g = SupportGraph(p)
    sid = g.intern(theta)
    return {o: g.supports[t] for o, t in g.successors(sid, a)}


def observation_consistent(theta: Iterable[int], p: LabelledPOMDP) -> bool:
    silent = getattr(p, "silent_obs", None)
    common = None
    for s in theta:
        o = p.obs_of(s) - {silent}
        common = o if common is None else common & o
        if not common:
            return False
    return common is not None


# ---------------------------------------------------------------- BSMDP


@dataclass
class BSMDP:
    graph: SupportGraph
    initial: int
    states: list[int]  # support ids kept (pruned restriction applied)
    edges: dict[tuple[int, int], tuple[tuple[int, int], ...]]  # (sid, a) -> ((o, sid' or LOSING), ...)
    reachable: list[int]  # every support reached by exploration, kept or not
    pruned: bool

    def to_mdp(self) -> ExplicitMDP:
        """The support MDP; branches share the weight of their action. The losing sink has no actions."""
        actions: dict[int, list[int]] = {sid: [] for sid in self.states}
        post = {}
        for (sid, a), succ in self.edges.items():
            actions[sid].append(a)
            w = 1.0 / len(succ)
            d: dict[int, float] = {}
            for _, t in succ:
                d[t] = d.get(t, 0.0) + w
            post[(sid, a)] = d
        states = list(self.states)
        if any(t == LOSING for succ in self.edges.values() for _, t in succ):
            states.append(LOSING)
            actions[LOSING] = []
        return ExplicitMDP(states, actions, post)


def explore_supports(g: SupportGraph, starts: int | Iterable[int], cap: int = 500_000) -> list[int]:
    if isinstance(starts, int):
        starts = [starts]
    order = list(dict.fromkeys(starts))
    seen = set(order)
    queue = deque(order)
    while queue:
        sid = queue.popleft()
        for a in g.enabled(sid):
            for _, t in g.successors(sid, a):
                if t not in seen:
                    if len(seen) >= cap:
                        raise MemoryError(f"support exploration exceeds {cap} supports")
                    seen.add(t)
                    order.append(t)
                    queue.append(t)
    return order


def build_sub_bsmdp(
    p: LabelledPOMDP,
    e_s: Iterable[int] | None,
    graph: SupportGraph | None = None,
    prune: bool = True,
) -> BSMDP:
    """Supports reachable from ``Supp(b0)`` and from each singleton ``{s}``, ``s`` in ``e_s``.

    With ``prune`` only supports meeting ``e_s`` are kept and transitions into
    dropped supports are redirected to :data:`LOSING`. The singleton seeds
    matter when aliasing hides an end component from the initial belief: a
    support such as ``{s8_0}`` is winning even if the agent only ever holds
    it inside a larger support.
    """
    g = graph or SupportGraph(p)
    start = g.intern(p.b0)
    seeds = [start] + [g.intern([s]) for s in sorted(e_s or ())]
    reach = explore_supports(g, seeds)
    if prune:
        e = frozenset(e_s or ())
        keep = [sid for sid in reach if g.supports[sid] & e]
    else:
        keep = list(reach)
    kept = set(keep)
    edges = {}
    for sid in keep:
        for a in g.enabled(sid):
            edges[(sid, a)] = tuple((o, t if t in kept else LOSING) for o, t in g.successors(sid, a))
    return BSMDP(g, start, keep, edges, reach, prune)


def bs_mec_decomposition(b: BSMDP) -> list[MEC]:
    return [m for m in mec_decomposition(b.to_mdp()) if LOSING not in m.states]


# ---------------------------------------------------------------- certification


def auxiliary_mdp(mec: MEC, g: SupportGraph, accepting: frozenset[int]) -> ExplicitMDP:
    """The coupled MDP over pairs ``(s, support)`` with ``s`` in the support, restricted to the component."""
    p = g.p
    states = []
    actions = {}
    post = {}
    for sid in sorted(mec.states):
        acts = sorted(mec.actions[sid])
        for s in sorted(g.supports[sid]):
            node = (s, sid)
            states.append(node)
            actions[node] = acts
            for a in acts:
                succ_of = dict(g.successors(sid, a))
                d: dict = {}
                for t, pr in p.trans[(s, a)]:
                    for o, q in p.z(t, a):
                        if q > 0:
                            key = (t, succ_of[o])
                            d[key] = d.get(key, 0.0) + pr * q
                post[(node, a)] = d
    acc = frozenset(n for n in states if n[0] in accepting)
    return ExplicitMDP(states, actions, post, acc)


def certify_bs_amecs(
    mecs: Iterable[MEC], g: SupportGraph, accepting: frozenset[int], shortcut: bool = False
) -> list[MEC]:
    """Keep the components every support of which is winning under the component's actions."""
    out = []
    for mec in mecs:
        if any(g.supports[sid] <= accepting for sid in mec.states):
            out.append(mec)
            continue
        aux = auxiliary_mdp(mec, g, accepting)
        win = almost_sure_buchi_winning(aux, shortcut=shortcut)
        if len(win) == len(aux.states):
            out.append(mec)
    return out


# ---------------------------------------------------------------- certified structure


class RoundRobinPolicy:
    """Cycles through each support's component actions, advancing on every visit."""

    def __init__(self, actions: Mapping[int, tuple[int, ...]]):
        self.actions = dict(actions)
        self.counter: dict[int, int] = {}

    def __call__(self, sid: int) -> int:
        acts = self.actions.get(sid)
        if not acts:
            raise UncertifiedSupportError("support left its certified component")
        k = self.counter.get(sid, 0)
        self.counter[sid] = k + 1
        return acts[k % len(acts)]


@dataclass
class CertifiedStructure:
    graph: SupportGraph
    accepting: frozenset[int]
    winning: frozenset[int]  # support ids
    components: list[MEC]
    component_of: dict[int, int]
    _k_memo: dict[int, tuple[int, ...]] = field(default_factory=dict)
    _by_min: dict[int, list[int]] = field(default_factory=dict)

    def __post_init__(self):
        for w in sorted(self.winning, key=self.canonical_key):
            self._by_min.setdefault(min(self.graph.supports[w]), []).append(w)

    def canonical_key(self, sid: int) -> tuple:
        th = self.graph.supports[sid]
        return (len(th), tuple(sorted(th)))

    def is_winning(self, sid: int) -> bool:
        return sid in self.winning

    def is_winning_set(self, theta: Iterable[int]) -> bool:
        sid = self.graph.ids.get(frozenset(theta))
        return sid is not None and sid in self.winning

    def k_hat(self, sid: int) -> tuple[int, ...]:
        """Certified winning supports strictly contained in ``sid``, in canonical order."""
        r = self._k_memo.get(sid)
        if r is None:
            th = self.graph.supports[sid]
            found = []
            for x in th:
                for w in self._by_min.get(x, ()):
                    if w != sid and self.graph.supports[w] < th:
                        found.append(w)
            r = tuple(sorted(found, key=self.canonical_key))
            self._k_memo[sid] = r
        return r

    def k_hat_set(self, theta: Iterable[int]) -> list[frozenset[int]]:
        sid = self.graph.intern(theta)
        return [self.graph.supports[w] for w in self.k_hat(sid)]

    def is_partially_winning(self, sid: int) -> bool:
        return bool(self.k_hat(sid))

    def component_actions(self, sid: int) -> tuple[int, ...]:
        if sid not in self.winning:
            raise UncertifiedSupportError(f"support {self.graph.name(sid)} is not certified")
        mec = self.components[self.component_of[sid]]
        return tuple(sorted(mec.actions[sid]))

    def winning_policy(self, sid: int) -> RoundRobinPolicy:
        if sid not in self.winning:
            raise UncertifiedSupportError(f"support {self.graph.name(sid)} is not certified")
        mec = self.components[self.component_of[sid]]
        return RoundRobinPolicy({t: tuple(sorted(mec.actions[t])) for t in mec.states})

    def partially_winning_map(self, cap: int = 4096) -> dict[int, tuple[int, ...]]:
        """Observation-consistent strict supersets of winning supports, with their K̂.

        Supersets are drawn from the product states sharing an observation
        with the whole winning support; at most ``cap`` entries are listed.
        """
        p = self.graph.p
        silent = getattr(p, "silent_obs", None)
        emitters: dict[int, set[int]] = {}
        for s in range(p.num_states):
            for o in p.obs_of(s):
                if o != silent:
                    emitters.setdefault(o, set()).add(s)
        out: dict[int, tuple[int, ...]] = {}
        for w in sorted(self.winning, key=self.canonical_key):
            th = self.graph.supports[w]
            common = None
            for s in th:
                o = p.obs_of(s) - {silent}
                common = o if common is None else common & o
            for o in sorted(common or ()):
                extra = sorted(emitters[o] - th)
                for k in range(1, len(extra) + 1):
                    for add in combinations(extra, k):
                        if len(out) >= cap:
                            return out
                        sid = self.graph.intern(th | frozenset(add))
                        if sid not in out:
                            out[sid] = self.k_hat(sid)
        return out

    def to_json(self, pw_cap: int = 4096) -> dict:
        g = self.graph
        p = g.p
        key = lambda sid: json.dumps(g.name(sid))
        pw = self.partially_winning_map(pw_cap)
        pw_sorted = sorted(pw, key=self.canonical_key)
        comps = []
        for mec in self.components:
            comps.append({
                "supports": [g.name(s) for s in sorted(mec.states, key=self.canonical_key)],
                "actions": {key(s): sorted(p.action_names[a] for a in mec.actions[s]) for s in sorted(mec.states, key=self.canonical_key)},
            })
        return {
            "winning_supports": [g.name(s) for s in sorted(self.winning, key=self.canonical_key)],
            "partially_winning": {key(s): [g.name(w) for w in pw[s]] for s in pw_sorted},
            "components": comps,
        }


def derive_certified_structure(b: BSMDP, amecs: list[MEC], accepting: frozenset[int]) -> CertifiedStructure:
    winning = set()
    comp_of = {}
    for i, mec in enumerate(amecs):
        for sid in mec.states:
            winning.add(sid)
            comp_of[sid] = i
    return CertifiedStructure(b.graph, accepting, frozenset(winning), list(amecs), comp_of)


def state_accepting_mecs(p: ProductPOMDP) -> frozenset[int]:
    """Union of the accepting MECs of the product's underlying MDP."""
    from .graph import accepting_mecs

    return accepting_mecs(underlying_mdp(p))


def underlying_mdp(p: ProductPOMDP) -> ExplicitMDP:
    actions = {s: list(p.enabled(s)) for s in range(p.num_states)}
    post = {(s, a): dict(row) for (s, a), row in p.trans.items()}
    return ExplicitMDP(list(range(p.num_states)), actions, post, p.accepting)


def certify(p: ProductPOMDP, prune: bool = True, shortcut: bool = False) -> tuple[CertifiedStructure, BSMDP]:
    """Full pipeline: accepting MECs, support MDP, component certification."""
    e_s = state_accepting_mecs(p)
    b = build_sub_bsmdp(p, e_s, prune=prune)
    mecs = bs_mec_decomposition(b)
    amecs = certify_bs_amecs(mecs, b.graph, p.accepting, shortcut=shortcut)
    return derive_certified_structure(b, amecs, p.accepting), b
