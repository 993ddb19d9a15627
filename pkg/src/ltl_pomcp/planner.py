"""Monte Carlo tree search over a product POMDP with certified-support termination.

Each tree node tracks the exact support reached by its action/observation
history. A simulation ends with return 1 as soon as that support is
certified winning. Nodes whose support strictly contains certified supports
also offer one terminal pseudo-action per contained support; choosing it
returns 1 iff the simulated state lies inside. Returns are undiscounted 0/1,
so node values estimate the probability of a certified success.

By default decisions are memoised by exact belief and each search draws from
an rng seeded by ``(seed, belief)``, which makes the planner a deterministic
function of the belief and lets many episodes share searches. With
``memo=False`` the tree is re-rooted after each step as in plain POMCP.
"""

from __future__ import annotations

import math
import random
import time
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Mapping

from .pomdp import belief_update
from .product import ProductPOMDP
from .support import CertifiedStructure


REVISITS = 7  # revisits of one belief that trigger a fresh memoised search


class DeadEndError(RuntimeError):
    pass


@dataclass
class PlannerConfig:
    sims: int = 30_000
    depth: int = 200
    particles: int = 10_000
    ucb: float = 1.0
    seed: int = 0
    budget: int | None = None  # environment steps; defaults to 10 * depth
    memo: bool = True

    def __post_init__(self):
        for k in ("sims", "depth", "particles"):
            if getattr(self, k) <= 0:
                raise ValueError(f"{k} must be positive")
        if self.ucb < 0:
            raise ValueError("ucb must be nonnegative")

    @property
    def step_budget(self) -> int:
        return self.budget if self.budget is not None else 10 * self.depth


class Node:
    __slots__ = ("sid", "n", "acts", "an", "av", "kids", "particles")

    def __init__(self, sid: int):
        self.sid = sid
        self.n = 0
        self.acts = None
        self.an = None
        self.av = None
        self.kids = None
        self.particles: list[int] = []


def belief_key(b: Mapping[int, float]) -> str:
    return ",".join(f"{s}:{p:.12g}" for s, p in sorted(b.items()) if p > 0)


class Planner:
    def __init__(self, p: ProductPOMDP, cs: CertifiedStructure, cfg: PlannerConfig | None = None):
        self.p = p
        self.cs = cs
        self.g = cs.graph
        self.cfg = cfg or PlannerConfig()
        self.term_base = len(p.action_names)
        self._acts: dict[int, tuple[int, ...]] = {}
        self.memo: dict[str, tuple[int, dict[int, float]]] = {}
        self.can_win = self._can_reach_winning()

    # ------------------------------------------------------------ helpers

    def _can_reach_winning(self) -> frozenset[int]:
        """States with a path into some certified support; elsewhere every return is 0."""
        target = set()
        for w in self.cs.winning:
            target |= self.g.supports[w]
        pred: dict[int, set[int]] = {}
        for (s, _), row in self.p.trans.items():
            for t, _ in row:
                pred.setdefault(t, set()).add(s)
        seen = set(target)
        queue = deque(target)
        while queue:
            t = queue.popleft()
            for s in pred.get(t, ()):
                if s not in seen:
                    seen.add(s)
                    queue.append(s)
        return frozenset(seen)

    def actions(self, sid: int) -> tuple[int, ...]:
        """Enabled actions, then one terminal pseudo-action per contained certified support."""
        r = self._acts.get(sid)
        if r is None:
            r = tuple(self.g.enabled(sid)) + tuple(self.term_base + w for w in self.cs.k_hat(sid))
            self._acts[sid] = r
        return r

    def is_terminal(self, a: int) -> bool:
        return a >= self.term_base

    def terminal_support(self, a: int) -> frozenset[int]:
        return self.g.supports[a - self.term_base]

    def action_name(self, a: int) -> str:
        if self.is_terminal(a):
            return "stop" + str(sorted(self.p.state_names[s] for s in self.terminal_support(a)))
        return self.p.action_names[a]

    # ------------------------------------------------------------ search

    def simulate(self, s: int, node: Node, k: int, rng: random.Random) -> float:
        cs = self.cs
        if node.sid in cs.winning:
            return 1.0
        if k >= self.cfg.depth or s not in self.can_win:
            return 0.0
        if node.acts is None:
            acts = self.actions(node.sid)
            node.acts = acts
            node.an = [0] * len(acts)
            node.av = [0.0] * len(acts)
            node.kids = [None] * len(acts)
            r = self.rollout(s, node.sid, k, rng)
            node.n += 1
            node.particles.append(s)
            return r
        acts = node.acts
        if not acts:
            return 0.0
        an, av = node.an, node.av
        i = -1
        try:
            i = an.index(0)
        except ValueError:
            logn = math.log(node.n)
            c = self.cfg.ucb
            best = -1.0
            for j in range(len(acts)):
                u = av[j] + c * math.sqrt(logn / an[j])
                if u > best:
                    best, i = u, j
        a = acts[i]
        if a >= self.term_base:
            r = 1.0 if s in self.g.supports[a - self.term_base] else 0.0
        else:
            s2, o = self.p.sample_step(s, a, rng)
            kids = node.kids[i]
            if kids is None:
                kids = node.kids[i] = {}
            child = kids.get(o)
            if child is None:
                child = kids[o] = Node(self.g.successor(node.sid, a, o))
            r = self.simulate(s2, child, k + 1, rng)
        node.n += 1
        if len(node.particles) < self.cfg.particles:
            node.particles.append(s)
        an[i] += 1
        av[i] += (r - av[i]) / an[i]
        return r

    def rollout(self, s: int, sid: int, k: int, rng: random.Random) -> float:
        depth = self.cfg.depth
        winning = self.cs.winning
        can_win = self.can_win
        supports = self.g.supports
        tb = self.term_base
        while True:
            if sid in winning:
                return 1.0
            if k >= depth or s not in can_win:
                return 0.0
            acts = self.actions(sid)
            if not acts:
                return 0.0
            a = acts[int(rng.random() * len(acts))]
            if a >= tb:
                return 1.0 if s in supports[a - tb] else 0.0
            s, o = self.p.sample_step(s, a, rng)
            sid = self.g.successor(sid, a, o)
            k += 1

    def refill(self, node: Node, b: Mapping[int, float], rng: random.Random) -> None:
        """Top the node's particles up to the configured count with draws from the exact belief."""
        need = self.cfg.particles - len(node.particles)
        if need > 0:
            states = sorted(b)
            node.particles.extend(rng.choices(states, weights=[b[s] for s in states], k=need))

    def search(self, b: Mapping[int, float], sid: int, rng: random.Random, root: Node | None = None) -> tuple[int, Node]:
        """Run the configured number of simulations and return ``(best action, root)``.

        A fresh root only offers actions that can change the belief, unless
        none do.
        """
        root = root if root is not None and root.sid == sid else Node(sid)
        if not self.actions(sid):
            raise DeadEndError("no action is enabled in the current support")
        if root.acts is None:
            acts = self.actions(sid)
            moving = tuple(a for a in acts if not self.belief_stationary(b, a))
            acts = moving or acts
            root.acts = acts
            root.an = [0] * len(acts)
            root.av = [0.0] * len(acts)
            root.kids = [None] * len(acts)
        self.refill(root, b, rng)
        parts = list(root.particles)
        for _ in range(self.cfg.sims):
            self.simulate(parts[int(rng.random() * len(parts))], root, 0, rng)
        return self.best(root, b), root

    def best(self, root: Node, b: Mapping[int, float] | None = None) -> int:
        """Highest-valued tried action, lowest index on ties.

        Actions that leave the exact belief unchanged under every outcome are
        passed over when anything else exists: a stationary policy choosing
        one would never leave ``b``.
        """
        if root.acts is None:
            return self.actions(root.sid)[0]
        order = sorted(range(len(root.acts)), key=lambda j: (-(root.an[j] > 0), -root.av[j], j))
        if b is not None:
            for j in order:
                if not self.belief_stationary(b, root.acts[j]):
                    return root.acts[j]
        return root.acts[order[0]]

    def belief_stationary(self, b: Mapping[int, float], a: int) -> bool:
        if self.is_terminal(a):
            return False
        seen = set()
        for s in b:
            for t, _ in self.p.trans[(s, a)]:
                for o, q in self.p.z(t, a):
                    if q > 0:
                        seen.add(o)
        for o in seen:
            b2 = belief_update(b, a, o, self.p)
            if b2.keys() != b.keys() or any(abs(b2[x] - b[x]) > 1e-12 for x in b):
                return False
        return True

    def root_values(self, root: Node) -> dict[str, float]:
        if root.acts is None:
            return {}
        return {self.action_name(a): v for a, v, n in zip(root.acts, root.av, root.an) if n}

    # ------------------------------------------------------------ execution

    def decide(self, b: Mapping[int, float], sid: int, rng: random.Random, root: Node | None, visit: int = 0):
        """Action for belief ``b``: memoised per belief, or searched on the re-rooted tree.

        ``visit`` counts earlier visits to ``b`` in the episode. The first few
        revisits get their own search, so a deterministic cycle between
        beliefs is broken by a fresh draw instead of repeating forever.
        """
        if self.cfg.memo:
            key = f"{min(visit, REVISITS)}#{belief_key(b)}"
            hit = self.memo.get(key)
            if hit is None:
                srng = random.Random(f"{self.cfg.seed}|search|{key}")
                a, node = self.search(b, sid, srng)
                hit = (a, self.root_values(node), dict(Counter(node.particles)))
                self.memo[key] = hit
            return hit[0], hit[1], hit[2], None
        a, node = self.search(b, sid, rng, root)
        return a, self.root_values(node), dict(Counter(node.particles)), node

    def execute_episode(self, index: int = 0) -> "EpisodeResult":
        """One closed-loop run with exact filtering; stops when a certified policy takes over."""
        p, g, cs = self.p, self.g, self.cs
        env = random.Random(f"{self.cfg.seed}|env|{index}")
        prng = random.Random(f"{self.cfg.seed}|planner|{index}")
        b = dict(p.b0)
        states = sorted(b)
        s = env.choices(states, weights=[b[x] for x in states])[0]
        sid = g.intern(x for x, q in b.items() if q > 0)
        res = EpisodeResult(index=index)
        root = None
        visits: dict[str, int] = {}
        t0 = time.perf_counter()
        for step in range(self.cfg.step_budget):
            if sid in cs.winning:
                res.finish("winning", step, 1.0, g.supports[sid], True, p)
                break
            if not any(x in self.can_win for x in b):
                res.finish("dead_end", step, 0.0, None, False, p)
                break
            try:
                bk = belief_key(b)
                visits[bk] = visits.get(bk, -1) + 1
                a, values, counts, root = self.decide(b, sid, prng, root, visits[bk])
            except DeadEndError:
                res.finish("dead_end", step, 0.0, None, False, p)
                break
            res.record(p.belief_by_name(b), self.action_name(a), values.get(self.action_name(a), 0.0),
                       {p.state_names[x]: n for x, n in sorted(counts.items())})
            if self.is_terminal(a):
                th = self.terminal_support(a)
                bound = sum(b.get(x, 0.0) for x in th)
                res.finish("terminal", step, bound, th, s in th, p)
                break
            s, o = p.sample_step(s, a, env)
            res.observations.append(p.obs_names[o])
            b = belief_update(b, a, o, p)
            sid = g.successor(sid, a, o)
            if root is not None:
                i = root.acts.index(a) if root.acts else -1
                kids = root.kids[i] if i >= 0 else None
                root = kids.get(o) if kids else None
        else:
            res.finish("budget", self.cfg.step_budget, 0.0, None, False, p)
        res.seconds = time.perf_counter() - t0
        return res


@dataclass
class EpisodeResult:
    index: int = 0
    beliefs: list[dict[str, float]] = field(default_factory=list)
    actions: list[str] = field(default_factory=list)
    values: list[float] = field(default_factory=list)
    particles: list[dict[str, int]] = field(default_factory=list)
    observations: list[str] = field(default_factory=list)
    reason: str = ""
    switch_step: int | None = None
    bound: float = 0.0
    theta_star: list[str] | None = None
    success: bool = False
    seconds: float = 0.0

    def record(self, belief, action, value, particles):
        self.beliefs.append(belief)
        self.actions.append(action)
        self.values.append(value)
        self.particles.append(particles)

    def finish(self, reason, step, bound, theta, success, p):
        self.reason = reason
        self.switch_step = step if reason in ("winning", "terminal") else None
        self.bound = bound
        self.theta_star = sorted(p.state_names[x] for x in theta) if theta is not None else None
        self.success = bool(success)

    def to_json(self, timing: bool = True) -> dict:
        d = {
            "episode": self.index,
            "actions": self.actions,
            "observations": self.observations,
            "values": self.values,
            "beliefs": self.beliefs,
            "particles": self.particles,
            "reason": self.reason,
            "switch_step": self.switch_step,
            "certified_bound": self.bound,
            "theta_star": self.theta_star,
            "success": self.success,
        }
        if timing:
            d["seconds"] = self.seconds
        return d


def run_episodes(planner: Planner, n: int, start: int = 0) -> list[EpisodeResult]:
    return [planner.execute_episode(i) for i in range(start, start + n)]
