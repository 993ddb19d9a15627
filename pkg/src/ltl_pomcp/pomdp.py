"""Explicit labelled POMDPs, exact Bayesian filtering and a seeded simulator.

States, actions and observations are addressed by integer index; names are
kept for I/O. ``Z`` is conditioned on the arrived state and the action.

Model file format (UTF-8, ``#`` starts a comment)::

    states: s0 s1 s2
    actions: a b
    observations: o0 o1
    ap: goal
    start: s0:1
    label s2: goal
    obs s0: o0              # default observation, used when no Z row is given
    T s0 a : s1:0.5 s2:0.5
    Z s1 a : o0:0.9 o1:0.1
"""

from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Iterable, Mapping

TOL = 1e-9

Belief = dict  # state index -> probability, all entries positive


class ModelError(ValueError):
    pass


class ModelSyntaxError(ModelError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DisabledActionError(ModelError):
    pass


class ImpossibleObservationError(ModelError):
    pass


@dataclass
class LabelledPOMDP:
    state_names: list[str]
    action_names: list[str]
    obs_names: list[str]
    ap: tuple[str, ...]
    b0: dict[int, float]
    trans: dict[tuple[int, int], tuple[tuple[int, float], ...]]
    labels: list[frozenset[str]]
    obs_rows: dict[tuple[int, int], tuple[tuple[int, float], ...]] = field(default_factory=dict)
    default_obs: list[int | None] = field(default_factory=list)

    def __post_init__(self):
        self._index()

    def _index(self) -> None:
        self.state_index = {n: i for i, n in enumerate(self.state_names)}
        self.action_index = {n: i for i, n in enumerate(self.action_names)}
        self.obs_index = {n: i for i, n in enumerate(self.obs_names)}
        en: list[list[int]] = [[] for _ in self.state_names]
        for s, a in self.trans:
            en[s].append(a)
        self._enabled = [tuple(sorted(x)) for x in en]
        self._enabled_set = [frozenset(x) for x in self._enabled]
        self._cum: dict = {}

    @property
    def num_states(self) -> int:
        return len(self.state_names)

    @property
    def num_actions(self) -> int:
        return len(self.action_names)

    def enabled(self, s: int) -> tuple[int, ...]:
        return self._enabled[s]

    def enabled_set(self, s: int) -> frozenset[int]:
        return self._enabled_set[s]

    def post(self, s: int, a: int) -> tuple[tuple[int, float], ...]:
        row = self.trans.get((s, a))
        if row is None:
            raise DisabledActionError(f"action {self.action_names[a]} is disabled in {self.state_names[s]}")
        return row

    def z(self, s: int, a: int) -> tuple[tuple[int, float], ...]:
        """Observation distribution on arriving in ``s`` via ``a``."""
        row = self.obs_rows.get((s, a))
        if row is not None:
            return row
        d = self.default_obs[s] if s < len(self.default_obs) else None
        if d is None:
            raise ModelError(f"no observation for state {self.state_names[s]} under {self.action_names[a]}")
        return ((d, 1.0),)

    def obs_of(self, s: int) -> frozenset[int]:
        """Observations ``s`` can emit under some action."""
        out = set()
        for a in range(self.num_actions):
            for o, p in self.z(s, a):
                if p > 0:
                    out.add(o)
        return frozenset(out)

    def initial_observation(self, s: int) -> int:
        """Observation used to label the start of an episode (the default observation)."""
        d = self.default_obs[s] if s < len(self.default_obs) else None
        if d is not None:
            return d
        return min(self.obs_of(s))

    def label_letter(self, s: int, ap: tuple[str, ...]) -> int:
        lab = self.labels[s]
        return sum(1 << i for i, p in enumerate(ap) if p in lab)

    def sample_step(self, s: int, a: int, rng: random.Random) -> tuple[int, int]:
        key = (s, a)
        c = self._cum.get(key)
        if c is None:
            row = self.post(s, a)
            c = ([t for t, _ in row], list(accumulate(p for _, p in row)))
            self._cum[key] = c
        succ, cum = c
        i = bisect_right(cum, rng.random() * cum[-1])
        s2 = succ[min(i, len(succ) - 1)]
        zkey = (s2, a, None)
        zc = self._cum.get(zkey)
        if zc is None:
            row = self.z(s2, a)
            zc = ([o for o, _ in row], list(accumulate(p for _, p in row)))
            self._cum[zkey] = zc
        obs, zcum = zc
        if len(obs) == 1:
            return s2, obs[0]
        j = bisect_right(zcum, rng.random() * zcum[-1])
        return s2, obs[min(j, len(obs) - 1)]

    # names <-> indices
    def belief_by_name(self, b: Mapping[int, float]) -> dict[str, float]:
        return {self.state_names[s]: p for s, p in sorted(b.items())}

    def belief_from_names(self, b: Mapping[str, float]) -> dict[int, float]:
        return {self.state_index[n]: p for n, p in b.items()}


# ---------------------------------------------------------------- validation


def validate_pomdp(m: LabelledPOMDP, check_shared_observations: bool = True) -> None:
    """Raise :class:`ModelError` naming the first violated invariant."""
    for (s, a), row in m.trans.items():
        tot = sum(p for _, p in row)
        if abs(tot - 1.0) > TOL:
            raise ModelError(f"T row ({m.state_names[s]}, {m.action_names[a]}) sums to {tot}")
        if any(p <= 0 for _, p in row):
            raise ModelError(f"T row ({m.state_names[s]}, {m.action_names[a]}) has a non-positive entry")
    for (s, a), row in m.obs_rows.items():
        tot = sum(p for _, p in row)
        if abs(tot - 1.0) > TOL:
            raise ModelError(f"Z row ({m.state_names[s]}, {m.action_names[a]}) sums to {tot}")
    if not m.b0:
        raise ModelError("initial belief is empty")
    tot = sum(m.b0.values())
    if abs(tot - 1.0) > TOL or any(p <= 0 for p in m.b0.values()):
        raise ModelError(f"initial belief must be positive and sum to 1, got {tot}")
    obs = []
    for s in range(m.num_states):
        try:
            o = m.obs_of(s)
        except ModelError as e:
            raise ModelError(f"observation function incomplete: {e}") from None
        if not o:
            raise ModelError(f"state {m.state_names[s]} has no observation")
        obs.append(o)
    if check_shared_observations:
        first: dict[int, int] = {}
        for s in range(m.num_states):
            for o in obs[s]:
                t = first.setdefault(o, s)
                if m.enabled_set(t) != m.enabled_set(s):
                    raise ModelError(
                        f"states {m.state_names[t]} and {m.state_names[s]} share observation "
                        f"{m.obs_names[o]} but have different enabled actions"
                    )


# ---------------------------------------------------------------- beliefs


def check_belief(b: Mapping[int, float]) -> None:
    if not b:
        raise ModelError("belief support is empty")
    if any(p <= 0 for p in b.values()):
        raise ModelError("belief entries must be positive")
    if abs(sum(b.values()) - 1.0) > TOL:
        raise ModelError("belief does not sum to 1")


def enabled_actions(theta: Iterable[int], m: LabelledPOMDP) -> frozenset[int]:
    """Actions enabled in every state of ``theta``."""
    it = iter(theta)
    try:
        out = m.enabled_set(next(it))
    except StopIteration:
        raise ModelError("support must be nonempty") from None
    for s in it:
        out = out & m.enabled_set(s)
    return out


def belief_update(b: Mapping[int, float], a: int, o: int, m: LabelledPOMDP) -> dict[int, float]:
    """Bayes filter: predict through ``T(., a)`` and correct with ``Z(s', a)(o)``."""
    if a not in enabled_actions(b, m):
        raise DisabledActionError(f"action {m.action_names[a]} is not enabled in the belief support")
    pred: dict[int, float] = {}
    for s, p in b.items():
        for t, q in m.post(s, a):
            pred[t] = pred.get(t, 0.0) + p * q
    out: dict[int, float] = {}
    for t, p in pred.items():
        for oo, q in m.z(t, a):
            if oo == o and q > 0:
                out[t] = p * q
    norm = sum(out.values())
    if norm <= 0:
        raise ImpossibleObservationError(f"observation {m.obs_names[o]} has probability 0")
    return {t: p / norm for t, p in sorted(out.items())}


def observation_probability(b: Mapping[int, float], a: int, o: int, m: LabelledPOMDP) -> float:
    tot = 0.0
    for s, p in b.items():
        for t, q in m.post(s, a):
            for oo, r in m.z(t, a):
                if oo == o:
                    tot += p * q * r
    return tot


def sample_step(m: LabelledPOMDP, s: int, a: int, rng: random.Random) -> tuple[int, int]:
    return m.sample_step(s, a, rng)


# ---------------------------------------------------------------- file format


def _pairs(tokens: list[str], line: int) -> list[tuple[str, float]]:
    out = []
    for tok in tokens:
        name, sep, val = tok.rpartition(":")
        if not sep or not name:
            raise ModelSyntaxError(f"expected name:prob, got {tok!r}", line)
        try:
            out.append((name, float(val)))
        except ValueError:
            raise ModelSyntaxError(f"bad probability {val!r}", line) from None
    return out


def parse_pomdp(text: str, validate: bool = True) -> LabelledPOMDP:
    """Parse the line-oriented model format (see module docstring)."""
    lists: dict[str, list[str]] = {}
    start: list[tuple[str, float]] = []
    start_line = 0
    labels: dict[str, tuple[int, list[str]]] = {}
    defaults: dict[str, tuple[int, str]] = {}
    t_rows: list[tuple[int, str, str, list[tuple[str, float]]]] = []
    z_rows: list[tuple[int, str, str, list[tuple[str, float]]]] = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, rest = line.partition(":")
        words = head.split()
        if not sep:
            raise ModelSyntaxError(f"missing ':' in {line!r}", ln)
        if len(words) == 1 and words[0] in ("states", "actions", "observations", "ap"):
            if words[0] in lists:
                raise ModelSyntaxError(f"duplicate {words[0]} header", ln)
            lists[words[0]] = rest.split()
        elif words == ["start"]:
            start = _pairs(rest.split(), ln)
            start_line = ln
        elif len(words) == 2 and words[0] == "label":
            labels[words[1]] = (ln, rest.split())
        elif len(words) == 2 and words[0] == "obs":
            vals = rest.split()
            if len(vals) != 1:
                raise ModelSyntaxError("obs expects exactly one observation", ln)
            defaults[words[1]] = (ln, vals[0])
        elif len(words) == 3 and words[0] in ("T", "Z"):
            row = (ln, words[1], words[2], _pairs(rest.split(), ln))
            (t_rows if words[0] == "T" else z_rows).append(row)
        else:
            raise ModelSyntaxError(f"unrecognised line {line!r}", ln)
    for key in ("states", "actions", "observations"):
        if key not in lists:
            raise ModelSyntaxError(f"missing {key}: header", 0)
    states, actions, observations = lists["states"], lists["actions"], lists["observations"]
    ap = tuple(lists.get("ap", []))
    si = {n: i for i, n in enumerate(states)}
    ai = {n: i for i, n in enumerate(actions)}
    oi = {n: i for i, n in enumerate(observations)}

    def lookup(table, name, kind, ln):
        if name not in table:
            raise ModelSyntaxError(f"unknown {kind} {name!r}", ln)
        return table[name]

    trans: dict[tuple[int, int], tuple] = {}
    for ln, s, a, row in t_rows:
        key = (lookup(si, s, "state", ln), lookup(ai, a, "action", ln))
        if key in trans:
            raise ModelSyntaxError(f"duplicate T row for {s} {a}", ln)
        merged: dict[int, float] = {}
        for t, p in row:
            ti = lookup(si, t, "state", ln)
            merged[ti] = merged.get(ti, 0.0) + p
        trans[key] = tuple(sorted((t, p) for t, p in merged.items() if p > 0))
    obs_rows: dict[tuple[int, int], tuple] = {}
    for ln, s, a, row in z_rows:
        key = (lookup(si, s, "state", ln), lookup(ai, a, "action", ln))
        merged = {}
        for o, p in row:
            oo = lookup(oi, o, "observation", ln)
            merged[oo] = merged.get(oo, 0.0) + p
        obs_rows[key] = tuple(sorted((o, p) for o, p in merged.items() if p > 0))
    default_obs: list[int | None] = [None] * len(states)
    for s, (ln, o) in defaults.items():
        default_obs[lookup(si, s, "state", ln)] = lookup(oi, o, "observation", ln)
    lab = [frozenset()] * len(states)
    for s, (ln, names) in labels.items():
        for n in names:
            if n not in ap:
                raise ModelSyntaxError(f"label {n!r} not declared in ap", ln)
        lab[lookup(si, s, "state", ln)] = frozenset(names)
    b0: dict[int, float] = {}
    for s, p in start:
        if p > 0:
            k = lookup(si, s, "state", start_line)
            b0[k] = b0.get(k, 0.0) + p
    m = LabelledPOMDP(states, actions, observations, ap, b0, trans, lab, obs_rows, default_obs)
    if validate:
        validate_pomdp(m)
    return m


def _fmt(p: float) -> str:
    return repr(float(p))


def format_pomdp(m: LabelledPOMDP) -> str:
    """Serialise ``m``; ``parse_pomdp(format_pomdp(m))`` reproduces it."""
    out = [
        "states: " + " ".join(m.state_names),
        "actions: " + " ".join(m.action_names),
        "observations: " + " ".join(m.obs_names),
        "ap: " + " ".join(m.ap),
        "start: " + " ".join(f"{m.state_names[s]}:{_fmt(p)}" for s, p in sorted(m.b0.items())),
    ]
    for s, lab in enumerate(m.labels):
        if lab:
            out.append(f"label {m.state_names[s]}: " + " ".join(sorted(lab)))
    for s, d in enumerate(m.default_obs):
        if d is not None:
            out.append(f"obs {m.state_names[s]}: {m.obs_names[d]}")
    for (s, a) in sorted(m.trans):
        row = " ".join(f"{m.state_names[t]}:{_fmt(p)}" for t, p in m.trans[(s, a)])
        out.append(f"T {m.state_names[s]} {m.action_names[a]} : {row}")
    for (s, a) in sorted(m.obs_rows):
        row = " ".join(f"{m.obs_names[o]}:{_fmt(p)}" for o, p in m.obs_rows[(s, a)])
        out.append(f"Z {m.state_names[s]} {m.action_names[a]} : {row}")
    return "\n".join(out) + "\n"
