"""Product of a labelled POMDP with an LDBA.

Product states are pairs ``(s, q)`` named ``<s>_<q>``. The automaton reads the
label of the state being entered, so the initial belief puts ``b0(s)`` on
``(s, delta(q0, L(s)))``. Every epsilon edge ``q -> q'`` becomes an action
``eps_<q'>`` that keeps ``s``, moves the automaton to ``q'`` and emits the
silent observation ``o_eps``. A pair is accepting when the step entering it
is accepting, i.e. ``(q, L(s))`` is an accepting entry of the automaton.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .automata import LDBA, LDBAStructureError
from .pomdp import LabelledPOMDP, ModelError, parse_pomdp, format_pomdp, validate_pomdp

SILENT = "o_eps"
EPS_PREFIX = "eps_"


@dataclass
class ProductPOMDP(LabelledPOMDP):
    accepting: frozenset[int] = frozenset()
    silent_obs: int | None = None
    pairs: list[tuple[int, int]] = field(default_factory=list)

    @property
    def base_observation_count(self) -> int:
        return len(self.obs_names) - (1 if self.silent_obs is not None else 0)

    def sizes(self) -> tuple[int, int, int]:
        """(|S×|, |O×|, |T×|): states, non-silent observations, nonzero transition entries."""
        return self.num_states, self.base_observation_count, sum(len(r) for r in self.trans.values())

    def eps_actions(self) -> frozenset[int]:
        return frozenset(i for i, n in enumerate(self.action_names) if n.startswith(EPS_PREFIX))


def complete_automaton(a: LDBA) -> LDBA:
    """Add a rejecting sink so every state has a successor on every letter."""
    missing = [(q, l) for q in range(a.num_states) for l in a.letters if not a.delta.get((q, l))]
    if not missing:
        return a
    sink = a.num_states
    delta = dict(a.delta)
    for key in missing:
        delta[key] = frozenset([sink])
    for l in a.letters:
        delta[(sink, l)] = frozenset([sink])
    names = list(a.names) + ["sink" if "sink" not in a.names else f"sink{sink}"]
    return LDBA(a.ap, names, a.initial, a.initial_part, delta, a.eps, a.acc)


def build_product(m: LabelledPOMDP, a: LDBA, reachable_only: bool = False) -> ProductPOMDP:
    """Materialise ``m x a``.

    By default every pair in ``S x Q`` is built, so ``sizes()`` counts the
    full cross product. ``reachable_only`` keeps the pairs reachable from
    the initial belief.
    """
    missing = set(a.ap) - set(m.ap)
    if missing:
        raise ModelError(f"automaton propositions {sorted(missing)} are not declared by the model")
    a = complete_automaton(a)
    nq = a.num_states
    letters = [m.label_letter(s, a.ap) for s in range(m.num_states)]
    try:
        step = {(q, l): a.successor(q, l) for q in range(nq) for l in set(letters)}
    except LDBAStructureError as e:
        raise LDBAStructureError(f"product needs a letter-deterministic automaton: {e}") from None
    eps_targets = sorted({t for _, t in a.eps_edges()})
    action_names = list(m.action_names) + [EPS_PREFIX + a.names[t] for t in eps_targets]
    eps_action = {t: len(m.action_names) + i for i, t in enumerate(eps_targets)}
    obs_names = list(m.obs_names)
    silent = None
    if eps_targets:
        silent = len(obs_names)
        obs_names.append(SILENT)

    def pid(s, q):
        return s * nq + q

    b0 = {}
    for s, p in m.b0.items():
        b0[pid(s, step[(a.initial, letters[s])])] = p

    trans: dict[tuple[int, int], tuple] = {}
    obs_rows: dict[tuple[int, int], tuple] = {}
    for s in range(m.num_states):
        for act in m.enabled(s):
            row = m.trans[(s, act)]
            for q in range(nq):
                trans[(pid(s, q), act)] = tuple((pid(t, step[(q, letters[t])]), p) for t, p in row)
        for q, t in a.eps_edges():
            act = eps_action[t]
            trans[(pid(s, q), act)] = ((pid(s, t), 1.0),)
            for q2 in range(nq):
                obs_rows[(pid(s, q2), act)] = ((silent, 1.0),)
    for (s, act), r in m.obs_rows.items():
        for q in range(nq):
            obs_rows.setdefault((pid(s, q), act), r)

    names = [f"{m.state_names[s]}_{a.names[q]}" for s in range(m.num_states) for q in range(nq)]
    labels = [m.labels[s] for s in range(m.num_states) for _ in range(nq)]
    default_obs = [m.default_obs[s] if s < len(m.default_obs) else None for s in range(m.num_states) for _ in range(nq)]
    accepting = frozenset(pid(s, q) for s in range(m.num_states) for q in range(nq) if (q, letters[s]) in a.acc)
    pairs = [(s, q) for s in range(m.num_states) for q in range(nq)]
    p = ProductPOMDP(
        names, action_names, obs_names, m.ap, b0, trans, labels, obs_rows, default_obs,
        accepting=accepting, silent_obs=silent, pairs=pairs,
    )
    if reachable_only:
        p = restrict_to_reachable(p)
    return p


def restrict_to_reachable(p: ProductPOMDP) -> ProductPOMDP:
    seen = set(p.b0)
    stack = list(seen)
    while stack:
        s = stack.pop()
        for act in p.enabled(s):
            for t, _ in p.trans[(s, act)]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
    keep = sorted(seen)
    ren = {s: i for i, s in enumerate(keep)}
    trans = {(ren[s], act): tuple((ren[t], q) for t, q in row) for (s, act), row in p.trans.items() if s in ren}
    obs_rows = {(ren[s], act): r for (s, act), r in p.obs_rows.items() if s in ren}
    return ProductPOMDP(
        [p.state_names[s] for s in keep], p.action_names, p.obs_names, p.ap,
        {ren[s]: q for s, q in p.b0.items()}, trans, [p.labels[s] for s in keep], obs_rows,
        [p.default_obs[s] for s in keep],
        accepting=frozenset(ren[s] for s in p.accepting if s in ren), silent_obs=p.silent_obs,
        pairs=[p.pairs[s] for s in keep] if p.pairs else [],
    )


def validate_product(p: ProductPOMDP) -> None:
    """Row sums and observation completeness; epsilon actions may differ between aliased pairs."""
    validate_pomdp(p, check_shared_observations=False)


def format_product(p: ProductPOMDP) -> str:
    out = format_pomdp(p)
    out += "acc: " + " ".join(p.state_names[s] for s in sorted(p.accepting)) + "\n"
    if p.silent_obs is not None:
        out += f"silent: {p.obs_names[p.silent_obs]}\n"
    return out


def parse_product(text: str) -> ProductPOMDP:
    """Read a model file with the extra ``acc:`` and ``silent:`` headers."""
    acc_names: list[str] = []
    silent_name = None
    body = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line.startswith("acc:"):
            acc_names = line[4:].split()
            continue
        if line.startswith("silent:"):
            silent_name = line[7:].strip()
            continue
        body.append(raw)
    m = parse_pomdp("\n".join(body), validate=False)
    try:
        acc = frozenset(m.state_index[n] for n in acc_names)
    except KeyError as e:
        raise ModelError(f"acc lists unknown state {e.args[0]!r}") from None
    p = ProductPOMDP(
        m.state_names, m.action_names, m.obs_names, m.ap, m.b0, m.trans, m.labels, m.obs_rows, m.default_obs,
        accepting=acc, silent_obs=None if silent_name is None else m.obs_index[silent_name],
    )
    validate_product(p)
    return p
