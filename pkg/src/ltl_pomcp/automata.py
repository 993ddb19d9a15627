"""Büchi automata over the alphabet 2^AP.

Letters are bitmasks: bit ``i`` of a letter is set iff ``ap[i]`` holds.

Acceptance of an :class:`LDBA` is stored as *accepting entries*: pairs
``(q, letter)`` such that any step that reads ``letter`` and arrives in ``q``
is accepting. State-based Büchi acceptance is the special case where every
letter is listed for an accepting state; transition-based automata whose
acceptance depends only on the target and the letter (the usual shape of
LDBAs produced by LTL translators) embed without blow-up. This is what lets a
product state ``(s, q)`` decide acceptance locally from ``q`` and ``L(s)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .graph import sccs
from .ltl import Formula, is_nnf

DEFAULT_STATE_CAP = 10_000


class AutomatonResourceError(RuntimeError):
    pass


class LDBAStructureError(ValueError):
    pass


def letter_of(names: Iterable[str], ap: Sequence[str]) -> int:
    idx = {a: i for i, a in enumerate(ap)}
    out = 0
    for n in names:
        out |= 1 << idx[n]
    return out


def letter_names(letter: int, ap: Sequence[str]) -> frozenset[str]:
    return frozenset(a for i, a in enumerate(ap) if letter >> i & 1)


@dataclass
class NBA:
    ap: tuple[str, ...]
    labels: list[str]
    initial: int
    delta: dict[tuple[int, int], frozenset[int]]
    accepting: frozenset[int]

    @property
    def num_states(self) -> int:
        return len(self.labels)

    @property
    def letters(self) -> range:
        return range(1 << len(self.ap))


@dataclass
class LDBA:
    ap: tuple[str, ...]
    names: list[str]
    initial: int
    initial_part: frozenset[int]
    delta: dict[tuple[int, int], frozenset[int]]
    eps: dict[int, frozenset[int]] = field(default_factory=dict)
    acc: frozenset[tuple[int, int]] = frozenset()

    @property
    def num_states(self) -> int:
        return len(self.names)

    @property
    def letters(self) -> range:
        return range(1 << len(self.ap))

    @property
    def accepting_part(self) -> frozenset[int]:
        return frozenset(range(self.num_states)) - self.initial_part

    def successor(self, q: int, letter: int) -> int | None:
        """The unique letter successor (products require a letter-deterministic automaton)."""
        t = self.delta.get((q, letter))
        if not t:
            return None
        if len(t) > 1:
            raise LDBAStructureError(f"state {self.names[q]} is nondeterministic on letter {letter}")
        return next(iter(t))

    def eps_edges(self) -> list[tuple[int, int]]:
        return sorted((q, t) for q, ts in self.eps.items() for t in ts)

    def is_accepting_entry(self, q: int, letter: int) -> bool:
        return (q, letter) in self.acc


# ---------------------------------------------------------------- validation


def validate_ldba(a: LDBA, letter_deterministic: bool = False) -> None:
    """Raise :class:`LDBAStructureError` unless ``a`` satisfies the LDBA invariants.

    A deterministic automaton whose initial state already belongs to the
    accepting part is accepted with an empty initial part.
    """
    n = a.num_states
    all_states = set(range(n))
    if not 0 <= a.initial < n:
        raise LDBAStructureError("initial state out of range")
    if not a.initial_part <= all_states:
        raise LDBAStructureError("initial part has unknown states")
    q_acc = a.accepting_part
    if a.initial not in a.initial_part and a.initial_part:
        raise LDBAStructureError("initial state must lie in the initial part")
    for (q, letter), ts in a.delta.items():
        if not ts <= all_states:
            raise LDBAStructureError("transition to unknown state")
        if q in q_acc:
            if len(ts) > 1:
                raise LDBAStructureError(
                    f"accepting-part state {a.names[q]} has {len(ts)} successors on one letter"
                )
            if not ts <= q_acc:
                raise LDBAStructureError(f"accepting-part state {a.names[q]} leaves the accepting part")
        elif letter_deterministic and len(ts) > 1:
            raise LDBAStructureError(f"state {a.names[q]} is nondeterministic on a letter")
    for q, ts in a.eps.items():
        if ts and q not in a.initial_part:
            raise LDBAStructureError(f"epsilon edge from accepting-part state {a.names[q]}")
        if not ts <= all_states:
            raise LDBAStructureError("epsilon edge to unknown state")
    for q, _ in a.acc:
        if q not in q_acc:
            raise LDBAStructureError(f"accepting entry on initial-part state {a.names[q]}")


# ---------------------------------------------------------------- LTL -> NBA


def _expand(todo, pos, neg, nxt, postponed, out):
    while todo:
        f, todo = todo[0], todo[1:]
        k = f.kind
        if k == "true":
            continue
        if k == "not":
            c = f.children[0]
            if c.kind == "true" or c.atom in pos:
                return
            neg = neg | {c.atom}
        elif k == "atom":
            if f.atom in neg:
                return
            pos = pos | {f.atom}
        elif k == "and":
            todo = f.children + todo
        elif k == "or":
            _expand((f.children[0],) + todo, pos, neg, nxt, postponed, out)
            _expand((f.children[1],) + todo, pos, neg, nxt, postponed, out)
            return
        elif k == "next":
            nxt = nxt | {f.children[0]}
        elif k == "until":
            a, b = f.children
            _expand((b,) + todo, pos, neg, nxt, postponed, out)
            _expand((a,) + todo, pos, neg, nxt | {f}, postponed | {f}, out)
            return
        elif k == "eventually":
            _expand(f.children + todo, pos, neg, nxt, postponed, out)
            _expand(todo, pos, neg, nxt | {f}, postponed | {f}, out)
            return
        elif k == "release":
            a, b = f.children
            _expand((a, b) + todo, pos, neg, nxt, postponed, out)
            _expand((b,) + todo, pos, neg, nxt | {f}, postponed, out)
            return
        elif k == "always":
            todo = f.children + todo
            nxt = nxt | {f}
        else:
            raise ValueError(f"formula not in NNF: {f}")
    out.append((pos, neg, frozenset(nxt), postponed))


def _subformulas(f: Formula) -> set[Formula]:
    out = {f}
    for c in f.children:
        out |= _subformulas(c)
    return out


def ltl_to_nba(f: Formula, ap: Sequence[str], max_states: int = DEFAULT_STATE_CAP) -> NBA:
    """Tableau translation of an NNF formula into a state-based NBA.

    Tableau states are sets of obligations; acceptance is generalised over the
    until/eventually subformulas and then degeneralised with a counter.
    """
    if not is_nnf(f):
        raise ValueError("ltl_to_nba expects a formula in negation normal form")
    ap = tuple(ap)
    missing = f.atoms() - set(ap)
    if missing:
        raise ValueError(f"atoms {sorted(missing)} not in alphabet")
    untils = sorted((g for g in _subformulas(f) if g.kind in ("until", "eventually")), key=str)
    k = len(untils)
    letters = range(1 << len(ap))
    bit = {a: 1 << i for i, a in enumerate(ap)}

    expansion_cache: dict[frozenset, list] = {}

    def expand(obligations: frozenset) -> list:
        if obligations not in expansion_cache:
            raw: list = []
            _expand(tuple(sorted(obligations, key=str)), frozenset(), frozenset(), frozenset(), frozenset(), raw)
            edges = set()
            for pos, neg, nxt, postponed in raw:
                pm = sum(bit[a] for a in pos)
                nm = sum(bit[a] for a in neg)
                marks = frozenset(i for i, u in enumerate(untils) if u not in postponed)
                edges.add((pm, nm, nxt, marks))
            expansion_cache[obligations] = sorted(edges, key=lambda e: (e[0], e[1], sorted(map(str, e[2])), sorted(e[3])))
        return expansion_cache[obligations]

    start = (frozenset([f]), 0)
    index = {start: 0}
    queue = deque([start])
    delta: dict[tuple[int, int], set[int]] = {}
    while queue:
        node = queue.popleft()
        obligations, j = node
        src = index[node]
        base = 0 if j == k else j
        edges = expand(obligations)
        for letter in letters:
            options = {(nxt, marks) for pm, nm, nxt, marks in edges if letter & pm == pm and not letter & nm}
            # drop options dominated by weaker obligations with more marks
            kept = [
                (nxt, marks)
                for nxt, marks in options
                if not any(
                    (n2, m2) != (nxt, marks) and n2 <= nxt and m2 >= marks for n2, m2 in options
                )
            ]
            for nxt, marks in sorted(kept, key=lambda e: (sorted(map(str, e[0])), sorted(e[1]))):
                j2 = base
                while j2 < k and j2 in marks:
                    j2 += 1
                tgt = (nxt, j2)
                if tgt not in index:
                    if len(index) >= max_states:
                        raise AutomatonResourceError(f"NBA exceeds {max_states} states")
                    index[tgt] = len(index)
                    queue.append(tgt)
                delta.setdefault((src, letter), set()).add(index[tgt])
    labels = [""] * len(index)
    accepting = set()
    for (obligations, j), i in index.items():
        body = ", ".join(sorted(map(str, obligations))) or "true"
        labels[i] = f"{{{body}}}#{j}"
        if j == k:
            accepting.add(i)
    return NBA(ap, labels, 0, {key: frozenset(v) for key, v in delta.items()}, frozenset(accepting))


# ---------------------------------------------------------------- NBA -> LDBA


def nba_to_ldba(n: NBA, max_states: int = DEFAULT_STATE_CAP) -> LDBA:
    """Limit-determinise an NBA.

    The initial part is the subset construction of ``n``. From a subset ``P``
    an epsilon edge jumps, for each ``q`` in ``P``, into a deterministic
    breakpoint construction ``(R, B)`` started at ``({q}, {})``: ``R`` follows
    every run from ``q``, ``B`` collects the runs that saw an accepting state
    since the last breakpoint, and ``B == R`` is a breakpoint (accepting).
    """
    letters = list(n.letters)
    F = n.accepting

    def post(states: frozenset, letter: int) -> frozenset:
        out: set[int] = set()
        for q in states:
            out |= n.delta.get((q, letter), frozenset())
        return frozenset(out)

    SINK = ("sink",)
    index: dict = {}
    kinds: list = []

    def intern(key) -> int:
        if key not in index:
            if len(index) >= max_states:
                raise AutomatonResourceError(f"LDBA exceeds {max_states} states")
            index[key] = len(index)
            kinds.append(key)
            queue.append(key)
        return index[key]

    queue: deque = deque()
    init = intern(("i", frozenset([n.initial])))
    delta: dict[tuple[int, int], frozenset[int]] = {}
    eps: dict[int, frozenset[int]] = {}
    while queue:
        key = queue.popleft()
        src = index[key]
        if key == SINK:
            for letter in letters:
                delta[(src, letter)] = frozenset([src])
            continue
        if key[0] == "i":
            P = key[1]
            for letter in letters:
                nxt = post(P, letter)
                tgt = intern(("i", nxt)) if nxt else intern(SINK)
                delta[(src, letter)] = frozenset([tgt])
            # the epsilon step itself is never accepting, so the flagged variant is equivalent
            jumps = {intern(("a", frozenset([q]), frozenset(), True)) for q in sorted(P)}
            if jumps:
                eps[src] = frozenset(jumps)
            continue
        _, R, B, _flag = key
        for letter in letters:
            R2 = post(R, letter)
            if not R2:
                delta[(src, letter)] = frozenset([intern(SINK)])
                continue
            B2 = post(B, letter) | (R2 & F)
            tgt = ("a", R2, frozenset(), True) if B2 == R2 else ("a", R2, B2, False)
            delta[(src, letter)] = frozenset([intern(tgt)])
    initial_part = frozenset(i for k_, i in index.items() if k_ != SINK and k_[0] == "i")
    acc = frozenset((index[k_], letter) for k_ in index if k_ != SINK and k_[0] == "a" and k_[3] for letter in letters)
    names = []
    for k_ in kinds:
        if k_ == SINK:
            names.append("sink")
        elif k_[0] == "i":
            names.append("i" + str(sorted(k_[1])))
        else:
            names.append(f"a{sorted(k_[1])}/{sorted(k_[2])}{'!' if k_[3] else ''}")
    return LDBA(n.ap, names, init, initial_part, delta, eps, acc)


# ---------------------------------------------------------------- reduction


def _live_states(a: LDBA) -> set[int]:
    """States from which some accepting cycle is reachable."""
    n = a.num_states

    def succ(q):
        seen = set()
        for letter in a.letters:
            seen |= a.delta.get((q, letter), frozenset())
        seen |= a.eps.get(q, frozenset())
        return sorted(seen)

    comps = sccs(range(n), succ)
    good: set[int] = set()
    for comp in comps:
        cs = set(comp)
        for q in comp:
            if any(
                t in cs and (t, letter) in a.acc
                for letter in a.letters
                for t in a.delta.get((q, letter), ())
            ):
                good |= cs
                break
    preds: dict[int, set[int]] = {}
    for q in range(n):
        for t in succ(q):
            preds.setdefault(t, set()).add(q)
    live = set(good)
    stack = list(good)
    while stack:
        t = stack.pop()
        for q in preds.get(t, ()):
            if q not in live:
                live.add(q)
                stack.append(q)
    return live


def reduce_ldba(a: LDBA) -> LDBA:
    """Remove unreachable states, collapse dead states into one sink and merge bisimilar states.

    The result is total: every state has a successor on every letter.
    """
    letters = list(a.letters)
    live = _live_states(a)
    # redirect dead targets to a single fresh sink
    sink = a.num_states
    delta: dict[tuple[int, int], frozenset[int]] = {}
    for q in range(a.num_states):
        if q not in live:
            continue
        for letter in letters:
            ts = frozenset(t for t in a.delta.get((q, letter), ()) if t in live)
            delta[(q, letter)] = ts if ts else frozenset([sink])
    for letter in letters:
        delta[(sink, letter)] = frozenset([sink])
    eps = {q: frozenset(t for t in ts if t in live) for q, ts in a.eps.items() if q in live}
    eps = {q: ts for q, ts in eps.items() if ts}
    initial = a.initial if a.initial in live else sink
    # reachable part
    order: list[int] = []
    seen = {initial}
    queue = deque([initial])
    while queue:
        q = queue.popleft()
        order.append(q)
        nxt = set()
        for letter in letters:
            nxt |= delta[(q, letter)]
        nxt |= eps.get(q, frozenset())
        for t in sorted(nxt):
            if t not in seen:
                seen.add(t)
                queue.append(t)
    in_initial = lambda q: q in a.initial_part
    acc_letters = {q: frozenset(l for l in letters if (q, l) in a.acc) for q in order}
    # partition refinement
    block = {}
    keys: dict = {}
    for q in order:
        key = (in_initial(q), acc_letters[q], q == sink)
        block[q] = keys.setdefault(key, len(keys))
    while True:
        sigs: dict = {}
        new_block = {}
        for q in order:
            sig = (
                block[q],
                tuple(frozenset(block[t] for t in delta[(q, l)]) for l in letters),
                frozenset(block[t] for t in eps.get(q, ())),
            )
            new_block[q] = sigs.setdefault(sig, len(sigs))
        if len(sigs) == len(set(block.values())):
            block = new_block
            break
        block = new_block
    # renumber blocks in BFS order
    renum: dict[int, int] = {}
    for q in order:
        renum.setdefault(block[q], len(renum))
    rep: dict[int, int] = {}
    for q in order:
        rep.setdefault(renum[block[q]], q)
    m = len(renum)
    new_delta = {}
    new_eps = {}
    for b, q in rep.items():
        for l in letters:
            new_delta[(b, l)] = frozenset(renum[block[t]] for t in delta[(q, l)])
        e = frozenset(renum[block[t]] for t in eps.get(q, ()))
        if e:
            new_eps[b] = e
    new_initial_part = frozenset(b for b, q in rep.items() if in_initial(q))
    new_acc = frozenset((b, l) for b, q in rep.items() for l in acc_letters[q])
    sink_block = renum.get(block.get(sink)) if sink in block else None
    names = []
    counter = 0
    for b in range(m):
        if b == sink_block:
            names.append("sink")
        else:
            names.append(str(counter))
            counter += 1
    out = LDBA(a.ap, names, renum[block[initial]], new_initial_part, new_delta, new_eps, new_acc)
    return normalise_partition(out)


def normalise_partition(a: LDBA) -> LDBA:
    """Recompute the initial/accepting split as: accepting part = closure of accepting-entry states.

    Keeps only letter-deterministic states in the accepting part; nothing
    changes when the closure would swallow a nondeterministic or epsilon state.
    """
    closure = {q for q, _ in a.acc}
    stack = list(closure)
    while stack:
        q = stack.pop()
        for l in a.letters:
            for t in a.delta.get((q, l), ()):
                if t not in closure:
                    closure.add(t)
                    stack.append(t)
    ok = all(
        len(a.delta.get((q, l), ())) <= 1 for q in closure for l in a.letters
    ) and not any(a.eps.get(q) for q in closure)
    if not ok:
        return a
    initial_part = frozenset(range(a.num_states)) - closure
    return LDBA(a.ap, a.names, a.initial, initial_part, a.delta, a.eps, a.acc)


def breakpoint_dba(n: NBA, max_states: int = DEFAULT_STATE_CAP) -> LDBA:
    """Deterministic breakpoint automaton started at the NBA's initial state.

    Its language is always contained in ``L(n)``; it equals ``L(n)`` for
    many formulas (all DBA-recognisable ones met in practice).
    """
    letters = list(n.letters)
    F = n.accepting
    start = (frozenset([n.initial]), frozenset(), True)
    index = {start: 0}
    keys = [start]
    queue = deque([start])
    delta = {}
    SINK = None
    while queue:
        key = queue.popleft()
        src = index[key]
        if key is SINK:
            for l in letters:
                delta[(src, l)] = frozenset([src])
            continue
        R, B, _ = key
        for l in letters:
            R2 = frozenset(t for q in R for t in n.delta.get((q, l), ()))
            if not R2:
                tgt = SINK
            else:
                B2 = frozenset(t for q in B for t in n.delta.get((q, l), ())) | (R2 & F)
                tgt = (R2, frozenset(), True) if B2 == R2 else (R2, B2, False)
            if tgt not in index:
                if len(index) >= max_states:
                    raise AutomatonResourceError(f"DBA exceeds {max_states} states")
                index[tgt] = len(index)
                keys.append(tgt)
                queue.append(tgt)
            delta[(src, l)] = frozenset([index[tgt]])
    # flagged keys only arise from breakpoints, the start key included
    acc = frozenset((i, l) for k_, i in index.items() if k_ is not SINK and k_[2] for l in letters)
    names = ["sink" if k_ is SINK else str(i) for i, k_ in enumerate(keys)]
    return LDBA(n.ap, names, 0, frozenset(), delta, {}, acc)


def _is_dba(a: LDBA) -> bool:
    return not any(a.eps.values()) and all(len(ts) <= 1 for ts in a.delta.values())


def included_in_dba(a: NBA | LDBA, d: LDBA) -> bool:
    """Exact check of ``L(a) <= L(d)`` for a deterministic ``d`` over the same alphabet.

    Looks for a reachable cycle of the product that takes an accepting step of
    ``a`` while ``d`` takes no accepting step.
    """
    if isinstance(a, NBA):
        a_eps: dict = {}
        a_acc = lambda q, l: q in a.accepting
    else:
        a_eps = a.eps
        a_acc = a.is_accepting_entry
    letters = list(a.letters)

    def edges(node):
        q, x = node
        for l in letters:
            ys = d.delta.get((x, l))
            if not ys:
                continue
            y = next(iter(ys))
            d_acc = d.is_accepting_entry(y, l)
            for t in a.delta.get((q, l), ()):
                yield (t, y), a_acc(t, l), d_acc
        for t in a_eps.get(q, ()):
            yield (t, x), False, False

    start = (a.initial, d.initial)
    reach = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w, _, _ in edges(v):
            if w not in reach:
                reach.add(w)
                queue.append(w)
    restricted = lambda v: [w for w, _, dacc in edges(v) if not dacc]
    comps = sccs(sorted(reach), restricted)
    comp_of = {v: i for i, c in enumerate(comps) for v in c}
    for v in reach:
        for w, aacc, dacc in edges(v):
            if aacc and not dacc and comp_of[w] == comp_of[v]:
                return False
    return True


def _entry_letters(a: LDBA) -> dict[int, set[int]]:
    """Letters on which each state is actually entered."""
    out: dict[int, set[int]] = {q: set() for q in range(a.num_states)}
    for (q, l), ts in a.delta.items():
        for t in ts:
            out[t].add(l)
    return out


def _merge(a: LDBA, keep: int, drop: int) -> LDBA | None:
    entries = _entry_letters(a)
    acc = set()
    for q, l in a.acc:
        if q not in (keep, drop):
            acc.add((q, l))
    for l in a.letters:
        in_keep, in_drop = l in entries[keep], l in entries[drop]
        k_acc, d_acc = (keep, l) in a.acc, (drop, l) in a.acc
        if in_keep and in_drop and k_acc != d_acc:
            return None
        if (in_keep and k_acc) or (not in_keep and in_drop and d_acc):
            acc.add((keep, l))
    remap = lambda q: keep if q == drop else q
    states = [q for q in range(a.num_states) if q != drop]
    renum = {q: i for i, q in enumerate(states)}
    delta = {}
    for (q, l), ts in a.delta.items():
        if q == drop:
            continue
        delta[(renum[q], l)] = frozenset(renum[remap(t)] for t in ts)
    return LDBA(
        a.ap,
        [a.names[q] for q in states],
        renum[remap(a.initial)],
        frozenset(),
        delta,
        {},
        frozenset((renum[q], l) for q, l in acc),
    )


def minimise_dba(d: LDBA) -> LDBA:
    """Greedy language-preserving state merging for a deterministic automaton.

    Every candidate merge is accepted only if exact inclusion holds in both
    directions against the original.
    """
    d = reduce_ldba(d)
    if not _is_dba(d):
        return d
    original = d
    changed = True
    while changed:
        changed = False
        n = d.num_states
        for keep in range(n):
            for drop in range(keep + 1, n):
                if "sink" in (d.names[keep], d.names[drop]):
                    continue
                cand = _merge(d, keep, drop)
                if cand is None:
                    continue
                if included_in_dba(cand, original) and included_in_dba(original, cand):
                    d = cand
                    changed = True
                    break
            if changed:
                break
    entries = _entry_letters(d)
    acc = frozenset((q, l) for q, l in d.acc if l in entries[q])
    d = LDBA(d.ap, d.names, d.initial, frozenset(), d.delta, {}, acc)
    return _rename(normalise_partition(d))


def _rename(a: LDBA) -> LDBA:
    counter = 0
    names = []
    for n in a.names:
        if n == "sink":
            names.append("sink")
        else:
            names.append(str(counter))
            counter += 1
    return LDBA(a.ap, names, a.initial, a.initial_part, a.delta, a.eps, a.acc)


def ltl_to_ldba(f: Formula, ap: Sequence[str], max_states: int = DEFAULT_STATE_CAP) -> LDBA:
    """Builtin pipeline: NNF -> tableau NBA -> limit-determinisation -> reduction.

    When the deterministic breakpoint automaton already captures the whole
    language (checked exactly) the result is that automaton, minimised.
    """
    from .ltl import to_nnf

    nba = ltl_to_nba(to_nnf(f), ap, max_states)
    ldba = reduce_ldba(nba_to_ldba(nba, max_states))
    dba = breakpoint_dba(nba, max_states)
    if included_in_dba(ldba, dba):
        return minimise_dba(dba)
    return ldba


# ---------------------------------------------------------------- lasso membership


def _as_letter(x, ap) -> int:
    if isinstance(x, int):
        return x
    return letter_of(x, ap)


def accepts_lasso(a: NBA | LDBA, prefix: Sequence, cycle: Sequence) -> bool:
    """Whether ``prefix . cycle^omega`` is accepted.

    Letters may be bitmasks or collections of AP names. Searches the product
    of the automaton with the lasso for a reachable cycle through an accepting
    step.
    """
    if not cycle:
        raise ValueError("cycle must be nonempty")
    word = [_as_letter(x, a.ap) for x in list(prefix) + list(cycle)]
    n = len(word)
    succ_pos = [i + 1 for i in range(n - 1)] + [len(prefix)]
    if isinstance(a, NBA):
        eps: dict = {}
        is_acc = lambda q, l: q in a.accepting
    else:
        eps = a.eps
        is_acc = a.is_accepting_entry

    def edges(node):
        q, i = node
        l = word[i]
        for t in sorted(a.delta.get((q, l), ())):
            yield (t, succ_pos[i]), is_acc(t, l)
        for t in sorted(eps.get(q, ())):
            yield (t, i), False

    start = (a.initial, 0)
    reach = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w, _ in edges(v):
            if w not in reach:
                reach.add(w)
                queue.append(w)
    comps = sccs(sorted(reach), lambda v: [w for w, _ in edges(v)])
    comp_of = {}
    for ci, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = ci
    for v in reach:
        for w, acc in edges(v):
            if acc and comp_of[w] == comp_of[v]:
                return True
    return False
