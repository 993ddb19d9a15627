"""HOA v1 import and export for limit-deterministic Büchi automata.

Only the subset needed here is supported: a single start state, explicit
labels, ``Acceptance: 1 Inf(0)`` with state- or transition-based marks.
Epsilon jumps have no HOA syntax, so they travel in the optional header
``eps-edges: src dst src dst ...``; other tools ignore it.

On import the accepting part is the forward closure of epsilon targets and
of states entered by accepting transitions. If a state is entered both
accepting and non-accepting on the same letter it is split into two copies.
"""

from __future__ import annotations

import re
from typing import Callable

from .automata import LDBA, LDBAStructureError, validate_ldba


class HOAParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------- export


def _guard(letter: int, n_ap: int) -> str:
    if n_ap == 0:
        return "t"
    return "&".join(str(i) if letter >> i & 1 else f"!{i}" for i in range(n_ap))


def export_hoa(a: LDBA, name: str | None = None) -> str:
    """Render ``a`` with transition-based acceptance and one edge per letter."""
    out = ["HOA: v1"]
    if name:
        out.append(f'name: "{name}"')
    out.append(f"States: {a.num_states}")
    out.append(f"Start: {a.initial}")
    out.append(f"AP: {len(a.ap)}" + "".join(f' "{p}"' for p in a.ap))
    out.append("acc-name: Buchi")
    out.append("Acceptance: 1 Inf(0)")
    out.append("properties: trans-labels explicit-labels trans-acc")
    eps = a.eps_edges()
    if eps:
        out.append("eps-edges: " + " ".join(f"{s} {t}" for s, t in eps))
    out.append("--BODY--")
    for q in range(a.num_states):
        out.append(f'State: {q} "{a.names[q]}"')
        for l in a.letters:
            for t in sorted(a.delta.get((q, l), ())):
                mark = " {0}" if (t, l) in a.acc else ""
                out.append(f"[{_guard(l, len(a.ap))}] {t}{mark}")
    out.append("--END--")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- guards

_GUARD_TOKEN = re.compile(r"\s*(?:(\d+)|([tf])\b|([!&|()]))")


def _compile_guard(text: str, n_ap: int, line: int) -> Callable[[int], bool]:
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _GUARD_TOKEN.match(text, pos)
        if not m:
            raise HOAParseError(f"bad label expression {text!r}", line)
        toks.append(m.group(m.lastindex))
        pos = m.end()
    i = 0

    def peek():
        return toks[i] if i < len(toks) else None

    def take():
        nonlocal i
        i += 1
        return toks[i - 1]

    def disj():
        left = conj()
        while peek() == "|":
            take()
            r = conj()
            left = (lambda x, y: lambda l: x(l) or y(l))(left, r)
        return left

    def conj():
        left = atom()
        while peek() == "&":
            take()
            r = atom()
            left = (lambda x, y: lambda l: x(l) and y(l))(left, r)
        return left

    def atom():
        tok = peek()
        if tok is None:
            raise HOAParseError("truncated label expression", line)
        take()
        if tok == "!":
            inner = atom()
            return lambda l: not inner(l)
        if tok == "(":
            inner = disj()
            if peek() != ")":
                raise HOAParseError("missing ')' in label", line)
            take()
            return inner
        if tok == "t":
            return lambda l: True
        if tok == "f":
            return lambda l: False
        if tok.isdigit():
            k = int(tok)
            if k >= n_ap:
                raise HOAParseError(f"AP index {k} out of range", line)
            return lambda l: bool(l >> k & 1)
        raise HOAParseError(f"unexpected {tok!r} in label", line)

    f = disj()
    if i != len(toks):
        raise HOAParseError(f"trailing tokens in label {text!r}", line)
    return f


# ---------------------------------------------------------------- import

_HEADER = re.compile(r"^([A-Za-z_][A-Za-z0-9_-]*):\s*(.*)$")
_STRING = re.compile(r'"((?:[^"\\]|\\.)*)"')
_EDGE = re.compile(r"^\[(.*)\]\s*(\d+)\s*(\{[\d\s]*\})?\s*$")
_STATE = re.compile(r'^State:\s*(?:\[(.*)\]\s*)?(\d+)\s*("(?:[^"\\]|\\.)*")?\s*(\{[\d\s]*\})?\s*$')


def _marks(text: str | None) -> set[int]:
    if not text:
        return set()
    return {int(x) for x in text.strip("{} ").split()}


def import_hoa(text: str) -> LDBA:
    """Parse a HOA v1 Büchi automaton into an :class:`LDBA`."""
    lines = text.splitlines()
    n_states = None
    start = None
    ap: list[str] | None = None
    eps_pairs: list[tuple[int, int]] = []
    acceptance = None
    i = 0
    while i < len(lines) and not lines[i].strip():
        i += 1
    if i >= len(lines) or not lines[i].strip().startswith("HOA:"):
        raise HOAParseError("document must start with 'HOA: v1'", i + 1)
    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw or raw.startswith("/*"):
            continue
        if raw == "--BODY--":
            break
        m = _HEADER.match(raw)
        if not m:
            raise HOAParseError(f"malformed header line {raw!r}", i)
        key, val = m.group(1), m.group(2).strip()
        if key == "HOA":
            if val != "v1":
                raise HOAParseError(f"unsupported version {val!r}", i)
        elif key == "States":
            n_states = int(val)
        elif key == "Start":
            if start is not None or "&" in val:
                raise HOAParseError("exactly one start state is supported", i)
            start = int(val)
        elif key == "AP":
            parts = val.split(None, 1)
            count = int(parts[0])
            ap = _STRING.findall(parts[1] if len(parts) > 1 else "")
            if len(ap) != count:
                raise HOAParseError("AP count does not match names", i)
        elif key == "Acceptance":
            acceptance = " ".join(val.split())
            if acceptance not in ("1 Inf(0)", "1 Inf(0 )"):
                raise HOAParseError(f"only Buchi acceptance is supported, got {val!r}", i)
        elif key == "eps-edges":
            nums = [int(x) for x in val.split()]
            if len(nums) % 2:
                raise HOAParseError("eps-edges needs pairs", i)
            eps_pairs = list(zip(nums[::2], nums[1::2]))
        elif key == "Alias":
            raise HOAParseError("aliases are not supported", i)
    else:
        raise HOAParseError("missing --BODY--", len(lines))
    if acceptance is None:
        raise HOAParseError("missing Acceptance header", i)
    if start is None:
        raise HOAParseError("missing Start header", i)
    ap = ap or []
    n_letters = 1 << len(ap)

    names: dict[int, str] = {}
    state_acc: set[int] = set()
    edges: list[tuple[int, int, int, bool]] = []  # src, letter, dst, accepting
    edge_lines: dict[tuple[int, int], int] = {}
    current = None
    ended = False
    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw:
            continue
        if raw == "--END--":
            ended = True
            break
        if raw.startswith("State:"):
            m = _STATE.match(raw)
            if not m:
                raise HOAParseError(f"malformed state line {raw!r}", i)
            if m.group(1):
                raise HOAParseError("state labels are not supported", i)
            current = int(m.group(2))
            if m.group(3):
                names[current] = m.group(3)[1:-1]
            if 0 in _marks(m.group(4)):
                state_acc.add(current)
            continue
        if current is None:
            raise HOAParseError("edge before any State:", i)
        m = _EDGE.match(raw)
        if not m:
            raise HOAParseError(f"malformed edge {raw!r} (implicit labels are not supported)", i)
        g = _compile_guard(m.group(1), len(ap), i)
        dst = int(m.group(2))
        marked = 0 in _marks(m.group(3))
        edge_lines.setdefault((current, dst), i)
        for l in range(n_letters):
            if g(l):
                edges.append((current, l, dst, marked))
    if not ended:
        raise HOAParseError("missing --END--", len(lines))
    if n_states is None:
        n_states = 1 + max([start] + [max(s, d) for s, _, d, _ in edges] + list(names))
    for s, _, d, _ in edges:
        if not (0 <= s < n_states and 0 <= d < n_states):
            raise HOAParseError(f"state index out of range in edge {s}->{d}", edge_lines.get((s, d), i))

    # acceptance as entries; split a target entered inconsistently
    entry_flags: dict[tuple[int, int], set[bool]] = {}
    for s, l, d, marked in edges:
        entry_flags.setdefault((d, l), set()).add(marked or d in state_acc)
    split = {d for (d, _), fl in entry_flags.items() if len(fl) > 1}
    copy_of: dict[int, int] = {}
    for d in sorted(split):
        copy_of[d] = n_states + len(copy_of)
    total = n_states + len(copy_of)

    delta: dict[tuple[int, int], set[int]] = {}
    acc: set[tuple[int, int]] = set()
    for s, l, d, marked in edges:
        is_acc = marked or d in state_acc
        tgt = copy_of[d] if d in split and is_acc else d
        srcs = [s] + ([copy_of[s]] if s in copy_of else [])
        for src in srcs:
            delta.setdefault((src, l), set()).add(tgt)
        if is_acc:
            acc.add((tgt, l))
    eps: dict[int, set[int]] = {}
    for s, t in eps_pairs:
        eps.setdefault(s, set()).add(t)
        if s in copy_of:
            eps.setdefault(copy_of[s], set()).add(t)

    closure = {q for q, _ in acc} | {t for ts in eps.values() for t in ts}
    stack = list(closure)
    while stack:
        q = stack.pop()
        for l in range(n_letters):
            for t in delta.get((q, l), ()):
                if t not in closure:
                    closure.add(t)
                    stack.append(t)
    all_names = [names.get(q, str(q)) for q in range(n_states)]
    all_names += [all_names[d] + "'" for d in sorted(copy_of)]
    a = LDBA(
        tuple(ap),
        all_names,
        start,
        frozenset(range(total)) - closure,
        {k: frozenset(v) for k, v in delta.items()},
        {k: frozenset(v) for k, v in eps.items()},
        frozenset(acc),
    )
    try:
        validate_ldba(a)
    except LDBAStructureError as e:
        raise LDBAStructureError(f"not limit-deterministic: {e}") from None
    return a
