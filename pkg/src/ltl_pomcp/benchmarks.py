"""Generators for the evaluation models and the benchmark formula library.

Families: ``toy``, ``motivating``, ``grid``, ``rocksample`` and ``hallway``.
Every generator is deterministic in its parameters. Layout choices are
documented on each generator; they are reconstructions chosen to reproduce
fixed target model sizes, not transcriptions of existing maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .automata import LDBA
from .hoa import import_hoa
from .pomdp import LabelledPOMDP, validate_pomdp

FAIL = 0.2  # movement failure probability (the agent stays put)


class InvalidSpecError(ValueError):
    pass


# ---------------------------------------------------------------- formula library

FORMULAS: dict[str, tuple[str, tuple[str, ...]]] = {
    "phi1": ("F A & G !B", ("A", "B")),
    "phi2": ("F G C", ("C",)),
    "phi3": ("F (G & F E) & G !B", ("G", "E", "B")),
    "phi4": ("F G G", ("G",)),
    "phi5": ("F G1 & G !T", ("G1", "T")),
    "phi6": ("G (G2 -> F G1) & G !T", ("G1", "G2", "T")),
    "phi7": ("G F G1 & G !T", ("G1", "T")),
    "toy": ("G !(s2 | s7) & G F (s3 | s8)", ("s2", "s3", "s7", "s8")),
    "motivating": ("G F (s2 | s3)", ("s2", "s3")),
}


def fixture_hoa_text(name: str) -> str:
    return resources.files("ltl_pomcp").joinpath("fixtures").joinpath(f"{name}.hoa").read_text()


def fixture_automaton(name: str) -> LDBA:
    """Hand-written HOA automaton shipped for a library formula."""
    return import_hoa(fixture_hoa_text(name))


# ---------------------------------------------------------------- builder


class _Builder:
    def __init__(self, states, actions, ap):
        self.states = list(states)
        self.actions = list(actions)
        self.ap = tuple(ap)
        self.si = {s: i for i, s in enumerate(self.states)}
        self.ai = {a: i for i, a in enumerate(self.actions)}
        self.obs: list[str] = []
        self.oi: dict[str, int] = {}
        self.trans: dict = {}
        self.obs_rows: dict = {}
        self.default = [None] * len(self.states)
        self.labels = [frozenset()] * len(self.states)

    def o(self, name: str) -> int:
        i = self.oi.get(name)
        if i is None:
            i = len(self.obs)
            self.obs.append(name)
            self.oi[name] = i
        return i

    def t(self, s, a, dist: dict) -> None:
        merged: dict[int, float] = {}
        for t, p in dist.items():
            if p > 0:
                k = self.si[t] if isinstance(t, str) else t
                merged[k] = merged.get(k, 0.0) + p
        self.trans[(self._s(s), self.ai[a])] = tuple(sorted(merged.items()))

    def _s(self, s):
        return self.si[s] if isinstance(s, str) else s

    def default_obs(self, s, name: str) -> None:
        self.default[self._s(s)] = self.o(name)

    def z(self, s, a, dist: dict) -> None:
        self.obs_rows[(self._s(s), self.ai[a])] = tuple(sorted((self.o(o), p) for o, p in dist.items() if p > 0))

    def label(self, s, *names) -> None:
        self.labels[self._s(s)] = frozenset(names)

    def build(self, b0: dict) -> LabelledPOMDP:
        m = LabelledPOMDP(
            self.states, self.actions, self.obs, self.ap,
            {self._s(s): p for s, p in b0.items()},
            self.trans, self.labels, self.obs_rows, self.default,
        )
        validate_pomdp(m)
        return m


def _move(dist_target, stay, p_fail):
    """Success to ``dist_target`` with 1 - p_fail, otherwise stay; merges when equal."""
    if dist_target == stay or p_fail == 0:
        return {dist_target: 1.0}
    return {dist_target: 1.0 - p_fail, stay: p_fail}


# ---------------------------------------------------------------- toy


def toy() -> LabelledPOMDP:
    """Nine-state model with actions l, r, d and initial belief {s0: 1}.

    The only certified route is s0 -r-> s1 -d-> s3 -d-> s6 -l-> s5 -d-> {s7: 0.2, s8: 0.8}.
    Wrong moves lead to the trap s2, the dead end s4 or the trap s7. ``s3``
    lies in a state-level accepting end component with ``s4`` (r from s3
    may stay or slide to s4, l from s4 returns), but s3 and s4 look alike,
    so no support over them is winning. In s8, r and d keep the agent there
    and l drops it into s7. Observation classes: {s0, s1}, {s3, s4}, {s7, s8},
    the rest singletons.
    """
    S = [f"s{i}" for i in range(9)]
    b = _Builder(S, ["l", "r", "d"], ("s2", "s3", "s7", "s8"))
    moves = {
        "s0": {"l": "s0", "r": "s1", "d": "s2"},
        "s1": {"l": "s0", "r": "s1", "d": "s3"},
        "s2": {"l": "s2", "r": "s2", "d": "s2"},
        "s3": {"l": "s2", "r": None, "d": "s6"},
        "s4": {"l": "s3", "r": "s2", "d": "s2"},
        "s5": {"l": "s2", "r": "s2", "d": None},
        "s6": {"l": "s5", "r": "s2", "d": "s2"},
        "s7": {"l": "s7", "r": "s7", "d": "s7"},
        "s8": {"l": "s7", "r": "s8", "d": "s8"},
    }
    for s, row in moves.items():
        for a, t in row.items():
            if t is not None:
                b.t(s, a, {t: 1.0})
    b.t("s3", "r", {"s3": 0.5, "s4": 0.5})
    b.t("s5", "d", {"s7": 0.2, "s8": 0.8})
    groups = {"s0": "o01", "s1": "o01", "s2": "o2", "s3": "o34", "s4": "o34", "s5": "o5", "s6": "o6", "s7": "o78", "s8": "o78"}
    for s, o in groups.items():
        b.default_obs(s, o)
    for s in ("s2", "s3", "s7", "s8"):
        b.label(s, s)
    return b.build({"s0": 1.0})


# ---------------------------------------------------------------- motivating example


def motivating() -> LabelledPOMDP:
    """Six states s0..s5, actions a and c, initial belief {s1: 1}, objective G F (s2 | s3).

    From s1, ``a`` splits evenly into {s0, s3} and ``c`` into {s2, s5}.
    {s0, s3} is a state-level accepting end component: s0 needs c, s3 needs a,
    and either move lands on s0 or s3 with equal odds. s0, s3 and the sink s4
    share one observation, so a support soon holds both s0 and s3 and no
    single action is safe for it. {s2, s5} share an observation and
    ``a`` alternates between them. Any other move falls into s4.
    """
    S = [f"s{i}" for i in range(6)]
    b = _Builder(S, ["a", "c"], ("s2", "s3"))
    b.t("s1", "a", {"s0": 0.5, "s3": 0.5})
    b.t("s1", "c", {"s2": 0.5, "s5": 0.5})
    b.t("s0", "c", {"s0": 0.5, "s3": 0.5})
    b.t("s0", "a", {"s4": 1.0})
    b.t("s3", "a", {"s0": 0.5, "s3": 0.5})
    b.t("s3", "c", {"s4": 1.0})
    b.t("s4", "a", {"s4": 1.0})
    b.t("s4", "c", {"s4": 1.0})
    b.t("s2", "a", {"s5": 1.0})
    b.t("s5", "a", {"s2": 1.0})
    b.t("s2", "c", {"s4": 1.0})
    b.t("s5", "c", {"s4": 1.0})
    for s, o in {"s1": "o1", "s0": "o034", "s3": "o034", "s4": "o034", "s2": "o25", "s5": "o25"}.items():
        b.default_obs(s, o)
    b.label("s2", "s2")
    b.label("s3", "s3")
    return b.build({"s1": 1.0})


# ---------------------------------------------------------------- grid


@dataclass
class GridLayout:
    traps: set[tuple[int, int]] = field(default_factory=set)
    goal1: set[tuple[int, int]] = field(default_factory=set)
    goal2: set[tuple[int, int]] = field(default_factory=set)
    start: dict[tuple[int, int], float] = field(default_factory=dict)


def default_grid_layout(n: int) -> GridLayout:
    """Locked label placement.

    The agent starts in the top-left corner with probability 7/8, or in the
    pocket at the bottom-left corner (its right neighbour is a trap) with
    probability 1/8. To reach G1 the agent walks along the top row to column
    4 and down to row ``r = n // 2``. The wall of traps on row ``r - 1`` has a
    single opening at column 4. The gate pair (r, 4)-(r, 5) is flanked by
    traps at (r, 3) and (r, 6), and (r + 1, 4) is a trap. So the agent must
    slide right inside the pair, where the two cells look alike, and then
    commit down. G1 covers the bottom row from column 2 on, where moving
    down is a wall bump. G2 sits at the end of the top row.
    """
    if n < 8 or n % 2:
        raise InvalidSpecError("grid size must be even and at least 8")
    r = n // 2
    traps = {(r - 1, c) for c in range(n) if c != 4}
    traps |= {(r, 3), (r, 6), (r + 1, 4), (n - 1, 1)}
    goal1 = {(n - 1, c) for c in range(2, n)}
    goal2 = {(0, n - 1)}
    start = {(0, 0): 7 / 8, (n - 1, 0): 1 / 8}
    return GridLayout(traps, goal1, goal2, start)


def grid(n: int, layout: GridLayout | None = None) -> LabelledPOMDP:
    """n x n grid with actions left, right, down.

    Down fails with probability 0.2 (the agent stays). Left and right fail
    the same way inside the windy block of rows 0..19 and columns 0..9, and
    are deterministic elsewhere. Moves into the boundary are self-loops.
    Cells (i, 2k) and (i, 2k + 1) share an observation. Traps are absorbing
    in the sense that the automaton rejects, not the dynamics.
    """
    layout = layout or default_grid_layout(n)
    name = lambda i, j: f"c{i}_{j}"
    S = [name(i, j) for i in range(n) for j in range(n)]
    b = _Builder(S, ["left", "right", "down"], ("G1", "G2", "T"))
    for i in range(n):
        for j in range(n):
            here = name(i, j)
            windy = i < 20 and j < 10
            side_fail = FAIL if windy else 0.0
            b.t(here, "left", _move(name(i, j - 1) if j > 0 else here, here, side_fail))
            b.t(here, "right", _move(name(i, j + 1) if j < n - 1 else here, here, side_fail))
            b.t(here, "down", _move(name(i + 1, j) if i < n - 1 else here, here, FAIL))
            b.default_obs(here, f"o{i}_{j // 2}")
            labs = []
            if (i, j) in layout.goal1:
                labs.append("G1")
            if (i, j) in layout.goal2:
                labs.append("G2")
            if (i, j) in layout.traps:
                labs.append("T")
            b.label(here, *labs)
    return b.build({name(i, j): p for (i, j), p in layout.start.items()})


# ---------------------------------------------------------------- rocksample

ROCKS = {
    4: ((0, 2), (3, 1)),
    5: ((0, 4), (4, 0)),
    7: ((0, 3), (6, 3)),
}


def rock_positions(n: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Locked rock placement: both on edges (corners for n = 5), which fixes the sensor observation count."""
    if n in ROCKS:
        return ROCKS[n]
    if n < 3:
        raise InvalidSpecError("rocksample needs n >= 3")
    return ((0, n // 2), (n - 1, n // 2))


def rocksample(n: int) -> LabelledPOMDP:
    """n x n grid with two rocks of unknown quality.

    A state is (row, col, quality of each rock, taken flag of each rock).
    Actions: north, east, west (deterministic), south (fails with 0.2),
    sense1, sense2 (no movement), sample. ``sense_i`` at a cell 4-adjacent to
    rock i reveals its quality exactly; the observation otherwise is the cell
    plus the taken flags. Sampling at an untaken rock takes it. Labels: ``G``
    when standing on a taken good rock, ``B`` when standing on a bad rock,
    ``E`` on the exit column (rightmost). The robot starts at (0, 0) with
    uniformly unknown qualities.
    """
    rocks = rock_positions(n)
    cells = [(i, j) for i in range(n) for j in range(n)]
    configs = [(q1, q2, t1, t2) for q1 in (0, 1) for q2 in (0, 1) for t1 in (0, 1) for t2 in (0, 1)]
    name = lambda i, j, q1, q2, t1, t2: f"r{i}_{j}_{'gb'[q1]}{'gb'[q2]}_{t1}{t2}"
    S = [name(i, j, *cfg) for (i, j) in cells for cfg in configs]
    actions = ["north", "south", "east", "west", "sense1", "sense2", "sample"]
    b = _Builder(S, actions, ("G", "E", "B"))
    adjacent = [
        {(r + di, c + dj) for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)) if 0 <= r + di < n and 0 <= c + dj < n}
        for (r, c) in rocks
    ]
    for (i, j) in cells:
        for q1, q2, t1, t2 in configs:
            here = name(i, j, q1, q2, t1, t2)
            at = lambda a, c: name(a, c, q1, q2, t1, t2)
            b.t(here, "north", {at(max(i - 1, 0), j): 1.0})
            b.t(here, "south", _move(at(i + 1, j) if i < n - 1 else here, here, FAIL))
            b.t(here, "east", {at(i, min(j + 1, n - 1)): 1.0})
            b.t(here, "west", {at(i, max(j - 1, 0)): 1.0})
            b.t(here, "sense1", {here: 1.0})
            b.t(here, "sense2", {here: 1.0})
            taken = [t1, t2]
            for k, pos in enumerate(rocks):
                if pos == (i, j) and not taken[k]:
                    taken[k] = 1
            b.t(here, "sample", {name(i, j, q1, q2, *taken): 1.0})
            base = f"o{i}_{j}_{t1}{t2}"
            b.default_obs(here, base)
            qual = (q1, q2)
            for k in (0, 1):
                if (i, j) in adjacent[k]:
                    b.z(here, f"sense{k + 1}", {f"{base}_rock{k + 1}{'gb'[qual[k]]}": 1.0})
            labs = []
            flags = (t1, t2)
            for k, pos in enumerate(rocks):
                if pos == (i, j):
                    if qual[k] == 0 and flags[k]:
                        labs.append("G")
                    if qual[k] == 1:
                        labs.append("B")
            if j == n - 1:
                labs.append("E")
            b.label(here, *labs)
    # sensor observations for both taken flags must exist even if unreachable from a given state
    for k, cellset in enumerate(adjacent):
        for (i, j) in sorted(cellset):
            for t1 in (0, 1):
                for t2 in (0, 1):
                    for q in "gb":
                        b.o(f"o{i}_{j}_{t1}{t2}_rock{k + 1}{q}")
    b0 = {name(0, 0, q1, q2, 0, 0): 0.25 for q1 in (0, 1) for q2 in (0, 1)}
    return b.build(b0)


# ---------------------------------------------------------------- hallway

HALLWAYS = {
    # cells, undirected corridor edges, one-way edges, label cells
    1: dict(
        cells=[(0, j) for j in range(15)],
        edges=[((0, j), (0, j + 1)) for j in range(14)],
        one_way=[],
        labels={"A": [(0, 14)], "B": [(0, 7)], "C": [(0, 0)]},
        start=[(0, 3), (0, 11)],
    ),
    2: dict(
        cells=[(r, c) for r in (0, 1) for c in range(4)] + [(1 + k, 3) for k in range(1, 16)],
        edges=[((r, c), (r, c + 1)) for r in (0, 1) for c in range(3)]
        + [((0, c), (1, c)) for c in range(4)]
        + [((1 + k, 3), (2 + k, 3)) for k in range(0, 15)],
        one_way=[((0, 0), (1, 0))],
        labels={"A": [(16, 3)], "B": [(0, 3)], "C": [(0, 0)]},
        start=[(1, 1), (9, 3)],
    ),
}

DIRS = [(-1, 0), (0, 1), (1, 0), (0, -1)]  # N E S W
FORWARD_OK = 0.8
TURN_OK = 0.9
SENSOR_ERROR = 0.1


def hallway(k: int) -> LabelledPOMDP:
    """Desk-scale hallway ``HW1'`` (k=1) or ``HW2'`` (k=2).

    States are (cell, heading). ``forward`` succeeds with 0.8 when the cell
    ahead is open and is a self-loop into a wall; ``left`` turns with 0.9.
    The sensor reads the wall pattern ahead, left and right; the front
    reading is wrong with probability 0.1. Observations pair the wall
    pattern with a floor colour (plain, marked A/C, marked B), 24 in all.
    In HW2' one rung of the ladder is a one-way door.
    """
    if k not in HALLWAYS:
        raise InvalidSpecError("hallway layout must be 1 or 2")
    spec = HALLWAYS[k]
    cells = spec["cells"]
    cell_set = set(cells)
    open_dir: dict[tuple, set] = {c: set() for c in cells}
    blocked = {(u, v) for (v, u) in spec["one_way"]}
    for u, v in spec["edges"]:
        for a, b_ in ((u, v), (v, u)):
            if (a, b_) in blocked:
                continue
            d = DIRS.index((b_[0] - a[0], b_[1] - a[1]))
            open_dir[a].add(d)
    name = lambda c, h: f"h{c[0]}_{c[1]}_{'NESW'[h]}"
    S = [name(c, h) for c in cells for h in range(4)]
    b = _Builder(S, ["forward", "left"], ("A", "B", "C"))
    label_of = {c: lab for lab, cs in spec["labels"].items() for c in cs}
    for wf in (0, 1):
        for wl in (0, 1):
            for wr in (0, 1):
                for col in ("plain", "mark", "danger"):
                    b.o(f"w{wf}{wl}{wr}_{col}")
    for c in cells:
        for h in range(4):
            here = name(c, h)
            if h in open_dir[c]:
                ahead = (c[0] + DIRS[h][0], c[1] + DIRS[h][1])
                b.t(here, "forward", {name(ahead, h): FORWARD_OK, here: 1 - FORWARD_OK})
            else:
                b.t(here, "forward", {here: 1.0})
            b.t(here, "left", {name(c, (h + 3) % 4): TURN_OK, here: 1 - TURN_OK})
            wf = 0 if h in open_dir[c] else 1
            wl = 0 if (h + 3) % 4 in open_dir[c] else 1
            wr = 0 if (h + 1) % 4 in open_dir[c] else 1
            lab = label_of.get(c)
            col = "danger" if lab == "B" else ("mark" if lab else "plain")
            row = {f"w{wf}{wl}{wr}_{col}": 1 - SENSOR_ERROR, f"w{1 - wf}{wl}{wr}_{col}": SENSOR_ERROR}
            b.default_obs(here, f"w{wf}{wl}{wr}_{col}")
            for a in ("forward", "left"):
                b.z(here, a, row)
            if lab:
                b.label(here, lab)
    starts = [name(c, h) for c in spec["start"] for h in range(4)]
    return b.build({s: 1 / len(starts) for s in starts})


# ---------------------------------------------------------------- dispatch


@dataclass
class BenchmarkSpec:
    family: str
    n: int | None = None


def generate(spec: BenchmarkSpec) -> LabelledPOMDP:
    f = spec.family
    if f == "toy":
        return toy()
    if f == "motivating":
        return motivating()
    if f == "grid":
        if spec.n is None:
            raise InvalidSpecError("grid needs n")
        return grid(spec.n)
    if f == "rocksample":
        if spec.n is None:
            raise InvalidSpecError("rocksample needs n")
        return rocksample(spec.n)
    if f == "hallway":
        return hallway(spec.n or 1)
    raise InvalidSpecError(f"unknown family {f!r}")
