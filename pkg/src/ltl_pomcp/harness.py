"""End-to-end experiment driver: model, automaton, product, certification, episodes."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .automata import LDBA, ltl_to_ldba
from .benchmarks import FORMULAS, BenchmarkSpec, fixture_automaton, generate
from .hoa import import_hoa
from .ltl import parse_ltl
from .planner import Planner, PlannerConfig
from .pomdp import LabelledPOMDP, parse_pomdp
from .product import ProductPOMDP, build_product
from .support import CertifiedStructure, certify

SEED_ENV = "POMDP_LTL_SEED"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    family: str | None = None
    n: int | None = None
    model: str | None = None  # path to a model file, instead of family
    formula: str | None = None  # library name, e.g. phi5
    ltl: str | None = None
    hoa: str | None = None
    episodes: int = 100
    sims: int = 30_000
    depth: int = 200
    particles: int = 10_000
    ucb: float = 1.0
    seed: int = 0
    memo: bool = True
    jobs: int = 1
    out_json: str | None = None
    out_csv: str | None = None

    def validate(self) -> None:
        if (self.family is None) == (self.model is None):
            raise ConfigError("give exactly one of family or model")
        if sum(x is not None for x in (self.formula, self.ltl, self.hoa)) != 1:
            raise ConfigError("give exactly one of formula, ltl or hoa")
        if self.episodes < 1:
            raise ConfigError("episodes must be at least 1")
        for path in (self.model, self.hoa):
            if path is not None and not Path(path).exists():
                raise ConfigError(f"file not found: {path}")
        if self.formula is not None and self.formula not in FORMULAS:
            raise ConfigError(f"unknown library formula {self.formula!r}")

    def planner_config(self) -> PlannerConfig:
        return PlannerConfig(self.sims, self.depth, self.particles, self.ucb, self.seed, memo=self.memo)


_INT = {"n", "episodes", "sims", "depth", "particles", "seed", "jobs"}
_FLOAT = {"ucb"}
_BOOL = {"memo"}


def parse_config(text: str, env: dict | None = None) -> ExperimentConfig:
    """Flat ``key = value`` lines (``:`` also accepted); ``#`` starts a comment.

    The seed from the environment variable ``POMDP_LTL_SEED`` wins over the file.
    """
    fields = ExperimentConfig.__dataclass_fields__
    kw = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":"
        key, _, val = line.partition(sep)
        key, val = key.strip().replace("-", "_"), val.strip().strip('"')
        if key not in fields:
            raise ConfigError(f"line {no}: unknown key {key!r}")
        try:
            if key in _INT:
                kw[key] = int(val)
            elif key in _FLOAT:
                kw[key] = float(val)
            elif key in _BOOL:
                kw[key] = val.lower() in ("1", "true", "yes", "on")
            else:
                kw[key] = val
        except ValueError:
            raise ConfigError(f"line {no}: bad value for {key}: {val!r}") from None
    env = os.environ if env is None else env
    if env.get(SEED_ENV):
        kw["seed"] = int(env[SEED_ENV])
    cfg = ExperimentConfig(**kw)
    cfg.validate()
    return cfg


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    ph = k / n
    den = 1 + z * z / n
    mid = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if k == 0 else max(0.0, mid - half)
    hi = 1.0 if k == n else min(1.0, mid + half)
    return lo, hi


def load_model(cfg: ExperimentConfig) -> LabelledPOMDP:
    if cfg.model is not None:
        return parse_pomdp(Path(cfg.model).read_text())
    return generate(BenchmarkSpec(cfg.family, cfg.n))


def load_automaton(cfg: ExperimentConfig, m: LabelledPOMDP) -> LDBA:
    if cfg.hoa is not None:
        return import_hoa(Path(cfg.hoa).read_text())
    if cfg.formula is not None:
        return fixture_automaton(cfg.formula)
    f = parse_ltl(cfg.ltl)
    ap = tuple(a for a in m.ap if a in f.atoms()) + tuple(sorted(f.atoms() - set(m.ap)))
    return ltl_to_ldba(f, ap)


def formula_text(cfg: ExperimentConfig) -> str:
    if cfg.formula is not None:
        return FORMULAS[cfg.formula][0]
    return cfg.ltl if cfg.ltl is not None else f"hoa:{cfg.hoa}"


@dataclass
class ResultRecord:
    model: str
    formula: str
    sizes: tuple[int, int, int]
    sr_seconds: float
    pomcp_seconds: float
    episodes: int
    successes: int
    pr_hat: float
    ci95: tuple[float, float]
    mean_bound: float
    winning_supports: int
    seed: int
    config: dict
    outcomes: list[dict] = field(default_factory=list)

    def to_json(self, timing: bool = True) -> dict:
        d = asdict(self)
        d["sizes"] = list(self.sizes)
        d["ci95"] = list(self.ci95)
        if not timing:
            d.pop("sr_seconds")
            d.pop("pomcp_seconds")
            for o in d["outcomes"]:
                o.pop("seconds", None)
        return d

    def csv_row(self) -> dict:
        s, o, t = self.sizes
        return {
            "model": self.model,
            "formula": self.formula,
            "|S|/|O|/|T|": f"{s} / {o} / {t}",
            "SR (s)": f"{self.sr_seconds:.2f}",
            "POMCP (s)": f"{self.pomcp_seconds:.2f}",
            "Pr": f"{self.pr_hat:.3f}",
            "CI95": f"[{self.ci95[0]:.3f}, {self.ci95[1]:.3f}]",
            "episodes": self.episodes,
        }


def prepare(cfg: ExperimentConfig) -> tuple[ProductPOMDP, CertifiedStructure, float]:
    m = load_model(cfg)
    a = load_automaton(cfg, m)
    p = build_product(m, a)
    t0 = time.perf_counter()
    cs, _ = certify(p)
    return p, cs, time.perf_counter() - t0


def _run_chunk(args) -> list[dict]:
    cfg, indices = args
    p, cs, _ = prepare(cfg)
    pl = Planner(p, cs, cfg.planner_config())
    return [pl.execute_episode(i).to_json() for i in indices]


def run_experiment(cfg: ExperimentConfig) -> ResultRecord:
    cfg.validate()
    p, cs, sr = prepare(cfg)
    t0 = time.perf_counter()
    if cfg.jobs <= 1:
        pl = Planner(p, cs, cfg.planner_config())
        outcomes = [pl.execute_episode(i).to_json() for i in range(cfg.episodes)]
    else:
        chunks = [(cfg, list(range(j, cfg.episodes, cfg.jobs))) for j in range(cfg.jobs)]
        with ProcessPoolExecutor(cfg.jobs) as ex:
            outcomes = [o for part in ex.map(_run_chunk, chunks) for o in part]
        outcomes.sort(key=lambda o: o["episode"])
    pomcp = time.perf_counter() - t0
    k = sum(o["success"] for o in outcomes)
    n = len(outcomes)
    model = cfg.model or (f"{cfg.family}({cfg.n})" if cfg.n is not None else cfg.family)
    rec = ResultRecord(
        model=model, formula=formula_text(cfg), sizes=p.sizes(), sr_seconds=sr, pomcp_seconds=pomcp,
        episodes=n, successes=k, pr_hat=k / n, ci95=wilson_interval(k, n),
        mean_bound=sum(o["certified_bound"] for o in outcomes) / n, winning_supports=len(cs.winning),
        seed=cfg.seed, config=asdict(cfg), outcomes=outcomes,
    )
    if cfg.out_json:
        Path(cfg.out_json).write_text(json.dumps(rec.to_json(), indent=1) + "\n")
    if cfg.out_csv:
        write_csv(cfg.out_csv, [rec])
    return rec


def write_csv(path: str | None, records: list[ResultRecord]) -> str:
    buf = io.StringIO()
    rows = [r.csv_row() for r in records]
    w = csv.DictWriter(buf, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)
    if path:
        Path(path).write_text(buf.getvalue())
    return buf.getvalue()
