"""Multi-start experiment harness: resolve a matrix source, run independent
starts, keep the best, aggregate per class, export traces and summaries."""
from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Iterable

import numpy as np

from .anls import TRACE_FIELDS, IterationTrace, SymConfig, sym_anls
from .core import read_matrix_market
from .similarity import (
    KernelConfig,
    cosine_similarity,
    gen_synthetic,
    kernel_similarity,
    random_lowrank,
    read_points_csv,
    read_vectors_csv,
)

log = logging.getLogger(__name__)


# -- matrix sources -----------------------------------------------------------

def _parse_params(text: str) -> dict[str, str]:
    out = {}
    for part in filter(None, text.split(",")):
        key, sep, val = part.partition("=")
        if not sep:
            raise ValueError(f"bad generator parameter {part!r}; expected key=value")
        out[key.strip()] = val.strip()
    return out


def load_matrix(source: str) -> np.ndarray:
    """Resolve a matrix source string.

    ``gen:class1:n=2000,p=80[,seed=0]``  random ``V V^T``
    ``gen:wsn|sc|sk|dd:n=1000[,seed=0]`` synthetic points, diameter sigma, normalized cut
    ``points:<csv>``                     x,y[,label] rows, same pipeline as the synthetic sets
    ``gauss:<csv>``                      vectors per row, 7th-neighbour sigma, normalized cut
    ``cosine:<csv>``                     vectors per row, cosine similarity
    anything else                        MatrixMarket file
    """
    kind, _, rest = source.partition(":")
    if kind == "gen":
        name, _, params = rest.partition(":")
        kw = _parse_params(params)
        seed = int(kw.pop("seed", 0))
        n = int(kw.pop("n"))
        if name == "class1":
            A = random_lowrank(n, int(kw.pop("p")), seed)
        else:
            A = kernel_similarity(gen_synthetic(name, n, seed), KernelConfig("diameter"))
        if kw:
            raise ValueError(f"unused generator parameters {sorted(kw)}")
        return A
    if kind == "points":
        return kernel_similarity(read_points_csv(rest), KernelConfig("diameter"))
    if kind == "gauss":
        return kernel_similarity(read_vectors_csv(rest), KernelConfig("knn7"))
    if kind == "cosine":
        return cosine_similarity(read_vectors_csv(rest).T)
    return read_matrix_market(source)


def parse_update(text: str) -> tuple[str, float]:
    """``ada`` or ``g<zeta>`` (e.g. ``g1.01``) -> (update, zeta)."""
    t = text.strip().lower()
    if t == "ada":
        return "ada", 1.01
    if t.startswith("g"):
        return "geometric", float(t[1:])
    raise ValueError(f"unknown update {text!r}; use ada or g<zeta>")


# -- experiment ---------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentSpec:
    problem: str
    source: str
    k: int
    inner: str = "gcd"
    eta: float = 1e-3
    update: str = "ada"
    zeta: float = 1.01
    starts: int = 5
    base_seed: int = 0
    nu_max: int = 500
    tau1: float = 1e-3
    tau2: float = 0.1
    group: str = ""
    seeds: tuple[int, ...] | None = None  # overrides base_seed + 0..starts-1

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.seeds is not None and len(self.seeds) != self.starts:
            raise ValueError("need one seed per start")

    def start_seeds(self) -> list[int]:
        if self.seeds is not None:
            return list(self.seeds)
        return [self.base_seed + j for j in range(self.starts)]

    def config(self, seed: int) -> SymConfig:
        return SymConfig(k=self.k, tau1=self.tau1, tau2=self.tau2, nu_max=self.nu_max, inner=self.inner,
                         eta=self.eta, update=self.update, zeta=self.zeta, seed=seed)


@dataclass
class StartSummary:
    seed: int
    eps_S: float
    nu_tot: int
    cor: int
    elapsed_s: float
    status: str


@dataclass
class ExperimentReport:
    problem: str
    group: str
    n: int
    k: int
    eps_S: float
    nu_tot: int
    cor: int
    T: float
    status: str
    best_seed: int
    starts: list[StartSummary]
    trace: list[IterationTrace]
    W: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "W"}
        d["starts"] = [asdict(s) for s in self.starts]
        d["trace"] = [asdict(t) for t in self.trace]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentReport:
        d = dict(d)
        d["starts"] = [StartSummary(**s) for s in d["starts"]]
        d["trace"] = [IterationTrace(**t) for t in d["trace"]]
        return cls(**d)


def _one_start(A: np.ndarray, cfg: SymConfig):
    res = sym_anls(A, cfg)
    summ = StartSummary(cfg.seed, res.eps_S, res.nu_tot, res.corrections, res.elapsed_s, res.status)
    return summ, res.trace, res.W


def run_experiment(spec: ExperimentSpec, A: np.ndarray | None = None, jobs: int | None = None) -> ExperimentReport:
    """Run ``spec.starts`` independent starts and keep the one with the smallest final error.

    Ties on the error go to fewer outer iterations, then to the earlier seed.
    ``T`` is the longest wall time over the starts.
    """
    if A is None:
        A = load_matrix(spec.source)
    cfgs = [spec.config(s) for s in spec.start_seeds()]
    if jobs is None:
        jobs = min(spec.starts, os.cpu_count() or 1)
    jobs = max(1, min(jobs, spec.starts))

    outcomes = []
    if jobs == 1:
        for cfg in cfgs:
            try:
                outcomes.append(_one_start(A, cfg))
            except Exception as exc:  # one failed start must not sink the others
                log.warning("start seed=%d failed: %s", cfg.seed, exc)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_one_start, A, cfg) for cfg in cfgs]
            for cfg, fut in zip(cfgs, futures):
                try:
                    outcomes.append(fut.result())
                except Exception as exc:
                    log.warning("start seed=%d failed: %s", cfg.seed, exc)
    if not outcomes:
        raise RuntimeError(f"{spec.problem}: all {spec.starts} starts failed")

    order = {id(o): j for j, o in enumerate(outcomes)}
    best = min(outcomes, key=lambda o: (o[0].eps_S, o[0].nu_tot, o[0].seed, order[id(o)]))
    summ, trace, W = best
    starts = [o[0] for o in outcomes]
    return ExperimentReport(
        problem=spec.problem, group=spec.group, n=A.shape[0], k=spec.k,
        eps_S=summ.eps_S, nu_tot=summ.nu_tot, cor=summ.cor,
        T=max(s.elapsed_s for s in starts), status=summ.status, best_seed=summ.seed,
        starts=starts, trace=trace, W=W,
    )


# -- aggregation ----------------------------------------------------------------

@dataclass(frozen=True)
class AggregateRow:
    group: str
    eps_S: float
    nu_tot: float
    T: float
    count: int

    def formatted(self) -> str:
        return f"{self.group:<12} {self.eps_S:.3f} {self.nu_tot:8.2f} {self.T:9.2f}"


def aggregate(reports: Iterable[ExperimentReport],
              grouping: str | Callable[[ExperimentReport], str] = "group") -> list[AggregateRow]:
    """Per-group arithmetic means of final error, outer iterations and T, in first-seen order."""
    key = grouping if callable(grouping) else (lambda r: getattr(r, grouping))
    groups: dict[str, list[ExperimentReport]] = {}
    for r in reports:
        groups.setdefault(key(r), []).append(r)
    rows = []
    for g, rs in groups.items():
        rows.append(AggregateRow(
            g,
            float(np.mean([r.eps_S for r in rs])),
            float(np.mean([r.nu_tot for r in rs])),
            float(np.mean([r.T for r in rs])),
            len(rs),
        ))
    return rows


# -- export ---------------------------------------------------------------------

def cor_av(report: ExperimentReport) -> list[float]:
    """Corrections per outer iteration divided by ``2n``."""
    return [t.corrections / (2 * report.n) for t in report.trace]


def write_trace_csv(path, trace: list[IterationTrace], n: int | None = None) -> None:
    """Trace rows under the fixed header; ``n`` appends a ``cor_av`` column."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_FIELDS + (("cor_av",) if n else ()))
        for t in trace:
            row = [t.nu] + [repr(float(v)) for v in t.row()[1:7]] + [t.corrections, repr(float(t.elapsed_s))]
            if n:
                row.append(repr(t.corrections / (2 * n)))
            w.writerow(row)


def read_trace_csv(path) -> list[IterationTrace]:
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        out = []
        for row in r:
            out.append(IterationTrace(
                int(row["nu"]), *(float(row[f]) for f in TRACE_FIELDS[1:7]),
                int(row["corrections"]), float(row["elapsed_s"]),
            ))
    return out


def export(report: ExperimentReport, fmt: str, path, with_cor_av: bool = False) -> None:
    """``csv``: trace of the best start; ``json``: every report field except the factor."""
    if fmt == "csv":
        write_trace_csv(path, report.trace, report.n if with_cor_av else None)
    elif fmt == "json":
        with open(path, "w") as fh:
            json.dump(report.to_dict(), fh, indent=1)
    else:
        raise ValueError(f"unknown export format {fmt!r}")


def load_report(path) -> ExperimentReport:
    with open(path) as fh:
        return ExperimentReport.from_dict(json.load(fh))
