"""Monte Carlo delay experiment with a discrete-time Bernoulli arrival process.

Random streams: trial ``j`` of an experiment seeded with ``seed`` draws from
``numpy.random.Generator(PCG64(SeedSequence([seed, j])))``. The same trial
index therefore sees the same stream for every arrival probability and every
``T_min``, which pairs trials across settings.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .geometry import DEFAULT_D_STAR
from .network import RouteNetwork, build_example_unet, build_snet1, load_network
from .scheduler import FlightPlan, ScheduleBook, Scheduler, UavRequest

TRIAL_COLUMNS = ("t_min", "p_a", "trial", "seed", "n_uav", "max_delay", "mean_delay")
UAV_COLUMNS = ("k", "L_i", "L_f", "ETA", "STA", "delay", "route_length")


@dataclass
class SimConfig:
    p_a: float = 0.5
    T_delta: float = 1.0
    T_min: float = 5.0
    V: float = 4.0
    n_uav: int = 1000
    trials: int = 7
    seed: int = 0
    network: str = "unet"
    d_star: float = DEFAULT_D_STAR

    def __post_init__(self):
        if not 0 <= self.p_a <= 1:
            raise ValueError("p_a must lie in [0, 1]")
        if self.T_delta <= 0:
            raise ValueError("T_delta must be positive")
        if self.n_uav < 1:
            raise ValueError("n_uav must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass
class TrialResult:
    p_a: float
    T_min: float
    trial: int
    seed: int
    plans: list[FlightPlan] = field(repr=False)
    route_lengths: list[float] = field(repr=False)

    @property
    def delays(self) -> np.ndarray:
        return np.array([p.delay for p in self.plans])

    @property
    def max_delay(self) -> float:
        return float(self.delays.max()) if self.plans else 0.0

    @property
    def mean_delay(self) -> float:
        return float(self.delays.mean()) if self.plans else 0.0

    def uav_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(UAV_COLUMNS)
        for p, length in zip(self.plans, self.route_lengths):
            r = p.request
            w.writerow([r.k, r.L_i, r.L_f, f"{r.ETA:.6f}", f"{p.STA:.6f}",
                        f"{p.delay:.6f}", f"{length:.6f}"])
        return buf.getvalue()


@lru_cache(maxsize=8)
def resolve_network(name_or_path: str) -> RouteNetwork:
    if name_or_path == "unet":
        return build_example_unet()
    if name_or_path == "snet1":
        return build_snet1()
    return load_network(name_or_path)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, trial])))


def draw_arrivals(t: float, p_a: float, terminals, rng: np.random.Generator,
                  first_k: int = 1, limit: int | None = None) -> list[UavRequest]:
    """Requests arriving at tick ``t``.

    Draw ``r`` uniform on [0, 1); while ``r <= p_a`` emit a request with a
    uniformly random ordered pair of distinct terminals and draw again.
    ``limit`` caps the count (needed for ``p_a = 1``).
    """
    terminals = list(terminals)
    n = len(terminals)
    out = []
    while limit is None or len(out) < limit:
        if rng.random() > p_a:
            break
        i = int(rng.integers(n))
        j = int(rng.integers(n - 1))
        if j >= i:
            j += 1
        out.append(UavRequest(first_k + len(out), terminals[i], terminals[j], float(t)))
    return out


def run_trial(config: SimConfig, net: RouteNetwork, rng: np.random.Generator,
              trial: int = 0) -> TrialResult:
    book = ScheduleBook(config.T_min)
    sched = Scheduler(net, book, config.V, config.d_star)
    plans, lengths = [], []
    n = 0
    if config.p_a == 0:
        return TrialResult(config.p_a, config.T_min, trial, config.seed, plans, lengths)
    while len(plans) < config.n_uav:
        t = n * config.T_delta
        for req in draw_arrivals(t, config.p_a, net.terminals, rng, len(plans) + 1,
                                 config.n_uav - len(plans)):
            plan = sched.schedule(req)
            plans.append(plan)
            lengths.append(net.route_length(plan.route))
        n += 1
    return TrialResult(config.p_a, config.T_min, trial, config.seed, plans, lengths)


@dataclass
class ExperimentReport:
    config: dict
    results: list[TrialResult]

    def select(self, T_min=None, p_a=None) -> list[TrialResult]:
        return [r for r in self.results
                if (T_min is None or r.T_min == T_min) and (p_a is None or r.p_a == p_a)]

    def max_delays(self, T_min, p_a) -> list[float]:
        return [r.max_delay for r in self.select(T_min, p_a)]

    def mean_max_delay(self, T_min, p_a) -> float:
        return float(np.mean(self.max_delays(T_min, p_a)))

    def trials_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRIAL_COLUMNS)
        for r in self.results:
            w.writerow([f"{r.T_min:g}", f"{r.p_a:g}", r.trial, r.seed, len(r.plans),
                        f"{r.max_delay:.6f}", f"{r.mean_delay:.6f}"])
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("t_min", "p_a", "trials", "mean_max_delay", "min_max_delay", "max_max_delay"))
        keys = sorted({(r.T_min, r.p_a) for r in self.results}, key=lambda k: (-k[0], k[1]))
        for T, p in keys:
            m = self.max_delays(T, p)
            w.writerow([f"{T:g}", f"{p:g}", len(m), f"{np.mean(m):.6f}",
                        f"{min(m):.6f}", f"{max(m):.6f}"])
        return buf.getvalue()


def _trial_job(args):
    cfg_dict, trial = args
    cfg = SimConfig(**cfg_dict)
    net = resolve_network(cfg.network)
    return run_trial(cfg, net, trial_rng(cfg.seed, trial), trial)


def run_experiment(config: SimConfig, p_values, t_mins=None, jobs: int = 1) -> ExperimentReport:
    """Every (T_min, p_a) setting times ``config.trials`` paired trials."""
    p_values = list(p_values)
    if not p_values:
        raise ValueError("p_a sweep must be nonempty")
    t_mins = [config.T_min] if t_mins is None else list(t_mins)
    jobs_list = []
    for T in t_mins:
        for p in p_values:
            cfg = asdict(config) | {"p_a": float(p), "T_min": float(T)}
            jobs_list.extend((cfg, j) for j in range(config.trials))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_trial_job, jobs_list))
    else:
        results = [_trial_job(j) for j in jobs_list]
    echo = asdict(config) | {"p_a": p_values, "T_min": t_mins}
    return ExperimentReport(echo, results)
