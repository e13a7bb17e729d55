"""Discrete-event simulation of the unreliable tandem models.

Three models share one result shape:

* ``markov_tandem_global_failure`` -- N Markovian nodes with infinite
  buffers; the whole network alternates between operational periods
  (exp(alpha)) and repair periods (exp(gamma)) independently of the queue
  contents, and all service is frozen while under repair.  Simulated
  exactly through an operational-clock time change: services consume
  operational time only, and since service is exponential, resampling on
  resume is distributionally identical to freezing.

* ``mg1_sequential_stage`` -- a packet occupies the whole chain from
  service start at node 1 to departure at node N; a serving node fails at
  rate alpha and repair (generally distributed) is preemptive-resume.
  Equivalent to an M/G/1 queue whose service is the chain completion time,
  which is sampled directly (Poisson(alpha * service) interruptions, each
  adding an independent repair draw).

* ``mg1_overlap`` -- node i may already serve the next packet while node
  i+1 serves, with forwarding blocked while the downstream node is busy.
  Kept only to measure how much the sequential-stage idealization gives
  away; it runs a per-packet recursion rather than a vectorized one.

Age is accumulated by exact sawtooth areas (no time sampling), and the
empirical age LST over the same sawtooth is available for transform-level
comparisons.  Replication i always consumes the stream seeded
base_seed + i, so parallel and sequential aggregation are bit-identical.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .mg1 import Mg1TandemParams
from .mm1 import Mm1TandemParams

__all__ = [
    "MODELS",
    "SimConfig",
    "SimResult",
    "run",
    "run_replicated_parallel",
    "InsufficientHorizonError",
]

MODELS = ("markov_tandem_global_failure", "mg1_sequential_stage", "mg1_overlap")

DEFAULT_HORIZON = 1e6
DEFAULT_WARMUP = 0.1
DEFAULT_REPLICATIONS = 20


class InsufficientHorizonError(RuntimeError):
    """No deliveries survived the warm-up window."""


@dataclass(frozen=True)
class SimConfig:
    model: str
    params: object
    horizon: float = DEFAULT_HORIZON
    warmup_fraction: float = DEFAULT_WARMUP
    replications: int = DEFAULT_REPLICATIONS
    base_seed: int = 12345
    # Markov model with N != 2 nodes: explicit per-node service rates.
    service_rates: tuple | None = None
    hist_max: int = 40
    # optional s-grid at which the empirical age LST is recorded
    age_lst_s: tuple = ()

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.horizon <= 0 or self.replications < 1:
            raise ValueError("horizon must be > 0 and replications >= 1")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must be in [0, 1)")
        if self.model == "markov_tandem_global_failure":
            if not isinstance(self.params, Mm1TandemParams):
                raise TypeError("markov model needs Mm1TandemParams")
        else:
            if not isinstance(self.params, Mg1TandemParams):
                raise TypeError("general-service models need Mg1TandemParams")

    @property
    def n_nodes(self) -> int:
        if self.model == "markov_tandem_global_failure":
            return len(self.node_rates())
        return self.params.n_stages

    def node_rates(self) -> tuple:
        if self.service_rates is not None:
            return tuple(self.service_rates)
        return (self.params.mu1, self.params.mu2)


@dataclass
class SimResult:
    aaoi_mean: float
    aaoi_ci_half: float
    paoi_mean: float
    sojourn_mean: float
    per_node_wait: np.ndarray
    node2_queue_hist: np.ndarray
    node2_queue_hist_ci: np.ndarray
    delivered_count: int
    age_lst_values: np.ndarray = field(default_factory=lambda: np.empty(0))
    age_lst_ci: np.ndarray = field(default_factory=lambda: np.empty(0))
    replications: int = 0


# --------------------------------------------------------------------------
# shared numeric helpers


def _lindley_departures(arrivals: np.ndarray, services: np.ndarray) -> np.ndarray:
    """FCFS single-server departures: D_n = max(a_n, D_{n-1}) + s_n,
    computed without a Python loop via a prefix-maximum identity."""
    csum = np.cumsum(services)
    return csum + np.maximum.accumulate(arrivals - (csum - services))


def _sawtooth_stats(gen: np.ndarray, deliver: np.ndarray, w0: float, s_grid):
    """Exact age statistics for a FCFS delivery sequence.

    gen[n] is the generation time of the n-th delivered update and
    deliver[n] its (strictly increasing) delivery time; segments before w0
    are discarded.  Returns (aaoi, paoi_mean, sojourn_mean, count,
    age_lst_values).
    """
    keep = deliver >= w0
    if keep.sum() < 2:
        raise InsufficientHorizonError("fewer than 2 deliveries after warm-up")
    gen = gen[keep]
    deliver = deliver[keep]
    T = deliver - gen
    dt = np.diff(deliver)
    # age runs from T[n-1] up to T[n-1] + dt over each inter-delivery segment
    area = np.sum(dt * T[:-1] + 0.5 * dt * dt)
    span = deliver[-1] - deliver[0]
    aaoi = area / span
    paoi = float(np.mean(T[:-1] + dt))
    lst_vals = np.empty(len(s_grid))
    for j, s in enumerate(s_grid):
        seg = np.exp(-s * T[:-1]) * (1.0 - np.exp(-s * dt)) / s
        lst_vals[j] = np.sum(seg) / span
    return aaoi, paoi, float(T.mean()), int(len(T)), lst_vals


def _occupancy_hist(
    arr: np.ndarray, dep: np.ndarray, t0: float, t1: float, max_level: int
) -> np.ndarray:
    """Time-weighted pmf of (#arr <= t) - (#dep <= t) over [t0, t1]."""
    times = np.concatenate([arr, dep])
    deltas = np.concatenate([np.ones(len(arr)), -np.ones(len(dep))])
    order = np.argsort(times, kind="stable")
    times = times[order]
    deltas = deltas[order]
    levels = np.cumsum(deltas)
    # clip to the observation window: events outside it contribute zero-length
    # segments while still setting the level carried across the boundary
    times = np.clip(times, t0, t1)
    weights = np.zeros(max_level + 1)
    ts = np.concatenate([[t0], times, [t1]])
    lv = np.concatenate([[0], levels])
    durations = np.diff(ts)
    lv_idx = np.clip(lv.astype(int), 0, max_level)
    np.add.at(weights, lv_idx, durations)
    total = weights.sum()
    if total <= 0:
        raise InsufficientHorizonError("empty occupancy window")
    return weights / total


# --------------------------------------------------------------------------
# environment time change (global-failure model)


def _environment(alpha, gamma, op_needed, rng):
    """Alternating operational/repair periods, starting operational.

    Returns (t_bounds, op_bounds): piecewise-linear mapping between real
    time and cumulative operational time.  Segment [t_bounds[2k],
    t_bounds[2k+1]] is operational; odd segments are flat (repair).
    """
    if alpha == 0:
        return None
    n_cycles = max(64, int(op_needed * alpha * 1.2) + 16)
    while True:
        ons = rng.exponential(1.0 / alpha, n_cycles)
        offs = rng.exponential(1.0 / gamma, n_cycles)
        if ons.sum() > op_needed:
            break
        n_cycles *= 2
    durations = np.empty(2 * n_cycles)
    durations[0::2] = ons
    durations[1::2] = offs
    t_b = np.concatenate([[0.0], np.cumsum(durations)])
    op_inc = durations.copy()
    op_inc[1::2] = 0.0
    op_b = np.concatenate([[0.0], np.cumsum(op_inc)])
    return t_b, op_b


def _extend_environment(env, alpha, gamma, target_op, rng):
    """Append further on/off cycles until cumulative operational time
    exceeds target_op; existing boundaries are untouched."""
    t_b, op_b = env
    deficit = target_op - op_b[-1]
    if deficit <= 0:
        return env
    tail = _environment(alpha, gamma, deficit, rng)
    return (
        np.concatenate([t_b, t_b[-1] + tail[0][1:]]),
        np.concatenate([op_b, op_b[-1] + tail[1][1:]]),
    )


def _real_to_op(t_pts, env):
    if env is None:
        return t_pts
    t_b, op_b = env
    i = np.searchsorted(t_b, t_pts, side="right") - 1
    on_seg = i % 2 == 0
    return np.where(on_seg, op_b[i] + (t_pts - t_b[i]), op_b[i])


def _op_to_real(op_pts, env):
    """Real time at which cumulative operational time first reaches op_pts."""
    if env is None:
        return op_pts
    t_b, op_b = env
    i = np.searchsorted(op_b, op_pts, side="left")
    i = np.clip(i, 1, len(op_b) - 1)
    base = i - 1
    return np.where(base % 2 == 0, t_b[base] + (op_pts - op_b[base]), t_b[base])


# --------------------------------------------------------------------------
# single replications


def _arrivals(lam, horizon, rng):
    n_est = int(lam * horizon + 6.0 * math.sqrt(lam * horizon) + 64)
    t = np.cumsum(rng.exponential(1.0 / lam, n_est))
    while t[-1] < horizon:
        t = np.concatenate([t, t[-1] + np.cumsum(rng.exponential(1.0 / lam, n_est))])
    return t[t < horizon]


def _replicate_markov(cfg: SimConfig, seed: int):
    p: Mm1TandemParams = cfg.params
    rng = np.random.default_rng(seed)
    rates = cfg.node_rates()
    t = _arrivals(p.lam, cfg.horizon, rng)
    n = len(t)
    if n < 10:
        raise InsufficientHorizonError("almost no arrivals in horizon")
    # arrivals consume at most `horizon` operational time; extend later if
    # departures overrun the table
    env = _environment(p.alpha, p.gamma, cfg.horizon, rng)
    tau = _real_to_op(t, env)
    dep_op = tau
    starts_op = []
    arrs_op = []
    deps_op = []
    for mu in rates:
        S = rng.exponential(1.0 / mu, n)
        arrs_op.append(dep_op)
        new_dep = _lindley_departures(dep_op, S)
        starts_op.append(new_dep - S)
        deps_op.append(new_dep)
        dep_op = new_dep
    if env is not None and dep_op[-1] > env[1][-1]:
        env = _extend_environment(env, p.alpha, p.gamma, dep_op[-1], rng)
    deliver = np.asarray(_op_to_real(dep_op, env))
    w0 = cfg.warmup_fraction * cfg.horizon
    aaoi, paoi, soj_mean, count, lst_vals = _sawtooth_stats(
        t, deliver, w0, cfg.age_lst_s
    )
    # per-node waiting time (real time, service excluded)
    waits = np.empty(len(rates))
    keep = deliver >= w0
    for i, mu in enumerate(rates):
        a_real = np.asarray(_op_to_real(arrs_op[i], env))
        s_real = np.asarray(_op_to_real(starts_op[i], env))
        waits[i] = float(np.mean((s_real - a_real)[keep]))
    # node-2 occupancy in real time (for N >= 2, else node-1)
    node = min(1, len(rates) - 1)
    arr2 = np.asarray(_op_to_real(arrs_op[node], env))
    dep2 = (
        deliver
        if node == len(rates) - 1
        else np.asarray(_op_to_real(deps_op[node], env))
    )
    hist = _occupancy_hist(arr2, dep2, w0, cfg.horizon, cfg.hist_max)
    return aaoi, paoi, soj_mean, waits, hist, count, lst_vals


def _replicate_mg1(cfg: SimConfig, seed: int, overlap: bool):
    p: Mg1TandemParams = cfg.params
    rng = np.random.default_rng(seed)
    t = _arrivals(p.lam, cfg.horizon, rng)
    n = len(t)
    if n < 10:
        raise InsufficientHorizonError("almost no arrivals in horizon")
    # per-stage completion times, repairs included
    comp = np.zeros((p.n_stages, n))
    for i, d in enumerate(p.stages):
        H = np.asarray(d.sample(rng, n), dtype=float)
        if p.alpha > 0:
            k = rng.poisson(p.alpha * H)
            total = int(k.sum())
            if total > 0:
                repairs = np.asarray(p.repair.sample(rng, total), dtype=float)
                csum = np.concatenate([[0.0], np.cumsum(repairs)])
                ends = np.cumsum(k)
                H = H + (csum[ends] - csum[ends - k])
        comp[i] = H
    if not overlap:
        deliver = _lindley_departures(t, comp.sum(axis=0))
        start1 = deliver - comp.sum(axis=0)
    else:
        deliver, start1 = _overlap_recursion(t, comp)
    w0 = cfg.warmup_fraction * cfg.horizon
    aaoi, paoi, soj_mean, count, lst_vals = _sawtooth_stats(
        t, deliver, w0, cfg.age_lst_s
    )
    keep = deliver >= w0
    waits = np.zeros(p.n_stages)
    waits[0] = float(np.mean((start1 - t)[keep]))
    hist = _occupancy_hist(t, deliver, w0, cfg.horizon, cfg.hist_max)
    return aaoi, paoi, soj_mean, waits, hist, count, lst_vals


def _overlap_recursion(t: np.ndarray, comp: np.ndarray):
    """Blocking-after-service recursion: node i holds its packet until node
    i+1 is free; node i may start the next packet as soon as it has handed
    off the previous one."""
    n_stages, n = comp.shape
    handoff_prev = np.zeros(n_stages)  # handoff time of previous packet per node
    deliver = np.empty(n)
    start1 = np.empty(n)
    for j in range(n):
        entry = max(t[j], handoff_prev[0])
        start1[j] = entry
        for i in range(n_stages):
            finish = entry + comp[i, j]
            if i + 1 < n_stages:
                handoff = max(finish, handoff_prev[i + 1])
            else:
                handoff = finish
            handoff_prev[i] = handoff
            entry = handoff
        deliver[j] = handoff_prev[n_stages - 1]
    return deliver, start1


# --------------------------------------------------------------------------
# replication driver


def _replicate(cfg: SimConfig, seed: int):
    if cfg.model == "markov_tandem_global_failure":
        return _replicate_markov(cfg, seed)
    return _replicate_mg1(cfg, seed, overlap=(cfg.model == "mg1_overlap"))


def _t_halfwidth(values: np.ndarray, level: float = 0.95) -> float:
    r = len(values)
    if r < 2:
        return float("nan")
    crit = stats.t.ppf(0.5 + level / 2.0, r - 1)
    return float(crit * np.std(values, ddof=1) / math.sqrt(r))


def _aggregate(cfg: SimConfig, reps: list) -> SimResult:
    aaois = np.array([r[0] for r in reps])
    paois = np.array([r[1] for r in reps])
    sojs = np.array([r[2] for r in reps])
    waits = np.stack([r[3] for r in reps])
    hists = np.stack([r[4] for r in reps])
    counts = np.array([r[5] for r in reps])
    lsts = np.stack([r[6] for r in reps])
    r = len(reps)
    hist_ci = (
        np.apply_along_axis(_t_halfwidth, 0, hists)
        if r > 1
        else np.full(hists.shape[1], np.nan)
    )
    lst_ci = (
        np.apply_along_axis(_t_halfwidth, 0, lsts)
        if (r > 1 and lsts.shape[1] > 0)
        else np.empty(0)
    )
    return SimResult(
        aaoi_mean=float(aaois.mean()),
        aaoi_ci_half=_t_halfwidth(aaois),
        paoi_mean=float(paois.mean()),
        sojourn_mean=float(sojs.mean()),
        per_node_wait=waits.mean(axis=0),
        node2_queue_hist=hists.mean(axis=0),
        node2_queue_hist_ci=hist_ci,
        delivered_count=int(counts.sum()),
        age_lst_values=lsts.mean(axis=0),
        age_lst_ci=lst_ci,
        replications=r,
    )


def run(config: SimConfig) -> SimResult:
    """Run all replications sequentially and aggregate."""
    reps = [
        _replicate(config, config.base_seed + i) for i in range(config.replications)
    ]
    return _aggregate(config, reps)


def _worker(args):
    cfg, seed = args
    return _replicate(cfg, seed)


def run_replicated_parallel(config: SimConfig, jobs: int = 1) -> SimResult:
    """Statistically identical to `run` for the same base_seed, with
    replications fanned out over a process pool."""
    if jobs <= 1 or config.replications == 1:
        return run(config)
    seeds = [config.base_seed + i for i in range(config.replications)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        reps = list(pool.map(_worker, [(config, s) for s in seeds]))
    return _aggregate(config, reps)
