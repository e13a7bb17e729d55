"""Experiment harness: parameter sweeps to CSV, optimal-arrival-rate
search, analytic-vs-oracle-vs-simulation validation reports, and canned
figure-reproduction runs.

Every artifact is deterministic for a fixed seed: rows are sorted, floats
are formatted at 9 significant digits, and simulation points derive their
seeds from the sweep seed and the point's position in the sorted task
list.  Exact wall times go in the JSON manifest; the CSV runtime column is
floored to whole seconds so that reruns of short sweeps stay
byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__, ctmc, mg1, mm1, sim
from .dist import DistributionSpec, exponential
from .mg1 import Mg1TandemParams, StabilityError
from .mm1 import Mm1TandemParams
from .transforms import pgf_coefficients

__all__ = [
    "CSV_HEADER",
    "ENGINES",
    "SweepSpec",
    "SweepRow",
    "sweep",
    "find_lambda_star",
    "analytic_aaoi_fn",
    "simulation_aaoi_fn",
    "NoInteriorMinimumError",
    "validate",
    "reproduce",
    "FIGURE_IDS",
]

ENGINES = ("analytic", "simulation", "ctmc")
CSV_HEADER = (
    "model,N,lambda,alpha,gamma,dist_kind,engine,aaoi,aaoi_ci_half,"
    "sojourn_mean,stable,runtime_sec"
)
FIGURE_IDS = ("fig3a", "fig3b", "fig3c", "fig4a", "fig4b", "fig4c")

_POINT_SEED_STRIDE = 1009


class SweepSpecError(ValueError):
    """Invalid sweep specification; message names the offending field."""


class NoInteriorMinimumError(RuntimeError):
    """Coarse scan found the minimum at a bracket endpoint."""


# --------------------------------------------------------------------------
# sweep specification


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: a lambda grid crossed with a family of failure rates,
    evaluated by one or more engines."""

    model: str
    lambda_start: float
    lambda_stop: float
    lambda_step: float
    alpha_values: tuple
    n_nodes: int
    stage: DistributionSpec
    gamma: float
    engines: tuple
    output_path: str
    repair: DistributionSpec | None = None
    horizon: float = 2e5
    replications: int = 10
    warmup_fraction: float = 0.1

    def __post_init__(self):
        if self.model not in sim.MODELS:
            raise SweepSpecError(f"model: unknown value {self.model!r}")
        if not (0 < self.lambda_start <= self.lambda_stop):
            raise SweepSpecError("lambda_start/lambda_stop: need 0 < start <= stop")
        if self.lambda_step <= 0:
            raise SweepSpecError("lambda_step: must be > 0")
        if len(self.alpha_values) == 0:
            raise SweepSpecError("alpha_values: must be nonempty")
        if any(a < 0 for a in self.alpha_values):
            raise SweepSpecError("alpha_values: entries must be >= 0")
        if self.n_nodes < 1:
            raise SweepSpecError("n_nodes: must be >= 1")
        if self.gamma <= 0:
            raise SweepSpecError("gamma: must be > 0")
        bad = [e for e in self.engines if e not in ENGINES]
        if bad or not self.engines:
            raise SweepSpecError(f"engines: invalid entries {bad or 'empty'}")
        if self.model == "markov_tandem_global_failure":
            if self.stage.kind != "exp":
                raise SweepSpecError(
                    "stage: global-failure model requires exponential service"
                )
            if "analytic" in self.engines and self.n_nodes != 2:
                raise SweepSpecError(
                    "engines: analytic closed forms cover n_nodes=2 only "
                    "for the global-failure model"
                )
        if self.model == "mg1_overlap" and "analytic" in self.engines:
            raise SweepSpecError("engines: no closed form for the overlap model")
        if "ctmc" in self.engines and (
            self.model != "markov_tandem_global_failure" or self.n_nodes != 2
        ):
            raise SweepSpecError(
                "engines: ctmc covers the two-node global-failure model only"
            )
        object.__setattr__(self, "alpha_values", tuple(self.alpha_values))
        object.__setattr__(self, "engines", tuple(self.engines))

    def lambda_values(self) -> tuple:
        n = int(math.floor((self.lambda_stop - self.lambda_start) / self.lambda_step + 1e-9))
        return tuple(round(self.lambda_start + k * self.lambda_step, 12) for k in range(n + 1))

    def repair_spec(self) -> DistributionSpec:
        return self.repair if self.repair is not None else exponential(self.gamma)

    def to_json(self) -> dict:
        d = {
            k: v
            for k, v in asdict(self).items()
            if k not in ("stage", "repair")
        }
        d["stage"] = self.stage.to_json()
        d["repair"] = None if self.repair is None else self.repair.to_json()
        d["alpha_values"] = list(self.alpha_values)
        d["engines"] = list(self.engines)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "SweepSpec":
        d = dict(d)
        d["stage"] = DistributionSpec.from_json(d["stage"])
        if d.get("repair") is not None:
            d["repair"] = DistributionSpec.from_json(d["repair"])
        d["alpha_values"] = tuple(d["alpha_values"])
        d["engines"] = tuple(d["engines"])
        return cls(**d)


@dataclass(frozen=True)
class SweepRow:
    model: str
    n_nodes: int
    lam: float
    alpha: float
    gamma: float
    dist_kind: str
    engine: str
    aaoi: float | None
    aaoi_ci_half: float | None
    sojourn_mean: float | None
    stable: bool
    runtime_sec: int

    def csv_fields(self) -> list:
        return [
            self.model,
            str(self.n_nodes),
            _fmt(self.lam),
            _fmt(self.alpha),
            _fmt(self.gamma),
            self.dist_kind,
            self.engine,
            _fmt(self.aaoi),
            _fmt(self.aaoi_ci_half),
            _fmt(self.sojourn_mean),
            "true" if self.stable else "false",
            str(self.runtime_sec),
        ]

    def json_obj(self) -> dict:
        return {
            "model": self.model,
            "N": self.n_nodes,
            "lambda": _num(self.lam),
            "alpha": _num(self.alpha),
            "gamma": _num(self.gamma),
            "dist_kind": self.dist_kind,
            "engine": self.engine,
            "aaoi": _num(self.aaoi),
            "aaoi_ci_half": _num(self.aaoi_ci_half),
            "sojourn_mean": _num(self.sojourn_mean),
            "stable": self.stable,
            "runtime_sec": self.runtime_sec,
        }


def _fmt(x) -> str:
    if x is None:
        return ""
    return f"{x:.9g}"


def _num(x):
    if x is None:
        return None
    return float(f"{x:.9g}")


# --------------------------------------------------------------------------
# engine evaluation


def _markov_params(spec: SweepSpec, lam: float, alpha: float) -> Mm1TandemParams:
    mu = spec.stage.rate
    return Mm1TandemParams(lam=lam, mu1=mu, mu2=mu, alpha=alpha, gamma=spec.gamma)


def _mg1_params(spec: SweepSpec, lam: float, alpha: float) -> Mg1TandemParams:
    return Mg1TandemParams(
        lam=lam,
        stages=(spec.stage,) * spec.n_nodes,
        alpha=alpha,
        repair=spec.repair_spec(),
    )


def _point_stable(spec: SweepSpec, lam: float, alpha: float, engine: str) -> bool:
    if spec.model == "markov_tandem_global_failure":
        p = _markov_params(spec, lam, alpha)
        if engine == "simulation":
            # each node of the simulated network has its own infinite buffer,
            # so the binding constraint is the per-node offered load
            return lam < min(p.mu1, p.mu2) * p.uptime_fraction
        return p.is_stable
    return _mg1_params(spec, lam, alpha).is_stable


def _eval_point(spec: SweepSpec, lam: float, alpha: float, engine: str, seed: int, jobs: int) -> SweepRow:
    stable = _point_stable(spec, lam, alpha, engine)
    base = dict(
        model=spec.model,
        n_nodes=spec.n_nodes,
        lam=lam,
        alpha=alpha,
        gamma=spec.gamma,
        dist_kind=spec.stage.kind,
        engine=engine,
    )
    if not stable:
        return SweepRow(
            **base, aaoi=None, aaoi_ci_half=None, sojourn_mean=None,
            stable=False, runtime_sec=0,
        )
    t0 = time.perf_counter()
    if engine == "analytic":
        if spec.model == "markov_tandem_global_failure":
            p = _markov_params(spec, lam, alpha)
            aaoi, soj = mm1.aaoi(p), mm1.mean_sojourn(p)
        else:
            p = _mg1_params(spec, lam, alpha)
            aaoi, soj = mg1.aaoi(p), mg1.mean_sojourn(p)
        ci = None
    elif engine == "simulation":
        cfg = sim.SimConfig(
            model=spec.model,
            params=(
                _markov_params(spec, lam, alpha)
                if spec.model == "markov_tandem_global_failure"
                else _mg1_params(spec, lam, alpha)
            ),
            horizon=spec.horizon,
            warmup_fraction=spec.warmup_fraction,
            replications=spec.replications,
            base_seed=seed,
            service_rates=(
                (spec.stage.rate,) * spec.n_nodes
                if spec.model == "markov_tandem_global_failure"
                else None
            ),
        )
        res = sim.run_replicated_parallel(cfg, jobs=jobs)
        aaoi, ci, soj = res.aaoi_mean, res.aaoi_ci_half, res.sojourn_mean
    else:  # ctmc: stationary distribution only; sojourn via Little's law
        p = _markov_params(spec, lam, alpha)
        _, pi, chain = ctmc.choose_cap(p)
        side = chain.cap + 1
        counts = np.add.outer(np.arange(side), np.arange(side))
        mean_n = float((pi.reshape(2, side, side).sum(axis=0) * counts).sum())
        aaoi, ci, soj = None, None, mean_n / lam
    runtime = int(time.perf_counter() - t0)
    return SweepRow(
        **base, aaoi=aaoi, aaoi_ci_half=ci, sojourn_mean=soj,
        stable=True, runtime_sec=runtime,
    )


def _eval_point_star(args):
    return _eval_point(*args)


# --------------------------------------------------------------------------
# sweep driver


def sweep(spec: SweepSpec, seed: int = 12345, jobs: int = 1, fmt: str = "csv") -> dict:
    """Evaluate the grid, write the table and its manifest; returns the
    manifest dict.  Row order is (alpha, lambda, engine), ascending."""
    if fmt not in ("csv", "jsonl"):
        raise ValueError("fmt must be 'csv' or 'jsonl'")
    wall0 = time.perf_counter()
    tasks = [
        (spec, lam, alpha, engine, seed + _POINT_SEED_STRIDE * i, 1)
        for i, (alpha, lam, engine) in enumerate(
            (a, l, e)
            for a in sorted(spec.alpha_values)
            for l in spec.lambda_values()
            for e in sorted(spec.engines)
        )
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_eval_point_star, tasks))
    else:
        rows = [_eval_point_star(t) for t in tasks]

    out = Path(spec.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_rows(out, rows, fmt)
    manifest = {
        "spec": spec.to_json(),
        "seed": seed,
        "format": fmt,
        "tool_version": __version__,
        "rows": len(rows),
        "wall_time_sec": time.perf_counter() - wall0,
    }
    out.with_suffix(out.suffix + ".manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n"
    )
    return manifest


def _write_rows(path: Path, rows: list, fmt: str):
    if fmt == "jsonl":
        with open(path, "w") as fh:
            for r in rows:
                fh.write(json.dumps(r.json_obj()) + "\n")
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for r in rows:
        writer.writerow(r.csv_fields())
    path.write_text(buf.getvalue())


def run_sweep_from_manifest(manifest: dict) -> dict:
    """Re-run a sweep exactly as recorded; same seed, same spec."""
    spec = SweepSpec.from_json(manifest["spec"])
    return sweep(spec, seed=manifest["seed"], fmt=manifest.get("format", "csv"))


# --------------------------------------------------------------------------
# optimal arrival rate


def analytic_aaoi_fn(model: str, n_nodes: int, stage: DistributionSpec,
                     alpha: float, gamma: float,
                     repair: DistributionSpec | None = None):
    """Average age as a function of the arrival rate, +inf when unstable."""
    repair = repair if repair is not None else exponential(gamma)

    def f(lam: float) -> float:
        try:
            if model == "markov_tandem_global_failure":
                if n_nodes != 2:
                    raise ValueError("closed forms cover two nodes only")
                return mm1.aaoi(
                    Mm1TandemParams(lam, stage.rate, stage.rate, alpha, gamma)
                )
            return mg1.aaoi(
                Mg1TandemParams(lam, (stage,) * n_nodes, alpha, repair)
            )
        except StabilityError:
            return math.inf

    return f


def simulation_aaoi_fn(model: str, n_nodes: int, stage: DistributionSpec,
                       alpha: float, gamma: float, base_seed: int,
                       horizon: float = 2e5, replications: int = 8,
                       repair: DistributionSpec | None = None, jobs: int = 1):
    """Simulated average age vs arrival rate with common random numbers:
    every candidate rate reuses the same replication seeds."""
    repair = repair if repair is not None else exponential(gamma)

    def f(lam: float) -> float:
        if model == "markov_tandem_global_failure":
            p = Mm1TandemParams(lam, stage.rate, stage.rate, alpha, gamma)
            if lam >= min(p.mu1, p.mu2) * p.uptime_fraction:
                return math.inf
            params = p
            rates = (stage.rate,) * n_nodes
        else:
            params = Mg1TandemParams(lam, (stage,) * n_nodes, alpha, repair)
            if not params.is_stable:
                return math.inf
            rates = None
        cfg = sim.SimConfig(
            model=model, params=params, horizon=horizon,
            replications=replications, base_seed=base_seed,
            service_rates=rates,
        )
        return sim.run_replicated_parallel(cfg, jobs=jobs).aaoi_mean

    return f


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def find_lambda_star(aaoi_of_lambda, bracket, coarse_points: int = 25,
                     tol: float = 1e-4) -> tuple:
    """(lambda_star, aaoi_min) by coarse scan plus golden-section refinement.

    The scan must place the minimum strictly inside the bracket; a minimum at
    either endpoint raises NoInteriorMinimumError ("no interior minimum").
    """
    lo, hi = bracket
    if not (0 < lo < hi):
        raise ValueError("bracket must satisfy 0 < lo < hi")
    grid = [float(x) for x in np.linspace(lo, hi, coarse_points)]
    vals = [aaoi_of_lambda(x) for x in grid]
    i = int(np.argmin(vals))
    if i == 0 or i == coarse_points - 1 or not math.isfinite(vals[i]):
        raise NoInteriorMinimumError(
            f"no interior minimum on [{lo}, {hi}] (argmin at index {i})"
        )
    a, b = grid[i - 1], grid[i + 1]
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = aaoi_of_lambda(c), aaoi_of_lambda(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = aaoi_of_lambda(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = aaoi_of_lambda(d)
    x = float((a + b) / 2.0)
    return x, float(aaoi_of_lambda(x))


# --------------------------------------------------------------------------
# validation suite

_UNIT_EXP = exponential(1.0)


def _entry(eid, description, expected, observed, tolerance, *, kind="check",
           **extra):
    gap = None
    passed = None
    if expected is not None and observed is not None:
        gap = abs(observed - expected)
        if tolerance is not None:
            passed = gap <= tolerance
    out = {
        "id": eid,
        "kind": kind,
        "description": description,
        "expected": expected,
        "observed": observed,
        "tolerance": tolerance,
        "measured_gap": gap,
        "passed": passed if kind == "check" else True,
    }
    out.update(extra)
    return out


def validate(suite: str = "default", out_dir: str | None = None,
             seed: int = 12345, jobs: int = 1) -> dict:
    """Run the fixed validation matrix and return the report dict.

    Failures are report content, not exceptions: transcription-level
    defects of the published two-node closed forms show up here as red
    checks with their gaps measured, while the self-consistent machinery is
    held to its tolerances against the chain oracle and the simulator.
    """
    if suite != "default":
        raise ValueError(f"unknown validation suite {suite!r}")
    entries = []

    # 1. printed empty-and-operational probability vs exact chain
    p = Mm1TandemParams(lam=0.2, mu1=1.0, mu2=1.0, alpha=0.5, gamma=1.0)
    _, pi, chain = ctmc.choose_cap(p)
    q00 = float(pi[chain.index(0, 0, 0)])
    entries.append(_entry(
        "boundary-prob-vs-oracle",
        "printed empty-and-operational probability vs truncated-chain oracle "
        "(lam=0.2, alpha=0.5, gamma=1)",
        mm1.boundary_prob(p), q00, 1e-5,
    ))

    p0f = Mm1TandemParams(lam=0.3, mu1=1.0, mu2=1.0, alpha=0.0, gamma=1.0)
    _, pi0, chain0 = ctmc.choose_cap(p0f)
    entries.append(_entry(
        "boundary-prob-failure-free",
        "same check with failures off; the oracle gives the product-form "
        "(1-rho)^2, showing the defect is not breakdown-related",
        mm1.boundary_prob(p0f), float(pi0[chain0.index(0, 0, 0)]), 1e-5,
    ))

    # 2. node-2 generating function vs oracle, printed and working layers
    zs = [round(0.1 * k, 1) for k in range(1, 10)]
    oracle_vals = [ctmc.pgf_eval(chain, pi, 0, 1.0, z) for z in zs]
    printed = mm1.marginal_pgf_node2_printed(p)
    working = mm1.marginal_pgf_node2(p)
    entries.append(_entry(
        "node2-pgf-printed-vs-oracle",
        "printed node-2 generating function vs oracle, max gap over "
        "z in {0.1..0.9}",
        0.0,
        max(abs(printed(z) - o) for z, o in zip(zs, oracle_vals)),
        1e-4,
    ))
    entries.append(_entry(
        "node2-pgf-working-vs-oracle",
        "working (sequential-occupancy) node-2 generating function vs "
        "oracle, max gap over z in {0.1..0.9}",
        0.0,
        max(abs(working(z) - o) for z, o in zip(zs, oracle_vals)),
        1e-4,
    ))

    # 3. system-size pmf: transform coefficients vs simulated histogram
    gp = Mg1TandemParams(
        lam=0.1, stages=(_UNIT_EXP, _UNIT_EXP), alpha=0.5, repair=exponential(1.0)
    )
    coeffs = pgf_coefficients(mg1.system_pgf(gp), 14)
    res = sim.run_replicated_parallel(
        sim.SimConfig(
            model="mg1_sequential_stage", params=gp, horizon=2e5,
            replications=10, base_seed=seed, hist_max=30,
        ),
        jobs=jobs,
    )
    ci = np.where(np.isfinite(res.node2_queue_hist_ci[:15]),
                  res.node2_queue_hist_ci[:15], 0.0)
    # tail bins with no observed events report CI = 0; grant them a few
    # events' worth of mass as sampling resolution instead
    slack = 3.0 * ci + 3.0 / res.delivered_count
    worst = float(np.max(np.abs(res.node2_queue_hist[:15] - coeffs) - slack))
    entries.append(_entry(
        "system-pmf-vs-des",
        "first 15 system-size probabilities, transform inversion vs "
        "simulated histogram; observed is the worst per-bin excess over "
        "3*CI plus a few-event resolution floor",
        None, worst, None,
        kind="check",
    ))
    entries[-1]["measured_gap"] = worst
    entries[-1]["passed"] = worst <= 0.0

    # 4. sojourn and age means vs simulation (sequential-occupancy model)
    for lam, alpha in ((0.3, 0.0), (0.2, 0.5)):
        gp2 = Mg1TandemParams(
            lam=lam, stages=(_UNIT_EXP, _UNIT_EXP), alpha=alpha,
            repair=exponential(1.0),
        )
        r = sim.run_replicated_parallel(
            sim.SimConfig(
                model="mg1_sequential_stage", params=gp2, horizon=2e5,
                replications=10, base_seed=seed + 1,
            ),
            jobs=jobs,
        )
        entries.append(_entry(
            f"sojourn-mean-vs-des-alpha{alpha:g}",
            f"analytic mean sojourn vs simulation (lam={lam}, alpha={alpha})",
            mg1.mean_sojourn(gp2), r.sojourn_mean, None,
        ))
        entries[-1]["tolerance"] = 3.0 * r.aaoi_ci_half
        entries[-1]["passed"] = (
            entries[-1]["measured_gap"] <= entries[-1]["tolerance"]
        )
        entries.append(_entry(
            f"aaoi-vs-des-alpha{alpha:g}",
            f"analytic average age vs simulation (lam={lam}, alpha={alpha})",
            mg1.aaoi(gp2), r.aaoi_mean, 3.0 * r.aaoi_ci_half,
        ))

    # 5. age transform values: exact for alpha=0, measured gap for alpha>0
    s_grid = (0.5, 1.0, 2.0)
    gp3 = Mg1TandemParams(
        lam=0.3, stages=(_UNIT_EXP, _UNIT_EXP), alpha=0.0, repair=exponential(1.0)
    )
    r = sim.run_replicated_parallel(
        sim.SimConfig(
            model="mg1_sequential_stage", params=gp3, horizon=2e5,
            replications=10, base_seed=seed + 2, age_lst_s=s_grid,
        ),
        jobs=jobs,
    )
    A = mg1.age_lst(gp3)
    gap0 = float(max(
        abs(A(s) - v) - 3.0 * c
        for s, v, c in zip(s_grid, r.age_lst_values, r.age_lst_ci)
    ))
    entries.append(_entry(
        "age-lst-alpha0",
        "age transform on s in {0.5,1,2} vs empirical transform, "
        "failure-free; observed is the worst excess over 3*CI",
        None, gap0, None,
    ))
    entries[-1]["measured_gap"] = gap0
    entries[-1]["passed"] = gap0 <= 0.0

    for alpha in (0.1, 0.5):
        pm = Mm1TandemParams(lam=0.2, mu1=1.0, mu2=1.0, alpha=alpha, gamma=1.0)
        rm = sim.run_replicated_parallel(
            sim.SimConfig(
                model="markov_tandem_global_failure", params=pm, horizon=2e5,
                replications=10, base_seed=seed + 3, age_lst_s=s_grid,
            ),
            jobs=jobs,
        )
        printed_age = mm1.age_lst_printed(pm)
        working_age = mm1.age_lst(pm)
        gap_printed = float(max(
            abs(printed_age(s) - v) for s, v in zip(s_grid, rm.age_lst_values)
        ))
        gap_working = float(max(
            abs(working_age(s) - v) for s, v in zip(s_grid, rm.age_lst_values)
        ))
        entries.append(_entry(
            f"markov-age-lst-gap-alpha{alpha:g}",
            "printed age transform vs global-failure simulation on "
            f"s in {{0.5,1,2}} (alpha={alpha}); gap reported, not judged",
            None, gap_printed, None,
            kind="measurement",
            gap_working_pipeline=gap_working,
        ))
        entries[-1]["measured_gap"] = gap_printed

    report = {
        "suite": suite,
        "seed": seed,
        "tool_version": __version__,
        "entries": entries,
        "n_passed": sum(1 for e in entries if e["passed"] is True),
        "n_failed": sum(1 for e in entries if e["passed"] is False),
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
        (out / "report.txt").write_text(render_report_text(report))
    return report


def render_report_text(report: dict) -> str:
    lines = [f"validation suite '{report['suite']}' "
             f"(seed {report['seed']}, v{report['tool_version']})", ""]
    for e in report["entries"]:
        if e["kind"] == "measurement":
            status = "MEASURED"
        else:
            status = "PASS" if e["passed"] else "FAIL"
        gap = "" if e["measured_gap"] is None else f" gap={e['measured_gap']:.6g}"
        tol = "" if e["tolerance"] is None else f" tol={e['tolerance']:.6g}"
        lines.append(f"[{status:8s}] {e['id']}{gap}{tol}")
        lines.append(f"           {e['description']}")
    lines.append("")
    lines.append(f"passed {report['n_passed']}, failed {report['n_failed']}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# figure reproduction

_ALPHA_FAMILY = (0.0, 0.1, 0.5, 0.9)


def _canned_spec(fig_id: str, out_dir: Path) -> SweepSpec:
    common = dict(stage=_UNIT_EXP, gamma=1.0,
                  output_path=str(out_dir / f"{fig_id}.csv"))
    if fig_id == "fig3a":
        return SweepSpec(
            model="markov_tandem_global_failure", n_nodes=2,
            lambda_start=0.025, lambda_stop=0.45, lambda_step=0.025,
            alpha_values=_ALPHA_FAMILY, engines=("analytic", "simulation"),
            **common,
        )
    if fig_id in ("fig3b", "fig3c"):
        # handled per node count by reproduce(); base spec is N=4
        return SweepSpec(
            model="markov_tandem_global_failure", n_nodes=4,
            lambda_start=0.05, lambda_stop=0.6, lambda_step=0.025,
            alpha_values=(0.5,), engines=("simulation",),
            horizon=3e5, **common,
        )
    if fig_id in ("fig4a", "fig4b", "fig4c"):
        from .dist import erlang, unit_mean_hyper2

        stage = {"fig4a": _UNIT_EXP, "fig4b": erlang(2, 2.0),
                 "fig4c": unit_mean_hyper2()}[fig_id]
        common["stage"] = stage
        return SweepSpec(
            model="mg1_sequential_stage", n_nodes=2,
            lambda_start=0.025, lambda_stop=0.45, lambda_step=0.025,
            alpha_values=_ALPHA_FAMILY, engines=("analytic", "simulation"),
            **common,
        )
    raise ValueError(f"unknown figure id {fig_id!r}; choose from {FIGURE_IDS}")


def reproduce(fig_id: str, out_dir: str, seed: int = 12345, jobs: int = 1,
              fmt: str = "csv", horizon: float | None = None,
              replications: int | None = None) -> list:
    """Write the CSV set behind one figure; returns the list of paths.

    horizon/replications override the canned simulation budget for quick
    runs; reproduction claims attach only to the defaults."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    over = {}
    if horizon is not None:
        over["horizon"] = horizon
    if replications is not None:
        over["replications"] = replications
    if fig_id == "fig3b":
        return _reproduce_fig3b(out, seed, jobs, fmt, over)
    if fig_id == "fig3c":
        return _reproduce_fig3c(out, seed, jobs, over)
    spec = replace(_canned_spec(fig_id, out), **over)
    sweep(spec, seed=seed, jobs=jobs, fmt=fmt)
    return [spec.output_path]


def _reproduce_fig3b(out: Path, seed: int, jobs: int, fmt: str,
                     over: dict) -> list:
    """Simulated age vs arrival rate for chains of one to four nodes,
    merged into a single table (the node count is a CSV column)."""
    base = replace(_canned_spec("fig3b", out), **over)
    all_rows = []
    for n in (1, 2, 3, 4):
        spec = replace(base, n_nodes=n)
        tasks = [
            (spec, lam, alpha, "simulation",
             seed + _POINT_SEED_STRIDE * (100 * n + i), jobs)
            for i, (alpha, lam) in enumerate(
                (a, l) for a in spec.alpha_values for l in spec.lambda_values()
            )
        ]
        all_rows.extend(_eval_point_star(t) for t in tasks)
    all_rows.sort(key=lambda r: (r.alpha, r.n_nodes, r.lam))
    path = out / "fig3b.csv"
    _write_rows(path, all_rows, fmt)
    return [str(path)]


def _reproduce_fig3c(out: Path, seed: int, jobs: int, over: dict) -> list:
    """Per-node expected waiting times for the four-node chain: the
    standard sweep table plus a long-format waits table."""
    spec = replace(_canned_spec("fig3c", out),
                   output_path=str(out / "fig3c.csv"), **over)
    sweep(spec, seed=seed, jobs=jobs)
    waits_path = out / "fig3c_waits.csv"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["model", "N", "lambda", "alpha", "gamma", "node", "engine",
         "wait_mean"]
    )
    alpha = spec.alpha_values[0]
    for i, lam in enumerate(spec.lambda_values()):
        p = _markov_params(spec, lam, alpha)
        if not lam < min(p.mu1, p.mu2) * p.uptime_fraction:
            continue
        cfg = sim.SimConfig(
            model=spec.model, params=p, horizon=spec.horizon,
            replications=spec.replications,
            base_seed=seed + _POINT_SEED_STRIDE * i,
            service_rates=(spec.stage.rate,) * spec.n_nodes,
        )
        res = sim.run_replicated_parallel(cfg, jobs=jobs)
        for node, w in enumerate(res.per_node_wait, start=1):
            writer.writerow(
                [spec.model, str(spec.n_nodes), _fmt(lam), _fmt(alpha),
                 _fmt(spec.gamma), str(node), "simulation", _fmt(float(w))]
            )
    waits_path.write_text(buf.getvalue())
    return [str(out / "fig3c.csv"), str(waits_path)]
