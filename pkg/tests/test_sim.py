import numpy as np
import pytest

from aoi_tandem import ctmc, mg1, sim
from aoi_tandem.dist import exponential
from aoi_tandem.mg1 import Mg1TandemParams
from aoi_tandem.mm1 import Mm1TandemParams
from aoi_tandem.sim import InsufficientHorizonError, SimConfig

UNIT_EXP = exponential(1.0)


def seq_params(lam=0.3, alpha=0.0, n=2):
    return Mg1TandemParams(
        lam=lam, stages=(UNIT_EXP,) * n, alpha=alpha, repair=exponential(1.0)
    )


MARKOV_REF = Mm1TandemParams(lam=0.2, mu1=1.0, mu2=1.0, alpha=0.5, gamma=1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(model="bogus", params=seq_params())
    with pytest.raises(ValueError):
        SimConfig(model="mg1_sequential_stage", params=seq_params(), horizon=0)
    with pytest.raises(ValueError):
        SimConfig(model="mg1_sequential_stage", params=seq_params(),
                  warmup_fraction=1.0)
    with pytest.raises(TypeError):
        SimConfig(model="markov_tandem_global_failure", params=seq_params())
    with pytest.raises(TypeError):
        SimConfig(model="mg1_sequential_stage", params=MARKOV_REF)


def test_insufficient_horizon():
    cfg = SimConfig(model="mg1_sequential_stage", params=seq_params(),
                    horizon=2.0, replications=1)
    with pytest.raises(InsufficientHorizonError):
        sim.run(cfg)


def test_classic_single_node_aaoi():
    p = Mg1TandemParams(lam=0.5, stages=(UNIT_EXP,), alpha=0.0,
                        repair=exponential(1.0))
    r = sim.run(SimConfig(model="mg1_sequential_stage", params=p,
                          horizon=2e5, replications=8, base_seed=1))
    assert r.aaoi_mean == pytest.approx(3.5, abs=3 * r.aaoi_ci_half)
    assert r.sojourn_mean == pytest.approx(2.0, abs=0.05)


def test_result_invariants():
    r = sim.run(SimConfig(model="mg1_sequential_stage", params=seq_params(),
                          horizon=1e5, replications=4, base_seed=2))
    assert r.aaoi_mean >= r.sojourn_mean >= 2.0
    assert r.paoi_mean >= r.sojourn_mean
    assert r.node2_queue_hist.sum() == pytest.approx(1.0, abs=1e-9)
    assert r.delivered_count > 0
    assert np.all(r.per_node_wait >= 0.0)


def test_markov_hist_matches_chain_oracle():
    cap, pi, chain = ctmc.choose_cap(MARKOV_REF)
    marg = ctmc.marginal_node2(chain, pi)
    r = sim.run(SimConfig(model="markov_tandem_global_failure",
                          params=MARKOV_REF, horizon=2e5, replications=10,
                          base_seed=3))
    ci = np.nan_to_num(r.node2_queue_hist_ci[:10])
    slack = 3.0 * ci + 3.0 / r.delivered_count
    assert np.all(np.abs(r.node2_queue_hist[:10] - marg[:10]) <= slack)


def test_sequential_sojourn_matches_transform():
    p = seq_params(lam=0.3, alpha=0.0)
    r = sim.run(SimConfig(model="mg1_sequential_stage", params=p,
                          horizon=2e5, replications=8, base_seed=4))
    assert r.sojourn_mean == pytest.approx(mg1.mean_sojourn(p), abs=0.08)


def test_sequential_sojourn_matches_transform_with_failures():
    p = seq_params(lam=0.15, alpha=0.5)
    r = sim.run(SimConfig(model="mg1_sequential_stage", params=p,
                          horizon=2e5, replications=8, base_seed=5))
    assert r.sojourn_mean == pytest.approx(mg1.mean_sojourn(p), rel=0.03)
    assert r.aaoi_mean == pytest.approx(mg1.aaoi(p), abs=3 * r.aaoi_ci_half)


def test_empirical_age_lst():
    p = seq_params(lam=0.3, alpha=0.0)
    s_grid = (0.5, 1.0)
    r = sim.run(SimConfig(model="mg1_sequential_stage", params=p,
                          horizon=2e5, replications=8, base_seed=6,
                          age_lst_s=s_grid))
    A = mg1.age_lst(p)
    for s, v, c in zip(s_grid, r.age_lst_values, r.age_lst_ci):
        assert v == pytest.approx(A(s), abs=3 * c + 1e-4)


def test_overlap_not_slower_than_sequential():
    p = seq_params(lam=0.3, alpha=0.0)
    kw = dict(params=p, horizon=5e4, replications=4, base_seed=7)
    r_seq = sim.run(SimConfig(model="mg1_sequential_stage", **kw))
    r_ov = sim.run(SimConfig(model="mg1_overlap", **kw))
    assert r_ov.sojourn_mean <= r_seq.sojourn_mean + 1e-9
    assert r_ov.aaoi_mean <= r_seq.aaoi_mean + 0.05


def test_markov_n4_runs_and_waits_ordered():
    p = Mm1TandemParams(lam=0.3, mu1=1.0, mu2=1.0, alpha=0.5, gamma=1.0)
    r = sim.run(SimConfig(model="markov_tandem_global_failure", params=p,
                          horizon=1e5, replications=4, base_seed=8,
                          service_rates=(1.0,) * 4))
    assert len(r.per_node_wait) == 4
    # downstream nodes see a thinner, smoother stream: waits decrease
    assert r.per_node_wait[0] > r.per_node_wait[-1]


def test_warmup_insensitivity():
    p = seq_params(lam=0.3, alpha=0.0)
    base = dict(model="mg1_sequential_stage", params=p, horizon=2e5,
                replications=8, base_seed=9)
    r1 = sim.run(SimConfig(**base, warmup_fraction=0.1))
    r2 = sim.run(SimConfig(**base, warmup_fraction=0.2))
    assert abs(r1.aaoi_mean - r2.aaoi_mean) < max(r1.aaoi_ci_half, 0.02) * 2


def test_same_seed_reproducible():
    cfg = SimConfig(model="mg1_sequential_stage", params=seq_params(),
                    horizon=5e4, replications=3, base_seed=10)
    a, b = sim.run(cfg), sim.run(cfg)
    assert a.aaoi_mean == b.aaoi_mean
    assert np.array_equal(a.node2_queue_hist, b.node2_queue_hist)


def test_parallel_bit_identical_to_sequential():
    cfg = SimConfig(model="markov_tandem_global_failure", params=MARKOV_REF,
                    horizon=5e4, replications=4, base_seed=11)
    a = sim.run(cfg)
    b = sim.run_replicated_parallel(cfg, jobs=4)
    assert a.aaoi_mean == b.aaoi_mean
    assert a.aaoi_ci_half == b.aaoi_ci_half
    assert np.array_equal(a.per_node_wait, b.per_node_wait)


def test_little_law_whole_chain():
    p = seq_params(lam=0.2, alpha=0.3)
    r = sim.run(SimConfig(model="mg1_sequential_stage", params=p,
                          horizon=2e5, replications=8, base_seed=12))
    mean_n = float(np.sum(np.arange(len(r.node2_queue_hist))
                          * r.node2_queue_hist))
    assert mean_n == pytest.approx(p.lam * r.sojourn_mean, rel=0.03)
