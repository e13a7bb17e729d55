import numpy as np
import pytest

from aoi_tandem import ctmc, mm1
from aoi_tandem.ctmc import OracleUnavailableError
from aoi_tandem.mg1 import StabilityError
from aoi_tandem.mm1 import Mm1TandemParams

REF = Mm1TandemParams(lam=0.2, mu1=1.0, mu2=1.0, alpha=0.5, gamma=1.0)


def test_build_counts_and_row_sums():
    chain = ctmc.build(Mm1TandemParams(1.0, 1.0, 1.0, 0.5, 1.0), cap=1)
    assert chain.n_states == 8
    rows = np.asarray(chain.generator.sum(axis=1)).ravel()
    assert np.max(np.abs(rows)) < 1e-12


def test_outflow_rates_match_balance_table():
    p = Mm1TandemParams(lam=0.3, mu1=1.0, mu2=1.0, alpha=0.5, gamma=1.0)
    chain = ctmc.build(p, cap=3)
    Q = chain.generator.toarray()
    # empty operational state leaves only by arrival or failure
    assert -Q[chain.index(0, 0, 0), chain.index(0, 0, 0)] == pytest.approx(
        p.lam + p.alpha
    )
    # under repair only arrivals and the repair completion occur
    assert -Q[chain.index(1, 1, 2), chain.index(1, 1, 2)] == pytest.approx(
        p.lam + p.gamma
    )


def test_failure_free_repair_states_empty():
    p = Mm1TandemParams(lam=0.2, mu1=1.0, mu2=1.0, alpha=0.0, gamma=1.0)
    chain = ctmc.build(p, cap=16)
    pi = ctmc.stationary(chain)
    side = chain.cap + 1
    assert pi[side * side :].sum() < 1e-12


def test_failure_free_product_form():
    p = Mm1TandemParams(lam=0.2, mu1=1.0, mu2=1.0, alpha=0.0, gamma=1.0)
    chain = ctmc.build(p, cap=32)
    pi = ctmc.stationary(chain)
    # reliable tandem is product-form geometric in both queues
    assert pi[chain.index(0, 0, 0)] == pytest.approx(0.8 * 0.8, abs=1e-9)
    assert pi[chain.index(0, 2, 1)] == pytest.approx(
        0.8 * 0.2**2 * 0.8 * 0.2, abs=1e-9
    )


def test_reference_point_frozen_values():
    chain = ctmc.build(REF, cap=40)
    pi = ctmc.stationary(chain)
    # frozen oracle value for the empty-and-operational probability; the
    # printed closed form says 0.26667 and is measurably wrong here
    assert pi[chain.index(0, 0, 0)] == pytest.approx(0.330233, abs=1e-5)
    side = chain.cap + 1
    assert pi[side * side :].sum() == pytest.approx(1.0 / 3.0, abs=1e-5)


def test_pgf_eval_anchors():
    cap, pi, chain = ctmc.choose_cap(REF)
    assert ctmc.pgf_eval(chain, pi, 0, 1.0, 1.0) == pytest.approx(
        2.0 / 3.0, abs=1e-8
    )
    assert ctmc.pgf_eval(chain, pi, 0, 0.0, 0.0) == pytest.approx(
        pi[chain.index(0, 0, 0)], abs=1e-15
    )


def test_marginal_and_boundary_mass():
    cap, pi, chain = ctmc.choose_cap(REF)
    marg = ctmc.marginal_node2(chain, pi)
    assert marg.sum() == pytest.approx(1.0, abs=1e-9)
    op = ctmc.marginal_node2(chain, pi, i=0)
    assert op.sum() == pytest.approx(2.0 / 3.0, abs=1e-8)
    assert ctmc.boundary_mass(chain, pi) < 1e-9


def test_choose_cap_light_load_small():
    p = Mm1TandemParams(lam=0.1, mu1=1.0, mu2=1.0, alpha=0.0, gamma=1.0)
    cap, pi, chain = ctmc.choose_cap(p)
    assert cap <= 20


def test_choose_cap_requires_stability():
    with pytest.raises(StabilityError):
        ctmc.choose_cap(Mm1TandemParams(0.4, 1.0, 1.0, 0.5, 1.0))


def test_choose_cap_unavailable_near_saturation(monkeypatch):
    # node-2 load 0.968: the tail needs a cap far past any practical limit
    monkeypatch.setattr(ctmc, "CAP_HARD_LIMIT", 64)
    p = Mm1TandemParams(lam=0.2, mu1=100.0, mu2=0.31, alpha=0.5, gamma=1.0)
    with pytest.raises(OracleUnavailableError):
        ctmc.choose_cap(p)


def test_truncation_monotone_convergence():
    vals = []
    for cap in (8, 16, 32, 64):
        chain = ctmc.build(REF, cap)
        pi = ctmc.stationary(chain)
        vals.append(pi[chain.index(0, 0, 0)])
    errs = [abs(v - vals[-1]) for v in vals[:-1]]
    assert all(b <= a + 1e-14 for a, b in zip(errs, errs[1:]))


def test_oracle_vs_working_pgf_gap_is_real():
    # the closed-form layer reads the chain as sequential occupancy; its
    # node-2 transform deviates from the exact chain by a finite, stable gap
    cap, pi, chain = ctmc.choose_cap(REF)
    P = mm1.marginal_pgf_node2(REF)
    gaps = [
        abs(P(z) - ctmc.pgf_eval(chain, pi, 0, 1.0, z))
        for z in (0.2, 0.5, 0.8)
    ]
    assert all(g > 1e-3 for g in gaps)
