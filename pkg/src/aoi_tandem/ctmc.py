"""Independent ground truth for the Markovian tandem: truncated state space
(i, n1, n2) with a global operational/repair flag, solved for its stationary
distribution by sparse direct elimination.

Transition semantics follow the balance table of the two-node chain:
arrivals at rate lam in both operational and repair states (lost at the
truncation cap), node-1 and node-2 completions only while operational,
global failure alpha from every operational state, repair gamma back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mm1 import Mm1TandemParams

__all__ = ["TruncatedChain", "build", "stationary", "pgf_eval", "choose_cap"]

CAP_HARD_LIMIT = 512
ROW_SUM_TOL = 1e-12
RESIDUAL_TOL = 1e-10


class OracleUnavailableError(RuntimeError):
    """Truncation would exceed the hard cap (parameters near instability)."""


@dataclass
class TruncatedChain:
    params: Mm1TandemParams
    cap: int
    generator: sp.csr_matrix

    def index(self, i: int, n1: int, n2: int) -> int:
        side = self.cap + 1
        return i * side * side + n1 * side + n2

    @property
    def n_states(self) -> int:
        return 2 * (self.cap + 1) ** 2


def build(params: Mm1TandemParams, cap: int) -> TruncatedChain:
    """Assemble the sparse generator; both queues truncated at `cap` with
    arrivals lost at the boundary."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    lam, mu1, mu2 = params.lam, params.mu1, params.mu2
    alpha, gamma = params.alpha, params.gamma
    side = cap + 1
    n_states = 2 * side * side

    def idx(i, n1, n2):
        return i * side * side + n1 * side + n2

    rows, cols, vals = [], [], []

    def add(src, dst, rate):
        rows.append(src)
        cols.append(dst)
        vals.append(rate)

    for i in (0, 1):
        for n1 in range(side):
            for n2 in range(side):
                s = idx(i, n1, n2)
                if n1 < cap:
                    add(s, idx(i, n1 + 1, n2), lam)
                if i == 0:
                    if n1 > 0 and n2 < cap:
                        add(s, idx(0, n1 - 1, n2 + 1), mu1)
                    if n2 > 0:
                        add(s, idx(0, n1, n2 - 1), mu2)
                    if alpha > 0:
                        add(s, idx(1, n1, n2), alpha)
                else:
                    add(s, idx(0, n1, n2), gamma)

    Q = sp.coo_matrix((vals, (rows, cols)), shape=(n_states, n_states)).tocsr()
    diag = -np.asarray(Q.sum(axis=1)).ravel()
    Q = Q + sp.diags(diag)
    chain = TruncatedChain(params=params, cap=cap, generator=Q.tocsr())
    row_sums = np.abs(np.asarray(chain.generator.sum(axis=1)).ravel())
    if row_sums.max() > ROW_SUM_TOL:
        raise AssertionError(f"generator rows do not sum to 0: {row_sums.max():.3e}")
    return chain


def stationary(chain: TruncatedChain) -> np.ndarray:
    """pi with pi Q = 0 and sum(pi) = 1, by replacing one balance equation
    with the normalization row; checks the infinity-norm residual."""
    Q = chain.generator
    n = Q.shape[0]
    A = Q.T.tolil()
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = spla.spsolve(A.tocsr(), b)
    if not np.all(np.isfinite(pi)):
        raise RuntimeError("stationary solve produced non-finite entries")
    residual = np.max(np.abs(pi @ Q))
    if residual > RESIDUAL_TOL:
        raise RuntimeError(
            f"stationary solve residual {residual:.3e} exceeds {RESIDUAL_TOL}"
        )
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def pgf_eval(
    chain: TruncatedChain, pi: np.ndarray, i: int, z1: float, z2: float
) -> float:
    """Sum of q_i(n1, n2) z1^n1 z2^n2 over the truncated support."""
    side = chain.cap + 1
    block = pi[i * side * side : (i + 1) * side * side].reshape(side, side)
    w1 = z1 ** np.arange(side)
    w2 = z2 ** np.arange(side)
    return float(w1 @ block @ w2)


def marginal_node2(chain: TruncatedChain, pi: np.ndarray, i: int | None = None):
    """Marginal pmf of the node-2 queue length, optionally restricted to
    operational (i=0) or repair (i=1) states."""
    side = chain.cap + 1
    full = pi.reshape(2, side, side)
    if i is None:
        return full.sum(axis=(0, 1))
    return full[i].sum(axis=0)


def boundary_mass(chain: TruncatedChain, pi: np.ndarray) -> float:
    """Probability mass sitting at either truncation boundary."""
    side = chain.cap + 1
    full = pi.reshape(2, side, side)
    return float(full[:, -1, :].sum() + full[:, :, -1].sum())


def choose_cap(
    params: Mm1TandemParams, tol: float = 1e-9, start: int = 16
) -> tuple[int, np.ndarray, TruncatedChain]:
    """Smallest cap on a doubling schedule whose boundary mass is < tol.

    Returns (cap, stationary vector, chain).  Raises OracleUnavailableError
    when the doubling schedule passes the hard limit, which happens only
    near the stability boundary.
    """
    params.require_stable()
    cap = start
    while cap <= CAP_HARD_LIMIT:
        chain = build(params, cap)
        pi = stationary(chain)
        if boundary_mass(chain, pi) < tol:
            return cap, pi, chain
        cap *= 2
    raise OracleUnavailableError(
        f"near-instability, oracle unavailable (cap > {CAP_HARD_LIMIT})"
    )
