"""Closed forms for the N-stage unreliable tandem with generally
distributed service, bufferless downstream nodes and failures that strike
only a node actively serving (preemptive-resume repair).

Because a packet occupies the whole chain from service start at node 1
until departure from node N, the chain behaves as a single M/G/1 queue
whose effective service time is the total completion time across stages,
including repair interruptions.  The transforms below encode exactly that:
system-size PGF, sojourn LST and age LST, with the average age extracted
numerically from the age LST.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dist import DistributionSpec
from .transforms import TransformFn, limit_at, neg_derivative_at_zero

__all__ = [
    "Mg1TandemParams",
    "StabilityError",
    "phi",
    "h_star",
    "completion_lst",
    "system_pgf",
    "sojourn_lst",
    "age_lst",
    "age_lst_printed",
    "aaoi",
]


class StabilityError(ValueError):
    """Offered load (including repair overhead) is at or above capacity."""

    def __init__(self, margin: float):
        super().__init__(f"unstable parameters: stability margin {margin:.6g} <= 0")
        self.margin = margin


@dataclass(frozen=True)
class Mg1TandemParams:
    """Arrival rate, per-stage service laws, failure rate and repair law."""

    lam: float
    stages: tuple
    alpha: float
    repair: DistributionSpec

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("arrival rate must be > 0")
        if self.alpha < 0:
            raise ValueError("failure rate must be >= 0")
        if len(self.stages) < 1:
            raise ValueError("need at least one stage")
        object.__setattr__(self, "stages", tuple(self.stages))

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    def total_service_mean(self) -> float:
        return sum(d.mean() for d in self.stages)

    def p0(self) -> float:
        """Idle probability 1 - lambda * (1 + alpha*E[R]) * sum of stage means."""
        return 1.0 - self.lam * (
            1.0 + self.alpha * self.repair.mean()
        ) * self.total_service_mean()

    @property
    def is_stable(self) -> bool:
        return self.p0() > 0.0

    def require_stable(self):
        p0 = self.p0()
        if p0 <= 0.0:
            raise StabilityError(p0)


def phi(p: Mg1TandemParams, s: complex, z: complex) -> complex:
    """Breakdown-augmented kernel s + lam(1-z) + alpha(1 - r*(s + lam(1-z)))."""
    arg = s + p.lam - p.lam * z
    return arg + p.alpha - p.alpha * p.repair.lst(arg)


def h_star(p: Mg1TandemParams, s: complex) -> complex:
    """Product of the stage service LSTs."""
    out = 1.0 + 0.0j if isinstance(s, complex) else 1.0
    for d in p.stages:
        out = out * d.lst(s)
    return out


def completion_lst(p: Mg1TandemParams, s: complex) -> complex:
    """LST of one packet's total occupancy of the chain, repairs included.

    Failures arrive at rate alpha while serving and each adds an independent
    repair period, so the completion time transform is h*(s + alpha(1 - r*(s))).
    """
    return h_star(p, s + p.alpha - p.alpha * p.repair.lst(s))


def system_pgf(p: Mg1TandemParams) -> TransformFn:
    """PGF of the stationary number of packets in the whole chain:
    P(z) = h*(phi(0,z)) (1-z) p0 / (h*(phi(0,z)) - z), P(1) = 1."""
    p.require_stable()
    p0 = p.p0()

    def _eval(z):
        hp = h_star(p, phi(p, 0.0, z))
        den = hp - z
        if den == 0:
            raise ZeroDivisionError(f"system PGF denominator vanished at z={z}")
        return hp * (1.0 - z) * p0 / den

    return TransformFn(
        eval=_eval,
        domain_note="system-size PGF; z=1 removable with limit 1",
        removable_singularities=(1.0,),
    )


def sojourn_lst(p: Mg1TandemParams) -> TransformFn:
    """LST of the stationary sojourn time, W*(s) = P(1 - s/lam)."""
    p.require_stable()
    P = system_pgf(p)

    def _eval(s):
        return P(1.0 - s / p.lam)

    return TransformFn(
        eval=_eval,
        domain_note="sojourn LST; s=0 removable with limit 1",
        removable_singularities=(0.0,),
    )


def age_lst(p: Mg1TandemParams) -> TransformFn:
    """LST of the stationary age of information at the monitor:
    Delta*(s) = W*(s) - s p0 B*(s) / (s + lam B*(s + lam)),
    with B the completion-time transform.

    The second term must be built from the same effective service time as
    the sojourn part, i.e. the completion time with repairs folded in;
    using the repair-free stage product there breaks normalization at 0
    whenever the failure rate is positive (see age_lst_printed).
    """
    p.require_stable()
    p0 = p.p0()
    W = sojourn_lst(p)

    def _eval(s):
        bs = completion_lst(p, s)
        return W(s) - s * p0 * bs / (s + p.lam * completion_lst(p, s + p.lam))

    return TransformFn(
        eval=_eval,
        domain_note="age LST; s=0 removable with limit 1",
        removable_singularities=(0.0,),
    )


def age_lst_printed(p: Mg1TandemParams) -> TransformFn:
    """The same relation transcribed with the repair-free stage product in
    the second term.  Coincides with age_lst when the failure rate is 0;
    for positive failure rates it is inconsistent with its own sojourn
    part, and validation reports measure that gap instead of hiding it."""
    p.require_stable()
    p0 = p.p0()
    W = sojourn_lst(p)

    def _eval(s):
        hs = h_star(p, s)
        return W(s) - s * p0 * hs / (s + p.lam * h_star(p, s + p.lam))

    return TransformFn(
        eval=_eval,
        domain_note="verbatim age relation; normalized at 0 only when "
        "the failure rate is 0",
        removable_singularities=(0.0,),
    )


def aaoi(p: Mg1TandemParams) -> float:
    """Average age of information, -d/ds of the age LST at 0."""
    p.require_stable()
    value = neg_derivative_at_zero(age_lst(p))
    if not value > 0.0:
        raise ValueError(f"average age came out nonpositive: {value}")
    return value


def mean_sojourn(p: Mg1TandemParams) -> float:
    return neg_derivative_at_zero(sojourn_lst(p))


def mean_system_size(p: Mg1TandemParams) -> float:
    """P'(1) evaluated by a limit ladder on the difference quotient."""
    P = system_pgf(p)

    def diff(z):
        return (limit_at(P, 1.0) - P(z)) / (1.0 - z)

    return limit_at(TransformFn(eval=diff), 1.0)
