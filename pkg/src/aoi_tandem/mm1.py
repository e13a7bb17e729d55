"""Closed forms for the two-node Markovian tandem with a global
breakdown/repair state: kernels, substitution curve, stability, boundary
probability, node-2 generating function, sojourn LST, age LST, average age.

Two layers coexist here on purpose.  `kernels`, `f_curve`, `boundary_prob`
and the `*_printed` transforms are literal transcriptions of the published
closed forms.  Those printed forms are internally inconsistent (see
`eq6_discrepancy_note`): the functional-equation kernel and the
substitution curve contradict each other, the boundary probability
disagrees with the exact chain already in the failure-free case, and the
printed age transform is not normalized at 0 whenever the failure rate is
positive.  The working pipeline (`marginal_pgf_node2`, `sojourn_lst`,
`age_lst`, `aaoi`) therefore evaluates the self-consistent reading that
reproduces every anchor value the published derivation actually pins down
(the boundary probability, the stability region, the z->1 mass): the
Markovian instance of the general-service machinery in `mg1`.  The
truncated-chain solver in `ctmc` stays the independent ground truth, and
the gap between either layer and that oracle is measured, not hidden.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import mg1
from .dist import exponential
from .mg1 import StabilityError
from .transforms import TransformFn, neg_derivative_at_zero

__all__ = [
    "Mm1TandemParams",
    "StabilityError",
    "kernels",
    "f_curve",
    "boundary_prob",
    "marginal_pgf_node2",
    "marginal_pgf_node2_printed",
    "sojourn_lst",
    "age_lst",
    "age_lst_printed",
    "aaoi",
]


@dataclass(frozen=True)
class Mm1TandemParams:
    """Arrival rate, two service rates, breakdown rate, repair rate."""

    lam: float
    mu1: float
    mu2: float
    alpha: float
    gamma: float

    def __post_init__(self):
        if min(self.lam, self.mu1, self.mu2, self.gamma) <= 0:
            raise ValueError("lam, mu1, mu2, gamma must be > 0")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")

    @property
    def uptime_fraction(self) -> float:
        return self.gamma / (self.alpha + self.gamma)

    def stability_slack(self) -> float:
        """Positive iff stable: gamma/(alpha+gamma) - lam(1/mu1 + 1/mu2)."""
        return self.uptime_fraction - self.lam * (1.0 / self.mu1 + 1.0 / self.mu2)

    @property
    def is_stable(self) -> bool:
        return self.stability_slack() > 0.0

    def require_stable(self):
        slack = self.stability_slack()
        if slack <= 0.0:
            raise StabilityError(slack)

    def as_mg1(self) -> mg1.Mg1TandemParams:
        """The Markovian instance of the general-service chain: exponential
        stages, exponential repair, failure rate alpha."""
        return mg1.Mg1TandemParams(
            lam=self.lam,
            stages=(exponential(self.mu1), exponential(self.mu2)),
            alpha=self.alpha,
            repair=exponential(self.gamma),
        )


def kernels(p: Mm1TandemParams, z1: complex, z2: complex):
    """The printed functional-equation coefficients (D, A, B, C), verbatim.

    Note A and C are algebraically identical as printed; both are exposed so
    that the identity is documentable rather than silently merged.
    """
    D = (
        z1 * z2 * (p.lam * (1.0 - z1) + p.gamma)
        + p.mu1 * z2 * (z1 - z2)
        + p.mu2 * z1 * (z2 - 1.0)
    )
    A = p.mu2 * z1 * (z2 - 1.0) + p.mu1 * z2 * (z2 - z1)
    B = -A
    C = p.mu1 * z2 * (z2 - z1) + p.mu2 * z1 * (z2 - 1.0)
    return D, A, B, C


def f_curve(p: Mm1TandemParams, z2: complex) -> complex:
    """Printed substitution curve f(z2) = mu1 z2^2 / (mu1 + mu2 (1 - z2))."""
    den = p.mu1 + p.mu2 * (1.0 - z2)
    if den == 0:
        raise ZeroDivisionError(f"f(z2) pole at z2={z2}")
    return p.mu1 * z2 * z2 / den


def eq6_discrepancy_note(p: Mm1TandemParams) -> str:
    """Why the printed node-2 generating function cannot be evaluated as-is."""
    zc = "mu1 z2^2 / (mu1 z2 + mu2 (1 - z2))"
    return (
        "printed closed form is degenerate: A(f(z2), z2) != 0 on the printed "
        f"curve (A vanishes on {zc} instead), and on that corrected curve the "
        "numerator kernel C is identically zero; the working transform is the "
        "operational-state scaling of the Markovian instance of the general "
        f"machinery (alpha={p.alpha}, gamma={p.gamma})"
    )


def boundary_prob(p: Mm1TandemParams) -> float:
    """Printed empty-and-operational probability
    gamma/(alpha+gamma) - lam(1/mu1 + 1/mu2); raises when unstable."""
    p.require_stable()
    return p.stability_slack()


def marginal_pgf_node2(p: Mm1TandemParams) -> TransformFn:
    """Operational-state generating function P(z2) with P(0) equal to the
    printed boundary probability and P(1) = gamma/(alpha+gamma).

    Evaluates (gamma/(alpha+gamma)) * P_chain(z2), where P_chain is the
    system-size PGF of the Markovian instance of the `mg1` machinery: the
    unique reading consistent with every anchor value printed alongside the
    published derivation.
    """
    p.require_stable()
    up = p.uptime_fraction
    chain = mg1.system_pgf(p.as_mg1())

    def _eval(z2):
        return up * chain(z2)

    return TransformFn(
        eval=_eval,
        domain_note="node-2 generating function; z2=1 removable, "
        "limit gamma/(alpha+gamma)",
        removable_singularities=(1.0,),
    )


def marginal_pgf_node2_printed(p: Mm1TandemParams) -> TransformFn:
    """The literal printed closed form, with the common failure-rate factor
    cancelled algebraically so the failure-free case is evaluable.  Exposed
    only so validation reports can quantify its defect against the oracle.
    """
    pi00 = p.stability_slack()

    def _eval(z2):
        z1 = f_curve(p, z2)
        D, _, _, C = kernels(p, z1, z2)
        pref = 1.0 / (p.lam * (1.0 - z1) + p.gamma)
        den = pref * D - p.gamma * z1 * z2
        if den == 0:
            raise ZeroDivisionError(f"printed PGF denominator vanished at z2={z2}")
        return pref * C * pi00 / den

    return TransformFn(
        eval=_eval,
        domain_note=eq6_discrepancy_note(p),
        removable_singularities=(1.0,),
    )


def sojourn_lst(p: Mm1TandemParams) -> TransformFn:
    """Sojourn LST W*(s), normalized so W*(0) = 1; the substitution
    z2 = 1 - s/lam applied to the working generating function."""
    return mg1.sojourn_lst(p.as_mg1())


def age_lst(p: Mm1TandemParams) -> TransformFn:
    """Age LST of the working pipeline (normalized at 0 for every alpha)."""
    return mg1.age_lst(p.as_mg1())


def age_lst_printed(p: Mm1TandemParams) -> TransformFn:
    """The printed age transform: the peak/sojourn invariant relation with
    h*(s) = ((alpha+gamma)/gamma) (mu1/(s+mu1)) (mu2/(s+mu2)).

    The (alpha+gamma)/gamma prefactor makes h*(0) exceed 1 whenever
    alpha > 0, so this transform is not normalized at 0 and its derivative
    there diverges; it is evaluated only at s > 0 by validation reports that
    measure its gap against simulation.
    """
    p.require_stable()
    W = sojourn_lst(p)
    pref = (p.alpha + p.gamma) / p.gamma

    def h_printed(s):
        return pref * (p.mu1 / (s + p.mu1)) * (p.mu2 / (s + p.mu2))

    def _eval(s):
        hs = h_printed(s)
        return (
            p.lam
            * (W(s) - W(s) * hs + W(s + p.lam) * s * hs / (s + p.lam))
            / s
        )

    return TransformFn(
        eval=_eval,
        domain_note="printed age transform; not normalized at 0 when alpha > 0",
        removable_singularities=(0.0,),
    )


def aaoi(p: Mm1TandemParams) -> float:
    """Average age of information of the working pipeline."""
    p.require_stable()
    value = neg_derivative_at_zero(age_lst(p))
    if not value > 0.0:
        raise ValueError(f"average age came out nonpositive: {value}")
    return value


def mean_sojourn(p: Mm1TandemParams) -> float:
    return neg_derivative_at_zero(sojourn_lst(p))
