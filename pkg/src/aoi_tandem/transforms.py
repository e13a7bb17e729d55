"""Numeric calculus on Laplace-Stieltjes transforms and generating functions.

Everything downstream needs exactly three primitives: the negated derivative
of a transform at 0 (first moments, average age), limits at removable
singularities, and power-series coefficients of a PGF.  All three are done
numerically so the analytic modules can stay close to the closed forms they
transcribe instead of hand-expanding each one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "TransformFn",
    "TransformError",
    "UnstableDerivativeError",
    "neg_derivative_at_zero",
    "limit_at",
    "pgf_coefficients",
    "complex_step_derivative",
]

DERIV_REL_TOL = 1e-6
LIMIT_REL_TOL = 1e-8
PGF_RADIUS = 0.9
PGF_NEG_TOL = 1e-8


class TransformError(ValueError):
    """Evaluation failed (pole hit, divergent sequence, bad inversion)."""


class UnstableDerivativeError(TransformError):
    """Richardson extrapolation of the derivative did not settle."""

    def __init__(self, msg: str, residual: float):
        super().__init__(f"{msg} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class TransformFn:
    """A scalar transform (LST or PGF) with singularity metadata.

    `eval` accepts real or complex arguments.  Points listed in
    `removable_singularities` must not be evaluated directly; use limit_at.
    """

    eval: Callable[[complex], complex]
    domain_note: str = ""
    removable_singularities: tuple = field(default_factory=tuple)

    def __call__(self, s: complex) -> complex:
        return self.eval(s)

    def is_removable(self, point: float, tol: float = 1e-12) -> bool:
        return any(abs(point - p) <= tol for p in self.removable_singularities)


def _as_transform(g) -> TransformFn:
    if isinstance(g, TransformFn):
        return g
    return TransformFn(eval=g)


def neg_derivative_at_zero(g, rel_tol: float = DERIV_REL_TOL) -> float:
    """-g'(0) by Richardson-extrapolated central differences.

    Steps follow the geometric ladder h0 / 2^k starting at h0 = 1e-2, so the
    transform is only probed at s = +/-h, never at 0 itself; a removable
    singularity at the origin therefore needs no special casing.  Raises
    UnstableDerivativeError when the last two extrapolation levels disagree
    by more than `rel_tol` relative.
    """
    g = _as_transform(g)
    h0 = 1e-2
    levels = 10
    try:
        diffs = [
            (g(h0 / 2**k) - g(-h0 / 2**k)) / (2 * h0 / 2**k) for k in range(levels)
        ]
    except ZeroDivisionError as exc:
        raise TransformError(f"pole hit while differentiating: {exc}") from exc
    # Richardson in h^2, diagonal checked level by level.
    table = [diffs[0]]
    best = diffs[0]
    residual = np.inf
    for k in range(1, levels):
        row = [diffs[k]]
        for j in range(1, k + 1):
            row.append((4**j * row[j - 1] - table[j - 1]) / (4**j - 1))
        prior_best = best
        table = row
        best = row[-1]
        residual = abs(best - prior_best) / max(abs(best), 1e-300)
        if np.isfinite(abs(best)) and residual <= rel_tol:
            break
    else:
        raise UnstableDerivativeError("derivative extrapolation unstable", residual)
    if abs(np.imag(best)) > 1e-8 * max(1.0, abs(np.real(best))):
        raise TransformError(f"derivative came out complex: {best}")
    return -float(np.real(best))


def limit_at(g, point: float, rel_tol: float = LIMIT_REL_TOL) -> float:
    """Richardson limit of g(point + h) along h = h0 / 2^k, h -> 0+."""
    g = _as_transform(g)
    h0 = 1e-2
    levels = 14
    vals = [g(point + h0 / 2**k) for k in range(levels)]
    # Neville extrapolation to h = 0, with the diagonal checked level by
    # level so roundoff at tiny steps cannot spoil an already-converged value.
    table = list(vals)
    best = table[0]
    residual = np.inf
    for k in range(1, levels):
        row = [vals[k]]
        for j in range(1, k + 1):
            row.append((2**j * row[j - 1] - table[j - 1]) / (2**j - 1))
        prior_best = best
        table = row
        best = row[-1]
        residual = abs(best - prior_best) / max(abs(best), 1e-300)
        if np.isfinite(abs(best)) and residual <= max(rel_tol, 1e-13):
            break
    else:
        raise TransformError(
            f"limit at {point} did not converge (residual {residual:.3e})"
        )
    if abs(np.imag(best)) > 1e-8 * max(1.0, abs(np.real(best))):
        raise TransformError(f"limit came out complex: {best}")
    return float(np.real(best))


def pgf_coefficients(
    P, n_max: int, radius: float = PGF_RADIUS, neg_tol: float = PGF_NEG_TOL
) -> np.ndarray:
    """Coefficients c_0..c_n_max of a PGF analytic on the closed unit disk.

    Discrete Fourier inversion on M >= 4*n_max roots of a circle of radius
    `radius` < 1, with the radius scaled back out of each coefficient.
    Coefficients are clamped to [0, 1]; anything below -`neg_tol` means the
    input was not a stable PGF and raises TransformError.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    P = _as_transform(P)
    M = 1
    while M < max(4 * (n_max + 1), 64):
        M *= 2
    angles = 2.0 * np.pi * np.arange(M) / M
    zs = radius * np.exp(1j * angles)
    vals = np.asarray([P(z) for z in zs], dtype=complex)
    coeffs = np.fft.fft(vals) / M
    ks = np.arange(n_max + 1)
    c = coeffs[: n_max + 1].real / radius**ks
    if np.min(c) < -neg_tol:
        raise TransformError(
            f"inversion failed / unstable PGF: coefficient {np.min(c):.3e} < 0"
        )
    return np.clip(c, 0.0, 1.0)


def complex_step_derivative(g, step: float = 1e-20) -> float:
    """g'(0) via a purely imaginary perturbation; exact to machine precision
    for transforms with real Taylor coefficients."""
    g = _as_transform(g)
    return float(np.imag(g(1j * step)) / step)
