"""Exact q-scale functions via root/residue decomposition of 1/(psi(s)-q).

For the Brownian-plus-hyperexponential class psi(s)-q is a rational function,
so clearing denominators gives a real-rooted polynomial and

    W_q(x) = sum_j c_j exp(s_j x),  c_j = 1/psi'(s_j),

with the companions Z_q = 1 + q int_0^x W_q and Zbar_q = int_0^x Z_q evaluated
analytically from the same roots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import NumericsError
from .levy import (LevySpec, _psi_poly_coeffs, laplace_exponent,
                   laplace_exponent_deriv, require_valid)

_EXP_CAP = 700.0  # largest exponent before exp() overflows


@dataclass(frozen=True, eq=False)
class ScaleEvaluator:
    """Root/residue representation of W_q, Z_q, Zbar_q for one (spec, q)."""

    spec: LevySpec
    q: float
    roots: np.ndarray       # all real roots of psi(s)=q, descending; roots[0]=Phi(q)
    residues: np.ndarray    # 1/psi'(s_j), aligned with roots
    w_at_zero: float        # W_q(0+)

    @property
    def phi_q(self) -> float:
        return float(self.roots[0])

    @property
    def x_cap(self) -> float:
        """Largest x before exp(s_max * x) overflows."""
        return _EXP_CAP / max(self.phi_q, 1e-12)

    def _check_domain(self, x) -> None:
        if np.max(x, initial=-np.inf) > self.x_cap:
            raise NumericsError("overflow horizon exceeded")


def build_scale_evaluator(spec: LevySpec, q: float) -> ScaleEvaluator:
    """Find all roots of psi(s)=q and assemble the exponential-sum evaluator.

    Roots come from the companion matrix of the cleared polynomial and are
    polished by Newton on psi(s)-q.  Construction aborts on complex or
    near-multiple roots (measure-zero parameter sets, not handled).
    """
    require_valid(spec)
    if q <= 0:
        raise ValueError("q must be positive")
    coeffs = _psi_poly_coeffs(spec, q)
    raw = np.roots(coeffs)
    scale = 1.0 + abs(max(raw.real.max(), 0.0))
    if np.any(np.abs(raw.imag) > 1e-9 * scale):
        raise NumericsError("complex roots")
    roots = np.sort(raw.real)[::-1].copy()
    # Newton polish on psi(s)-q itself (better conditioned than the poly).
    for j, s in enumerate(roots):
        for _ in range(50):
            f = laplace_exponent(spec, s) if s >= 0 else _psi_neg(spec, s)
            f -= q
            df = laplace_exponent_deriv(spec, s) if s >= 0 else _psi_neg_deriv(spec, s)
            if df == 0:
                break
            step = f / df
            s -= step
            if abs(step) <= 1e-15 * max(1.0, abs(s)):
                break
        roots[j] = s
    gaps = -np.diff(roots)
    if np.any(gaps < 1e-9 * (1.0 + abs(roots[0]))):
        raise NumericsError("near-multiple roots")
    if np.sum(roots > 0) != 1:
        raise NumericsError("expected exactly one positive root")
    residues = np.array([1.0 / _psi_neg_deriv(spec, s) for s in roots])
    w0 = float(residues.sum())
    return ScaleEvaluator(spec=spec, q=q, roots=roots, residues=residues,
                          w_at_zero=w0)


def _psi_neg(spec: LevySpec, s: float) -> float:
    """psi extended to s < 0 (away from the poles -mu_k)."""
    out = -spec.drift_mu * s + 0.5 * spec.sigma**2 * s**2
    if spec.jump_rate > 0:
        out += spec.jump_rate * (sum(w * r / (r + s) for w, r in spec.jump_mix) - 1.0)
    return out


def _psi_neg_deriv(spec: LevySpec, s: float) -> float:
    out = -spec.drift_mu + spec.sigma**2 * s
    if spec.jump_rate > 0:
        out -= spec.jump_rate * sum(w * r / (r + s) ** 2 for w, r in spec.jump_mix)
    return out


def W(ev: ScaleEvaluator, x) -> float | np.ndarray:
    """W_q(x): exponential sum for x >= 0, exactly 0 for x < 0."""
    x = np.asarray(x, dtype=float)
    ev._check_domain(x)
    vals = np.where(x[..., None] >= 0,
                    ev.residues * np.exp(ev.roots * np.minimum(x[..., None], ev.x_cap)),
                    0.0).sum(axis=-1)
    out = np.where(x >= 0, vals, 0.0)
    return float(out) if out.ndim == 0 else out


def W_deriv(ev: ScaleEvaluator, x) -> float | np.ndarray:
    """W_q'(x) for x > 0 (strictly positive there)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("x must be positive")
    ev._check_domain(x)
    out = (ev.residues * ev.roots * np.exp(ev.roots * x[..., None])).sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def Z(ev: ScaleEvaluator, x) -> float | np.ndarray:
    """Z_q(x) = 1 + q int_0^x W_q; identically 1 for x <= 0."""
    x = np.asarray(x, dtype=float)
    ev._check_domain(x)
    d = ev.q * ev.residues / ev.roots
    xp = np.maximum(x[..., None], 0.0)
    vals = 1.0 + (d * (np.exp(ev.roots * xp) - 1.0)).sum(axis=-1)
    out = np.where(x >= 0, vals, 1.0)
    return float(out) if out.ndim == 0 else out


def Zbar(ev: ScaleEvaluator, x) -> float | np.ndarray:
    """Zbar_q(x) = int_0^x Z_q; equals x for x <= 0."""
    x = np.asarray(x, dtype=float)
    ev._check_domain(x)
    d = ev.q * ev.residues / ev.roots
    xp = np.maximum(x[..., None], 0.0)
    vals = xp[..., 0] + (d * ((np.exp(ev.roots * xp) - 1.0) / ev.roots - xp)).sum(axis=-1)
    out = np.where(x >= 0, vals, x)
    return float(out) if out.ndim == 0 else out


def verify_laplace_transform(ev: ScaleEvaluator, s: float, horizon: float) -> float:
    """Relative residual of int_0^inf e^{-sx} W_q(x) dx = 1/(psi(s)-q).

    The left side is computed by adaptive quadrature over [0, horizon], kept
    independent of the root/residue closed form it checks.
    """
    if s <= ev.phi_q:
        raise ValueError("s must exceed Phi(q)")
    target = 1.0 / (laplace_exponent(ev.spec, s) - ev.q)
    val, _ = quad(lambda x: np.exp(-s * x) * W(ev, x), 0.0, horizon, limit=500)
    return abs(val - target) / abs(target)
