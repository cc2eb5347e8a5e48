"""Single-regime barrier solver: optimal barrier, closed-form value function,
derivatives, dominance comparisons and generator residuals.

All payoff integrals pair a piecewise-constant right derivative against the
exponential sums of the scale functions, so every quantity below is exact up
to roundoff; no quadrature enters the solver itself (the generator residual
uses quadrature only for the jump integral).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import ModelError, NumericsError
from .levy import LevySpec, laplace_exponent_deriv, require_valid
from .payoff import ConcavePayoff, evaluate, right_derivative
from .scale import W, W_deriv, Z, Zbar, ScaleEvaluator, build_scale_evaluator


@dataclass(frozen=True)
class AuxProblem:
    """Single-regime dividend/injection problem with terminal payoff weight.

    The effective discount is q = delta + lam; lam = 0 recovers the classical
    bail-out problem (the payoff never enters).
    """

    spec: LevySpec
    lam: float          # payoff weight (killing rate), >= 0
    delta: float        # discount, > 0
    phi: float          # injection cost, > 1
    payoff: ConcavePayoff

    def __post_init__(self):
        require_valid(self.spec)
        if self.delta <= 0:
            raise ModelError("delta must be positive")
        if self.lam < 0:
            raise ModelError("lam must be nonnegative")
        if self.phi <= 1:
            raise ModelError("phi must exceed 1")
        if self.lam > 0 and right_derivative(self.payoff, 0.0) > self.phi + 1e-9:
            raise ModelError("payoff slope at 0+ exceeds phi")

    @property
    def q(self) -> float:
        return self.delta + self.lam

    def evaluator(self) -> ScaleEvaluator:
        return build_scale_evaluator(self.spec, self.q)


@dataclass(frozen=True)
class AuxSolution:
    problem: AuxProblem
    evaluator: ScaleEvaluator
    barrier: float


# ---------------------------------------------------------------------------
# segment-exact payoff integrals

def _segments(pw: ConcavePayoff, lo: float, hi: float):
    """Break [lo, hi] at the payoff knots; return (u, v, slope) arrays with
    slope the right derivative on each open segment."""
    if hi <= lo:
        return (np.empty(0),) * 3
    cuts = pw.xs[(pw.xs > lo) & (pw.xs < hi)]
    edges = np.concatenate(([lo], cuts, [hi]))
    u, v = edges[:-1], edges[1:]
    slope = right_derivative(pw, u)
    return u, v, np.atleast_1d(slope)


def payoff_W_integral(ev: ScaleEvaluator, pw: ConcavePayoff, x: float,
                      b: float) -> float:
    """int_0^b omega'_+(y) W_q(y - x) dy  (only y > x contributes)."""
    u, v, slope = _segments(pw, max(x, 0.0), b)
    if len(u) == 0:
        return 0.0
    return float(np.sum(slope * (Z(ev, v - x) - Z(ev, u - x))) / ev.q)


def payoff_Z_integral(ev: ScaleEvaluator, pw: ConcavePayoff, x: float,
                      b: float) -> float:
    """int_0^b omega'_+(y) Z_q(y - x) dy."""
    u, v, slope = _segments(pw, 0.0, b)
    if len(u) == 0:
        return 0.0
    return float(np.sum(slope * (Zbar(ev, v - x) - Zbar(ev, u - x))))


def ell(ev: ScaleEvaluator, pw: ConcavePayoff, lam: float, phi: float,
        x: float) -> float:
    """Barrier equation left side: Z_q(x) - lam*int_0^x omega'_+ W_q - phi.

    ell(0) = 1 - phi < 0 and ell(inf) = inf; its unique zero is the optimal
    barrier.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    return float(Z(ev, x)) - phi - lam * payoff_W_integral(ev, pw, 0.0, x)


def ell_deriv(ev: ScaleEvaluator, pw: ConcavePayoff, lam: float,
              x: float) -> float:
    """ell'(x) = W_q(x) (q - lam * omega'_+(x))."""
    return float(W(ev, x)) * (ev.q - lam * right_derivative(pw, x))


def barrier_root(problem: AuxProblem,
                 evaluator: ScaleEvaluator | None = None,
                 warm_start: float | None = None) -> AuxSolution:
    """Unique zero of ell: bracket expansion from Z_q^{-1}(phi) upward, Brent,
    then Newton polish to |ell| below 1e-12."""
    ev = evaluator if evaluator is not None else problem.evaluator()
    pw, lam, phi = problem.payoff, problem.lam, problem.phi

    f = lambda x: ell(ev, pw, lam, phi, x)
    # Z_q^{-1}(phi) is a proven lower bound for the barrier.
    z_hi = 1.0
    while Z(ev, z_hi) < phi:
        z_hi *= 2.0
        if z_hi > ev.x_cap:
            raise NumericsError("no sign change within overflow horizon")
    z_inv = brentq(lambda x: Z(ev, x) - phi, 0.0, z_hi, xtol=1e-14)

    lo = z_inv
    hi = max(2.0 * lo, lo + 1.0)
    if warm_start is not None and warm_start > lo and f(warm_start) > 0:
        hi = warm_start
    while f(hi) <= 0:
        lo = hi
        hi *= 2.0
        if hi > ev.x_cap:
            raise NumericsError("no sign change within overflow horizon")
    if f(lo) > 0:
        lo = 0.0
    root = brentq(f, lo, hi, xtol=1e-14)
    for _ in range(5):
        val = f(root)
        if abs(val) < 1e-13:
            break
        d = ell_deriv(ev, pw, lam, root)
        if d <= 0:
            break
        root -= val / d
    if abs(f(root)) > 1e-10:
        raise NumericsError("barrier root did not converge")
    return AuxSolution(problem=problem, evaluator=ev, barrier=float(root))


# ---------------------------------------------------------------------------
# closed-form value function and derivatives

def value(problem: AuxProblem, b: float, x: float,
          evaluator: ScaleEvaluator | None = None) -> float:
    """Expected NPV of the (0, b) double-barrier strategy started at x.

    On [0, b] this is the scale-function closed form; above b the function is
    exactly linear with slope 1, below 0 linear with slope phi.
    """
    ev = evaluator if evaluator is not None else problem.evaluator()
    if x > b:
        return (x - b) + _value_core(problem, ev, b, b)
    if x < 0:
        return problem.phi * x + _value_core(problem, ev, b, 0.0)
    return _value_core(problem, ev, b, x)


def _value_core(problem: AuxProblem, ev: ScaleEvaluator, b: float,
                x: float) -> float:
    pw, lam, phi, q = problem.payoff, problem.lam, problem.phi, problem.q
    psi_p0 = laplace_exponent_deriv(problem.spec, 0.0)
    i_z = payoff_Z_integral(ev, pw, x, b)
    i_w = payoff_W_integral(ev, pw, 0.0, b)
    out = -float(Zbar(ev, b - x)) - psi_p0 / q
    out += (lam / q) * (evaluate(pw, 0.0) + i_z)
    out += float(Z(ev, b - x)) / (q * float(W(ev, b))) \
        * (float(Z(ev, b)) - phi - lam * i_w)
    return out


def value_derivative(problem: AuxProblem, b: float, x: float,
                     evaluator: ScaleEvaluator | None = None) -> float:
    """d/dx of the value on [0, b] (one-sided limits at the ends)."""
    if not 0.0 <= x <= b:
        raise ValueError("x must lie in [0, b]")
    ev = evaluator if evaluator is not None else problem.evaluator()
    pw, lam, phi = problem.payoff, problem.lam, problem.phi
    i_w = payoff_W_integral(ev, pw, 0.0, b)
    h = payoff_W_integral(ev, pw, x, b)
    return (float(W(ev, b - x)) / float(W(ev, b))
            * (phi + lam * i_w - float(Z(ev, b)))
            + float(Z(ev, b - x)) - lam * h)


def _value_second_derivative(problem: AuxProblem, ev: ScaleEvaluator,
                             b: float, x: float) -> float:
    """V'' on (0, b), away from payoff knots."""
    pw, lam, phi, q = problem.payoff, problem.lam, problem.phi, problem.q
    i_w = payoff_W_integral(ev, pw, 0.0, b)
    k = phi + lam * i_w - float(Z(ev, b))
    out = -float(W_deriv(ev, b - x)) / float(W(ev, b)) * k
    out -= q * float(W(ev, b - x))
    u, v, slope = _segments(pw, max(x, 0.0), b)
    if len(u):
        out += lam * float(np.sum(slope * (W(ev, v - x) - W(ev, u - x))))
    return out


def dominance_gap(problem: AuxProblem, b: float, grid,
                  evaluator: ScaleEvaluator | None = None,
                  solution: AuxSolution | None = None) -> np.ndarray:
    """g(x) = V at the optimal barrier minus V at barrier b, on the grid.

    Nonnegative and nondecreasing for every b != optimal barrier.
    """
    from .value_grid import value_on_grid

    ev = evaluator if evaluator is not None else problem.evaluator()
    sol = solution if solution is not None else barrier_root(problem, ev)
    grid = np.asarray(grid, dtype=float)
    v_opt, _ = value_on_grid(problem, sol.barrier, grid, ev)
    v_b, _ = value_on_grid(problem, b, grid, ev)
    return v_opt - v_b


# ---------------------------------------------------------------------------
# generator residual

def hjb_residual(problem: AuxProblem, b: float, x: float,
                 evaluator: ScaleEvaluator | None = None) -> float:
    """(A - q) V + lam*omega at x > 0, x != b, where A is the extended
    generator of the surplus process.

    The jump integral is adaptive quadrature split at the value-function kink
    x -> b and the payoff knots, with the exponential tail beyond b in closed
    form (V is exactly linear there).
    """
    if x <= 0:
        raise ValueError("x must be positive")
    ev = evaluator if evaluator is not None else problem.evaluator()
    spec, lam, q = problem.spec, problem.lam, problem.q
    vx = value(problem, b, x, ev)

    if x < b:
        vp = value_derivative(problem, b, x, ev)
        vpp = _value_second_derivative(problem, ev, b, x)
    else:
        vp = 1.0
        vpp = 0.0

    out = spec.drift_mu * vp + 0.5 * spec.sigma**2 * vpp
    if spec.jump_rate > 0:
        out += spec.jump_rate * _jump_integral(problem, ev, b, x, vx)
    out += -q * vx + lam * evaluate(problem.payoff, x)
    return out


def _jump_integral(problem: AuxProblem, ev: ScaleEvaluator, b: float,
                   x: float, vx: float) -> float:
    """int_0^inf (V(x+z) - V(x)) dF(z) for the hyperexponential jump law."""
    spec = problem.spec
    total = 0.0
    t0 = b - x
    vb = value(problem, b, b, ev) if t0 > 0 else None
    if t0 > 0:
        # kinks of z -> V(x+z): payoff knots shifted by -x, and b - x
        pts = [float(p) for p in problem.payoff.xs - x if 0.0 < p < t0]
        dens = lambda z: sum(w * r * np.exp(-r * z) for w, r in spec.jump_mix)
        val, _ = quad(lambda z: (value(problem, b, x + z, ev) - vx) * dens(z),
                      0.0, t0, points=pts, limit=200, epsabs=1e-12,
                      epsrel=1e-9)
        total += val
        for w, r in spec.jump_mix:
            total += w * np.exp(-r * t0) * (vb - vx + 1.0 / r)
    else:
        # entire tail: V is linear with slope 1 above b
        for w, r in spec.jump_mix:
            total += w / r
    return total
