"""Single-regime walkthrough: solve the barrier problem on a mixed
Brownian-plus-hyperexponential surplus, then audit the solution (smooth
fit, generator residual, dominance of the optimal barrier).

Run:  python3 demos/single_regime.py
"""
import numpy as np

import levybarrier as lb


def main() -> None:
    spec = lb.LevySpec(drift_mu=-0.3, sigma=1.0, jump_rate=0.8,
                       jump_mix=((0.6, 1.5), (0.4, 3.0)))
    payoff = lb.make_payoff([[0.0, 0.0], [0.5, 0.6], [1.5, 1.6], [3.0, 2.6]],
                            slope_tail=0.5)
    prob = lb.AuxProblem(spec=spec, lam=0.3, delta=0.7, phi=1.8,
                         payoff=payoff)

    sol = lb.barrier_root(prob)
    b, ev = sol.barrier, sol.evaluator
    print(f"optimal barrier          b* = {b:.10f}")
    print(f"value at zero         V(0)  = {lb.value(prob, b, 0.0, ev):.10f}")
    print(f"value at barrier      V(b*) = {lb.value(prob, b, b, ev):.10f}")

    # Smooth fit: V'(b*) = 1 (reflection above b* is costless at the margin)
    # and V'(0) = phi (injections cost phi per unit).
    print(f"smooth fit at b*:  V'(b*)-1   = "
          f"{lb.value_derivative(prob, b, b, ev) - 1:+.3e}")
    print(f"smooth fit at 0:   V'(0)-phi  = "
          f"{lb.value_derivative(prob, b, 0.0, ev) - prob.phi:+.3e}")

    # Generator residual of the value function, inside and above the band.
    xs = np.linspace(0.05 * b, 0.95 * b, 7)
    res = max(abs(lb.hjb_residual(prob, b, x, ev)) for x in xs)
    print(f"max generator residual on (0, b*): {res:.3e}")
    # Above b* the value is linear and the variational inequality
    # (A - q)V + lam*omega <= 0 must hold with slack.
    res_above = max(lb.hjb_residual(prob, b, x, ev)
                    for x in np.linspace(1.05 * b, 2.0 * b, 5))
    print(f"max signed residual above b* (must be <= 0): {res_above:+.3e}")

    # The optimal barrier dominates any other barrier, pointwise in x.
    print("\ndominance of b* over perturbed barriers (min over x of "
          "V_{b*} - V_b):")
    for other in (0.5 * b, 0.8 * b, 1.25 * b, 2.0 * b):
        gap = lb.dominance_gap(prob, other, np.linspace(0.0, 2.0 * b, 101))
        print(f"  b = {other:6.3f}: min gap = {gap.min():+.3e}")


if __name__ == "__main__":
    main()
