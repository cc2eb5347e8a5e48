"""Command-line entry point.

Commands: solve-aux, solve-regime, simulate, verify, curve.  One config file
drives every command; reports are plain key=value text plus CSV sidecars.
Exit codes: 0 success, 2 config error, 3 solver error, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .auxiliary import (AuxProblem, barrier_root, dominance_gap, hjb_residual,
                        value, value_derivative)
from .config import (ConfigError, aux_inputs_from, parse_config,
                     regime_model_from, sim_config_from, solver_options_from)
from .errors import ModelError, NumericsError
from .regime import solve
from .scale import W, Z, Zbar, build_scale_evaluator, verify_laplace_transform
from .simulate import (estimate_exit_identities, simulate_aux_npv,
                       simulate_regime_npv)


def _g17(v: float) -> str:
    return "%.17g" % v


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_g17(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levybarrier")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("solve-aux", "solve-regime", "simulate", "verify", "curve"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None)
        sp.add_argument("--paths", type=int, default=None)
        sp.add_argument("--dt", type=float, default=None)
        sp.add_argument("--tmax", type=float, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--state", default=None)
        sp.add_argument("--x0", type=float, default=None)
        sp.add_argument("--antithetic", action="store_true", default=None)
        sp.add_argument("--barrier", default=None,
                        help="comma-separated barrier override")
    return p


def _solve_aux(tree, args, out):
    spec, lam, delta, phi, payoff = aux_inputs_from(tree, args.state)
    problem = AuxProblem(spec=spec, lam=lam, delta=delta, phi=phi,
                         payoff=payoff)
    sol = barrier_root(problem)
    b, ev = sol.barrier, sol.evaluator
    print(f"barrier={_g17(b)}", file=out)
    print(f"value_at_zero={_g17(value(problem, b, 0.0, ev))}", file=out)
    print(f"value_at_barrier={_g17(value(problem, b, b, ev))}", file=out)
    print("smooth_fit_barrier_residual="
          + _g17(abs(value_derivative(problem, b, b, ev) - 1.0)), file=out)
    print("smooth_fit_zero_residual="
          + _g17(abs(value_derivative(problem, b, 0.0, ev) - phi)), file=out)
    if args.out:
        xs = np.linspace(0.0, 2.0 * b, 101)
        rows = []
        for x in xs:
            v = value(problem, b, float(x), ev)
            vp = (value_derivative(problem, b, float(x), ev)
                  if x <= b else 1.0)
            res = (hjb_residual(problem, b, float(x), ev)
                   if x > 0 else float("nan"))
            rows.append((x, v, vp, res))
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        _write_csv(d / "value_curve.csv", ["x", "V", "V_prime",
                                           "hjb_residual"], rows)
    return 0


def _solve_regime(tree, args, out):
    model = regime_model_from(tree)
    opts = solver_options_from(tree)
    sol = solve(model, **opts)
    for n, rho in enumerate(sol.rho_trace, start=1):
        line = f"iter={n} rho={_g17(rho)}"
        if n == len(sol.rho_trace):
            line += " " + " ".join(
                f"b_{s}={_g17(b)}" for s, b in zip(model.states, sol.barriers))
        print(line, file=out)
    for s, b in zip(model.states, sol.barriers):
        print(f"barrier_{s}={_g17(b)}", file=out)
    print(f"iterations={sol.iterations}", file=out)
    print(f"final_rho={_g17(sol.final_rho)}", file=out)
    print(f"beta={_g17(model.beta)}", file=out)
    for i, s in enumerate(model.states):
        print(f"value_at_zero_{s}={_g17(sol.value.at_zero(i))}", file=out)
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        for i, s in enumerate(model.states):
            rows = zip(sol.value.grid, sol.value.values[i])
            _write_csv(d / f"curve_{s}.csv", ["x", "V"], rows)
    return 0


def _parse_barriers(arg: str | None):
    if arg is None:
        return None
    return [float(tok) for tok in arg.split(",")]


def _simulate(tree, args, out):
    config = sim_config_from(tree, paths=args.paths, dt=args.dt,
                             tmax=args.tmax, seed=args.seed,
                             antithetic=args.antithetic)
    override = _parse_barriers(args.barrier)
    rows = []
    if "chain" in tree:
        model = regime_model_from(tree)
        i0 = 0 if args.state is None else model.states.index(args.state)
        if override is not None:
            barriers = np.asarray(override, dtype=float)
            analytic = float("nan")
            x0 = args.x0 if args.x0 is not None else float(barriers[i0])
        else:
            sol = solve(model, **solver_options_from(tree))
            barriers = sol.barriers
            x0 = args.x0 if args.x0 is not None else float(barriers[i0])
            analytic = sol.value_at(x0, i0)
        est = simulate_regime_npv(model, barriers, x0, i0, config)
    else:
        spec, lam, delta, phi, payoff = aux_inputs_from(tree, args.state)
        problem = AuxProblem(spec=spec, lam=lam, delta=delta, phi=phi,
                             payoff=payoff)
        sol = barrier_root(problem)
        b = override[0] if override is not None else sol.barrier
        x0 = args.x0 if args.x0 is not None else b
        analytic = value(problem, b, x0, sol.evaluator)
        est = simulate_aux_npv(spec, payoff, lam, delta, phi, b, x0, config)
    rows.append((est.mean, est.std_error, analytic))
    print("mean,std_error,analytic", file=out)
    for row in rows:
        print(",".join(_g17(v) for v in row), file=out)
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        _write_csv(d / "simulate.csv", ["mean", "std_error", "analytic"], rows)
    return 0


def _curve(tree, args, out):
    spec, lam, delta, phi, payoff = aux_inputs_from(tree, args.state)
    problem = AuxProblem(spec=spec, lam=lam, delta=delta, phi=phi,
                         payoff=payoff)
    sol = barrier_root(problem)
    ev = sol.evaluator
    hi = args.x0 if args.x0 is not None else 2.0 * sol.barrier
    xs = np.linspace(0.0, hi, 201)
    rows = [(x, W(ev, float(x)), Z(ev, float(x)), Zbar(ev, float(x)))
            for x in xs]
    print("x,W,Z,Zbar", file=out)
    for row in rows:
        print(",".join(_g17(v) for v in row), file=out)
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        _write_csv(d / "scale_curve.csv", ["x", "W", "Z", "Zbar"], rows)
    return 0


# ---------------------------------------------------------------------------
# verification battery

def exit_identities_analytic(ev, b: float, x: float) -> tuple[float, float,
                                                              float]:
    """Scale-function values of the three discounted exit functionals:
    continuous passage below 0 before reaching b, reaching b before 0, and
    first passage below 0 under reflection at b."""
    wb = float(W(ev, b))
    wu = float(W(ev, b - x))
    zb = float(Z(ev, b))
    zu = float(Z(ev, b - x))
    return wu / wb, zu - zb * wu / wb, zu / zb


def _run_verify(tree, args, out):
    checks: list[tuple[str, bool, str]] = []

    def record(name: str, ok: bool, detail: str) -> None:
        checks.append((name, ok, detail))
        print(("PASS " if ok else "FAIL ") + name + " " + detail, file=out)

    spec, lam, delta, phi, payoff = aux_inputs_from(tree, args.state)
    problem = AuxProblem(spec=spec, lam=lam, delta=delta, phi=phi,
                         payoff=payoff)
    sol = barrier_root(problem)
    ev, b = sol.evaluator, sol.barrier

    # Laplace transform residuals of W_q
    for k in range(1, 6):
        s = ev.phi_q + 0.1 + 0.6 * k
        horizon = min(ev.x_cap, 60.0 / (s - ev.phi_q))
        res = verify_laplace_transform(ev, s, horizon)
        record("laplace", res < 1e-6, f"s={_g17(s)} residual={_g17(res)}")

    # smooth fit at both boundaries
    r_b = abs(value_derivative(problem, b, b, ev) - 1.0)
    r_0 = abs(value_derivative(problem, b, 0.0, ev) - phi)
    record("smooth_fit_barrier", r_b <= 1e-8, f"residual={_g17(r_b)}")
    record("smooth_fit_zero", r_0 <= 1e-8, f"residual={_g17(r_0)}")

    # generator residuals on and above the barrier
    worst_in = worst_above = 0.0
    for x in np.linspace(b / 25, b, 25):
        vx = value(problem, b, float(x), ev)
        worst_in = max(worst_in,
                       abs(hjb_residual(problem, b, float(x), ev))
                       / (1.0 + abs(vx)))
    for x in np.linspace(1.02 * b, 2.0 * b, 10):
        worst_above = max(worst_above, hjb_residual(problem, b, float(x), ev))
    record("hjb_interior", worst_in <= 1e-6, f"max={_g17(worst_in)}")
    record("hjb_above", worst_above <= 1e-8, f"max={_g17(worst_above)}")

    # barrier dominance
    grid = np.linspace(0.0, 2.0 * b, 80)
    for factor in (0.5, 2.0):
        gap = dominance_gap(problem, factor * b, grid, ev, sol)
        ok = (gap.min() >= -1e-9) and np.all(np.diff(gap) >= -1e-9)
        record("dominance", ok,
               f"b={_g17(factor * b)} min_gap={_g17(float(gap.min()))}")

    # exit identities against MC
    config = sim_config_from(tree, paths=args.paths, dt=args.dt,
                             tmax=args.tmax, seed=args.seed)
    x = 0.5 * b
    ests = estimate_exit_identities(spec, problem.q, b, x, config)
    targets = exit_identities_analytic(ev, b, x)
    names = ("exit_down", "exit_up", "exit_reflected")
    for name, est, target in zip(names, ests, targets):
        gap = abs(est.mean - target)
        tol = 3.0 * est.std_error + 1e-12
        record(name, gap <= tol,
               f"mc={_g17(est.mean)} analytic={_g17(target)} "
               f"se={_g17(est.std_error)}")

    # contraction ratio of the regime iteration
    if "chain" in tree:
        model = regime_model_from(tree)
        rsol = solve(model, **solver_options_from(tree))
        ratios = [r2 / r1 for r1, r2 in zip(rsol.rho_trace[:-1],
                                            rsol.rho_trace[1:]) if r1 > 0]
        worst = max(ratios[:-1], default=0.0)
        record("contraction", worst <= model.beta + 0.05,
               f"max_ratio={_g17(worst)} beta={_g17(model.beta)}")

    return 0 if all(ok for _, ok, _ in checks) else 4


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as e:
        print(f"config: {e}", file=sys.stderr)
        return 2
    try:
        tree = parse_config(text)
        dispatch = {"solve-aux": _solve_aux, "solve-regime": _solve_regime,
                    "simulate": _simulate, "verify": _run_verify,
                    "curve": _curve}
        return dispatch[args.command](tree, args, sys.stdout)
    except ConfigError as e:
        print(str(e), file=sys.stderr)
        return 2
    except ModelError as e:
        print(str(e), file=sys.stderr)
        return 2
    except NumericsError as e:
        print(str(e), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
