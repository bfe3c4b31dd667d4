"""Invariant suite run against a scenario by ``rwa-markov validate``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..asymptotics import (asymptotic_data, compute_L_explicit, gksl_decompose, renormalize)
from ..bath_kernel import eval_G_tilde
from ..errors import RwaMarkovError, StepTooCoarse
from ..exact_dynamics import (DEFAULT_HORIZON_CAP, check_step, divisible_map, evolve_density,
                              rescaled_propagator_series, solve_propagator,
                              solve_via_auxiliary_odes)
from ..matrix_calculus import dissipativity_margin, matrix_exp, spectral_decompose, spectral_norm
from .scenario import Scenario
from .sweep import run_sweep

SOLVER_TOLERANCE = 1e-6
CROSS_CHECK_HORIZON = 10.0
SLOPE_WINDOWS = {
    "propagator_error": (3.5, 4.5),
    "zeroth_order_error": (1.7, 2.3),
    "commutation_error": (3.5, np.inf),
    "correlation_renorm_error": (3.5, np.inf),
    "reverse_order_error": (3.5, np.inf),
}


@dataclass
class Check:
    name: str
    passed: bool
    margin: float = float("nan")
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: margin={self.margin:.3e} {self.detail}".rstrip()


@dataclass
class ValidationReport:
    scenario: str
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, margin=float("nan"), detail=""):
        self.checks.append(Check(name, bool(passed), float(margin), detail))

    def lines(self):
        return [c.line() for c in self.checks]


def _guard(report, name, fn):
    try:
        fn()
    except RwaMarkovError as exc:
        report.add(name, False, detail=f"{type(exc).__name__}: {exc}")


def validate(scenario: Scenario, *, horizon_cap: float = DEFAULT_HORIZON_CAP,
             sweeps: bool = True) -> ValidationReport:
    """Run every module's invariants on ``scenario``; failures are report content."""
    rep = ValidationReport(scenario.name)
    kernel = scenario.kernel
    rho0 = scenario.initial_state
    h = scenario.time_grid.step
    t_max = scenario.time_grid.t_max

    step_ok = {}
    for lam in scenario.lambdas:
        try:
            check_step(scenario.model_at(lam), kernel, h)
            step_ok[lam] = True
            rep.add(f"step_resolution[lambda={lam:g}]", True, 0.0)
        except StepTooCoarse as exc:
            step_ok[lam] = False
            rep.add(f"step_resolution[lambda={lam:g}]", False, detail=f"StepTooCoarse: {exc}")

    def spectral():
        D = spectral_decompose(scenario.model.H0)
        N = scenario.model.N
        comp = np.linalg.norm(D.projectors.sum(axis=0) - np.eye(N))
        ortho = max(np.linalg.norm(Pa @ Pb - (Pa if a == b else 0))
                    for a, Pa in enumerate(D.projectors) for b, Pb in enumerate(D.projectors))
        recon = np.linalg.norm(D.reconstruct() - scenario.model.H0)
        worst = max(comp, ortho, recon)
        rep.add("projector_algebra", worst < 1e-10, worst)
        re_g = min(eval_G_tilde(kernel, -1j * E).real for E in D.eigenvalues)
        return re_g

    re_g = None
    try:
        re_g = spectral()
    except RwaMarkovError as exc:
        rep.add("projector_algebra", False, detail=str(exc))

    for lam in scenario.lambdas:
        model = scenario.model_at(lam)
        tag = f"[lambda={lam:g}]"

        def per_lambda():
            data = asymptotic_data(model, kernel)
            dual = np.max(np.abs(data.L - compute_L_explicit(model, kernel)))
            rep.add("dual_formula_L" + tag, dual < 1e-10, dual)
            margin = dissipativity_margin(data.L)
            if re_g is not None and re_g > 0:
                rep.add("dissipativity" + tag, margin <= 1e-12, margin)
                g = gksl_decompose(data.L)
                rep.add("gksl_rates" + tag, g.gammas.min() >= -1e-10, g.gammas.min(),
                        f"gram_deviation={g.gram_deviation:.2e}")
            R = renormalize(rho0, data.r)
            tr = abs(R.trace() - 1)
            rep.add("renormalization_trace" + tag, tr < 1e-12, tr)

            if lam == 0:
                V = solve_via_auxiliary_odes(model, kernel, CROSS_CHECK_HORIZON, 1.0)
                asym = [matrix_exp(model.lam ** 2 * data.L, t) @ data.r for t in V.grid]
                dev = max(spectral_norm(a - v) for a, v in zip(asym, V.values))
                rep.add("lambda0_exact_vs_asymptotic" + tag, dev < SOLVER_TOLERANCE, dev)
                return

            if step_ok.get(lam):
                T = min(CROSS_CHECK_HORIZON, t_max / lam ** 2)
                quad = solve_propagator(model, kernel, T, h)
                aux = solve_via_auxiliary_odes(model, kernel, quad.horizon, h)
                dev = float(np.max(np.abs(quad.values - aux.values)))
                rep.add("solver_agreement" + tag, dev < SOLVER_TOLERANCE, dev)

            dt = t_max / (scenario.samples - 1)
            W = rescaled_propagator_series(model, kernel, t_max, dt, horizon_cap=horizon_cap)
            smax = max(spectral_norm(V) for V in W.values)
            rep.add("contraction" + tag, smax <= 1 + 1e-8, smax - 1)
            trace_err = herm = 0.0
            min_eig = np.inf
            for t in W.grid:
                rho = evolve_density(rho0, W, t)
                trace_err = max(trace_err, abs(rho.trace() - 1))
                herm = max(herm, rho.hermiticity_residual())
                min_eig = min(min_eig, rho.min_eigenvalue())
            rep.add("trace_preservation" + tag, trace_err < 1e-10, trace_err)
            rep.add("hermiticity" + tag, herm < 1e-10, herm)
            rep.add("positivity" + tag, min_eig > -1e-8, min_eig)
            k1, k2 = len(W.grid) // 3, 2 * len(W.grid) // 3
            t0, t1, t2 = W.grid[0], W.grid[k1], W.grid[k2]
            a = divisible_map(W, t1, t2, divisible_map(W, t0, t1, rho0)).to_matrix()
            b = divisible_map(W, t0, t2, rho0).to_matrix()
            comp = float(np.max(np.abs(a - b)))
            rep.add("divisible_composition" + tag, comp < 1e-8, comp)

        _guard(rep, "per_lambda" + tag, per_lambda)

    positive = sorted({lam for lam in scenario.lambdas if lam > 0})
    if sweeps and len(positive) >= 3:
        for quantity, (lo, hi) in SLOPE_WINDOWS.items():
            def sweep(quantity=quantity, lo=lo, hi=hi):
                res = run_sweep(scenario, quantity, horizon_cap=horizon_cap)
                ok = lo <= res.fitted_slope <= hi
                rep.add(f"slope[{quantity}]", ok, res.fitted_slope,
                        f"window=[{lo}, {hi}] errors={['%.3e' % e for e in res.errors]}")
            _guard(rep, f"slope[{quantity}]", sweep)
    return rep
