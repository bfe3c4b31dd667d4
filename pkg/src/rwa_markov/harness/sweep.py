"""Lambda sweeps and log-log slope fits."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from ..asymptotics import (AsymptoticData, asymptotic_data, markov_density, renormalize)
from ..correlations import markov_two_time, renormalized_two_time
from ..errors import DegenerateFit, ValidationError
from ..exact_dynamics import DEFAULT_HORIZON_CAP, evolve_density, rescaled_propagator_series
from ..matrix_calculus import matrix_exp, spectral_norm
from .scenario import Scenario

QUANTITIES = ("propagator_error", "zeroth_order_error", "commutation_error",
              "correlation_renorm_error", "reverse_order_error")
ERROR_FLOOR = 1e-13


@dataclass(frozen=True)
class ScalingReport:
    quantity: str
    lambdas: tuple
    errors: tuple
    fitted_slope: float
    fit_residual: float


def fit_loglog(x, y):
    """Least-squares slope of ``log y`` against ``log x`` and the RMS residual."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid ** 2)))


def common_step(times) -> float:
    """Largest step (to 1e-6 resolution) that puts every time on one grid."""
    fracs = [Fraction(t).limit_denominator(10 ** 6) for t in times]
    num = 0
    den = 1
    for f in fracs:
        den = den * f.denominator // np.gcd(den, f.denominator)
    for f in fracs:
        num = int(np.gcd(num, f.numerator * (den // f.denominator)))
    return float(Fraction(num, den))


def _correlation_pairs(times, t_min):
    return [(t1, t2) for t1, t2 in product(times, times)
            if t2 > t1 and t2 - t1 >= t_min - 1e-12]


def _sup(values):
    return max(values) if values else float("nan")


def sweep_error(scenario: Scenario, quantity: str, lam: float, times, *,
                horizon_cap: float = DEFAULT_HORIZON_CAP) -> float:
    """The named error at one lambda, supremum over ``times``."""
    model = scenario.model_at(lam)
    kernel = scenario.kernel
    data = asymptotic_data(model, kernel)
    L, r = data.L, data.r

    if quantity == "commutation_error":
        return _sup([spectral_norm(matrix_exp(L, t) @ r - r @ matrix_exp(L, t)) for t in times])

    if quantity == "correlation_renorm_error":
        pairs = _correlation_pairs(times, scenario.time_grid.t_min)
        if not pairs:
            raise ValidationError("sweep.eval_times", "no (t1, t2) pair separated by at least t_min")
        needed = sorted({t for p in pairs for t in p} | {t2 - t1 for t1, t2 in pairs})
        W = rescaled_propagator_series(model, kernel, max(needed), common_step(needed),
                                       horizon_cap=horizon_cap)
        errs = []
        for (t1, t2), h1, h2 in product(pairs, scenario.dipoles, scenario.dipoles):
            errs.append(abs(renormalized_two_time(W, r, h1, h2, t1, t2)
                            - markov_two_time(W, h1, h2, t1, t2)))
        return _sup(errs)

    W = rescaled_propagator_series(model, kernel, max(times), common_step(times),
                                   horizon_cap=horizon_cap)
    if quantity == "propagator_error":
        return _sup([spectral_norm(W.at(t) - data.semigroup(t)) for t in times])
    if quantity == "zeroth_order_error":
        d0 = asymptotic_data(model, kernel, order=0)
        return _sup([spectral_norm(W.at(t) - d0.semigroup(t)) for t in times])
    if quantity == "reverse_order_error":
        rho0 = scenario.initial_state
        errs = []
        for t in times:
            exact = evolve_density(rho0, W, t).to_matrix()
            reverse = renormalize(markov_density(rho0, L, t), r).to_matrix()
            errs.append(spectral_norm(exact - reverse))
        return _sup(errs)
    raise ValueError(f"unknown quantity {quantity!r}; choose from {QUANTITIES}")


def run_sweep(scenario: Scenario, quantity: str, *, eval_times=None,
              horizon_cap: float = DEFAULT_HORIZON_CAP, workers: int = 1) -> ScalingReport:
    """Compute ``quantity`` for every scenario lambda and fit the log-log slope.

    Raises
    ------
    ValidationError
        Fewer than three positive lambdas, or evaluation times before t_min.
    DegenerateFit
        Some error fell below the floating point floor.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}; choose from {QUANTITIES}")
    lams = tuple(sorted({lam for lam in scenario.lambdas}, reverse=True))
    if len(lams) < 3 or any(lam <= 0 for lam in lams):
        raise ValidationError("lambdas", "a sweep needs at least three distinct positive lambdas")
    times = tuple(sorted(eval_times if eval_times is not None else scenario.eval_times))
    t_min = scenario.time_grid.t_min
    if any(t < t_min - 1e-12 for t in times):
        raise ValidationError("sweep.eval_times", f"evaluation times must be >= t_min = {t_min}")

    def one(lam):
        return sweep_error(scenario, quantity, lam, times, horizon_cap=horizon_cap)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            errors = list(pool.map(one, lams))
    else:
        errors = [one(lam) for lam in lams]
    if any(not np.isfinite(e) or e < ERROR_FLOOR for e in errors):
        raise DegenerateFit(f"{quantity}: errors {errors} reach the floor {ERROR_FLOOR:g}")
    slope, resid = fit_loglog(lams, errors)
    return ScalingReport(quantity, lams, tuple(float(e) for e in errors), slope, resid)


def order_zero_data(scenario: Scenario, lam: float) -> AsymptoticData:
    return asymptotic_data(scenario.model_at(lam), scenario.kernel, order=0)
