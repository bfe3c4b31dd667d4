"""Time series and correlation tables behind the CLI subcommands."""

from __future__ import annotations

from itertools import product

import numpy as np

from ..asymptotics import asymptotic_data, asymptotic_density, gksl_decompose
from ..matrix_calculus import dissipativity_margin
from ..correlations import (exact_three_time, exact_two_time, markov_three_time, markov_two_time,
                            renormalized_two_time)
from ..exact_dynamics import DEFAULT_HORIZON_CAP, evolve_density, rescaled_propagator_series
from .scenario import Scenario


def _block_columns(prefix, blocks, N):
    cols = {f"{prefix}_gg": [b.gg for b in blocks]}
    for i in range(N):
        cols[f"{prefix}_eg{i + 1}"] = [b.eg[i] for b in blocks]
    for i in range(N):
        for j in range(N):
            cols[f"{prefix}_ee{i + 1}{j + 1}"] = [b.ee[i, j] for b in blocks]
    return cols


def density_series(scenario: Scenario, *, horizon_cap=DEFAULT_HORIZON_CAP) -> dict:
    """Exact and asymptotic density blocks on ``samples`` rescaled times per lambda."""
    t_max = scenario.time_grid.t_max
    dt = t_max / (scenario.samples - 1)
    lam_col, t_col, exact, asym = [], [], [], []
    for lam in scenario.lambdas:
        if lam <= 0:
            continue
        model = scenario.model_at(lam)
        W = rescaled_propagator_series(model, scenario.kernel, t_max, dt, horizon_cap=horizon_cap)
        data = asymptotic_data(model, scenario.kernel)
        for t in W.grid:
            lam_col.append(lam)
            t_col.append(t)
            exact.append(evolve_density(scenario.initial_state, W, t))
            asym.append(asymptotic_density(scenario.initial_state, data, t))
    N = scenario.model.N
    cols = {"lambda": lam_col, "t": t_col}
    cols.update(_block_columns("exact", exact, N))
    cols.update(_block_columns("asym", asym, N))
    return cols


def _grid_points(scenario):
    t_max = scenario.time_grid.t_max
    dt = t_max / (scenario.samples - 1)
    return dt, dt * np.arange(scenario.samples)


def pair_correlations(scenario: Scenario, *, horizon_cap=DEFAULT_HORIZON_CAP) -> dict:
    """Markov, exact and renormalized two-time correlations for every dipole pair."""
    dt, grid = _grid_points(scenario)
    t_min = scenario.time_grid.t_min
    pairs = [(a, b) for a, b in product(range(len(grid)), repeat=2)
             if b > a and grid[a] > 0 and grid[b] - grid[a] >= t_min - 1e-12]
    cols = {k: [] for k in ("lambda", "h1", "h2", "t1", "t2")}
    vals = {k: [] for k in ("markov", "exact", "renormalized")}
    for lam in scenario.lambdas:
        if lam <= 0:
            continue
        model = scenario.model_at(lam)
        W = rescaled_propagator_series(model, scenario.kernel, grid[-1], dt, horizon_cap=horizon_cap)
        r = asymptotic_data(model, scenario.kernel).r
        for (a, b), (i, h1), (j, h2) in product(pairs, enumerate(scenario.dipoles),
                                                enumerate(scenario.dipoles)):
            t1, t2 = grid[a], grid[b]
            for k, v in zip(("lambda", "h1", "h2", "t1", "t2"), (lam, i, j, t1, t2)):
                cols[k].append(v)
            vals["markov"].append(markov_two_time(W, h1, h2, t1, t2))
            vals["exact"].append(exact_two_time(W, h1, h2, t1, t2))
            vals["renormalized"].append(renormalized_two_time(W, r, h1, h2, t1, t2))
    cols.update({k: np.array(v, dtype=complex) for k, v in vals.items()})
    return cols


def quad_correlations(scenario: Scenario, *, horizon_cap=DEFAULT_HORIZON_CAP) -> dict:
    """Markov and exact three-time correlations over a (tau, T, t) lattice.

    The four dipoles are ``dipoles[k % len(dipoles)]`` for k = 0..3.
    """
    t_max = scenario.time_grid.t_max
    dt = t_max / 4
    lattice = (0.0, dt, 2 * dt)
    d = scenario.dipoles
    h1, h2, h3, h4 = (d[k % len(d)] for k in range(4))
    cols = {k: [] for k in ("lambda", "tau", "T", "t")}
    mk, ex = [], []
    for lam in scenario.lambdas:
        if lam <= 0:
            continue
        model = scenario.model_at(lam)
        W = rescaled_propagator_series(model, scenario.kernel, 3 * max(lattice) or dt, dt,
                                       horizon_cap=horizon_cap)
        for tau, T, t in product(lattice, repeat=3):
            for k, v in zip(("lambda", "tau", "T", "t"), (lam, tau, T, t)):
                cols[k].append(v)
            mk.append(markov_three_time(W, h1, h2, h3, h4, tau, T, t))
            ex.append(exact_three_time(W, h1, h2, h3, h4, tau, T, t))
    cols["markov"] = np.array(mk, dtype=complex)
    cols["exact"] = np.array(ex, dtype=complex)
    return cols


def gksl_summary(scenario: Scenario, lam: float) -> dict:
    data = asymptotic_data(scenario.model_at(lam), scenario.kernel)
    g = gksl_decompose(data.L)
    return {"lambda": lam, "epsilon": g.epsilons, "gamma": g.gammas,
            "eigvecs": [m.eigvec for m in g.modes], "gram_deviation": g.gram_deviation,
            "dissipativity_margin": dissipativity_margin(data.L)}
