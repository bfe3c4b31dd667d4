"""Scenario files.

A scenario is a single TOML document::

    name = "reference_n2"
    lambdas = [0.2, 0.1, 0.05]
    dipoles = [[1.0, 0.0], { re = [0.0, 1.0], im = [0.0, 0.0] }]
    outputs = ["simulate", "sweep"]

    [model]
    H0 = [[1.0, 0.0], [0.0, 2.0]]
    H2 = { re = [[0.0, 1.0], [1.0, 0.0]] }

    [[kernel]]
    a_re = 1.0
    a_im = 0.0
    kappa = 1.0
    omega = 0.0

    [time_grid]
    t_min = 0.5      # rescaled; start of the post-initial-layer window
    t_max = 2.0      # rescaled horizon
    step = 0.001     # physical step of the quadrature solver

    [initial_state]
    psi = { re = [0.0, 1.0, 0.0] }    # or rho = {...} as an (N+1)x(N+1) matrix

Complex arrays are given either as plain (real) nested lists or as a table
with ``re`` and optional ``im`` parts.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..bath_kernel import BathKernel
from ..errors import ParseError, StepTooCoarse, ValidationError
from ..exact_dynamics import DensityBlocks, SystemModel, check_step

DEFAULT_EVAL_TIMES = (0.5, 1.0, 2.0)
KNOWN_OUTPUTS = {"simulate", "sweep", "correlate", "gksl", "validate"}
_TOP_KEYS = {"name", "lambdas", "dipoles", "outputs", "model", "kernel", "time_grid",
             "initial_state", "sweep", "samples"}
_KERNEL_KEYS = {"a_re", "a_im", "kappa", "omega"}


@dataclass(frozen=True)
class TimeGrid:
    t_min: float = 0.5
    t_max: float = 2.0
    step: float = 1e-3


@dataclass(frozen=True)
class Scenario:
    name: str
    model: SystemModel
    kernel: BathKernel
    lambdas: tuple
    time_grid: TimeGrid
    initial_state: DensityBlocks
    dipoles: tuple
    outputs: tuple = ()
    eval_times: tuple = DEFAULT_EVAL_TIMES
    samples: int = 41
    source: str | None = field(default=None, compare=False)

    def model_at(self, lam: float) -> SystemModel:
        return self.model.with_lambda(lam)

    def with_overrides(self, step=None, t_min=None) -> "Scenario":
        grid = self.time_grid
        if step is not None:
            grid = replace(grid, step=float(step))
        if t_min is not None:
            grid = replace(grid, t_min=float(t_min))
        return replace(self, time_grid=grid)


def _complex_array(value, name):
    try:
        if isinstance(value, dict):
            unknown = set(value) - {"re", "im"}
            if unknown:
                raise ValidationError(name, f"unknown keys {sorted(unknown)}")
            re = np.asarray(value["re"], dtype=float)
            im = np.asarray(value.get("im", np.zeros_like(re)), dtype=float)
            if re.shape != im.shape:
                raise ValidationError(name, "re and im parts differ in shape")
            return re + 1j * im
        return np.asarray(value, dtype=complex)
    except (TypeError, ValueError, KeyError) as exc:
        raise ValidationError(name, f"not a numeric array ({exc})") from None


def _float(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(name, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(name, "must be finite")
    return value


def _kernel(records):
    if not isinstance(records, list) or not records:
        raise ValidationError("kernel", "expected a nonempty array of tables [[kernel]]")
    for i, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise ValidationError(f"kernel[{i}]", "expected a table")
        unknown = set(rec) - _KERNEL_KEYS
        if unknown:
            raise ValidationError(
                f"kernel[{i}]",
                f"unsupported keys {sorted(unknown)}; only multi-exponential terms "
                "{a_re, a_im, kappa, omega} are accepted (tabulated kernels are rejected)")
        if "kappa" not in rec:
            raise ValidationError("kappa", f"kernel[{i}] is missing kappa")
        kappa = _float(rec["kappa"], "kappa")
        if kappa <= 0:
            raise ValidationError("kappa", f"kernel[{i}] has kappa = {kappa}, must be > 0")
        for key in ("a_re", "a_im", "omega"):
            if key in rec:
                _float(rec[key], key)
    return BathKernel.from_records(records)


def _initial_state(table, N):
    if not isinstance(table, dict) or len(table) != 1 or not set(table) <= {"psi", "rho"}:
        raise ValidationError("initial_state", "give exactly one of psi or rho")
    if "psi" in table:
        psi = _complex_array(table["psi"], "initial_state.psi")
        if psi.shape != (N + 1,):
            raise ValidationError("initial_state.psi", f"expected {N + 1} amplitudes")
        if np.linalg.norm(psi) == 0:
            raise ValidationError("initial_state.psi", "zero vector")
        state = DensityBlocks.pure(psi)
    else:
        rho = _complex_array(table["rho"], "initial_state.rho")
        if rho.shape != (N + 1, N + 1):
            raise ValidationError("initial_state.rho", f"expected shape {(N + 1, N + 1)}")
        state = DensityBlocks.from_matrix(rho)
    state.check_physical()
    return state


def scenario_from_dict(doc: dict, *, check_steps: bool = True, source=None) -> Scenario:
    """Validate a parsed document; see the module docstring for the layout."""
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ValidationError(sorted(unknown)[0], "unknown top-level key")
    for key in ("model", "kernel", "lambdas", "initial_state"):
        if key not in doc:
            raise ValidationError(key, "missing")
    name = str(doc.get("name", "scenario"))

    model_doc = doc["model"]
    if not isinstance(model_doc, dict) or "H0" not in model_doc:
        raise ValidationError("model.H0", "missing")
    H0 = _complex_array(model_doc["H0"], "model.H0")
    H0 = np.atleast_2d(H0)
    H2 = np.atleast_2d(_complex_array(model_doc.get("H2", np.zeros(H0.shape).tolist()), "model.H2"))
    if "N" in model_doc and int(model_doc["N"]) != H0.shape[0]:
        raise ValidationError("model.N", f"N = {model_doc['N']} but H0 is {H0.shape[0]}x{H0.shape[0]}")
    model = SystemModel(H0, H2, 0.0)
    kernel = _kernel(doc["kernel"])

    lams = doc["lambdas"]
    if not isinstance(lams, list) or not lams:
        raise ValidationError("lambdas", "expected a nonempty array")
    lams = tuple(_float(x, "lambdas") for x in lams)
    if any(lam < 0 or lam > 1 for lam in lams):
        raise ValidationError("lambdas", "every lambda must lie in [0, 1]")

    tg = doc.get("time_grid", {})
    unknown = set(tg) - {"t_min", "t_max", "step"}
    if unknown:
        raise ValidationError(f"time_grid.{sorted(unknown)[0]}", "unknown key")
    grid = TimeGrid(**{k: _float(v, f"time_grid.{k}") for k, v in tg.items()})
    if grid.t_min < 0:
        raise ValidationError("time_grid.t_min", "must be >= 0")
    if grid.t_max <= 0 or grid.t_max < grid.t_min:
        raise ValidationError("time_grid.t_max", "must be positive and >= t_min")
    if grid.step <= 0:
        raise ValidationError("time_grid.step", "must be positive")

    state = _initial_state(doc["initial_state"], model.N)

    dipoles = []
    for i, d in enumerate(doc.get("dipoles", [])):
        h = _complex_array(d, f"dipoles[{i}]")
        if h.shape != (model.N,) or not np.all(np.isfinite(h)):
            raise ValidationError(f"dipoles[{i}]", f"expected {model.N} finite entries")
        dipoles.append(h)
    if not dipoles:
        dipoles = [np.ones(model.N, dtype=complex)]

    outputs = tuple(doc.get("outputs", ()))
    bad = set(outputs) - KNOWN_OUTPUTS
    if bad:
        raise ValidationError("outputs", f"unknown products {sorted(bad)}")

    sweep = doc.get("sweep", {})
    eval_times = tuple(_float(t, "sweep.eval_times") for t in sweep.get("eval_times", DEFAULT_EVAL_TIMES))
    if any(t <= 0 for t in eval_times):
        raise ValidationError("sweep.eval_times", "evaluation times must be positive")
    samples = int(doc.get("samples", 41))
    if samples < 2:
        raise ValidationError("samples", "need at least two output samples")

    scenario = Scenario(name, model, kernel, lams, grid, state, tuple(dipoles), outputs,
                        eval_times, samples, source)
    if check_steps:
        for lam in lams:
            try:
                check_step(scenario.model_at(lam), kernel, grid.step)
            except StepTooCoarse as exc:
                raise ValidationError("time_grid.step", str(exc)) from None
    return scenario


def load_scenario(path, *, check_steps: bool = True) -> Scenario:
    """Parse and validate a scenario file.

    Raises
    ------
    ParseError
        The file is missing or is not valid TOML.
    ValidationError
        An invariant fails; ``exc.field`` names the field.
    """
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return scenario_from_dict(doc, check_steps=check_steps, source=str(path))


def random_scenario(seed: int, N: int = 3, degenerate: bool = False,
                    lambdas=(0.2, 0.1, 0.05)) -> Scenario:
    """Seeded random scenario for tests and ``--seed`` runs."""
    rng = np.random.default_rng(seed)
    if degenerate and N > 1:
        levels = rng.choice([0.0, 1.0, 2.5], size=N)
        levels[1] = levels[0]
    else:
        levels = rng.uniform(-1.5, 1.5, size=N)
    X = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    Q, _ = np.linalg.qr(X)
    H0 = Q @ np.diag(levels) @ Q.conj().T
    Y = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    H2 = 0.5 * (Y + Y.conj().T)
    n_terms = int(rng.integers(1, 3))
    records = [{"a_re": float(rng.uniform(0.3, 1.5)), "a_im": 0.0,
                "kappa": float(rng.uniform(0.5, 2.0)), "omega": float(rng.uniform(-1, 1))}
               for _ in range(n_terms)]
    psi = rng.normal(size=N + 1) + 1j * rng.normal(size=N + 1)
    return Scenario(f"random-{seed}", SystemModel(H0, H2, 0.0), BathKernel.from_records(records),
                    tuple(lambdas), TimeGrid(0.5, 2.0, 1e-3), DensityBlocks.pure(psi),
                    (np.eye(N)[0].astype(complex), np.ones(N, dtype=complex)))
