"""Exact reduced dynamics in the zero/one-excitation sector.

Everything is driven by the N x N propagator V(t) solving

    V'(t) = -lambda^2 int_0^t G(t-s) exp(i H_S (t-s)) V(s) ds,   V(0) = I,

with H_S = H0 + lambda^2 H2.  Two engines share no code: a trapezoidal
Volterra solver (``solve_propagator``, O(n^2)) and an exact linear embedding
with one auxiliary memory matrix per kernel term
(``solve_via_auxiliary_odes``, O(n)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .bath_kernel import BathKernel, eval_G
from .errors import (GridMiss, HorizonTooLarge, NonFinite, SingularPropagator,
                     StepTooCoarse, ValidationError)
from .matrix_calculus import as_hermitian, matrix_exp, spectral_decompose, spectral_norm

#: resolution demanded of the quadrature step (h * rate <= STEP_RESOLUTION)
STEP_RESOLUTION = 0.1
#: largest physical horizon lambda^-2 t accepted by ``rescaled_propagator``
DEFAULT_HORIZON_CAP = 1e5
INVERSION_CONDITION_LIMIT = 1e12
_GRID_SLACK = 1e-9


@dataclass(frozen=True)
class SystemModel:
    H0: np.ndarray
    H2: np.ndarray
    lam: float = 0.0

    def __post_init__(self):
        H0 = as_hermitian(self.H0, "H0")
        H2 = as_hermitian(self.H2, "H2")
        if H0.shape != H2.shape:
            raise ValidationError("H2", f"shape {H2.shape} does not match H0 {H0.shape}")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValidationError("lambda", f"must be a nonnegative real, got {self.lam!r}")
        H0.setflags(write=False)
        H2.setflags(write=False)
        object.__setattr__(self, "H0", H0)
        object.__setattr__(self, "H2", H2)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def N(self) -> int:
        return self.H0.shape[0]

    @property
    def H_S(self) -> np.ndarray:
        return self.H0 + self.lam ** 2 * self.H2

    def with_lambda(self, lam: float) -> "SystemModel":
        return SystemModel(self.H0, self.H2, lam)


@dataclass(frozen=True)
class Propagator:
    """V sampled on the uniform grid ``t_k = k * step``."""

    step: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 3 or vals.shape[1] != vals.shape[2]:
            raise ValueError(f"values must have shape (n, N, N), got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def grid(self) -> np.ndarray:
        return self.step * np.arange(len(self.values))

    @property
    def horizon(self) -> float:
        return self.step * (len(self.values) - 1)

    @property
    def N(self) -> int:
        return self.values.shape[1]

    def index(self, t: float) -> int:
        if self.step == 0.0:
            if abs(t) <= _GRID_SLACK:
                return 0
            raise GridMiss(f"t={t} is not on a single-point grid")
        k = int(round(t / self.step))
        if k < 0 or k >= len(self.values) or abs(t - k * self.step) > _GRID_SLACK * max(1.0, abs(t)):
            raise GridMiss(f"t={t} is not a grid point (step {self.step}, horizon {self.horizon})")
        return k

    def at(self, t: float) -> np.ndarray:
        return self.values[self.index(t)]

    @classmethod
    def from_generator(cls, L, step: float, n_steps: int) -> "Propagator":
        """Semigroup surrogate ``t -> exp(L t)`` on a grid."""
        L = np.asarray(L, dtype=complex)
        E = matrix_exp(L, step)
        vals = np.empty((n_steps + 1,) + L.shape, dtype=complex)
        vals[0] = np.eye(L.shape[0])
        for k in range(n_steps):
            vals[k + 1] = E @ vals[k]
        return cls(step, vals)


def check_step(model: SystemModel, kernel: BathKernel, h: float) -> None:
    """Raise :class:`StepTooCoarse` if ``h`` under-resolves decay or oscillation."""
    if not h > 0:
        raise StepTooCoarse(f"step must be positive, got {h}")
    slack = 1.0 + 1e-12
    if h * kernel.max_decay > STEP_RESOLUTION * slack:
        raise StepTooCoarse(f"h*max(kappa) = {h * kernel.max_decay:g} > {STEP_RESOLUTION}")
    hnorm = h * spectral_norm(model.H_S)
    if hnorm > STEP_RESOLUTION * slack:
        raise StepTooCoarse(f"h*||H_S|| = {hnorm:g} > {STEP_RESOLUTION}")
    if h * kernel.max_frequency > STEP_RESOLUTION * slack:
        raise StepTooCoarse(f"h*max|Omega| = {h * kernel.max_frequency:g} > {STEP_RESOLUTION}")


def _n_steps(T, h):
    n = int(round(T / h))
    if abs(n * h - T) > _GRID_SLACK * max(1.0, T):
        n = int(np.ceil(T / h))
    return max(n, 1)


def memory_kernel_samples(kernel: BathKernel, H, prefactor: float, h: float, n: int,
                          time_scale: float = 1.0) -> np.ndarray:
    """``prefactor * G(time_scale * tau) exp(i H tau)`` at ``tau = k h``."""
    D = spectral_decompose(H)
    tau = h * np.arange(n + 1)
    U = D.unitary
    w = np.concatenate([np.full(m, E) for E, m in zip(D.eigenvalues, D.multiplicities)])
    phases = np.exp(1j * np.outer(tau, w))
    rot = np.einsum("ia,ka,ja->kij", U, phases, U.conj())
    g = eval_G(kernel, time_scale * tau)
    return prefactor * np.asarray(g)[:, None, None] * rot


def solve_propagator(model: SystemModel, kernel: BathKernel, T: float, h: float,
                     backend: str | None = None) -> Propagator:
    """Second-order trapezoidal Volterra solve of the propagator on ``[0, T]``.

    Raises
    ------
    StepTooCoarse
        If ``h`` fails the resolution preconditions.
    NonFinite
        If the iteration blows up.
    """
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    check_step(model, kernel, h)
    n = _n_steps(T, h)
    K = memory_kernel_samples(kernel, model.H_S, model.lam ** 2, h, n)
    volterra, _ = _backend.get_kernels(backend)
    V = volterra(K, h)
    if not np.all(np.isfinite(V)):
        raise NonFinite("Volterra iteration produced NaN/Inf")
    return Propagator(h, V)


def solve_rescaled_equation(model: SystemModel, kernel: BathKernel, t_max: float, h: float,
                            backend: str | None = None) -> Propagator:
    """Solve the rescaled-time equation for W directly.

    The kernel is ``lambda^-2 G(tau / lambda^2) exp(i (H0 / lambda^2 + H2) tau)``
    and ``h`` is a rescaled-time step.
    """
    lam2 = model.lam ** 2
    if lam2 == 0:
        raise ValueError("the rescaled equation needs lambda > 0")
    check_step(model, kernel, h / lam2)
    n = _n_steps(t_max, h)
    K = memory_kernel_samples(kernel, model.H0 / lam2 + model.H2, 1.0 / lam2, h, n,
                              time_scale=1.0 / lam2)
    volterra, _ = _backend.get_kernels(backend)
    W = volterra(K, h)
    if not np.all(np.isfinite(W)):
        raise NonFinite("Volterra iteration produced NaN/Inf")
    return Propagator(h, W)


def auxiliary_generator(model: SystemModel, kernel: BathKernel) -> np.ndarray:
    """Block generator of the closed system for ``(V, u_1, ..., u_m)``.

    ``u_j(t) = int_0^t A_j exp(-(kappa_j + i Omega_j)(t-s)) exp(i H_S (t-s)) V(s) ds``
    obeys ``u_j' = A_j V + (i H_S - kappa_j - i Omega_j) u_j`` and
    ``V' = -lambda^2 sum_j u_j``.
    """
    N = model.N
    m = len(kernel.terms)
    ident = np.eye(N, dtype=complex)
    iH = 1j * model.H_S
    gen = np.zeros(((m + 1) * N, (m + 1) * N), dtype=complex)
    for j, (a, z) in enumerate(zip(kernel.amplitudes, kernel.rates)):
        rows = slice((j + 1) * N, (j + 2) * N)
        gen[:N, rows] = -model.lam ** 2 * ident
        gen[rows, :N] = a * ident
        gen[rows, rows] = iH - z * ident
    return gen


def _initial_aux_state(N, m):
    X = np.zeros(((m + 1) * N, N), dtype=complex)
    X[:N] = np.eye(N)
    return X


def solve_via_auxiliary_odes(model: SystemModel, kernel: BathKernel, T: float,
                             step: float | None = None) -> Propagator:
    """Propagator from the exponential of the enlarged block generator.

    With ``step=None`` the grid is just ``{0, T}``.
    """
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    step = T if step is None else step
    n = _n_steps(T, step)
    gen = auxiliary_generator(model, kernel)
    E = matrix_exp(gen, step)
    N = model.N
    X = _initial_aux_state(N, len(kernel.terms))
    V = np.empty((n + 1, N, N), dtype=complex)
    V[0] = np.eye(N)
    for k in range(1, n + 1):
        X = E @ X
        V[k] = X[:N]
    if not np.all(np.isfinite(V)):
        raise NonFinite("auxiliary propagation produced NaN/Inf")
    return Propagator(step, V)


def _physical_horizon(model, t, horizon_cap):
    if model.lam <= 0:
        raise ValueError("rescaled time needs lambda > 0")
    T = t / model.lam ** 2
    if T > horizon_cap:
        raise HorizonTooLarge(f"lambda^-2 t = {T:g} exceeds the cap {horizon_cap:g}")
    return T


def rescaled_propagator(model: SystemModel, kernel: BathKernel, t: float, *,
                        engine: str = "auxiliary", step: float | None = None,
                        horizon_cap: float = DEFAULT_HORIZON_CAP) -> np.ndarray:
    """``W_lambda(t) = V_lambda(t / lambda^2)``.

    ``engine="quadrature"`` integrates the unscaled equation with physical
    step ``step``; the default auxiliary engine is exact for this kernel family.
    """
    if t == 0:
        return np.eye(model.N, dtype=complex)
    T = _physical_horizon(model, t, horizon_cap)
    if engine == "auxiliary":
        gen = auxiliary_generator(model, kernel)
        X = matrix_exp(gen, T) @ _initial_aux_state(model.N, len(kernel.terms))
        return X[:model.N]
    if engine == "quadrature":
        if step is None:
            raise ValueError("the quadrature engine needs a step")
        prop = solve_propagator(model, kernel, T, step)
        return prop.at(T)
    raise ValueError(f"unknown engine {engine!r}")


def rescaled_propagator_series(model: SystemModel, kernel: BathKernel, t_max: float,
                               step: float, *, horizon_cap: float = DEFAULT_HORIZON_CAP) -> Propagator:
    """W on the rescaled grid ``k * step`` (auxiliary engine)."""
    T = _physical_horizon(model, t_max, horizon_cap)
    phys = solve_via_auxiliary_odes(model, kernel, T, step / model.lam ** 2)
    return Propagator(step, phys.values)


@dataclass(frozen=True)
class DensityBlocks:
    """(N+1) x (N+1) density matrix split into ground/excited blocks."""

    gg: float
    ge: np.ndarray      # row, length N
    eg: np.ndarray      # column, length N
    ee: np.ndarray      # N x N

    def __post_init__(self):
        object.__setattr__(self, "gg", float(np.real(self.gg)))
        for name in ("ge", "eg"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex).reshape(-1))
        ee = np.atleast_2d(np.asarray(self.ee, dtype=complex))
        object.__setattr__(self, "ee", ee)
        if not (self.ge.size == self.eg.size == ee.shape[0] == ee.shape[1]):
            raise ValidationError("initial_state", "block dimensions are inconsistent")

    @property
    def N(self) -> int:
        return self.ee.shape[0]

    @classmethod
    def from_matrix(cls, rho) -> "DensityBlocks":
        rho = np.asarray(rho, dtype=complex)
        return cls(rho[0, 0].real, rho[0, 1:], rho[1:, 0], rho[1:, 1:])

    @classmethod
    def ground(cls, N: int) -> "DensityBlocks":
        return cls(1.0, np.zeros(N), np.zeros(N), np.zeros((N, N)))

    @classmethod
    def pure(cls, psi) -> "DensityBlocks":
        """Pure state ``psi = (psi_0, psi_1, ..., psi_N)``, normalized here."""
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls.from_matrix(np.outer(psi, psi.conj()))

    def to_matrix(self) -> np.ndarray:
        N = self.N
        rho = np.empty((N + 1, N + 1), dtype=complex)
        rho[0, 0] = self.gg
        rho[0, 1:] = self.ge
        rho[1:, 0] = self.eg
        rho[1:, 1:] = self.ee
        return rho

    def trace(self) -> complex:
        return self.gg + np.trace(self.ee)

    def hermiticity_residual(self) -> float:
        rho = self.to_matrix()
        return float(np.max(np.abs(rho - rho.conj().T)))

    def min_eigenvalue(self) -> float:
        from .matrix_calculus import hermitian_eigenvalues
        rho = self.to_matrix()
        return float(hermitian_eigenvalues(0.5 * (rho + rho.conj().T))[0])

    def check_physical(self, tol: float = 1e-10) -> None:
        """Raise :class:`ValidationError` unless this is a density matrix."""
        if abs(self.trace() - 1) > tol:
            raise ValidationError("initial_state", f"trace is {self.trace():.12g}, expected 1")
        if np.max(np.abs(self.ge - self.eg.conj())) > tol or \
                np.max(np.abs(self.ee - self.ee.conj().T)) > tol:
            raise ValidationError("initial_state", "state is not Hermitian")
        if self.min_eigenvalue() < -tol:
            raise ValidationError("initial_state", "state is not positive semidefinite")


def apply_block_map(rho: DensityBlocks, M) -> DensityBlocks:
    """Block action shared by exact evolution, divisible maps and renormalization."""
    M = np.asarray(M, dtype=complex)
    Md = M.conj().T
    ee = M @ rho.ee @ Md
    gg = rho.gg + np.trace(rho.ee - ee).real
    return DensityBlocks(gg, rho.ge @ Md, M @ rho.eg, ee)


def evolve_density(rho0: DensityBlocks, prop: Propagator, t: float) -> DensityBlocks:
    return apply_block_map(rho0, prop.at(t))


def checked_inverse_apply(V, X, error=SingularPropagator, what="V(t1)"):
    """``V^-1 X`` with a condition-number guard."""
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > INVERSION_CONDITION_LIMIT:
        raise error(f"{what} has condition number {cond:.3g}")
    return np.linalg.solve(V, X)


def propagator_ratio(prop: Propagator, t1: float, t2: float) -> np.ndarray:
    """``V(t2) V(t1)^-1``."""
    if t2 < t1:
        raise ValueError(f"need t2 >= t1, got t1={t1}, t2={t2}")
    V1 = prop.at(t1)
    V2 = prop.at(t2)
    # (V2 V1^-1)^T = V1^-T V2^T
    return checked_inverse_apply(V1.T, V2.T).T


def divisible_map(prop: Propagator, t1: float, t2: float, rho: DensityBlocks) -> DensityBlocks:
    """Intermediate map taking the state at ``t1`` to the state at ``t2``."""
    return apply_block_map(rho, propagator_ratio(prop, t1, t2))
