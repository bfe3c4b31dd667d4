"""Two- and three-time dipole correlation functions.

All formulas reduce the field theory to the propagator V(t).  The dipole
operator ``sigma_h`` maps the ground state to ``h`` in the excited block.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularRenormalization
from .exact_dynamics import Propagator, checked_inverse_apply, propagator_ratio


def _vec(h, N):
    h = np.asarray(h, dtype=complex).reshape(-1)
    if h.size != N or not np.all(np.isfinite(h)):
        raise ValueError(f"dipole vector must have {N} finite entries")
    return h


def markov_two_time(prop: Propagator, h1, h2, t1: float, t2: float) -> complex:
    """Quantum-regression value ``h2^+ V(t2) V(t1)^-1 h1``."""
    if not 0 <= t1 <= t2:
        raise ValueError(f"need 0 <= t1 <= t2, got {t1}, {t2}")
    h1, h2 = _vec(h1, prop.N), _vec(h2, prop.N)
    return complex(h2.conj() @ propagator_ratio(prop, t1, t2) @ h1)


def exact_two_time(prop: Propagator, h1, h2, t1: float, t2: float) -> complex:
    """``h2^+ V(t2 - t1) h1``."""
    if not 0 <= t1 <= t2:
        raise ValueError(f"need 0 <= t1 <= t2, got {t1}, {t2}")
    h1, h2 = _vec(h1, prop.N), _vec(h2, prop.N)
    return complex(h2.conj() @ prop.at(t2 - t1) @ h1)


def renormalized_two_time(prop: Propagator, r, h1, h2, t1: float, t2: float) -> complex:
    """Exact correlation with ``h1`` replaced by ``r^-1 h1``."""
    h1 = _vec(h1, prop.N)
    h1r = checked_inverse_apply(np.asarray(r, dtype=complex), h1,
                                error=SingularRenormalization, what="r")
    return exact_two_time(prop, h1r, h2, t1, t2)


def _times_ok(*ts):
    if any(t < 0 for t in ts):
        raise ValueError(f"times must be nonnegative, got {ts}")


def markov_three_time(prop: Propagator, h1, h2, h3, h4, tau: float, T: float, t: float) -> complex:
    """``h3^+ V(tau+T) h1 * h2^+ (V^+(tau))^-1 V^+(t+T+tau) h4``."""
    _times_ok(tau, T, t)
    N = prop.N
    h1, h2, h3, h4 = (_vec(h, N) for h in (h1, h2, h3, h4))
    first = h3.conj() @ prop.at(tau + T) @ h1
    Vtau_d = prop.at(tau).conj().T
    tail = checked_inverse_apply(Vtau_d, prop.at(t + T + tau).conj().T @ h4, what="V(tau)")
    return complex(first * (h2.conj() @ tail))


def exact_three_time(prop: Propagator, h1, h2, h3, h4, tau: float, T: float, t: float) -> complex:
    """``h3^+ V(tau+T) h1 * h2^+ V^+(t+T) h4``."""
    _times_ok(tau, T, t)
    N = prop.N
    h1, h2, h3, h4 = (_vec(h, N) for h in (h1, h2, h3, h4))
    first = h3.conj() @ prop.at(tau + T) @ h1
    if first == 0:
        return 0j
    return complex(first * (h2.conj() @ prop.at(t + T).conj().T @ h4))
