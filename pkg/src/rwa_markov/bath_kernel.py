"""Multi-exponential bath correlation functions.

The reservoir enters the dynamics only through

    G(t) = sum_j A_j exp(-(kappa_j + i Omega_j) t),   t >= 0,

whose Laplace transform is a sum of simple poles, so the transform and its
first two derivatives are available in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import PoleTooClose, ValidationError

#: absolute distance to a pole below which the transform is refused
POLE_TOLERANCE = 1e-12
#: relative separation below which the divided difference uses G~'
CLUSTER_TOLERANCE = 1e-8


@dataclass(frozen=True)
class KernelTerm:
    amplitude: complex
    decay_rate: float
    frequency: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.decay_rate) or self.decay_rate <= 0:
            raise ValidationError("kappa", f"decay rate must be > 0, got {self.decay_rate!r}")
        if not np.isfinite(self.frequency):
            raise ValidationError("omega", f"frequency must be finite, got {self.frequency!r}")
        if not np.isfinite(complex(self.amplitude)):
            raise ValidationError("amplitude", f"amplitude must be finite, got {self.amplitude!r}")
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        object.__setattr__(self, "decay_rate", float(self.decay_rate))
        object.__setattr__(self, "frequency", float(self.frequency))


class BathKernel:
    """Immutable sum of :class:`KernelTerm` exponentials."""

    __slots__ = ("terms", "_amp", "_pole")

    def __init__(self, terms: Iterable[KernelTerm]):
        terms = tuple(terms)
        if not terms:
            raise ValidationError("kernel", "at least one term is required")
        self.terms = terms
        self._amp = np.array([t.amplitude for t in terms], dtype=complex)
        # G~(p) has its poles at p = -(kappa + i Omega)
        self._pole = np.array([t.decay_rate + 1j * t.frequency for t in terms], dtype=complex)
        self._amp.setflags(write=False)
        self._pole.setflags(write=False)

    @classmethod
    def single(cls, amplitude=1.0, decay_rate=1.0, frequency=0.0) -> "BathKernel":
        return cls([KernelTerm(amplitude, decay_rate, frequency)])

    @classmethod
    def from_records(cls, records: Sequence[dict]) -> "BathKernel":
        """Build from ``{a_re, a_im, kappa, omega}`` mappings (scenario format)."""
        terms = []
        for rec in records:
            terms.append(KernelTerm(complex(rec.get("a_re", 0.0), rec.get("a_im", 0.0)),
                                    rec["kappa"], rec.get("omega", 0.0)))
        return cls(terms)

    def to_records(self) -> list[dict]:
        return [{"a_re": t.amplitude.real, "a_im": t.amplitude.imag,
                 "kappa": t.decay_rate, "omega": t.frequency} for t in self.terms]

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amp

    @property
    def rates(self) -> np.ndarray:
        """Complex exponents ``kappa_j + i Omega_j``."""
        return self._pole

    @property
    def max_decay(self) -> float:
        return float(np.max(self._pole.real))

    @property
    def max_frequency(self) -> float:
        return float(np.max(np.abs(self._pole.imag)))

    def scaled(self, factor: complex) -> "BathKernel":
        return BathKernel(KernelTerm(t.amplitude * factor, t.decay_rate, t.frequency)
                          for t in self.terms)

    def __repr__(self):
        body = ", ".join(f"({t.amplitude:g}, {t.decay_rate:g}, {t.frequency:g})" for t in self.terms)
        return f"BathKernel([{body}])"

    def __eq__(self, other):
        return isinstance(other, BathKernel) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)


def eval_G(kernel: BathKernel, t):
    """G(t) for scalar or array ``t >= 0``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("G(t) is only defined for t >= 0")
    out = np.exp(-np.multiply.outer(t, kernel.rates)) @ kernel.amplitudes
    return complex(out) if out.ndim == 0 else out


def eval_G_tilde(kernel: BathKernel, p, order: int = 0):
    """Laplace transform of G and its derivatives in ``p``.

    Parameters
    ----------
    kernel : BathKernel
    p : complex or array of complex
    order : {0, 1, 2}
        Derivative order.

    Raises
    ------
    PoleTooClose
        If ``p`` lies within :data:`POLE_TOLERANCE` of ``-(kappa_j + i Omega_j)``.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    p = np.asarray(p, dtype=complex)
    shifted = np.add.outer(p, kernel.rates)
    if np.any(np.abs(shifted) < POLE_TOLERANCE):
        raise PoleTooClose(f"p={p} is within {POLE_TOLERANCE:g} of a pole of G~")
    # d^n/dp^n A/(p+z) = (-1)^n n! A/(p+z)^(n+1)
    coef = (1.0, -1.0, 2.0)[order]
    out = (coef / shifted ** (order + 1)) @ kernel.amplitudes
    return complex(out) if out.ndim == 0 else out


def _close(p1, p2):
    return abs(p1 - p2) < CLUSTER_TOLERANCE * max(1.0, abs(p1), abs(p2))


def divided_difference_G_tilde(kernel: BathKernel, p1: complex, p2: complex) -> complex:
    """First divided difference of G~, with G~'(p1) on (near) coincidence."""
    p1, p2 = complex(p1), complex(p2)
    if _close(p1, p2):
        return eval_G_tilde(kernel, p1, 1)
    return (eval_G_tilde(kernel, p1) - eval_G_tilde(kernel, p2)) / (p1 - p2)
