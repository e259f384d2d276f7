"""Lower bounds for |supp(g)| from Fourier data, and the E_2 density pipeline.

For 0 <= g <= h on G with h not identically zero and any eps > 0,

    |supp g| >= min((1 - eps)|G| g_hat(chi_0) / h_hat(chi_0),
                    |G| eps^2 g_hat(chi_0)^2 / sum_{chi != chi_0} |h_hat(chi)|^2),

the second term being unbounded when its denominator vanishes.  The pipeline
applies this with g = f*f, h = f*w where f is the prime indicator f_z and w the
Selberg majorant of level D = q^(3/4 - eps).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .charfourier import GroupFunction, indicator_fz, transform
from .errors import DegenerateInputError
from .modgroup import Modulus, as_modulus
from .primesets import ek_set, primes_up_to, residue_product
from .selberg import build_weights, weight_function

__all__ = [
    "SupportBoundInput",
    "SupportBound",
    "support_lower_bound",
    "support_bound_from_functions",
    "Theorem1Result",
    "theorem1_pipeline",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SupportBoundInput:
    """Spectral statistics consumed by :func:`support_lower_bound`."""

    g_mass: float
    h_mass: float
    tail_energy: float
    group_size: int
    epsilon: float

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        for name in ("g_mass", "h_mass", "tail_energy"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.group_size < 1:
            raise ValueError("group_size must be positive")
        if self.h_mass == 0 and self.tail_energy == 0:
            raise DegenerateInputError("h is identically zero")


@dataclass(frozen=True)
class SupportBound:
    """Both branches of the bound.  ``second is None`` means the branch is unbounded."""

    first: float
    second: float | None

    @property
    def value(self) -> float:
        return self.first if self.second is None else min(self.first, self.second)

    @property
    def active(self) -> str:
        return "first" if self.second is None or self.first <= self.second else "second"


def support_lower_bound(inp: SupportBoundInput) -> SupportBound:
    G, eps = inp.group_size, inp.epsilon
    if inp.g_mass == 0:
        first = 0.0
    elif inp.h_mass == 0:
        raise DegenerateInputError("g has positive mass but h_hat(chi_0) = 0")
    else:
        first = (1 - eps) * G * inp.g_mass / inp.h_mass
    second = None if inp.tail_energy == 0 else G * eps**2 * inp.g_mass**2 / inp.tail_energy
    return SupportBound(first, second)


def _stats(g: GroupFunction, h: GroupFunction) -> tuple[float, float, float]:
    gh = transform(g).coefficients
    hh = transform(h).coefficients
    return float(gh[0].real), float(hh[0].real), math.fsum(np.abs(hh[1:]) ** 2)


def support_bound_from_functions(g: GroupFunction, h: GroupFunction, epsilon: float) -> SupportBound:
    """Convenience wrapper computing the statistics from g and h (0 <= g <= h is not checked)."""
    if g.group.q != h.group.q:
        raise ValueError("modulus mismatch")
    gm, hm, tail = _stats(g, h)
    # rounding can leave a tiny negative trivial coefficient for tiny functions
    return support_lower_bound(SupportBoundInput(max(gm, 0.0), max(hm, 0.0), tail, g.group.order, epsilon))


@dataclass(frozen=True)
class Theorem1Result:
    q: int
    phi: int
    epsilon: float
    D: float
    z: float
    cube_free: bool
    bound: SupportBound
    lower_bound_ratio: float
    actual_ratio: float
    e2_ratio: float
    first_term_ratio: float
    spectral_margin: float | None

    @property
    def sound(self) -> bool:
        return self.lower_bound_ratio <= self.actual_ratio

    @property
    def distance_to_three_eighths(self) -> float:
        return self.first_term_ratio - 3 / 8


def theorem1_pipeline(m: Modulus | int, epsilon: float = 0.05) -> Theorem1Result:
    """Run the support bound with g = f*f, h = f*w at level D = q^(3/4 - eps).

    ``actual_ratio`` is |supp(f*f)|/phi(q), computed exactly as a product set
    of the primes in [z, q); ``e2_ratio`` is |E_2(q)|/phi(q).
    ``spectral_margin`` is eps^2 g_hat(chi_0)^2 |G| / tail - q (None when
    the tail vanishes).
    """
    mod = as_modulus(m)
    if not 0 < epsilon < 1 / 8:
        raise ValueError("epsilon must lie in (0, 1/8)")
    if not mod.cube_free:
        log.warning("q=%d is not cube-free; the sieve Fourier bound is not expected to apply", mod.q)
    q = mod.q
    D = float(q) ** (0.75 - epsilon)
    wts = build_weights(mod, D)
    f = indicator_fz(mod, wts.z)
    if not f.values.real.any():
        raise DegenerateInputError(f"no primes in [{wts.z:.6g}, {q}) coprime to q")
    w = weight_function(wts)

    fh = transform(f).coefficients
    wh = transform(w).coefficients
    f0, w0 = float(fh[0].real), float(wh[0].real)
    g_mass = f0 * f0
    h_mass = f0 * w0
    tail = math.fsum(np.abs(fh[1:] * wh[1:]) ** 2)
    bound = support_lower_bound(SupportBoundInput(g_mass, h_mass, tail, mod.phi, epsilon))

    ps = primes_up_to(q - 1)
    ps = ps[(ps >= wts.z) & (q % ps != 0)]
    supp = int(residue_product(ps % q, ps % q, q).sum())
    e2 = len(ek_set(mod, 2, q))
    margin = None if tail == 0 else epsilon**2 * g_mass**2 * mod.phi / tail - q
    return Theorem1Result(
        q=q,
        phi=mod.phi,
        epsilon=epsilon,
        D=D,
        z=wts.z,
        cube_free=mod.cube_free,
        bound=bound,
        lower_bound_ratio=bound.value / mod.phi,
        actual_ratio=supp / mod.phi,
        e2_ratio=e2 / mod.phi,
        first_term_ratio=f0 / w0,
        spectral_margin=margin,
    )
