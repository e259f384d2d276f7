"""Selberg upper-bound sieve weights on G and their multiplicative Fourier data.

With level D and z = D^(1/2):

    G(z)  = sum_{n <= z} mu(n)^2 / phi(n)
    rho_d = d mu(d) / G(z) * sum_{n <= z, d | n} mu(n)^2 / phi(n)      (d <= z)
    lam_d = sum_{[d1, d2] = d} rho_d1 rho_d2                           (d < D)
    w(n)  = sum_{d | n} lam_d = (sum_{d | n} rho_d)^2

for 1 <= n <= q-1.  rho and G(z) are exact rationals for moderate z so the
upper bound w >= f_z can be checked without rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .charfourier import GroupFunction, indicator_fz, transform
from .errors import DegenerateInputError
from .modgroup import DirichletCharacter, Modulus, as_modulus, unit_group_structure

__all__ = [
    "SieveWeights",
    "FourierScan",
    "CharSumScan",
    "EXACT_Z_LIMIT",
    "mobius_phi_table",
    "build_weights",
    "weight_values",
    "weight_function",
    "upper_bound_violations",
    "well_approx_ratio",
    "fourier_scan",
    "sieve_fourier_scan",
    "divisor_sum_coefficient",
    "char_sum_scan",
    "max_partial_sums",
    "burgess_exponent_ladder",
    "selberg_report",
]

EXACT_Z_LIMIT = 10**4
# exact lambda_d needs all pairs of squarefree d1, d2 <= z
_EXACT_LAMBDA_Z_LIMIT = 300


def mobius_phi_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    """mu(k) and phi(k) for 0 <= k <= n by a linear sieve (index 0 unused)."""
    mu = np.zeros(n + 1, dtype=np.int64)
    phi = np.zeros(n + 1, dtype=np.int64)
    if n >= 1:
        mu[1] = phi[1] = 1
    is_comp = bytearray(n + 1)
    primes: list[int] = []
    for i in range(2, n + 1):
        if not is_comp[i]:
            primes.append(i)
            mu[i] = -1
            phi[i] = i - 1
        for p in primes:
            ip = i * p
            if ip > n:
                break
            is_comp[ip] = 1
            if i % p == 0:
                mu[ip] = 0
                phi[ip] = phi[i] * p
                break
            mu[ip] = -mu[i]
            phi[ip] = phi[i] * (p - 1)
    return mu, phi


@dataclass(frozen=True, eq=False)
class SieveWeights:
    """Selberg weights of level D for modulus q.

    ``rho[d]`` for 0 <= d <= floor(z) and ``lam[d]`` for 0 <= d < D (index 0
    unused).  ``rho_exact`` / ``lam_exact`` hold the rational values when they
    were computed exactly.
    """

    modulus: Modulus
    D: float
    z: float
    Gz: float
    rho: np.ndarray = field(repr=False)
    lam: np.ndarray = field(repr=False)
    Gz_exact: Fraction | None = field(default=None, repr=False)
    rho_exact: dict[int, Fraction] | None = field(default=None, repr=False)
    lam_exact: dict[int, Fraction] | None = field(default=None, repr=False)

    @property
    def max_lambda(self) -> float:
        return float(np.abs(self.lam).max())


def build_weights(m: Modulus | int, D: float, *, exact: bool | None = None) -> SieveWeights:
    """Construct the Selberg weights of level ``D`` (4 <= D <= q)."""
    mod = as_modulus(m)
    if D < 4:
        raise ValueError(f"level D={D} too small: need D >= 4 so that z >= 2")
    if D > mod.q:
        raise ValueError(f"level D={D} exceeds q={mod.q}")
    z = math.sqrt(D)
    Z = math.isqrt(math.floor(D))  # floor(sqrt(D)) without float round-off
    if exact is None:
        exact = Z <= EXACT_Z_LIMIT
    mu, phi = mobius_phi_table(Z)
    sqfree = [d for d in range(1, Z + 1) if mu[d] != 0]

    if exact:
        terms = {n: Fraction(1, int(phi[n])) for n in sqfree}
        tail = {d: sum((terms[n] for n in range(d, Z + 1, d) if n in terms), Fraction(0)) for d in sqfree}
        Gx = tail[1]
        rho_exact = {d: d * int(mu[d]) * tail[d] / Gx for d in sqfree}
        rho = np.zeros(Z + 1)
        for d, r in rho_exact.items():
            rho[d] = float(r)
        Gz = float(Gx)
    else:
        inv_phi = np.zeros(Z + 1)
        inv_phi[sqfree] = 1.0 / phi[sqfree]
        tail_f = np.array([math.fsum(inv_phi[d::d]) if d else 0.0 for d in range(Z + 1)])
        Gz = tail_f[1]
        rho = np.arange(Z + 1) * mu * tail_f / Gz
        rho_exact = None
        Gx = None

    lam_len = math.ceil(D)
    lam = np.zeros(lam_len)
    lam_exact = None
    if exact and Z <= _EXACT_LAMBDA_Z_LIMIT:
        lam_exact = {}
        for d1 in sqfree:
            r1 = rho_exact[d1]
            for d2 in sqfree:
                l = d1 * d2 // math.gcd(d1, d2)
                lam_exact[l] = lam_exact.get(l, Fraction(0)) + r1 * rho_exact[d2]
        for d, v in lam_exact.items():
            lam[d] = float(v)
    else:
        ds = np.array(sqfree, dtype=np.int64)
        r = rho[ds]
        for d1, r1 in zip(ds, r):
            l = d1 * ds // np.gcd(d1, ds)
            np.add.at(lam, l, r1 * r)
    return SieveWeights(mod, float(D), z, Gz, rho, lam, Gx, rho_exact, lam_exact)


def weight_values(wts: SieveWeights, via: str = "lambda") -> np.ndarray:
    """w(n) for n = 0..q-1 (entry 0 is unused and set to 0).

    ``via="lambda"`` sums lam_d over divisors; ``via="rho"`` squares the
    divisor sum of rho_d.
    """
    q = wts.modulus.q
    out = np.zeros(q)
    if via == "lambda":
        for d in np.flatnonzero(wts.lam):
            out[d::d] += wts.lam[d]
    elif via == "rho":
        for d in np.flatnonzero(wts.rho):
            out[d::d] += wts.rho[d]
        out **= 2
    else:
        raise ValueError(f"unknown route {via!r}")
    out[0] = 0.0
    return out


def weight_function(wts: SieveWeights) -> GroupFunction:
    """The sieve majorant w as a function on G."""
    return GroupFunction.from_residues(wts.modulus.q, weight_values(wts))


def upper_bound_violations(wts: SieveWeights, z: float | None = None) -> list[int]:
    """Units n with w(n) < f_z(n).

    f_z is 1 only at primes p >= z, where the rho divisor sum is rho_1 = 1 plus
    rho_p when p <= floor(z); that sum is evaluated exactly when the rational
    weights are available.  Elsewhere w(n) >= 0 = f_z(n) holds because w is
    a square.
    """
    z = wts.z if z is None else z
    f = indicator_fz(wts.modulus, z)
    bad = []
    for p in sorted(f.support()):
        if p < len(wts.rho):
            s = (1 + wts.rho_exact[p]) if wts.rho_exact is not None else 1.0 + wts.rho[p]
        else:
            s = 1
        if s * s < 1:
            bad.append(p)
    return bad


def well_approx_ratio(wts: SieveWeights, z: float | None = None) -> float:
    """w_hat(chi_0) / f_z_hat(chi_0); the target is 2 log q / log D."""
    z = wts.z if z is None else z
    f = indicator_fz(wts.modulus, z)
    fz = math.fsum(f.values.real)
    if fz == 0:
        raise DegenerateInputError(f"no primes in [{z}, {wts.modulus.q}) coprime to q")
    w = weight_function(wts)
    return math.fsum(w.values.real) / fz


@dataclass(frozen=True)
class FourierScan:
    max_nontrivial: float
    argmax: DirichletCharacter | None
    trivial: float
    ratio: float
    cube_free: bool


def fourier_scan(g: GroupFunction) -> FourierScan:
    """Largest |g_hat(chi)| over nontrivial chi, next to g_hat(chi_0)."""
    s = transform(g)
    mags = np.abs(s.coefficients)
    triv = float(s.coefficients[0].real)
    if len(mags) > 1:
        i = int(np.argmax(mags[1:])) + 1
        mx = float(mags[i])
        arg = g.group.character_at(i)
    else:
        mx, arg = 0.0, None
    return FourierScan(mx, arg, triv, mx / triv if triv else math.inf, g.modulus.cube_free)


def sieve_fourier_scan(wts: SieveWeights) -> FourierScan:
    return fourier_scan(weight_function(wts))


def divisor_sum_coefficient(wts: SieveWeights, chi: DirichletCharacter) -> complex:
    """w_hat(chi) through sum_{d<D} lam_d sum_{n<q, d|n} conj(chi(n)).

    Writing n = d*j, the inner sum is conj(chi(d)) times the conjugated partial
    character sum up to (q-1)//d.
    """
    q = wts.modulus.q
    vals = np.conj(chi.values())
    partial = np.cumsum(vals)  # partial[N] = sum_{n<=N}
    ds = np.flatnonzero(wts.lam)
    terms = wts.lam[ds] * vals[ds % q] * partial[(q - 1) // ds]
    return complex(terms.sum())


@dataclass(frozen=True)
class CharSumScan:
    max_partial: float
    argmax_N: int
    pv_bound: float
    burgess_envelope: dict[int, float]


def char_sum_scan(m: Modulus | int, chi: DirichletCharacter) -> CharSumScan:
    """max over 1 <= N <= q of |sum_{n<=N} chi(n)|, with Polya-Vinogradov and Burgess envelopes."""
    mod = as_modulus(m)
    if chi.q != mod.q:
        raise ValueError("character has a different modulus")
    if chi.is_trivial:
        raise ValueError("the trivial character has no cancellation to scan")
    q = mod.q
    cs = np.cumsum(chi.values())  # cs[N] = sum_{n<=N} for N < q; chi(q) = 0
    seq = np.abs(np.append(cs[1:], cs[-1]))  # N = 1..q
    i = int(np.argmax(seq))
    N = i + 1
    mx = float(seq[i])
    env = {r: N ** (1 - 1 / r) * q ** ((r + 1) / (4 * r * r)) for r in (1, 2, 3, 4)}
    return CharSumScan(mx, N, math.sqrt(q) * math.log(q), env)


def max_partial_sums(m: Modulus | int, chunk: int = 256) -> np.ndarray:
    """max_N |sum_{n<=N} chi(n)| for every character in index order (batched)."""
    G = unit_group_structure(m)
    exps = G.dlog_table  # row i = exponent vector of character i
    out = np.empty(G.order)
    for lo in range(0, G.order, chunk):
        vals = G.character_matrix(exps[lo : lo + chunk], on_residues=True)
        out[lo : lo + chunk] = np.abs(np.cumsum(vals, axis=1)).max(axis=1)
    return out


def burgess_exponent_ladder(r: int) -> Fraction:
    """alpha_0 = 1 and alpha_r = (r^2 + 3r + 1) / (4 r (r + 1)) for r >= 1."""
    r = int(r)
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r == 0:
        return Fraction(1)
    return Fraction(r * r + 3 * r + 1, 4 * r * (r + 1))


def selberg_report(m: Modulus | int, D: float) -> dict:
    """Summary record for one (q, D): the fields of the JSON report."""
    mod = as_modulus(m)
    wts = build_weights(mod, D)
    scan = sieve_fourier_scan(wts)
    try:
        ratio = well_approx_ratio(wts)
    except DegenerateInputError:
        ratio = math.nan
    return {
        "q": mod.q,
        "D": wts.D,
        "z": wts.z,
        "Gz": wts.Gz,
        "max_lambda": wts.max_lambda,
        "w_upper_bound_ok": not upper_bound_violations(wts),
        "well_approx_ratio": ratio,
        "target_2logq_over_logD": 2 * math.log(mod.q) / math.log(D),
        "ratio_vs_2logq_over_logD": ratio / (2 * math.log(mod.q) / math.log(D)),
        "max_nontrivial_fourier": scan.max_nontrivial,
        "trivial_fourier": scan.trivial,
        "cube_free": mod.cube_free,
    }
