"""Weighted prime sums and the real-part certificates built on them.

The weight is f(t) = alpha - t on [0, alpha] and 0 beyond, applied to
log p / log q.  Prime sums are normalized by 2 / (alpha^2 log q) so that the
trivial character gives 1 + o(1) for every alpha.  Natural logarithms
throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Literal

import numpy as np

from .modgroup import DirichletCharacter, Modulus, as_modulus, trivial_character, unit_group_structure
from .primesets import DEFAULT_SIEVE_CEILING, primes_up_to
from .errors import ResourceLimitError

__all__ = [
    "WeightFunction",
    "PrimeMassResult",
    "weight_eval",
    "laplace_F",
    "heathbrown_sum",
    "coset_masses",
    "Thm2Certificate",
    "thm2_case_certificate",
    "thm2_grid_check",
    "CosineCertificate",
    "cosine_expression",
    "thm3_cosine_certificate",
    "MCombination",
    "thm3_M_combination",
    "least_prime_with_char_value",
    "quadratic_case_check",
    "COSINE_COEFFS",
    "COSINE_INTERVAL",
]


@dataclass(frozen=True)
class WeightFunction:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def __call__(self, t):
        return weight_eval(self, t)


def weight_eval(w: WeightFunction, t):
    """alpha - t on [0, alpha], 0 beyond; scalar or array input."""
    arr = np.asarray(t, dtype=float)
    if (arr < 0).any():
        raise ValueError("t must be nonnegative")
    out = np.where(arr <= w.alpha, w.alpha - arr, 0.0)
    return float(out) if out.ndim == 0 else out


def _laplace_series(alpha: float, z: np.ndarray, terms: int = 40) -> np.ndarray:
    # F(z) = sum_k (-z)^k / k! * alpha^(k+2) / ((k+1)(k+2))
    out = np.zeros_like(z, dtype=complex)
    c = np.full_like(z, alpha * alpha, dtype=complex)  # (-z)^k alpha^(k+2) / k!
    for k in range(terms):
        out += c / ((k + 1) * (k + 2))
        c = c * (-z) * alpha / (k + 1)
    return out


def laplace_F(alpha: float, z):
    """int_0^inf f(t) e^{-zt} dt = (e^{-alpha z} - (1 - alpha z)) / z^2, alpha^2/2 at z = 0.

    A power series is used for |alpha z| < 1/2 where the closed form cancels.
    """
    zz = np.asarray(z, dtype=complex)
    small = np.abs(alpha * zz) < 0.5
    out = np.empty_like(zz)
    if small.any():
        out[small] = _laplace_series(alpha, zz[small])
    big = ~small
    if big.any():
        zb = zz[big]
        out[big] = (np.exp(-alpha * zb) - (1 - alpha * zb)) / (zb * zb)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PrimeMassResult:
    """Weighted prime sum for one character.

    ``raw`` sums chi(p) (log p / p) f(log p / log q) over primes p <= q^alpha
    with gcd(p, q) = 1; ``normalized`` is 2 / (alpha^2 log q) * Re raw.
    ``prime_power_raw`` is the same sum over p^k, k >= 2, which is excluded
    from ``raw``.
    """

    chi: DirichletCharacter = field(repr=False)
    alpha: float
    raw: complex
    normalized: float
    prime_power_raw: complex
    n_primes: int


def _prime_data(q: int, alpha: float, ceiling: int):
    L = math.log(q)
    x = math.exp(alpha * L)
    if x > ceiling:
        raise ResourceLimitError(f"q^alpha = {x:.6g} exceeds the sieve ceiling {ceiling}")
    ps = primes_up_to(x, ceiling)
    ps = ps[q % ps != 0]
    logp = np.log(ps.astype(float))
    t = logp / L
    keep = t <= alpha
    ps, logp, t = ps[keep], logp[keep], t[keep]
    weights = logp / ps * (alpha - t)
    return ps, logp, weights, L


def _fsum_complex(z: np.ndarray) -> complex:
    return complex(math.fsum(z.real), math.fsum(z.imag))


def heathbrown_sum(
    m: Modulus | int,
    chi: DirichletCharacter | None = None,
    alpha: float = 6 / 5,
    ceiling: int = DEFAULT_SIEVE_CEILING,
) -> PrimeMassResult:
    """Weighted sum of chi(p) log p / p over p <= q^alpha (trivial character by default)."""
    mod = as_modulus(m)
    q = mod.q
    if q < 2:
        raise ValueError("q must be at least 2")
    if not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")
    chi = trivial_character(mod) if chi is None else chi
    if chi.q != q:
        raise ValueError("character has a different modulus")
    ps, logp, weights, L = _prime_data(q, alpha, ceiling)
    G = chi.group
    if chi.is_trivial:
        vals = np.ones(len(ps), dtype=complex)
    else:
        k = G.phase_numerators(np.array([chi.exponents]))[0][G.index[ps % q]]
        vals = G.roots_of_unity()[k]
    raw = _fsum_complex(vals * weights)

    # prime powers p^j <= q^alpha, j >= 2
    pp_terms = []
    xmax = math.exp(alpha * L)
    for p, lp in zip(ps[ps * ps <= xmax], logp[ps * ps <= xmax]):
        p = int(p)
        pk, j = p * p, 2
        while pk <= xmax:
            t = j * lp / L
            if t <= alpha:
                pp_terms.append(chi(pk % q) * lp / pk * (alpha - t))
            pk *= p
            j += 1
    pp_raw = _fsum_complex(np.array(pp_terms, dtype=complex)) if pp_terms else 0j
    norm = 2.0 / (alpha * alpha * L) * raw.real
    return PrimeMassResult(chi, alpha, raw, norm, pp_raw, len(ps))


def coset_masses(
    m: Modulus | int,
    alpha: float,
    classify: Callable[[int], Hashable] | np.ndarray,
    ceiling: int = DEFAULT_SIEVE_CEILING,
) -> dict[Hashable, float]:
    """Normalized prime mass 2/(alpha^2 log q) sum (log p/p) f(log p/log q) split by label.

    ``classify`` maps an invertible residue to a label; it may also be an
    array indexed by residue.
    """
    mod = as_modulus(m)
    q = mod.q
    ps, _, weights, L = _prime_data(q, alpha, ceiling)
    res = ps % q
    if isinstance(classify, np.ndarray):
        labels = classify[res].tolist()
    else:
        labels = [classify(int(r)) for r in res]
    scale = 2.0 / (alpha * alpha * L)
    buckets: dict[Hashable, list[float]] = {}
    for lab, w in zip(labels, weights.tolist()):
        buckets.setdefault(lab, []).append(w)
    return {lab: scale * math.fsum(v) for lab, v in sorted(buckets.items(), key=lambda kv: repr(kv[0]))}


# -- the C_8 case analysis -------------------------------------------------

SQRT2 = math.sqrt(2.0)


_COS8 = (1.0, SQRT2 / 2, 0.0, -SQRT2 / 2, -1.0, -SQRT2 / 2, 0.0, SQRT2 / 2)


def _re_e8(k: int) -> float:
    """Re e(k/8), exact at the zeros so that boundary cases compare cleanly."""
    return _COS8[k % 8]


@dataclass(frozen=True)
class Thm2Certificate:
    case: Literal["i0", "i26", "i4", "coset_degenerate"]
    contradiction_found: bool
    inequalities: list[dict]
    combined_bound: float | None
    violated: list[str]


def _case_characters(i: int, j: int) -> tuple[str, list[int]]:
    jbar = pow(j, -1, 8)
    if i == 0:
        return "i0", [jbar]
    if i in (2, 6):
        return "i26", [jbar, 4]
    return "i4", [2, jbar]


def thm2_case_certificate(i: int, j: int, M: float, N: float, tol: float = 0.05) -> Thm2Certificate:
    """Test (M, N) against the real-part inequalities for A_0 = {x^i, x^j} in C_8.

    Each chosen power chi = chi_1^t of the character chi_1(x) = e(1/8) gives
    Re(chi(x^i) M + chi(x^j) N) <= 1/4.  ``tol`` is the slack allowed in
    M + N = 1; the real-part inequalities are taken with right side 1/4.  The
    certificate records each inequality, the bound on M + N that the case's
    pair of inequalities implies, and whether (M, N) contradicts the system.
    """
    i %= 8
    j %= 8
    if i % 2 or not j % 2:
        return Thm2Certificate("coset_degenerate", False, [], None, [])
    case, ts = _case_characters(i, j)
    ineqs = []
    violated = []
    for t in ts:
        ci, cj = _re_e8(t * i), _re_e8(t * j)
        lhs = ci * M + cj * N
        ok = lhs <= 0.25
        ineqs.append({"chi_power": t, "coef_M": ci, "coef_N": cj, "lhs": lhs, "rhs": 0.25, "holds": ok})
        if not ok:
            violated.append(f"Re(chi_1^{t}) combination {lhs:.6g} > 1/4")
    s = M + N
    sum_ok = (1 - tol) <= s <= 1 + tol and M >= 0 and N >= 0
    ineqs.append({"name": "M+N", "lhs": s, "lo": 1 - tol, "hi": 1 + tol, "holds": sum_ok})
    if case == "i0":
        bound = None  # M + N/sqrt2 >= (M+N)/sqrt2 >= (1-tol)/sqrt2
    else:
        bound = (math.sqrt(8) + 1) / 4
    if sum_ok and bound is not None and s > bound:
        violated.append(f"M+N = {s:.6g} > (sqrt8+1)/4")
    contradiction = sum_ok and bool(violated)
    return Thm2Certificate(case, contradiction, ineqs, bound, violated)


def thm2_grid_check(i: int, j: int, tol: float = 0.05, n: int = 1000) -> dict:
    """Evaluate the certificate on an n x n grid of M, N in [0, 1+tol] restricted to |M+N-1| <= tol.

    Vectorized over the grid; the result reports how many admissible points
    escape a contradiction and one such point.
    """
    Ms = np.linspace(0.0, 1.0 + tol, n)
    M, N = np.meshgrid(Ms, Ms, indexing="ij")
    S = M + N
    admissible = (S >= 1 - tol) & (S <= 1 + tol)
    i %= 8
    j %= 8
    if i % 2 or not j % 2:
        raise ValueError("case is coset-degenerate")
    _, ts = _case_characters(i, j)
    feasible = admissible.copy()
    for t in ts:
        feasible &= _re_e8(t * i) * M + _re_e8(t * j) * N <= 0.25
    idx = np.argwhere(feasible)
    witness = None
    if len(idx):
        a, b = idx[0]
        witness = (float(M[a, b]), float(N[a, b]))
    return {
        "i": i,
        "j": j,
        "tol": tol,
        "grid": n,
        "admissible_points": int(admissible.sum()),
        "feasible_points": int(feasible.sum()),
        "contradiction_everywhere": not len(idx),
        "witness": witness,
        "margin": 1 - (math.sqrt(8) + 1) / 4,
    }


# -- the cosine certificate --------------------------------------------------

COSINE_COEFFS = ((2, 2.7), (3, 1.8), (6, 0.29))
COSINE_INTERVAL = (10 / 29, 19 / 29)


def cosine_expression(z):
    """2.7 cos(2*2pi z) + 1.8 cos(3*2pi z) + 0.29 cos(6*2pi z) - 1."""
    z = np.asarray(z, dtype=float)
    out = sum(c * np.cos(t * 2 * np.pi * z) for t, c in COSINE_COEFFS) - 1.0
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CosineCertificate:
    interval: tuple[float, float]
    grid_step: float
    min_value: float
    argmin: float
    positive_on_interval: bool
    value_at_half: float
    local_max: tuple[float, float]
    first_zero_above: float


def thm3_cosine_certificate(grid_step: float = 1e-5) -> CosineCertificate:
    """Minimum of the cosine expression on [10/29, 19/29] over a uniform grid.

    The expression is symmetric about 1/2; ``argmin`` is reported on the
    upper half.  Also returns the interior local maximum and the first zero
    above 1/2.
    """
    from scipy.optimize import brentq, minimize_scalar

    if not 0 < grid_step <= 1e-4:
        raise ValueError("grid_step must lie in (0, 1e-4]")
    lo, hi = COSINE_INTERVAL
    n = int(math.floor((hi - lo) / grid_step)) + 1
    zs = lo + grid_step * np.arange(n)
    zs = np.append(zs[zs < hi], hi)
    vals = cosine_expression(zs)
    i = int(np.argmin(vals))
    zmin = float(zs[i])
    argmin = max(zmin, 1.0 - zmin)
    # the local maximum and the first zero beyond it, on the upper half
    res = minimize_scalar(lambda t: -cosine_expression(t), bounds=(argmin, 0.7), method="bounded",
                          options={"xatol": 1e-12})
    zmax = float(res.x)
    zero = brentq(cosine_expression, zmax, 0.75, xtol=1e-14)
    return CosineCertificate(
        interval=COSINE_INTERVAL,
        grid_step=grid_step,
        min_value=float(vals[i]),
        argmin=argmin,
        positive_on_interval=bool((vals > 0).all()),
        value_at_half=cosine_expression(0.5),
        local_max=(zmax, cosine_expression(zmax)),
        first_zero_above=float(zero),
    )


@dataclass(frozen=True)
class MCombination:
    value: float
    terms: dict[str, float]
    coefficient_sum: float
    coefficient_check: bool
    hypothetical_bound: float


def thm3_M_combination(m: Modulus | int, chi1: DirichletCharacter, alpha: float = 6 / 5) -> MCombination:
    """2.7 S(chi_1^2) + 1.8 S(chi_1^3) + 0.29 S(chi_1^6) - S(chi_0) from the normalized prime sums."""
    mod = as_modulus(m)
    d = chi1.order
    if not any((3 * k + 2) % d == 0 for k in range(10)):
        raise ValueError(f"character order {d} divides no 3k+2 with k <= 9")
    terms = {}
    total = []
    for t, c in COSINE_COEFFS:
        s = heathbrown_sum(mod, chi1**t, alpha).normalized
        terms[f"S(chi1^{t})"] = s
        total.append(c * s)
    s0 = heathbrown_sum(mod, None, alpha).normalized
    terms["S(chi0)"] = s0
    total.append(-s0)
    csum = math.fsum(c for _, c in COSINE_COEFFS)
    return MCombination(
        value=math.fsum(total),
        terms=terms,
        coefficient_sum=csum,
        coefficient_check=csum < 24 / 5,
        hypothetical_bound=csum * 5 / 24 - 1,
    )


def least_prime_with_char_value(
    m: Modulus | int, chi: DirichletCharacter, target: int, ceiling: int = 10**7
) -> int:
    """Least prime p with gcd(p, q) = 1 and chi(p) = target, chi real and nontrivial."""
    mod = as_modulus(m)
    if chi.q != mod.q:
        raise ValueError("character has a different modulus")
    if chi.order != 2:
        raise ValueError("chi must be real and nontrivial")
    if target not in (1, -1):
        raise ValueError("target must be +1 or -1")
    G = chi.group
    want = 0 if target == 1 else G.exponent // 2
    limit = max(1000, mod.q)
    while True:
        ps = primes_up_to(min(limit, ceiling))
        ps = ps[mod.q % ps != 0]
        ks = G.phase_numerators(np.array([chi.exponents]))[0][G.index[ps % mod.q]]
        hit = np.flatnonzero(ks == want)
        if len(hit):
            return int(ps[hit[0]])
        if limit >= ceiling:
            raise ResourceLimitError(f"no prime with chi(p) = {target} below {ceiling}")
        limit *= 4


def quadratic_case_check(m: Modulus | int, alpha: float = 6 / 5) -> list[dict]:
    """For each real nontrivial chi mod q, the least primes with chi(p) = +1 and -1 against q^alpha.

    A set A = E_1(q^alpha) on which some real chi is constant would need one
    of the two to exceed q^alpha.
    """
    mod = as_modulus(m)
    G = unit_group_structure(mod)
    x = float(mod.q) ** alpha
    rows = []
    for chi in G.characters():
        if chi.order != 2:
            continue
        plus = least_prime_with_char_value(mod, chi, 1)
        minus = least_prime_with_char_value(mod, chi, -1)
        rows.append({"exponents": list(chi.exponents), "least_plus": plus, "least_minus": minus,
                     "both_below": plus <= x and minus <= x})
    return rows
