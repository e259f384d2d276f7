"""Prime sieving and the residue sets E_k(x) of products of k primes.

E_k(x) is the set of invertible residues mod q of the form p_1...p_k with every
p_i <= x.  It is built as an iterated product set of E_1(x), working on
residues rather than on k-tuples of primes.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ResourceLimitError
from .modgroup import Modulus, as_modulus

__all__ = [
    "DEFAULT_SIEVE_CEILING",
    "ResidueSet",
    "DensityReport",
    "CoverResult",
    "primes_up_to",
    "ek_set",
    "residue_product",
    "prime_count_in_class",
    "density_report",
    "verify_product_cover",
]

log = logging.getLogger(__name__)

DEFAULT_SIEVE_CEILING = 10**8
CACHE_ENV = "PRIMEPROD_CACHE"
_SEGMENT = 1 << 21

_table = np.array([], dtype=np.int64)
_table_limit = -1


def _simple_sieve(n: int) -> np.ndarray:
    if n < 2:
        return np.array([], dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def _segmented_sieve(n: int) -> np.ndarray:
    if n < _SEGMENT:
        return _simple_sieve(n)
    base = _simple_sieve(math.isqrt(n))
    chunks = [base]
    lo = int(base[-1]) + 1
    while lo <= n:
        hi = min(lo + _SEGMENT, n + 1)
        seg = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, -(-lo // p) * p)
            seg[start - lo :: p] = False
        chunks.append(np.flatnonzero(seg).astype(np.int64) + lo)
        lo = hi
    return np.concatenate(chunks)


def _cache_dir() -> Path | None:
    d = os.environ.get(CACHE_ENV)
    return Path(d) if d else None


def _load_cached(n: int) -> tuple[np.ndarray, int] | None:
    d = _cache_dir()
    if d is None or not d.is_dir():
        return None
    best = None
    for f in d.glob("primes_*.npy"):
        try:
            lim = int(f.stem.split("_")[1])
        except (IndexError, ValueError):
            continue
        if lim >= n and (best is None or lim < best[0]):
            best = (lim, f)
    if best is None:
        return None
    arr = np.load(best[1])
    return arr, best[0]


def _store_cached(arr: np.ndarray, n: int) -> None:
    d = _cache_dir()
    if d is None:
        return
    d.mkdir(parents=True, exist_ok=True)
    target = d / f"primes_{n}.npy"
    if target.exists():
        return
    tmp = d / f".primes_{n}.{os.getpid()}.npy"
    np.save(tmp, arr)
    os.replace(tmp, target)


def primes_up_to(x: float, ceiling: int = DEFAULT_SIEVE_CEILING) -> np.ndarray:
    """All primes p <= floor(x), ascending, as an int64 array.

    Tables are kept in memory; if ``PRIMEPROD_CACHE`` names a directory they
    are also stored there and reused across processes.
    """
    global _table, _table_limit
    n = math.floor(x)
    if n > ceiling:
        raise ResourceLimitError(f"sieve limit {n} exceeds ceiling {ceiling}")
    if n < 2:
        return np.array([], dtype=np.int64)
    if n > _table_limit:
        cached = _load_cached(n)
        if cached is not None:
            _table, _table_limit = cached
        else:
            log.debug("sieving primes up to %d", n)
            _table = _segmented_sieve(n)
            _table_limit = n
            if n >= 10**6:
                _store_cached(_table, n)
        _table.setflags(write=False)
    return _table[: np.searchsorted(_table, n, side="right")]


@dataclass(frozen=True, eq=False)
class ResidueSet:
    """A set of invertible residues mod q, stored as a boolean mask over 0..q-1."""

    modulus: Modulus
    members: np.ndarray = field(repr=False)
    label: tuple[int, float] | None = None

    def __post_init__(self):
        m = np.asarray(self.members, dtype=bool)
        if m.shape != (self.modulus.q,):
            raise ValueError("mask length must equal q")
        m.setflags(write=False)
        object.__setattr__(self, "members", m)

    @classmethod
    def from_residues(cls, m: Modulus | int, residues, label=None) -> ResidueSet:
        mod = as_modulus(m)
        mask = np.zeros(mod.q, dtype=bool)
        mask[np.asarray(list(residues), dtype=np.int64) % mod.q] = True
        return cls(mod, mask, label)

    def __len__(self) -> int:
        return int(self.members.sum())

    def __contains__(self, n: int) -> bool:
        return bool(self.members[int(n) % self.modulus.q])

    def residues(self) -> np.ndarray:
        return np.flatnonzero(self.members)

    def as_set(self) -> frozenset[int]:
        return frozenset(int(n) for n in self.residues())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResidueSet):
            return NotImplemented
        return self.modulus.q == other.modulus.q and bool(np.array_equal(self.members, other.members))

    def __or__(self, other: ResidueSet) -> ResidueSet:
        return ResidueSet(self.modulus, self.members | other.members)

    def density(self) -> float:
        return len(self) / self.modulus.phi


def _unit_mask(q: int) -> np.ndarray:
    return np.gcd(np.arange(q), q) == 1


def residue_product(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """Mask of {x*y mod q : x in a, y in b} for residue arrays a, b."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if len(a) > len(b):
        a, b = b, a
    out = np.zeros(q, dtype=bool)
    for x in a:
        out[(int(x) * b) % q] = True
    return out


def _e1_residues(mod: Modulus, x: float) -> np.ndarray:
    res = primes_up_to(x) % mod.q
    res = res[np.gcd(res, mod.q) == 1]
    return np.unique(res)


def ek_set(m: Modulus | int, k: int, x: float) -> ResidueSet:
    """E_k(x): residues of products of k primes p_i <= x, coprime to q, without multiplicity."""
    mod = as_modulus(m)
    k = int(k)
    if k < 1:
        raise ValueError("k must be at least 1")
    q = mod.q
    e1 = _e1_residues(mod, x)
    cur = np.zeros(q, dtype=bool)
    cur[e1] = True
    for _ in range(k - 1):
        if cur.sum() == mod.phi or not len(e1):
            break
        cur = residue_product(np.flatnonzero(cur), e1, q)
    return ResidueSet(mod, cur, (k, x))


def prime_count_in_class(x: float, m: Modulus | int, a: int) -> int:
    """pi(x; q, a): number of primes p <= x with p = a (mod q)."""
    mod = as_modulus(m)
    if math.gcd(int(a), mod.q) != 1:
        raise ValueError(f"residue {a} is not invertible mod {mod.q}")
    ps = primes_up_to(x)
    return int(np.count_nonzero(ps % mod.q == int(a) % mod.q))


@dataclass(frozen=True)
class DensityReport:
    q: int
    phi: int
    k: int
    alpha: float
    size: int
    ratio: float
    covered: bool
    union: bool = False


def density_report(
    m: Modulus | int,
    k: int,
    alpha: float,
    *,
    union: bool = False,
    ceiling: int = DEFAULT_SIEVE_CEILING,
) -> DensityReport:
    """Size of E_k(q^alpha) relative to phi(q).

    With ``union=True`` the measured set is E_1(q^alpha) | E_2(q^alpha)
    (``k`` is then ignored and reported as 2).
    """
    mod = as_modulus(m)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    x = float(mod.q) ** alpha
    if x > ceiling:
        raise ResourceLimitError(f"q^alpha = {x:.6g} exceeds the sieve ceiling {ceiling}")
    if union:
        s = ek_set(mod, 1, x) | ek_set(mod, 2, x)
        k = 2
    else:
        s = ek_set(mod, k, x)
    size = len(s)
    return DensityReport(mod.q, mod.phi, k, alpha, size, size / mod.phi, size == mod.phi, union)


@dataclass(frozen=True)
class CoverResult:
    covered: bool
    uncovered: tuple[int, ...]


def verify_product_cover(m: Modulus | int, k: int, x: float) -> CoverResult:
    """Decide whether E_k(x) is all of G; otherwise list the missing residues."""
    mod = as_modulus(m)
    s = ek_set(mod, k, x)
    missing = np.flatnonzero(_unit_mask(mod.q) & ~s.members)
    return CoverResult(len(missing) == 0, tuple(int(n) for n in missing))
