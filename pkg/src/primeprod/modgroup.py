"""The modulus q, the unit group (Z/qZ)*, discrete logarithms and Dirichlet characters.

The unit group is decomposed by CRT into cyclic components with fixed
generators.  Every unit n has an exponent vector (a_1, ..., a_s) with
n = prod g_i^{a_i} (mod q); units are indexed in mixed radix with the first
component most significant, so the index array reshapes to an s-dimensional
array of shape ``component_orders``.  Characters are indexed the same way by
their exponent vectors, which makes the multiplicative Fourier transform an
ordinary multi-dimensional DFT (see :mod:`primeprod.charfourier`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "Modulus",
    "UnitGroup",
    "UnitGroupStructure",
    "DirichletCharacter",
    "factorize",
    "as_modulus",
    "unit_group_structure",
    "characters",
    "eval_character",
    "trivial_character",
]


def _factor_int(n: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


@dataclass(frozen=True)
class Modulus:
    """A modulus q together with its factorization and Euler phi."""

    q: int
    factorization: tuple[tuple[int, int], ...]
    phi: int
    cube_free: bool

    def __int__(self) -> int:
        return self.q

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factorization)


@lru_cache(maxsize=None)
def factorize(q: int) -> Modulus:
    """Factor ``q`` and return the :class:`Modulus` record.

    >>> factorize(12)
    Modulus(q=12, factorization=((2, 2), (3, 1)), phi=4, cube_free=True)
    """
    q = int(q)
    if q < 1:
        raise ValueError(f"modulus must be a positive integer, got {q}")
    fac = tuple(_factor_int(q))
    phi = 1
    for p, e in fac:
        phi *= p ** (e - 1) * (p - 1)
    return Modulus(q, fac, phi, all(e <= 2 for _, e in fac))


def as_modulus(m: Modulus | int) -> Modulus:
    return m if isinstance(m, Modulus) else factorize(int(m))


def _prime_factors(n: int) -> list[int]:
    return [p for p, _ in _factor_int(n)]


def _least_primitive_root(pe: int, phi_pe: int, p: int) -> int:
    """Least generator of the cyclic group (Z/p^e Z)*, p odd."""
    rs = _prime_factors(phi_pe)
    g = 2
    while True:
        if g % p and all(pow(g, phi_pe // r, pe) != 1 for r in rs):
            return g
        g += 1


def _crt_lift(local: int, pe: int, q: int) -> int:
    """Residue mod q congruent to ``local`` mod pe and to 1 mod q/pe."""
    rest = q // pe
    if rest == 1:
        return local % q
    # x = local + pe * t with x = 1 mod rest
    t = ((1 - local) * pow(pe, -1, rest)) % rest
    return (local + pe * t) % q


@dataclass(frozen=True, eq=False)
class UnitGroup:
    """CRT decomposition of (Z/qZ)* with a full discrete-log table.

    ``residues[i]`` is the unit with mixed-radix index ``i``; ``index[n]`` is
    the index of residue ``n`` (or -1 when gcd(n, q) > 1).
    """

    modulus: Modulus
    component_orders: tuple[int, ...]
    generators: tuple[int, ...]
    residues: np.ndarray = field(repr=False)
    index: np.ndarray = field(repr=False)

    @property
    def q(self) -> int:
        return self.modulus.q

    @property
    def order(self) -> int:
        return len(self.residues)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.component_orders

    @property
    def exponent(self) -> int:
        """Exponent of the group (lcm of the component orders)."""
        return reduce(math.lcm, self.component_orders, 1)

    @property
    def strides(self) -> tuple[int, ...]:
        out = []
        s = 1
        for m in reversed(self.component_orders):
            out.append(s)
            s *= m
        return tuple(reversed(out))

    @property
    def dlog_table(self) -> np.ndarray:
        """Exponent vectors of all units, shape (phi(q), s), in index order."""
        idx = np.arange(self.order)
        cols = [(idx // st) % m for st, m in zip(self.strides, self.component_orders)]
        if not cols:
            return np.zeros((self.order, 0), dtype=np.int64)
        return np.stack(cols, axis=1).astype(np.int64)

    def dlog(self, n: int) -> tuple[int, ...]:
        i = int(self.index[int(n) % self.q])
        if i < 0:
            raise ValueError(f"{n} is not invertible mod {self.q}")
        return tuple(int((i // st) % m) for st, m in zip(self.strides, self.component_orders))

    def from_dlog(self, exps: Sequence[int]) -> int:
        n = 1 % self.q
        for g, a in zip(self.generators, exps):
            n = n * pow(g, int(a), self.q) % self.q
        return n

    def is_unit(self, n: int) -> bool:
        return self.index[int(n) % self.q] >= 0

    # characters -----------------------------------------------------------

    def character(self, exponents: Sequence[int]) -> DirichletCharacter:
        if len(exponents) != len(self.component_orders):
            raise ValueError("exponent vector has wrong length")
        exps = tuple(int(e) % m for e, m in zip(exponents, self.component_orders))
        return DirichletCharacter(self, exps)

    def character_at(self, i: int) -> DirichletCharacter:
        """Character whose exponent vector has mixed-radix index ``i``."""
        return DirichletCharacter(
            self, tuple(int((i // st) % m) for st, m in zip(self.strides, self.component_orders))
        )

    def character_index(self, chi: DirichletCharacter) -> int:
        return int(sum(e * st for e, st in zip(chi.exponents, self.strides)))

    def characters(self) -> Iterator[DirichletCharacter]:
        for i in range(self.order):
            yield self.character_at(i)

    def phase_numerators(self, exps: np.ndarray) -> np.ndarray:
        """Integer phases of characters at every unit.

        ``exps`` has shape (c, s); returns (c, phi(q)) integers k with
        chi(n) = e(k / exponent), in unit-index order.
        """
        L = self.exponent
        scale = np.array([L // m for m in self.component_orders], dtype=np.int64)
        s = len(self.component_orders)
        exps = np.asarray(exps, dtype=np.int64)
        if not s:
            # trivial group: only the trivial character, one row per input row
            rows = exps.shape[0] if exps.ndim == 2 else 1
            return np.zeros((rows, self.order), dtype=np.int64)
        exps = exps.reshape(-1, s)
        return ((exps * scale) @ self.dlog_table.T) % L

    def roots_of_unity(self) -> np.ndarray:
        L = self.exponent
        t = 2.0 * np.pi * np.arange(L) / L
        return np.cos(t) + 1j * np.sin(t)

    def character_matrix(self, exps: np.ndarray, *, on_residues: bool = False) -> np.ndarray:
        """Values of several characters at once.

        Rows follow ``exps``.  Columns are units in index order, or all
        residues 0..q-1 (zero off the units) when ``on_residues`` is set.
        """
        vals = self.roots_of_unity()[self.phase_numerators(exps)]
        if not on_residues:
            return vals
        out = np.zeros((vals.shape[0], self.q), dtype=complex)
        out[:, self.residues] = vals
        return out


UnitGroupStructure = UnitGroup


@lru_cache(maxsize=64)
def _unit_group(q: int) -> UnitGroup:
    m = factorize(q)
    orders: list[int] = []
    gens: list[int] = []
    for p, e in m.factorization:
        pe = p**e
        if p == 2:
            if e == 2:
                orders.append(2)
                gens.append(_crt_lift(pe - 1, pe, q))
            elif e >= 3:
                orders += [2, 2 ** (e - 2)]
                gens += [_crt_lift(pe - 1, pe, q), _crt_lift(5, pe, q)]
        else:
            phi_pe = pe // p * (p - 1)
            orders.append(phi_pe)
            gens.append(_crt_lift(_least_primitive_root(pe, phi_pe, p), pe, q))

    res = np.array([1 % q], dtype=np.int64)
    for g, mo in zip(gens, orders):
        powers = np.empty(mo, dtype=np.int64)
        x = 1
        for a in range(mo):
            powers[a] = x
            x = x * g % q
        res = (res[:, None] * powers[None, :] % q).ravel()
    if len(res) != m.phi:
        raise AssertionError(f"unit group construction failed for q={q}")
    index = np.full(q, -1, dtype=np.int64)
    index[res] = np.arange(len(res))
    if (index >= 0).sum() != m.phi:
        raise AssertionError(f"generators do not span (Z/{q}Z)*")
    res.setflags(write=False)
    index.setflags(write=False)
    return UnitGroup(m, tuple(orders), tuple(gens), res, index)


def unit_group_structure(m: Modulus | int) -> UnitGroup:
    """Build (or fetch from cache) the decomposition of (Z/qZ)*."""
    return _unit_group(as_modulus(m).q)


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    """A Dirichlet character given by its exponent vector against the fixed generators.

    chi(prod g_i^{a_i}) = e(sum_i e_i a_i / m_i), and chi(n) = 0 when gcd(n, q) > 1.
    """

    group: UnitGroup = field(repr=False)
    exponents: tuple[int, ...]

    @property
    def modulus(self) -> Modulus:
        return self.group.modulus

    @property
    def q(self) -> int:
        return self.group.q

    @property
    def order(self) -> int:
        return reduce(
            math.lcm,
            (m // math.gcd(e, m) for e, m in zip(self.exponents, self.group.component_orders)),
            1,
        )

    @property
    def is_trivial(self) -> bool:
        return not any(self.exponents)

    @property
    def is_real(self) -> bool:
        return self.order <= 2

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DirichletCharacter):
            return NotImplemented
        return self.q == other.q and self.exponents == other.exponents

    def __hash__(self) -> int:
        return hash((self.q, self.exponents))

    def __repr__(self) -> str:
        return f"DirichletCharacter(q={self.q}, exponents={self.exponents})"

    def __mul__(self, other: DirichletCharacter) -> DirichletCharacter:
        if self.q != other.q:
            raise ValueError("characters have different moduli")
        return self.group.character([a + b for a, b in zip(self.exponents, other.exponents)])

    def __pow__(self, t: int) -> DirichletCharacter:
        return self.group.character([a * t for a in self.exponents])

    def conjugate(self) -> DirichletCharacter:
        return self ** -1

    def phase(self, n: int) -> int | None:
        """k with chi(n) = e(k / exponent), or None when gcd(n, q) > 1."""
        i = int(self.group.index[int(n) % self.q])
        if i < 0:
            return None
        return int(self.group.phase_numerators(np.array([self.exponents]))[0, i])

    def __call__(self, n: int) -> complex:
        k = self.phase(n)
        if k is None:
            return 0j
        t = 2.0 * math.pi * k / self.group.exponent
        return complex(math.cos(t), math.sin(t))

    def values(self) -> np.ndarray:
        """chi(n) for n = 0..q-1 (zero off the units)."""
        return self.group.character_matrix(np.array([self.exponents]), on_residues=True)[0]

    def values_on_group(self) -> np.ndarray:
        """chi at the units, in unit-index order."""
        return self.group.character_matrix(np.array([self.exponents]))[0]


def characters(m: Modulus | int) -> list[DirichletCharacter]:
    """All phi(q) Dirichlet characters mod q, trivial character first."""
    return list(unit_group_structure(m).characters())


def trivial_character(m: Modulus | int) -> DirichletCharacter:
    g = unit_group_structure(m)
    return g.character([0] * len(g.component_orders))


def eval_character(chi: DirichletCharacter, n: int) -> complex:
    if not 0 <= n < chi.q:
        raise ValueError(f"residue {n} outside [0, {chi.q})")
    return chi(n)
