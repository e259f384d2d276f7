"""Multiplicative Fourier analysis on G = (Z/qZ)*.

The transform is g_hat(chi) = sum_{n in G} g(n) conj(chi(n)).  Since the unit
group is indexed in mixed radix along its cyclic components, this is exactly
an s-dimensional DFT of the values reshaped to ``component_orders`` (numpy's
forward FFT uses the kernel exp(-2 pi i k n / m)).  A naive double loop is
kept as the reference path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .modgroup import DirichletCharacter, Modulus, UnitGroup, as_modulus, unit_group_structure
from .primesets import primes_up_to

__all__ = [
    "GroupFunction",
    "Spectrum",
    "indicator_fz",
    "transform",
    "inverse",
    "convolve",
    "convolve_direct",
    "parseval_defect",
    "function_to_json",
    "spectrum_to_json",
]

Method = Literal["fft", "naive"]


@dataclass(frozen=True, eq=False)
class GroupFunction:
    """A complex function on G.

    ``values`` has length phi(q) and follows the unit index order of
    :class:`~primeprod.modgroup.UnitGroup`; use :meth:`at` or
    :meth:`on_residues` to work with residues directly.
    """

    group: UnitGroup = field(repr=False)
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.group.order,):
            raise ValueError(f"expected {self.group.order} values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_residues(cls, m: Modulus | int | UnitGroup, arr) -> GroupFunction:
        """Build from an array indexed by residue 0..q-1 (entries off G are ignored)."""
        g = m if isinstance(m, UnitGroup) else unit_group_structure(m)
        arr = np.asarray(arr)
        if arr.shape != (g.q,):
            raise ValueError(f"expected an array of length q={g.q}")
        return cls(g, arr[g.residues])

    @classmethod
    def from_dict(cls, m: Modulus | int | UnitGroup, mapping: dict[int, complex]) -> GroupFunction:
        g = m if isinstance(m, UnitGroup) else unit_group_structure(m)
        arr = np.zeros(g.q, dtype=complex)
        for n, v in mapping.items():
            if not g.is_unit(n):
                raise ValueError(f"{n} is not invertible mod {g.q}")
            arr[int(n) % g.q] = v
        return cls.from_residues(g, arr)

    @classmethod
    def delta(cls, m: Modulus | int | UnitGroup, a: int) -> GroupFunction:
        return cls.from_dict(m, {a: 1.0})

    @property
    def modulus(self) -> Modulus:
        return self.group.modulus

    def at(self, n: int) -> complex:
        i = self.group.index[int(n) % self.group.q]
        if i < 0:
            raise ValueError(f"{n} is not invertible mod {self.group.q}")
        return complex(self.values[i])

    def on_residues(self) -> np.ndarray:
        out = np.zeros(self.group.q, dtype=complex)
        out[self.group.residues] = self.values
        return out

    def support(self, tol: float = 0.0) -> frozenset[int]:
        """Residues n with |g(n)| > tol."""
        mask = np.abs(self.values) > tol
        return frozenset(int(n) for n in self.group.residues[mask])

    def mass(self) -> complex:
        return complex(self.values.sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupFunction):
            return NotImplemented
        return self.group.q == other.group.q and bool(np.array_equal(self.values, other.values))

    def __add__(self, other: GroupFunction) -> GroupFunction:
        _check_same(self.group, other.group)
        return GroupFunction(self.group, self.values + other.values)

    def __mul__(self, c) -> GroupFunction:
        return GroupFunction(self.group, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients, one per character, in character index order."""

    group: UnitGroup = field(repr=False)
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.shape != (self.group.order,):
            raise ValueError(f"expected {self.group.order} coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def modulus(self) -> Modulus:
        return self.group.modulus

    def __getitem__(self, chi: DirichletCharacter) -> complex:
        if chi.q != self.group.q:
            raise ValueError("character has a different modulus")
        return complex(self.coefficients[self.group.character_index(chi)])

    @property
    def trivial(self) -> complex:
        return complex(self.coefficients[0])

    def nontrivial(self) -> np.ndarray:
        return self.coefficients[1:]

    def items(self):
        for i, c in enumerate(self.coefficients):
            yield self.group.character_at(i), complex(c)


def _check_same(a: UnitGroup, b: UnitGroup) -> None:
    if a.q != b.q:
        raise ValueError(f"modulus mismatch: {a.q} vs {b.q}")


def indicator_fz(m: Modulus | int, z: float) -> GroupFunction:
    """Indicator of the primes p with z <= p <= q-1 and gcd(p, q) = 1."""
    mod = as_modulus(m)
    q = mod.q
    if z > q:
        raise ValueError(f"z={z} exceeds q={q}")
    if z < 1:
        raise ValueError("z must be at least 1")
    g = unit_group_structure(mod)
    arr = np.zeros(q)
    ps = primes_up_to(q - 1)
    ps = ps[ps >= z]
    ps = ps[q % ps != 0]
    arr[ps] = 1.0
    return GroupFunction.from_residues(g, arr)


def _transform_naive(g: GroupFunction) -> np.ndarray:
    G = g.group
    out = np.empty(G.order, dtype=complex)
    L = G.exponent
    roots = G.roots_of_unity()
    for i in range(G.order):
        chi = G.character_at(i)
        k = G.phase_numerators(np.array([chi.exponents]))[0]
        out[i] = np.sum(g.values * roots[(-k) % L])
    return out


def transform(g: GroupFunction, method: Method = "fft") -> Spectrum:
    """g_hat(chi) = sum_n g(n) conj(chi(n)) for every character chi."""
    G = g.group
    if method == "naive":
        return Spectrum(G, _transform_naive(g))
    if method != "fft":
        raise ValueError(f"unknown method {method!r}")
    if not G.component_orders:
        return Spectrum(G, g.values.copy())
    coeffs = np.fft.fftn(g.values.reshape(G.shape)).ravel()
    return Spectrum(G, coeffs)


def inverse(s: Spectrum, method: Method = "fft") -> GroupFunction:
    """g(n) = (1/phi(q)) sum_chi g_hat(chi) chi(n)."""
    G = s.group
    if method == "naive":
        roots = G.roots_of_unity()
        k = G.phase_numerators(G.dlog_table)  # row i: character i at every unit
        vals = (s.coefficients[:, None] * roots[k]).sum(axis=0) / G.order
        return GroupFunction(G, vals)
    if not G.component_orders:
        return GroupFunction(G, s.coefficients.copy())
    vals = np.fft.ifftn(s.coefficients.reshape(G.shape)).ravel()
    return GroupFunction(G, vals)


def convolve(g: GroupFunction, h: GroupFunction) -> GroupFunction:
    """(g*h)(n) = sum_{ab=n} g(a) h(b), computed spectrally."""
    _check_same(g.group, h.group)
    return inverse(Spectrum(g.group, transform(g).coefficients * transform(h).coefficients))


def convolve_direct(g: GroupFunction, h: GroupFunction) -> GroupFunction:
    """Reference double sum over pairs; O(|supp g| * phi(q))."""
    _check_same(g.group, h.group)
    G = g.group
    q = G.q
    out = np.zeros(q, dtype=complex)
    hv = h.on_residues()
    units = G.residues
    for i in np.flatnonzero(g.values):
        a = int(units[i])
        np.add.at(out, (a * units) % q, g.values[i] * hv[units])
    return GroupFunction.from_residues(G, out)


def parseval_defect(g: GroupFunction) -> float:
    """|sum |g|^2 - (1/phi) sum |g_hat|^2|."""
    lhs = math.fsum(np.abs(g.values) ** 2)
    rhs = math.fsum(np.abs(transform(g).coefficients) ** 2) / g.group.order
    return abs(lhs - rhs)


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def function_to_json(g: GroupFunction) -> str:
    """Residue-keyed dump: {"q": q, "kind": "function", "values": [[n, re, im], ...]}."""
    order = np.argsort(g.group.residues, kind="stable")
    rows = [[int(g.group.residues[i]), *_pair(g.values[i])] for i in order]
    return json.dumps({"q": g.group.q, "kind": "function", "values": rows})


def spectrum_to_json(s: Spectrum) -> str:
    """Character-keyed dump: {"q": q, "kind": "spectrum", "values": [[[e_1..e_s], re, im], ...]}."""
    rows = [[list(chi.exponents), *_pair(c)] for chi, c in s.items()]
    return json.dumps({"q": s.group.q, "kind": "spectrum", "values": rows})
