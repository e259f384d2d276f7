"""Finite abelian groups, product sets, stabilizers and Kneser-type case analysis.

Groups are abstract: C_{m_1} x ... x C_{m_s} with elements indexed in mixed
radix (first factor most significant), so quotient arguments can be run
without reference to any modulus.  Subsets are boolean masks over the element
indices.  Batched routines work on 2-D boolean matrices, one subset per row,
and are what the exhaustive searches use.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Iterable, Iterator, Literal, Sequence

import numpy as np

from .modgroup import DirichletCharacter, UnitGroup

__all__ = [
    "AbelianGroup",
    "GSubset",
    "KneserReport",
    "CasecheckResult",
    "TaovuResult",
    "DegenerateStabilizerWarning",
    "abelian_group_shapes",
    "all_abelian_groups",
    "product_set",
    "kfold",
    "stabilizer",
    "subgroup_generated",
    "all_subgroups",
    "in_proper_coset",
    "quotient",
    "kneser_check",
    "kneser_batch",
    "all_subsets",
    "casecheck_decision",
    "casecheck_analysis",
    "taovu_classify",
    "unit_group_as_abelian",
    "character_quotient",
]


class DegenerateStabilizerWarning(UserWarning):
    """Stabilizer of the empty set requested; the whole group is returned."""


class AbelianGroup:
    """C_{m_1} x ... x C_{m_s}, written multiplicatively with identity index 0."""

    def __init__(self, component_orders: Iterable[int]):
        orders = tuple(int(m) for m in component_orders)
        if any(m < 1 for m in orders):
            raise ValueError("component orders must be positive")
        self.component_orders = tuple(m for m in orders if m > 1)
        self.order = math.prod(self.component_orders)

    def __repr__(self) -> str:
        if not self.component_orders:
            return "AbelianGroup(trivial)"
        return "AbelianGroup(" + " x ".join(f"C{m}" for m in self.component_orders) + ")"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AbelianGroup):
            return NotImplemented
        return self.component_orders == other.component_orders

    def __hash__(self) -> int:
        return hash(self.component_orders)

    def __len__(self) -> int:
        return self.order

    @cached_property
    def strides(self) -> np.ndarray:
        st = [1]
        for m in reversed(self.component_orders[1:]):
            st.append(st[-1] * m)
        return np.array(list(reversed(st)), dtype=np.int64)

    @cached_property
    def _moduli(self) -> np.ndarray:
        return np.array(self.component_orders, dtype=np.int64)

    @cached_property
    def coords(self) -> np.ndarray:
        """Exponent vectors of all elements, shape (order, s)."""
        idx = np.arange(self.order, dtype=np.int64)
        if not self.component_orders:
            return np.zeros((1, 0), dtype=np.int64)
        return (idx[:, None] // self.strides[None, :]) % self._moduli[None, :]

    def element(self, exponents: Sequence[int]) -> int:
        """Index of the element with the given exponent vector."""
        if len(exponents) != len(self.component_orders):
            raise ValueError("exponent vector has wrong length")
        e = np.asarray(exponents, dtype=np.int64) % self._moduli
        return int((e * self.strides).sum())

    def _from_coords(self, c: np.ndarray) -> np.ndarray:
        if not self.component_orders:
            return np.zeros(c.shape[:-1], dtype=np.int64)
        return ((c % self._moduli) * self.strides).sum(axis=-1)

    def mul(self, a, b) -> np.ndarray:
        """Elementwise product of index arrays (broadcasting)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        return self._from_coords(self.coords[a] + self.coords[b])

    def inv(self, a) -> np.ndarray:
        return self._from_coords(-self.coords[np.asarray(a, dtype=np.int64)])

    def power(self, a: int, t: int) -> int:
        return int(self._from_coords(self.coords[int(a)] * int(t)))

    @cached_property
    def translation(self) -> np.ndarray:
        """T[g, x] = g^{-1} x, so the mask of g*S is ``S[..., T[g]]``."""
        n = self.order
        return self.mul(self.inv(np.arange(n))[:, None], np.arange(n)[None, :])

    def element_order(self, a: int) -> int:
        c = self.coords[int(a)]
        return reduce(math.lcm, (m // math.gcd(int(x), m) for x, m in zip(c, self.component_orders)), 1)

    @property
    def exponent(self) -> int:
        return reduce(math.lcm, self.component_orders, 1)

    def is_cyclic(self) -> bool:
        return self.exponent == self.order

    def generators(self) -> list[int]:
        """Elements that generate the group on their own (empty unless cyclic)."""
        return [a for a in range(self.order) if self.element_order(a) == self.order]

    def full(self) -> GSubset:
        return GSubset(self, np.ones(self.order, dtype=bool))

    def empty(self) -> GSubset:
        return GSubset(self, np.zeros(self.order, dtype=bool))

    def subset(self, elements: Iterable[int]) -> GSubset:
        mask = np.zeros(self.order, dtype=bool)
        mask[list(elements)] = True
        return GSubset(self, mask)

    def cyclic_subset(self, exponents: Iterable[int], x: int = 1) -> GSubset:
        """{x^e : e in exponents}; for a cyclic group the default x is the standard generator."""
        return self.subset(self.power(x, e) for e in exponents)


@dataclass(frozen=True, eq=False)
class GSubset:
    group: AbelianGroup
    members: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.members, dtype=bool)
        if m.shape != (self.group.order,):
            raise ValueError("mask length must equal the group order")
        m.setflags(write=False)
        object.__setattr__(self, "members", m)

    def __len__(self) -> int:
        return int(self.members.sum())

    def __contains__(self, a: int) -> bool:
        return bool(self.members[int(a)])

    def __iter__(self) -> Iterator[int]:
        return (int(i) for i in np.flatnonzero(self.members))

    def __repr__(self) -> str:
        return f"GSubset({self.group!r}, {sorted(self)})"

    @property
    def elements(self) -> np.ndarray:
        return np.flatnonzero(self.members)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GSubset):
            return NotImplemented
        return self.group == other.group and bool(np.array_equal(self.members, other.members))

    def __hash__(self) -> int:
        return hash((self.group, self.members.tobytes()))

    def __or__(self, other: GSubset) -> GSubset:
        _same_group(self, other)
        return GSubset(self.group, self.members | other.members)

    def __and__(self, other: GSubset) -> GSubset:
        _same_group(self, other)
        return GSubset(self.group, self.members & other.members)

    def complement(self) -> GSubset:
        return GSubset(self.group, ~self.members)

    def translate(self, g: int) -> GSubset:
        return GSubset(self.group, self.members[self.group.translation[int(g)]])

    def is_subgroup(self) -> bool:
        if not self.members[0]:
            return False
        e = self.elements
        prods = self.group.mul(e[:, None], self.group.inv(e)[None, :])
        return bool(self.members[prods].all())


def _same_group(a: GSubset, b: GSubset) -> None:
    if a.group != b.group:
        raise ValueError(f"group mismatch: {a.group!r} vs {b.group!r}")


def _prime_power_partitions(n: int) -> list[tuple[int, ...]]:
    def partitions(e: int, cap: int) -> Iterator[tuple[int, ...]]:
        if e == 0:
            yield ()
            return
        for first in range(min(e, cap), 0, -1):
            for rest in partitions(e - first, first):
                yield (first,) + rest

    factors = []
    d, m = 2, n
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            factors.append((d, e))
        d += 1
    if m > 1:
        factors.append((m, 1))
    per_prime = [[tuple(p**k for k in part) for part in partitions(e, e)] for p, e in factors]
    return [tuple(itertools.chain.from_iterable(c)) for c in itertools.product(*per_prime)]


def abelian_group_shapes(n: int) -> list[tuple[int, ...]]:
    """One component-order tuple per isomorphism class of abelian groups of order n."""
    if n < 1:
        raise ValueError("order must be positive")
    if n == 1:
        return [()]
    return _prime_power_partitions(n)


def all_abelian_groups(n: int) -> list[AbelianGroup]:
    return [AbelianGroup(s) for s in abelian_group_shapes(n)]


def product_set(A: GSubset, B: GSubset) -> GSubset:
    """A*B = {ab : a in A, b in B}."""
    _same_group(A, B)
    G = A.group
    a, b = A.elements, B.elements
    if len(a) > len(b):
        a, b = b, a
    out = np.zeros(G.order, dtype=bool)
    for x in a:
        out[G.mul(x, b)] = True
    return GSubset(G, out)


def kfold(A: GSubset, k: int) -> GSubset:
    """A^(k), the k-fold product set (k >= 1)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    out = A
    for _ in range(k - 1):
        out = product_set(out, A)
    return out


def stabilizer(S: GSubset) -> GSubset:
    """{g : gS = S}.  The empty set gets the whole group, with a warning."""
    G = S.group
    if not len(S):
        warnings.warn("stabilizer of the empty set", DegenerateStabilizerWarning, stacklevel=2)
        return G.full()
    e = S.elements
    # gS = S forces g = t * s0^{-1} for some t in S
    cand = G.mul(e, G.inv(e[0]))
    out = np.zeros(G.order, dtype=bool)
    for g in cand:
        if S.members[G.mul(g, e)].all():
            out[g] = True
    return GSubset(G, out)


def subgroup_generated(G: AbelianGroup, elements: Iterable[int]) -> GSubset:
    cur = np.zeros(G.order, dtype=bool)
    cur[0] = True
    gens = list(elements)
    while True:
        nxt = cur.copy()
        for g in gens:
            nxt[G.mul(np.flatnonzero(cur), g)] = True
        if (nxt == cur).all():
            return GSubset(G, cur)
        cur = nxt


def all_subgroups(G: AbelianGroup) -> list[GSubset]:
    """Every subgroup of G, found by closing generating sets (small G only)."""
    seen = {}
    frontier = [subgroup_generated(G, [])]
    while frontier:
        nxt = []
        for H in frontier:
            key = H.members.tobytes()
            if key in seen:
                continue
            seen[key] = H
            for g in range(G.order):
                if not H.members[g]:
                    nxt.append(subgroup_generated(G, list(H) + [g]))
        frontier = nxt
    return sorted(seen.values(), key=lambda H: (len(H), H.members.tobytes()))


def in_proper_coset(A: GSubset) -> bool:
    """Whether the nonempty set A lies in a coset of a proper subgroup."""
    G = A.group
    e = A.elements
    diffs = G.mul(e, G.inv(e[0]))
    return len(subgroup_generated(G, diffs)) < G.order


def _minimal_generators(H: GSubset) -> list[int]:
    G = H.group
    gens: list[int] = []
    cur = subgroup_generated(G, [])
    for h in H:
        if not cur.members[h]:
            gens.append(h)
            cur = subgroup_generated(G, gens)
    return gens


def quotient(G: AbelianGroup, H: GSubset) -> tuple[AbelianGroup, np.ndarray]:
    """G/H as an abelian group and the projection as an index array.

    The relation lattice spanned by the cyclic orders and generators of H is
    brought to Smith normal form; the column transform gives coordinates on
    G/H = Z^s / L directly.
    """
    from sympy import Matrix, ZZ
    from sympy.matrices.normalforms import smith_normal_decomp

    if H.group != G:
        raise ValueError("H is not a subset of G")
    if not H.is_subgroup():
        raise ValueError("H is not a subgroup")
    s = len(G.component_orders)
    if s == 0 or len(H) == G.order:
        return AbelianGroup(()), np.zeros(G.order, dtype=np.int64)
    rows = [[G.component_orders[i] if j == i else 0 for j in range(s)] for i in range(s)]
    rows += [list(map(int, G.coords[h])) for h in _minimal_generators(H)]
    D, _, V = smith_normal_decomp(Matrix(rows), domain=ZZ)
    diag = [abs(int(D[i, i])) for i in range(s)]
    keep = [i for i, d in enumerate(diag) if d > 1]
    Vn = np.array(V.tolist(), dtype=np.int64)
    Q = AbelianGroup([diag[i] for i in keep])
    new = G.coords @ Vn[:, keep]
    proj = Q._from_coords(new)
    if Q.order * len(H) != G.order or not (proj[H.elements] == 0).all():
        raise AssertionError("quotient construction failed")
    return Q, proj


def project(A: GSubset, Q: AbelianGroup, proj: np.ndarray) -> GSubset:
    return Q.subset(np.unique(proj[A.elements]))


@dataclass(frozen=True)
class CasecheckResult:
    """Outcome of the case analysis for A with stabilizer H of A*A and B = image of A in G/H.

    ``outcome`` is "covered" when the argument concludes A*A*A = G,
    "exceptional" when it ends in the structured case (|G/H| = 3k+2,
    |B| = k+1, B and B*B complementary), and "inconclusive" when a
    hypothesis it relies on is not met.
    """

    outcome: Literal["covered", "exceptional", "inconclusive"]
    reason: str
    quotient_order: int
    k: int
    r: int
    lam: int
    bb_size: int
    complements: bool
    hypothesis_ok: bool
    B: GSubset | None = None
    BB: GSubset | None = None
    H_size: int = 0
    direct_cover: bool | None = None

    @property
    def exceptional(self) -> bool:
        return self.outcome == "exceptional"


def casecheck_decision(
    quotient_order: int,
    lam: int,
    bb_size: int,
    complements: bool,
    union_density_ok: bool = True,
    hypothesis_ok: bool = True,
) -> tuple[str, str]:
    """The decision tree on the numeric data alone; returns (outcome, reason)."""
    if not hypothesis_ok:
        return "inconclusive", "|A| <= |G|/3"
    k, r = divmod(quotient_order, 3)
    if r in (0, 1):
        # |A| + |A*A| > (k + 2 lam - 1)|H| >= (3k + 1)|H| >= |G|
        return "covered", f"|G/H| = 3k+{r}: |A|+|A*A| > (3k+1)|H| >= |G|"
    if lam >= k + 2:
        return "covered", "lambda >= k+2: |A|+|A*A| > (3k+2)|H|"
    if bb_size >= 2 * k + 2:
        return "covered", "|B*B| >= 2k+2: |A|+|A*A| > (3k+2)|H|"
    if not complements:
        if union_density_ok:
            return "covered", "B, B*B not complementary: |A u A*A| <= (3k+1)|H| contradicts full union density"
        return "inconclusive", "B, B*B not complementary and union density not established"
    return "exceptional", f"|G/H| = {quotient_order} = 3*{k}+2, |B| = {lam}, |B*B| = {bb_size}, complementary"


def casecheck_analysis(A: GSubset, union_density_ok: bool | None = None) -> CasecheckResult:
    """Run the case analysis on A (intended |A| > |G|/3).

    ``union_density_ok`` says whether |A u A*A| may be taken to be all of G;
    ``None`` computes it directly.
    """
    G = A.group
    n = G.order
    if not len(A):
        return CasecheckResult("inconclusive", "A is empty", n, 0, 0, 0, 0, False, False)
    AA = product_set(A, A)
    H = stabilizer(AA)
    Q, proj = quotient(G, H)
    B = project(A, Q, proj)
    BB = product_set(B, B)
    complements = not (B.members & BB.members).any() and len(B) + len(BB) == Q.order
    if union_density_ok is None:
        union_density_ok = len(A | AA) == n
    hyp = 3 * len(A) > n
    outcome, reason = casecheck_decision(Q.order, len(B), len(BB), complements, union_density_ok, hyp)
    k, r = divmod(Q.order, 3)
    direct = len(product_set(AA, A)) == n
    return CasecheckResult(outcome, reason, Q.order, k, r, len(B), len(BB), complements, hyp, B, BB, len(H), direct)


@dataclass(frozen=True)
class KneserReport:
    A_size: int
    AA_size: int
    H: GSubset
    AH_size: int
    inequality_holds: bool
    casecheck: CasecheckResult | None = None

    @property
    def H_size(self) -> int:
        return len(self.H)


def kneser_check(A: GSubset, with_casecheck: bool = False) -> KneserReport:
    """Compute A*A, its stabilizer H, A*H and test |A*A| >= 2|A*H| - |H|."""
    if not len(A):
        raise ValueError("A must be nonempty")
    AA = product_set(A, A)
    H = stabilizer(AA)
    AH = product_set(A, H)
    holds = len(AA) >= 2 * len(AH) - len(H)
    cc = casecheck_analysis(A) if with_casecheck else None
    return KneserReport(len(A), len(AA), H, len(AH), holds, cc)


def all_subsets(G: AbelianGroup, nonempty: bool = True) -> np.ndarray:
    """Boolean matrix with one row per subset of G (bit i of the row number = element i)."""
    n = G.order
    if n > 24:
        raise ValueError("too many subsets to enumerate")
    rows = np.arange(1 if nonempty else 0, 1 << n, dtype=np.int64)
    return ((rows[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)


def _batch_product(G: AbelianGroup, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    T = G.translation
    out = np.zeros_like(X)
    for a in range(G.order):
        # x in a*Y  <=>  a^{-1} x in Y
        out |= X[:, a : a + 1] & Y[:, T[a]]
    return out


def kneser_batch(G: AbelianGroup, X: np.ndarray) -> dict[str, np.ndarray]:
    """Kneser data for many subsets at once; rows of ``X`` are nonempty subsets.

    Returns arrays A, AA, H, AH (sizes) and ``holds``.
    """
    X = np.asarray(X, dtype=bool)
    if X.ndim != 2 or X.shape[1] != G.order:
        raise ValueError("X must have shape (rows, |G|)")
    T = G.translation
    AA = _batch_product(G, X, X)
    H = np.empty_like(X)
    for g in range(G.order):
        H[:, g] = (AA[:, T[g]] == AA).all(axis=1)
    AH = _batch_product(G, H, X)
    a, aa, h, ah = (M.sum(axis=1) for M in (X, AA, H, AH))
    return {"A": a, "AA": aa, "H": h, "AH": ah, "holds": aa >= 2 * ah - h}


def batch_kfold_growth(G: AbelianGroup, X: np.ndarray, kmax: int) -> np.ndarray:
    """Sizes |A^(k)| for k = 1..kmax, shape (rows, kmax)."""
    sizes = np.empty((X.shape[0], kmax), dtype=np.int64)
    P = X.copy()
    for k in range(kmax):
        sizes[:, k] = P.sum(axis=1)
        if k + 1 < kmax:
            P = _batch_product(G, P, X)
    return sizes


def batch_in_proper_coset(G: AbelianGroup, X: np.ndarray) -> np.ndarray:
    """Per row: does the (nonempty) subset lie in a coset of a proper subgroup?"""
    inv = G.inv(np.arange(G.order))
    Xinv = X[:, inv]  # row mask of A^{-1}: x in A^{-1} iff x^{-1} in A
    Dm = _batch_product(G, X, Xinv)
    S = Dm.copy()
    while True:
        nxt = _batch_product(G, S, Dm) | S
        if (nxt == S).all():
            break
        S = nxt
    return ~S.all(axis=1)


@dataclass(frozen=True)
class TaovuResult:
    is_exceptional_structure: bool
    generator: int | None
    k: int
    cyclic: bool


def taovu_classify(G0: AbelianGroup, B: GSubset) -> TaovuResult:
    """Test whether B*B is the complement of B with trivial stabilizer, and find x.

    When it is, search for a generator x of G0 with
    B = {x^(k+1), ..., x^(2k+1)}; ``generator`` stays None if there is none.
    """
    if B.group != G0:
        raise ValueError("B is not a subset of G0")
    n = G0.order
    k, r = divmod(n - 2, 3)
    if n < 5 or r:
        raise ValueError(f"|G0| = {n} is not of the form 3k+2 with k >= 1")
    if len(B) != k + 1:
        raise ValueError(f"|B| = {len(B)} but k+1 = {k + 1}")
    BB = product_set(B, B)
    ok = BB == B.complement() and len(stabilizer(BB)) == 1
    if not ok:
        return TaovuResult(False, None, k, G0.is_cyclic())
    for x in G0.generators():
        if G0.cyclic_subset(range(k + 1, 2 * k + 2), x) == B:
            return TaovuResult(True, x, k, True)
    return TaovuResult(True, None, k, G0.is_cyclic())


# bridges from the unit group -------------------------------------------------


def unit_group_as_abelian(ug: UnitGroup) -> tuple[AbelianGroup, np.ndarray]:
    """The abstract group of (Z/qZ)* and the residue -> element index map (-1 off units).

    Trivial components never occur in a unit group decomposition, so unit
    indices and abstract element indices coincide.
    """
    return AbelianGroup(ug.component_orders), np.asarray(ug.index)


def character_quotient(chi: DirichletCharacter) -> tuple[AbelianGroup, np.ndarray]:
    """G/ker(chi) = C_d (d = order of chi) and the residue -> exponent map.

    A residue n maps to j with chi(n) = e(j/d); non-units map to -1.
    """
    G = chi.group
    d = chi.order
    k = G.phase_numerators(np.array([chi.exponents]))[0]
    step = G.exponent // d
    out = np.full(G.q, -1, dtype=np.int64)
    out[G.residues] = k // step
    return AbelianGroup([d]), out
