"""Exact coefficient fields, graded modules, sparse maps and homology.

Two kinds of field are supported: the rationals (backed by ``Fraction``)
and prime fields F_p (backed by :class:`ModP`).  Elements of both behave
like ordinary numbers under ``+ - * /`` so the rest of the package can stay
field-agnostic.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Hashable, Iterable, Mapping, Sequence


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


class ModP:
    """Residue class modulo a prime."""

    __slots__ = ("v", "p")

    def __init__(self, v: int, p: int):
        self.p = p
        self.v = v % p

    def _lift(self, other: Any) -> "ModP":
        if isinstance(other, ModP):
            if other.p != self.p:
                raise ValueError(f"mixing F_{self.p} and F_{other.p}")
            return other
        if isinstance(other, int):
            return ModP(other, self.p)
        if isinstance(other, Fraction):
            return ModP(other.numerator, self.p) / ModP(other.denominator, self.p)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        return ModP(self.v + o.v, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return ModP(self.v - o.v, self.p)

    def __rsub__(self, other):
        o = self._lift(other)
        return ModP(o.v - self.v, self.p)

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return ModP(self.v * o.v, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return ModP(-self.v, self.p)

    def inverse(self) -> "ModP":
        if self.v == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.p}")
        return ModP(pow(self.v, self.p - 2, self.p), self.p)

    def __truediv__(self, other):
        return self * self._lift(other).inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def __eq__(self, other):
        if isinstance(other, ModP):
            return self.p == other.p and self.v == other.v
        if isinstance(other, int):
            return self.v == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.v, self.p))

    def __bool__(self):
        return self.v != 0

    def __repr__(self):
        return f"{self.v} mod {self.p}"


@dataclass(frozen=True)
class Field:
    """Field descriptor: ``p == 0`` means the rationals."""

    p: int = 0

    def __post_init__(self):
        if self.p != 0:
            if not _is_prime(self.p) or self.p >= 2**31:
                raise ValueError(f"characteristic must be a prime below 2^31, got {self.p}")

    @classmethod
    def rationals(cls) -> "Field":
        return cls(0)

    @classmethod
    def prime(cls, p: int) -> "Field":
        return cls(p)

    @property
    def kind(self) -> str:
        return "rationals" if self.p == 0 else "prime"

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def __call__(self, x: Any):
        if self.p == 0:
            if isinstance(x, ModP):
                raise ValueError("cannot coerce a residue class into the rationals")
            return Fraction(x)
        if isinstance(x, ModP):
            if x.p != self.p:
                raise ValueError(f"mixing F_{self.p} and F_{x.p}")
            return x
        x = Fraction(x)
        return ModP(x.numerator, self.p) / ModP(x.denominator, self.p)

    def parse(self, text: str):
        """Parse ``"a"``, ``"a/b"`` or ``"a mod p"``."""
        s = text.strip()
        if " mod " in s:
            a, _, p = s.partition(" mod ")
            if int(p) != self.p:
                raise ValueError(f"scalar {text!r} does not live in {self}")
            return ModP(int(a), self.p)
        try:
            return self(Fraction(s))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed scalar {text!r}") from exc

    def format(self, x: Any) -> str:
        x = self(x)
        if self.p:
            return f"{x.v} mod {self.p}"
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"

    def header(self) -> str:
        return "Q" if self.p == 0 else str(self.p)

    def __str__(self):
        return "Q" if self.p == 0 else f"F_{self.p}"


def sign(bit: int) -> int:
    """(-1)^bit as an integer."""
    return -1 if bit & 1 else 1


@dataclass(frozen=True)
class GradedModule:
    """Free module with a distinguished, ordered, graded basis."""

    basis: tuple[tuple[Hashable, int], ...]
    field: Field = Field()

    def __post_init__(self):
        ids = [g for g, _ in self.basis]
        if len(set(ids)) != len(ids):
            raise ValueError("generator ids must be unique")

    @property
    def ids(self) -> tuple[Hashable, ...]:
        return tuple(g for g, _ in self.basis)

    def degree(self, g: Hashable) -> int:
        return self._degrees()[g]

    def _degrees(self) -> dict:
        cache = self.__dict__.get("_deg_cache")
        if cache is None:
            cache = dict(self.basis)
            object.__setattr__(self, "_deg_cache", cache)
        return cache

    def __contains__(self, g) -> bool:
        return g in self._degrees()

    def __len__(self):
        return len(self.basis)

    def in_degree(self, k: int) -> list:
        return [g for g, deg in self.basis if deg == k]

    def degrees(self) -> list[int]:
        return sorted({deg for _, deg in self.basis})

    def restrict(self, keep) -> "GradedModule":
        return GradedModule(tuple((g, k) for g, k in self.basis if keep(g)), self.field)


@dataclass(frozen=True)
class SparseMap:
    """Linear map stored as ``{(target, source): scalar}``; zero entries dropped."""

    source: GradedModule
    target: GradedModule
    entries: Mapping[tuple[Hashable, Hashable], Any] = field(default_factory=dict)
    shift: int = 0

    def __post_init__(self):
        F = self.source.field
        clean = {}
        for (t, s), c in self.entries.items():
            if s not in self.source or t not in self.target:
                raise ValueError(f"entry ({t!r}, {s!r}) refers to a generator outside the module")
            c = F(c)
            if not c:
                continue
            if self.target.degree(t) - self.source.degree(s) != self.shift:
                raise ValueError(f"entry ({t!r}, {s!r}) does not have degree shift {self.shift}")
            clean[(t, s)] = c
        object.__setattr__(self, "entries", clean)

    @classmethod
    def identity(cls, module: GradedModule) -> "SparseMap":
        return cls(module, module, {(g, g): 1 for g in module.ids}, 0)

    @classmethod
    def zero(cls, source: GradedModule, target: GradedModule, shift: int = 0) -> "SparseMap":
        return cls(source, target, {}, shift)

    def columns(self) -> dict:
        cols: dict = defaultdict(dict)
        for (t, s), c in self.entries.items():
            cols[s][t] = c
        return cols

    def apply(self, vec: Mapping) -> dict:
        out: dict = defaultdict(lambda: self.source.field.zero)
        cols = self.columns()
        for s, a in vec.items():
            for t, c in cols.get(s, {}).items():
                out[t] = out[t] + c * a
        return {t: c for t, c in out.items() if c}

    def is_zero(self) -> bool:
        return not self.entries

    def __sub__(self, other: "SparseMap") -> "SparseMap":
        if other.source != self.source or other.target != self.target or other.shift != self.shift:
            raise ValueError("maps are not parallel")
        acc = dict(self.entries)
        for k, c in other.entries.items():
            acc[k] = acc.get(k, self.source.field.zero) - c
        return SparseMap(self.source, self.target, acc, self.shift)


def compose(f: SparseMap, g: SparseMap) -> SparseMap:
    """Return f ∘ g."""
    if g.target != f.source:
        raise ValueError("cannot compose: target of g is not the source of f")
    F = f.source.field
    fcols = f.columns()
    acc: dict = defaultdict(lambda: F.zero)
    for (m, s), b in g.entries.items():
        for t, a in fcols.get(m, {}).items():
            acc[(t, s)] = acc[(t, s)] + a * b
    return SparseMap(g.source, f.target, dict(acc), f.shift + g.shift)


class Echelon:
    """Incremental row echelon form with deterministic pivoting.

    Rows are sparse dicts.  ``order`` ranks column keys; the pivot of a row
    is its nonzero column of smallest rank.  Each stored row remembers the
    combination of inserted vectors it came from, so membership queries can
    return coefficients as well as residuals.
    """

    def __init__(self, order: Mapping[Hashable, int] | None = None):
        self.rows: dict = {}
        self.combos: dict = {}
        self.order = dict(order) if order is not None else {}
        self.count = 0

    def _rank(self, key) -> tuple:
        if key in self.order:
            return (0, self.order[key])
        return (1, repr(key))

    def _pivot(self, row: Mapping):
        return min(row, key=self._rank)

    def reduce(self, vec: Mapping) -> tuple[dict, dict]:
        """Return (residual, combination) with vec = residual + Σ combo·inserted."""
        row = {k: v for k, v in vec.items() if v}
        combo: dict = {}
        while row:
            changed = False
            for k in sorted(row, key=self._rank):
                if k in self.rows:
                    prow = self.rows[k]
                    factor = row[k] / prow[k]
                    for kk, vv in prow.items():
                        nv = row.get(kk, 0) - factor * vv
                        if nv:
                            row[kk] = nv
                        else:
                            row.pop(kk, None)
                    for idx, cv in self.combos[k].items():
                        nv = combo.get(idx, 0) + factor * cv
                        if nv:
                            combo[idx] = nv
                        else:
                            combo.pop(idx, None)
                    changed = True
                    break
            if not changed:
                break
        return row, combo

    def insert(self, vec: Mapping) -> bool:
        """Insert a vector; return True when it increased the rank."""
        idx = self.count
        self.count += 1
        residual, combo = self.reduce(vec)
        if not residual:
            return False
        piv = self._pivot(residual)
        # residual = vec - Σ combo·inserted, so its provenance is {idx: 1} - combo
        prov = {k: -v for k, v in combo.items()}
        prov[idx] = prov.get(idx, 0) + 1
        self.rows[piv] = residual
        self.combos[piv] = {k: v for k, v in prov.items() if v}
        return True

    @property
    def rank(self) -> int:
        return len(self.rows)


def rank(vectors: Iterable[Mapping], order: Mapping | None = None) -> int:
    ech = Echelon(order)
    for v in vectors:
        ech.insert(v)
    return ech.rank


@dataclass(frozen=True)
class DSquaredError(ValueError):
    witness: Hashable
    image: dict

    def __str__(self):
        return f"d∘d ≠ 0: generator {self.witness!r} maps to {self.image}"


def check_square_zero(d: SparseMap) -> None:
    if d.source != d.target:
        raise ValueError("a differential must be an endomorphism")
    dd = compose(d, d)
    if dd.entries:
        cols = dd.columns()
        g = min(cols, key=lambda s: d.source.ids.index(s))
        raise DSquaredError(g, dict(cols[g]))


def _degree_ranks(d: SparseMap) -> dict[int, int]:
    """Rank of the differential restricted to each source degree."""
    cols = d.columns()
    order = {g: n for n, g in enumerate(d.target.ids)}
    out = {}
    for k in d.source.degrees():
        out[k] = rank((cols.get(g, {}) for g in d.source.in_degree(k)), order)
    return out


def homology(d: SparseMap) -> dict[int, int]:
    """Betti numbers per degree of a finite complex (zero entries omitted)."""
    check_square_zero(d)
    mod = d.source
    ranks = _degree_ranks(d)
    betti = {}
    for k in mod.degrees():
        dim = len(mod.in_degree(k))
        b = dim - ranks.get(k, 0) - ranks.get(k - d.shift, 0)
        if b:
            betti[k] = b
    return betti


def kernel_basis(gens: Sequence, cols: Mapping, F: Field, order: Mapping | None = None) -> list[dict]:
    """Basis of the kernel of the linear map g ↦ cols[g] on span(gens)."""
    ech = Echelon(order)
    kernel = []
    for g in gens:
        col = cols.get(g, {})
        residual, combo = ech.reduce(col)
        ech.insert(col)
        if not residual:
            vec = {g: F.one}
            for k, c in combo.items():
                vec[gens[k]] = vec.get(gens[k], F.zero) - c
            kernel.append({k: v for k, v in vec.items() if v})
    return kernel


def induced_map_ranks(f: SparseMap, d_src: SparseMap, d_tgt: SparseMap) -> dict[int, int]:
    """Rank of the map induced on homology by the chain map f, per degree."""
    check_square_zero(d_src)
    check_square_zero(d_tgt)
    if f.source != d_src.source or f.target != d_tgt.source:
        raise ValueError("chain map does not match the complexes")
    F = f.source.field
    order = {g: n for n, g in enumerate(d_tgt.source.ids)}
    src_order = {g: n for n, g in enumerate(d_src.source.ids)}
    src_cols = d_src.columns()
    tgt_cols = d_tgt.columns()
    out = {}
    for k in d_src.source.degrees():
        cycles = kernel_basis(d_src.source.in_degree(k), src_cols, F, src_order)
        boundaries = [tgt_cols.get(g, {}) for g in d_tgt.source.in_degree(k - d_tgt.shift)]
        b_rank = rank(boundaries, order)
        r = rank(boundaries + [f.apply(z) for z in cycles], order) - b_rank
        if r:
            out[k] = r
    return out


def is_chain_map(f: SparseMap, d_src: SparseMap, d_tgt: SparseMap) -> bool:
    return not (compose(d_tgt, f) - compose(f, d_src)).entries
