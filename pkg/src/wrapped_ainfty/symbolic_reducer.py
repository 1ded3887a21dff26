"""Formal check that the boundary relations span the expanded A∞ equations.

Structure constants become symbols ``(d, F, inputs, output)``.  The A∞
expression of the assembled operations, evaluated on a generic q-monomial,
is a formal sum of products of two symbols (plus single symbols coming from
the identity term, which must cancel).  Each boundary relation is a formal
sum of the same shape; exact elimination over the rationals decides whether
the expansion lies in their span.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import signs
from .ainfty_engine import ainfty_expression, evaluate
from .field_algebra import Echelon
from .signs import enumerate_cuts

MAX_D = 4

SymKey = tuple  # (d, F, inputs, output)


@dataclass(frozen=True)
class Sym:
    """A chord symbol: an input x^k, or the generic chord of a (weight, degree)."""

    name: str
    weight: int
    degree: int

    def __repr__(self):
        return self.name


def generic(weight: int, degree: int) -> Sym:
    return Sym(f"g[{weight},{degree}]", weight, degree)


class Poly:
    """Noncommutative polynomial in constant symbols with integer coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return Poly(out)

    def __neg__(self):
        return Poly({k: -v for k, v in self.terms.items()})

    def __mul__(self, other):
        out: dict = {}
        for a, x in self.terms.items():
            for b, y in other.terms.items():
                out[a + b] = out.get(a + b, 0) + x * y
        return Poly(out)

    def __bool__(self):
        return bool(self.terms)


ONE = Poly({(): 1})


def _key_str(k: SymKey) -> str:
    d, F, ins, out = k
    Fs = ",".join(map(str, F)) or "-"
    return f"m[{d};{{{Fs}}}]({','.join(map(repr, ins))}->{out!r})"


@dataclass
class FormalSum:
    """Map (output q, outer key, inner key, slot) → integer coefficient.

    Terms from the identity summand have ``inner = slot = None``.
    """

    terms: dict = field(default_factory=dict)

    def add(self, key, c) -> None:
        v = self.terms.get(key, 0) + c
        if v:
            self.terms[key] = v
        else:
            self.terms.pop(key, None)

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def lines(self) -> list[str]:
        out = []
        for (q, outer, inner, i), c in sorted(self.terms.items(), key=lambda kv: repr(kv[0])):
            tag = "q·" if q else ""
            body = _key_str(outer) if inner is None else f"{_key_str(outer)} ∘_{i} {_key_str(inner)}"
            out.append(f"{c:+d} {tag}{body}")
        return out


def _inputs(weights: Sequence[int], degs: Sequence[int]) -> tuple[Sym, ...]:
    return tuple(Sym(f"x{k}", w, g) for k, (w, g) in enumerate(zip(weights[1:], degs), start=1))


def _check(d: int, F: Iterable[int], weights: Sequence[int], degs: Sequence[int]) -> frozenset:
    if d < 1 or d > MAX_D:
        raise ValueError(f"d={d} outside the configured bound 1..{MAX_D}")
    F = frozenset(F)
    if any(not 1 <= f <= d for f in F):
        raise ValueError(f"F={sorted(F)} not inside 1..{d}")
    if len(weights) != d + 1 or len(degs) != d:
        raise ValueError("need weights w^0..w^d and degrees of x^1..x^d")
    if weights[0] != sum(weights[1:]) + len(F):
        raise ValueError("weight law violated")
    return F


def make_provider(available: Callable[[int, int], bool] | None = None,
                  star_drop: str | None = None) -> tuple[Callable, Callable]:
    """Symbolic constants: one generic output per admissible (weight, degree)."""

    def provider(d, F, ins):
        w = sum(x.weight for x in ins) + len(F)
        g = sum(x.degree for x in ins) + 2 - d - len(F)
        if available is not None and not available(w, g):
            return ()
        out = generic(w, g)
        return ((out, Poly({((d, tuple(F), tuple(ins), out),): 1})),)

    def star(d, F, degs):
        return signs.sign_ad_hoc(d, F, degs, star_drop)

    return provider, star


def _to_formal(expr: dict, x0_by_q: dict) -> FormalSum:
    fs = FormalSum()
    for (sym, q), poly in expr.items():
        if x0_by_q.get(q) != sym:
            continue
        for mono, c in poly.terms.items():
            if len(mono) == 1:
                fs.add((q, mono[0], None, None), c)
            elif len(mono) == 2:
                outer, inner = mono
                slot = outer[2].index(inner[3]) + 1
                fs.add((q, outer, inner, slot), c)
            else:
                raise RuntimeError(f"unexpected monomial of length {len(mono)}")
    return fs


def expand_as(d: int, F: Iterable[int], weights: Sequence[int], degs: Sequence[int],
              available: Callable[[int, int], bool] | None = None,
              star_drop: str | None = None, flip: Callable | None = None) -> FormalSum:
    """Expansion of the A∞ expression on the input q^{[k∈F]} x^k, both output components.

    ``star_drop`` removes a named term of the q-translation sign and ``flip``
    negates selected constant symbols; both exist only for mutation tests.
    """
    F = _check(d, F, weights, degs)
    xs = _inputs(weights, degs)
    provider, star = make_provider(available, star_drop)
    if flip is not None:
        base = provider

        def provider(dd, FF, ins):
            return tuple((o, -p if flip((dd, tuple(FF), tuple(ins), o)) else p) for o, p in base(dd, FF, ins))

    deg = lambda s: s.degree
    mu = lambda args: evaluate(args, provider, deg, ONE, star)
    args = tuple((x, int(k in F)) for k, x in enumerate(xs, start=1))
    expr = ainfty_expression(args, mu, deg)
    g0 = sum(degs) + 3 - d - len(F)
    x0 = {0: generic(weights[0], g0), 1: generic(weights[0] - 1, g0 + 1)}
    return _to_formal(expr, x0)


def relation_vector(d: int, F: Iterable[int], xs: Sequence[Sym], q: int = 0,
                    available: Callable[[int, int], bool] | None = None,
                    aleph_drop: str | None = None, flip_cut: Callable | None = None) -> FormalSum:
    """Σ over cuts of (-1)^sign · outer ∘_i inner at the generic output."""
    F = frozenset(F)
    d = len(xs)
    degs = [x.degree for x in xs]
    w0 = sum(x.weight for x in xs) + len(F)
    g0 = sum(degs) + 3 - d - len(F)
    fs = FormalSum()
    if available is not None and not available(w0, g0):
        return fs
    x0 = generic(w0, g0)
    for cut in enumerate_cuts(d, F):
        lo, hi = cut.i, cut.i + cut.d_minus - 1
        inner_in = tuple(xs[lo - 1: hi])
        wn = sum(x.weight for x in inner_in) + len(cut.F_minus)
        gn = sum(x.degree for x in inner_in) + 2 - cut.d_minus - len(cut.F_minus)
        if available is not None and not available(wn, gn):
            continue
        xn = generic(wn, gn)
        outer_in = (*xs[: lo - 1], xn, *xs[hi:])
        inner = (cut.d_minus, tuple(sorted(cut.F_minus)), inner_in, xn)
        outer = (cut.d_plus, tuple(sorted(cut.F_plus)), outer_in, x0)
        bit = signs.relation_sign(cut, degs, aleph_drop)
        if flip_cut is not None and flip_cut(cut):
            bit ^= 1
        fs.add((q, outer, inner, cut.i), -1 if bit else 1)
    return fs


def relation_basis(d: int, F: Iterable[int], weights: Sequence[int], degs: Sequence[int],
                   available: Callable[[int, int], bool] | None = None,
                   aleph_drop: str | None = None, flip_cut: Callable | None = None) -> list[FormalSum]:
    """Relations for (d, F) at the A-output and for (d, F∖{k}) at the q-output."""
    F = _check(d, F, weights, degs)
    xs = _inputs(weights, degs)
    out = []
    for q, FF in [(0, F)] + [(1, F - {k}) for k in sorted(F)]:
        v = relation_vector(d, FF, xs, q, available, aleph_drop, flip_cut)
        if v:
            out.append(v)
    return out


def reduce(expansion: FormalSum, basis: Sequence[FormalSum]) -> tuple[FormalSum, dict[int, Fraction]]:
    """Residual of the expansion modulo the span of the basis, and the coefficients used."""
    keys = sorted({k for v in (expansion, *basis) for k in v.terms}, key=repr)
    order = {k: n for n, k in enumerate(keys)}
    ech = Echelon(order)
    for v in basis:
        ech.insert({k: Fraction(c) for k, c in v.terms.items()})
    residual, combo = ech.reduce({k: Fraction(c) for k, c in expansion.terms.items()})
    return FormalSum({k: v for k, v in residual.items() if v}), combo


def expected_sign(d: int, F: Iterable[int], degs: Sequence[int], q: int = 0, k: int | None = None,
                  full_F: Iterable[int] = ()) -> int:
    """Parity of the coefficient with which a relation enters the expansion.

    The relation for (d, F) enters the q⁰ output with (-1)^σ where
    σ = Σ (j-1) deg x^j + Σ_{j∈F, l>j} (deg x^l - 1), except that the strip
    sign at d = 1, F = {1} is the global negative; the relation for
    (d, F∖{k}) enters the q-output with the extra ∂_q passing sign.
    """
    F = frozenset(F)
    bit = signs.sign_functor(d, F, degs) + (1 if d == 1 and F else 0)
    if q:
        full = frozenset(full_F)
        bit += sum(degs[j - 1] - (j in full) - 1 for j in range(k + 1, d + 1))
    return bit % 2


def normalized_residual(expansion: FormalSum, d: int, F: Iterable[int], weights: Sequence[int],
                        degs: Sequence[int], aleph_drop: str | None = None,
                        flip_cut: Callable | None = None) -> FormalSum:
    """expansion - Σ (-1)^{expected sign} · relation: pins the global sign of every relation."""
    F = _check(d, F, weights, degs)
    xs = _inputs(weights, degs)
    out = FormalSum(dict(expansion.terms))
    for q, FF, k in [(0, F, None)] + [(1, F - {kk}, kk) for kk in sorted(F)]:
        bit = expected_sign(d, FF, degs, q, k, F)
        for key, c in relation_vector(d, FF, xs, q, None, aleph_drop, flip_cut).terms.items():
            out.add(key, c if bit else -c)
    return out


@dataclass(frozen=True)
class Certificate:
    d: int
    F: tuple[int, ...]
    weights: tuple[int, ...]
    degs: tuple[int, ...]
    expansion_size: int
    basis_size: int
    residual: FormalSum
    coefficients: tuple
    normalized: FormalSum

    @property
    def ok(self) -> bool:
        return not self.residual

    @property
    def pinned(self) -> bool:
        """Zero residual against the sign-normalized sum of relations."""
        return not self.normalized

    @property
    def integral(self) -> bool:
        return all(Fraction(c).denominator == 1 for _, c in self.coefficients)

    def line(self) -> str:
        Fs = ",".join(map(str, self.F)) or "-"
        coeffs = " ".join(f"{c}" for _, c in self.coefficients) or "-"
        if not self.ok:
            status = f"FAIL residual terms={len(self.residual)}"
        elif not self.pinned:
            status = f"FAIL normalized residual terms={len(self.normalized)}"
        else:
            status = "ok"
        return (f"config d={self.d} F={{{Fs}}} w={','.join(map(str, self.weights))} "
                f"deg={','.join(map(str, self.degs))} terms={self.expansion_size} "
                f"relations={self.basis_size} coefficients={coeffs} {status}")


def certify(d: int, F: Iterable[int], weights: Sequence[int], degs: Sequence[int], **mutation) -> Certificate:
    star_drop = mutation.get("star_drop")
    flip = mutation.get("flip")
    aleph_drop = mutation.get("aleph_drop")
    flip_cut = mutation.get("flip_cut")
    F = tuple(sorted(F))
    exp = expand_as(d, F, weights, degs, star_drop=star_drop, flip=flip)
    basis = relation_basis(d, F, weights, degs, aleph_drop=aleph_drop, flip_cut=flip_cut)
    res, combo = reduce(exp, basis)
    norm = normalized_residual(exp, d, F, weights, degs, aleph_drop, flip_cut)
    return Certificate(d, F, tuple(weights), tuple(degs), len(exp), len(basis), res,
                       tuple(sorted(combo.items())), norm)


def configurations(d: int, F: Iterable[int], degree_values: Sequence[int] = (0, 1),
                   base_weight: int = 1) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """(weights, degrees) pairs with all input weights equal to ``base_weight``."""
    from itertools import product

    F = tuple(F)
    ws = (d * base_weight + len(F), *([base_weight] * d))
    return [(ws, degs) for degs in product(degree_values, repeat=d)]


def certificate(d: int, F: Iterable[int], degree_values: Sequence[int] = (0, 1),
                base_weights: Sequence[int] = (1, 2), **mutation) -> list[Certificate]:
    out = []
    for bw in base_weights:
        for ws, degs in configurations(d, F, degree_values, bw):
            out.append(certify(d, F, ws, degs, **mutation))
    return out
