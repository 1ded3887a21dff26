"""Sign formulas for the boundary relations, the q-translation and cascades.

Every function returns a parity bit; callers multiply by ``(-1)**bit``.
Degrees enter only through their parity.

Index conventions: input chords are x^1..x^d and degree sequences are
passed as ``degs[0] = deg x^1, ..., degs[d-1] = deg x^d``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class Cut:
    """An admissible cut of F ⊆ {1..d}.

    The inner operation has ``d_minus`` inputs x^i..x^{i+d_minus-1}; its output
    x_new is fed into slot i of the outer operation, which has ``d_plus``
    inputs.  ``iota_minus`` / ``iota_plus`` send the local labels of
    ``F_minus`` / ``F_plus`` to elements of F.
    """

    d: int
    F: frozenset
    d_minus: int
    d_plus: int
    i: int
    F_minus: frozenset
    F_plus: frozenset
    iota_minus: tuple[tuple[int, int], ...]
    iota_plus: tuple[tuple[int, int], ...]

    @property
    def stable(self) -> bool:
        return self.d_minus + len(self.F_minus) >= 2 and self.d_plus + len(self.F_plus) >= 2

    @property
    def inner_range(self) -> range:
        return range(self.i, self.i + self.d_minus)

    def dim_minus(self) -> int:
        return self.d_minus - 2 + len(self.F_minus)

    def dim_plus(self) -> int:
        return self.d_plus - 2 + len(self.F_plus)

    def cross_less(self) -> int:
        """#{(k+, k-) : ι+(k+) < ι-(k-)}."""
        return sum(1 for _, a in self.iota_plus for _, b in self.iota_minus if a < b)

    def cross_greater(self) -> int:
        return sum(1 for _, a in self.iota_plus for _, b in self.iota_minus if a > b)

    def label(self) -> str:
        fm = ",".join(map(str, sorted(self.F_minus))) or "-"
        fp = ",".join(map(str, sorted(self.F_plus))) or "-"
        return f"d-={self.d_minus} d+={self.d_plus} i={self.i} F-={{{fm}}} F+={{{fp}}}"


def _check_subset(d: int, F: Iterable[int]) -> frozenset:
    F = frozenset(F)
    if any(not 1 <= f <= d for f in F):
        raise ValueError(f"F={sorted(F)} is not a subset of 1..{d}")
    return F


def enumerate_cuts(d: int, F: Iterable[int]) -> list[Cut]:
    """All admissible cuts of F ⊆ {1..d}, in a fixed order."""
    F = _check_subset(d, F)
    cuts = []
    for d_minus in range(1, d + 1):
        d_plus = d + 1 - d_minus
        for i in range(1, d_plus + 1):
            lo, hi = i, i + d_minus - 1
            outside = []
            for f in sorted(F):
                if f < lo:
                    outside.append((f, f))
                elif f > hi:
                    outside.append((f - d_minus + 1, f))
            inside = [f for f in sorted(F) if lo <= f <= hi]
            # at most one inner sprinkle may be promoted to the outer slot i
            for promoted in [None] + inside:
                iota_plus = list(outside)
                if promoted is not None:
                    iota_plus.append((i, promoted))
                iota_minus = [(f - i + 1, f) for f in inside if f != promoted]
                iota_plus.sort()
                cuts.append(
                    Cut(
                        d=d,
                        F=F,
                        d_minus=d_minus,
                        d_plus=d_plus,
                        i=i,
                        F_minus=frozenset(k for k, _ in iota_minus),
                        F_plus=frozenset(k for k, _ in iota_plus),
                        iota_minus=tuple(iota_minus),
                        iota_plus=tuple(iota_plus),
                    )
                )
    return cuts


def reconstruct_F(d_minus: int, d_plus: int, i: int, F_minus: Iterable[int],
                  F_plus: Iterable[int], promoted: int | None = None) -> frozenset:
    """Rebuild F from cut data; ``promoted`` is ι+(i) when i ∈ F_plus."""
    F_minus, F_plus = set(F_minus), set(F_plus)
    out = {k + i - 1 for k in F_minus}
    for k in F_plus:
        if k < i:
            out.add(k)
        elif k > i:
            out.add(k + d_minus - 1)
    if i in F_plus:
        if promoted is None or not i <= promoted <= i + d_minus - 1 or promoted in out:
            raise ValueError("i ∈ F_plus needs one extra element of F in the inner range")
        out.add(promoted)
    return frozenset(out)


def _trailing(cut: Cut, degs: Sequence[int]) -> int:
    return sum(degs[k - 1] for k in range(cut.i + cut.d_minus, cut.d + 1))


# term names of the orientation sign, used by mutation tests
ALEPH_TERMS = ("d_minus_i", "i", "const", "dplus_fminus", "trailing", "cross")
STAR_TERMS = ("positional", "q_shift")


def aleph_parity(cut: Cut, degs: Sequence[int], drop: str | None = None) -> int:
    """Orientation sign of a cut, without any stability check.

    ``drop`` removes one named term (used only for mutation testing).
    """
    if len(degs) != cut.d:
        raise ValueError(f"expected {cut.d} degrees, got {len(degs)}")
    terms = {
        "d_minus_i": cut.d_minus * cut.i,
        "i": cut.i,
        "const": 1,
        "dplus_fminus": cut.d_plus * len(cut.F_minus),
        "trailing": (cut.d_minus + len(cut.F_minus)) * _trailing(cut, degs),
        "cross": cut.cross_less(),
    }
    if drop is not None:
        terms.pop(drop)
    return sum(terms.values()) % 2


def sign_aleph(cut: Cut, degs: Sequence[int]) -> int:
    if not cut.stable:
        raise ValueError(f"unstable cut {cut.label()}: strip factors use sign_unstable")
    return aleph_parity(cut, degs)


def sign_triangle(cut: Cut) -> int:
    if not cut.stable:
        raise ValueError(f"unstable cut {cut.label()}")
    return triangle_value(cut) % 2


def triangle_value(cut: Cut) -> int:
    return (cut.d_minus * cut.d_plus + cut.d_minus * cut.i + cut.i + 1
            + len(cut.F_plus) * cut.d_minus + cut.cross_greater())


def aleph_via_triangle(cut: Cut, degs: Sequence[int]) -> int:
    """Second route: △ + dim₋·dim₊ + dim₋·(trailing degrees)."""
    return (triangle_value(cut) + cut.dim_minus() * cut.dim_plus()
            + cut.dim_minus() * _trailing(cut, degs)) % 2


def sign_unstable(F_plus: Iterable[int], F_minus: Iterable[int]) -> int:
    """Sign for strip breaking at d=1; labels are elements of F."""
    F_plus, F_minus = list(F_plus), list(F_minus)
    return (len(F_plus) + 1 + sum(1 for a in F_plus for b in F_minus if a > b)) % 2


def relation_sign(cut: Cut, degs: Sequence[int], drop: str | None = None) -> int:
    """Sign of a cut inside the boundary relation for (d, F).

    d = 1 uses the strip-breaking sign; d ≥ 2 uses the orientation sign for
    every cut, including those with a bare strip factor.
    """
    if cut.d == 1:
        return sign_unstable([f for _, f in cut.iota_plus], [f for _, f in cut.iota_minus])
    return aleph_parity(cut, degs, drop)


def sign_ad_hoc(d: int, F: Iterable[int], degs: Sequence[int], drop: str | None = None) -> int:
    """Sign turning m^{d,F} into the first summand of μ^d."""
    F = _check_subset(d, F)
    if len(degs) != d:
        raise ValueError(f"expected {d} degrees, got {len(degs)}")
    positional = sum(j * degs[j - 1] for j in range(1, d + 1))
    q_shift = sum(degs[k - 1] - 1 for j in F for k in range(j + 1, d + 1))
    if drop == "positional":
        positional = 0
    elif drop == "q_shift":
        q_shift = 0
    return (positional + q_shift) % 2


def sign_functor(d: int, F: Iterable[int], degs: Sequence[int]) -> int:
    """Sign for the first summand of the restriction maps F^d.

    Chosen so that F^1 carries no sign (as in the d = 1 formula for F^1) and
    the sprinkle term matches the one used for μ^d.
    """
    F = _check_subset(d, F)
    positional = sum((j - 1) * degs[j - 1] for j in range(1, d + 1))
    q_shift = sum(degs[k - 1] - 1 for j in F for k in range(j + 1, d + 1))
    return (positional + q_shift) % 2


def sign_star(F_parts: Sequence[Iterable[int]], deg_anchor: Sequence[int]) -> int:
    """Twist for a linear cascade with parts F_1..F_l and anchors x_0..x_l."""
    parts = [list(p) for p in F_parts]
    l = len(parts)
    if len(deg_anchor) != l + 1:
        raise ValueError("need deg(x_0..x_l)")
    cross = sum(1 for j in range(l) for k in range(j) for a in parts[j] for b in parts[k] if a > b)
    anchor = sum(len(parts[j - 1]) * (deg_anchor[j - 1] - deg_anchor[0]) for j in range(1, l + 1))
    return (cross + anchor + l) % 2


def sign_fib(F_plus: Iterable[int], F_minus: Iterable[int], dnew: int, d0: int) -> int:
    F_plus, F_minus = list(F_plus), list(F_minus)
    cross = sum(1 for a in F_plus for b in F_minus if a > b)
    return (cross + len(F_minus) * (dnew - d0)) % 2


def sign_times(F_minus: Iterable[int], dnew: int, d0: int) -> int:
    return (len(list(F_minus)) * (dnew - d0) + 1) % 2


def koszul_prefix(degrees: Sequence[int], i: int) -> int:
    """Parity of Σ_{k<i} (deg c^k - 1), with degrees[0] = deg c^1."""
    if i < 1:
        raise ValueError("i must be at least 1")
    return sum(deg - 1 for deg in degrees[: i - 1]) % 2

