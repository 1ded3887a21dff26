"""Stratification of the compactified popsicle moduli spaces."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Mapping, Sequence

from .trees import FDecomposition, Flavour, enumerate_stable_decompositions


def dimension(d: int, flavour: Flavour | int) -> int:
    """d - 2 + |F|; the unstable strip (d=1, F=∅) gets -1."""
    if d < 1:
        raise ValueError("d must be at least 1")
    n = flavour if isinstance(flavour, int) else len(flavour)
    return d - 2 + n


def vdim(d: int, flavour: Flavour | int, deg0: int, degs: Sequence[int]) -> int:
    if len(degs) != d:
        raise ValueError(f"expected {d} input degrees, got {len(degs)}")
    return dimension(d, flavour) + deg0 - sum(degs)


@dataclass(frozen=True)
class PopsicleStratum:
    dec: FDecomposition
    flavour: Flavour

    @property
    def codim(self) -> int:
        return self.dec.codim

    @property
    def dim(self) -> int:
        return dimension(self.dec.d, self.flavour) - self.codim

    def __str__(self):
        return self.dec.encode()


def enumerate_strata(d: int, flavour: Flavour) -> list[PopsicleStratum]:
    return [PopsicleStratum(dec, flavour) for dec in enumerate_stable_decompositions(d, flavour)]


def f_vector(strata: Iterable[PopsicleStratum]) -> tuple[int, ...]:
    c = Counter(s.codim for s in strata)
    return tuple(c[k] for k in range(max(c) + 1)) if c else ()


def euler_characteristic(strata: Iterable[PopsicleStratum]) -> int:
    """Σ over strata of (-1)^dim; equals 1 for a closed ball."""
    return sum(-1 if s.dim % 2 else 1 for s in strata)


def stabilizes(flavour: Flavour, perm: Mapping[int, int]) -> bool:
    pm = flavour.as_map()
    if sorted(perm) != sorted(pm) or sorted(perm.values()) != sorted(pm):
        return False
    return all(pm[perm[f]] == pm[f] for f in pm)


def sym_group(flavour: Flavour) -> list[dict[int, int]]:
    """All permutations of F preserving p, identity first."""
    labels = flavour.labels
    out = []
    for img in permutations(labels):
        perm = dict(zip(labels, img))
        if stabilizes(flavour, perm):
            out.append(perm)
    return out


def sym_act(stratum: PopsicleStratum, perm: Mapping[int, int]) -> PopsicleStratum:
    if not stabilizes(stratum.flavour, perm):
        raise ValueError(f"permutation {dict(perm)} does not stabilize p={stratum.flavour.p}")
    return PopsicleStratum(stratum.dec.relabel(perm), stratum.flavour)


def orbits(strata: Sequence[PopsicleStratum]) -> list[list[PopsicleStratum]]:
    if not strata:
        return []
    group = sym_group(strata[0].flavour)
    seen: set = set()
    out = []
    for s in strata:
        if s.dec in seen:
            continue
        orb = sorted({sym_act(s, g).dec for g in group}, key=FDecomposition.sort_key)
        seen.update(orb)
        out.append([PopsicleStratum(dec, s.flavour) for dec in orb])
    return out


@dataclass(frozen=True)
class SymPartition:
    parts: tuple[frozenset, ...]

    def check(self, flavour: Flavour) -> None:
        pm = flavour.as_map()
        flat = [f for part in self.parts for f in part]
        if sorted(flat) != sorted(pm):
            raise ValueError("parts must partition F")
        for part in self.parts:
            if len({pm[f] for f in part}) > 1:
                raise ValueError(f"p is not constant on part {sorted(part)}")


def isotropy_codim(P: SymPartition | Sequence[Iterable[int]]) -> int:
    parts = P.parts if isinstance(P, SymPartition) else tuple(frozenset(x) for x in P)
    return sum(len(part) - 1 for part in parts)


def face_covers(strata: Sequence[PopsicleStratum]) -> list[tuple[PopsicleStratum, PopsicleStratum]]:
    """Covering pairs (smaller face, larger face): contract one finite edge."""
    index = {s.dec: s for s in strata}
    out = []
    for s in strata:
        for e in s.dec.tree.finite_edges:
            big = s.dec.contract(e)
            if big not in index:
                raise RuntimeError(f"contracting {e} in {s} left the stratum list")
            out.append((s, index[big]))
    return sorted(set(out), key=lambda ab: (ab[0].dec.sort_key(), ab[1].dec.sort_key()))


def is_face(small: FDecomposition, big: FDecomposition) -> bool:
    """True if ``big`` arises from ``small`` by contracting finite edges."""
    if small == big:
        return True
    return any(is_face(small.contract(e), big) for e in small.tree.finite_edges
               if small.codim > big.codim)


def poset_records(strata: Sequence[PopsicleStratum]) -> list[str]:
    ids = {s.dec: n for n, s in enumerate(strata)}
    lines = [f"stratum s{ids[s.dec]} codim={s.codim} dec={s.dec.encode()}" for s in strata]
    for a, b in face_covers(strata):
        lines.append(f"face s{ids[a.dec]} < s{ids[b.dec]}")
    return lines


def poset_dot(strata: Sequence[PopsicleStratum], name: str = "strata") -> str:
    ids = {s.dec: n for n, s in enumerate(strata)}
    lines = [f"digraph {name} {{", "  rankdir=BT;"]
    for s in strata:
        lines.append(f'  s{ids[s.dec]} [label="{s.dec.encode()}\\ncodim {s.codim}"];')
    for a, b in face_covers(strata):
        lines.append(f"  s{ids[a.dec]} -> s{ids[b.dec]};")
    lines.append("}")
    return "\n".join(lines)
