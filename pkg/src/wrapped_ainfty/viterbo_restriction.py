"""Action filters, the ρ- and ν-thresholds, restriction constants and the maps F^d."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Iterable, Mapping, Sequence

from .ainfty_engine import (Chord, ConstantsTable, OperationFamily, Residual, Violation, _assemble,
                            check_homomorphism, validate)
from .field_algebra import Field
from .signs import sign_functor

LOCATIONS = ("inside", "outside")


# ---------------------------------------------------------------------------
# actions

@dataclass(frozen=True)
class ActionEntry:
    action: Fraction
    location: str
    weight: int | None = None


@dataclass(frozen=True)
class ActionProfile:
    entries: Mapping[str, ActionEntry]

    def __post_init__(self):
        for cid, e in self.entries.items():
            if e.location not in LOCATIONS:
                raise ValueError(f"chord {cid}: location must be inside or outside")

    @classmethod
    def from_chords(cls, chords: Iterable[Chord]) -> "ActionProfile":
        out = {}
        for c in chords:
            if c.action is None or c.location is None:
                raise ValueError(f"chord {c.id} needs an action and a location")
            out[c.id] = ActionEntry(Fraction(c.action), c.location, c.weight)
        return cls(out)

    def action(self, cid: str) -> Fraction:
        try:
            return self.entries[cid].action
        except KeyError:
            raise ValueError(f"missing action for chord {cid}") from None

    def location(self, cid: str) -> str:
        return self.entries[cid].location


def e_top(profile: ActionProfile, x0: str, inputs: Sequence[str]) -> Fraction:
    """A(x^0) - Σ A(x^k)."""
    return profile.action(x0) - sum((profile.action(x) for x in inputs), Fraction(0))


def classify(profile: ActionProfile, x0: str, inputs: Sequence[str]) -> str:
    """"feasible", "trivial-solution only" or "empty"."""
    e = e_top(profile, x0, inputs)
    if e < 0:
        return "empty"
    if e == 0 and list(inputs) == [x0]:
        return "trivial-solution only"
    return "feasible"


def feasible(profile: ActionProfile, x0: str, inputs: Sequence[str]) -> bool:
    """Necessary condition for nonempty moduli: nonnegative topological energy."""
    return e_top(profile, x0, inputs) >= 0


def rescale_action(profile: ActionProfile, rho: Fraction) -> ActionProfile:
    """Inside actions scale by ρ, outside actions stay."""
    rho = Fraction(rho)
    if not 0 < rho <= 1:
        raise ValueError(f"ρ={rho} must lie in (0, 1]")
    return ActionProfile({cid: ActionEntry(e.action * rho if e.location == "inside" else e.action,
                                           e.location, e.weight)
                          for cid, e in profile.entries.items()})


def nu_threshold(profile: ActionProfile, weights: Iterable[int] | None = None) -> int:
    """Smallest ν with every outside chord of weight ≥ ν of positive action."""
    ws = {e.weight for e in profile.entries.values()} if weights is None else set(weights)
    if None in ws:
        raise ValueError("every chord needs a weight")
    bad = [e.weight for e in profile.entries.values() if e.location == "outside" and e.action <= 0]
    if any(w is None for w in bad):
        raise ValueError("every outside chord needs a weight")
    nu = max(bad, default=0) + 1
    if bad and nu > max(ws):
        raise ValueError(f"no valid ν within the weight range 1..{max(ws)}")
    return nu


def rho_threshold(profile: ActionProfile, d: int, F: Iterable[int], weights: Sequence[int],
                  x0: str) -> Fraction:
    """Largest ρ* such that ρ·A(x^0) - ρ·Σ_in A - Σ_out A < 0 for all ρ < ρ*,
    over every input tuple of the given weights containing an outside chord."""
    F = list(F)
    if len(weights) != d + 1:
        raise ValueError(f"need {d + 1} weights")
    if weights[0] != sum(weights[1:]) + len(F):
        raise ValueError("weight law violated")
    if profile.location(x0) != "inside":
        raise ValueError(f"output {x0} must be an inside chord")
    if profile.entries[x0].weight not in (None, weights[0]):
        raise ValueError(f"output {x0} does not have weight {weights[0]}")
    by_weight = {w: sorted(c for c, e in profile.entries.items() if e.weight == w) for w in set(weights[1:])}
    A0 = profile.action(x0)
    best = Fraction(1)
    for tup in product(*(by_weight[w] for w in weights[1:])):
        outside = [x for x in tup if profile.location(x) == "outside"]
        if not outside:
            continue
        s_out = sum((profile.action(x) for x in outside), Fraction(0))
        if s_out <= 0:
            raise ValueError(f"outside actions of {tup} are not positive; weights are below ν")
        B = A0 - sum((profile.action(x) for x in tup if profile.location(x) == "inside"), Fraction(0))
        if B > 0:
            best = min(best, s_out / B)
    return best


# ---------------------------------------------------------------------------
# restriction constants

@dataclass
class QConstantsTable(ConstantsTable):
    """Constants counting cascades; ``formal`` lists inside chords x whose
    projection point (an identity summand x ↦ x) is included."""

    kind: str = "q"
    formal: set = field(default_factory=set)

    def add_formal(self, cid: str) -> None:
        c = self.chords.get(cid)
        if c is None:
            raise ValueError(f"unresolved chord id {cid}")
        if c.location != "inside":
            raise ValueError(f"projection point needs an inside chord, got {cid}")
        self.formal.add(cid)

    def add_all_formal(self) -> None:
        for cid in sorted(self.chords):
            if self.chords[cid].location == "inside":
                self.add_formal(cid)

    def lookup(self):
        idx = {k: list(v) for k, v in super().lookup().items()}
        for cid in sorted(self.formal):
            idx.setdefault((1, (), (cid,)), []).append((cid, self.field.one))
        return idx

    def copy(self) -> "QConstantsTable":
        return QConstantsTable(self.field, dict(self.chords), dict(self.entries), "q", set(self.formal))


def validate_q(qtable: QConstantsTable) -> list[Violation]:
    if qtable.kind != "q":
        raise ValueError("not a restriction table")
    return validate(qtable)


def inside_chords(chords: Mapping[str, Chord]) -> dict[str, Chord]:
    return {c: ch for c, ch in chords.items() if ch.location == "inside"}


def assemble_F(qtable: QConstantsTable, chords: Mapping[str, Chord] | None = None) -> OperationFamily:
    """F^d on the q-extended groups; F¹(a + qb) = γa + qγb + λb plus the projection points."""
    chords = qtable.chords if chords is None else dict(chords)
    problems = validate_q(qtable)
    if problems:
        raise ValueError("invalid restriction table: " + "; ".join(map(str, problems)))
    inside = inside_chords(chords)
    return _assemble(qtable.lookup(), chords, qtable.field, sign_functor, False, None,
                     extra_d1=sorted(qtable.formal), keep_output=lambda b: b[0] in inside)


@dataclass(frozen=True)
class QResidual:
    relation: str
    weight: int
    source: str
    target: str
    value: Any

    def describe(self, field_: Field) -> str:
        return (f"residual {self.relation} w={self.weight} x1={self.source} x0={self.target} "
                f"value={field_.format(self.value)}")


def _linear(idx: Mapping, F: tuple) -> dict[str, dict[str, Any]]:
    out: dict = {}
    for (d, FF, ins), outs in idx.items():
        if d == 1 and FF == F:
            col = out.setdefault(ins[0], {})
            for o, v in outs:
                col[o] = col.get(o, 0) + v
    return out


def _apply(m: Mapping, vec: Mapping) -> dict:
    out: dict = {}
    for s, c in vec.items():
        for t, v in m.get(s, {}).items():
            out[t] = out.get(t, 0) + v * c
    return out


def _comb(*terms: tuple[int, dict]) -> dict:
    out: dict = {}
    for sgn, vec in terms:
        for k, v in vec.items():
            out[k] = out.get(k, 0) + (v if sgn > 0 else -v)
    return {k: v for k, v in out.items() if v}


def check_q_relations(m_table: ConstantsTable, m_in_table: ConstantsTable,
                      qtable: QConstantsTable) -> list[QResidual]:
    """The two arity-one relations; all residuals vanish iff F¹ is a chain map.

    q0: δ^in γ - γ δ = 0
    q1: -δ^in λ + κ^in γ - γ κ - λ δ = 0
    """
    for cid, ch in m_in_table.chords.items():
        src = m_table.chords.get(cid)
        if src is not None and (src.weight, src.degree) != (ch.weight, ch.degree):
            raise ValueError(f"chord {cid} differs between the two tables")
    idx_m, idx_in, idx_q = m_table.lookup(), m_in_table.lookup(), qtable.lookup()
    delta, kappa = _linear(idx_m, ()), _linear(idx_m, (1,))
    delta_in, kappa_in = _linear(idx_in, ()), _linear(idx_in, (1,))
    gamma, lam = _linear(idx_q, ()), _linear(idx_q, (1,))
    out = []
    for x1 in sorted(m_table.chords):
        e = {x1: 1}
        q0 = _comb((1, _apply(delta_in, _apply(gamma, e))), (-1, _apply(gamma, _apply(delta, e))))
        q1 = _comb((-1, _apply(delta_in, _apply(lam, e))), (1, _apply(kappa_in, _apply(gamma, e))),
                   (-1, _apply(gamma, _apply(kappa, e))), (-1, _apply(lam, _apply(delta, e))))
        w = m_table.chords[x1].weight
        for name, res in (("q0", q0), ("q1", q1)):
            for x0 in sorted(res):
                out.append(QResidual(name, w, x1, x0, res[x0]))
    return out


def check_restriction(m_table: ConstantsTable, m_in_table: ConstantsTable, qtable: QConstantsTable,
                      max_d: int = 1) -> list[Residual]:
    """Residuals of the A∞-homomorphism equations for the assembled F^d."""
    from .ainfty_engine import assemble_mu

    return check_homomorphism(assemble_mu(m_table), assemble_mu(m_in_table), assemble_F(qtable), max_d)


# ---------------------------------------------------------------------------
# annulus counterexample

@dataclass(frozen=True)
class AnnulusReport:
    pairs: tuple[tuple[int, int, int, int], ...]   # (i, j, target corner i, target corner j)

    @property
    def obstructed(self) -> bool:
        return bool(self.pairs)

    def lines(self) -> list[str]:
        if not self.pairs:
            return ["no corner-dimension obstruction"]
        return [f"obstruction: blocks {i},{j} isomorphic in the source but target corners have rank "
                f"{a} ≠ {b}" for i, j, a, b in self.pairs]


def annulus_obstruction(block_sizes_in: Sequence[int], block_sizes_out: Sequence[int]) -> AnnulusReport:
    """Unit- and splitting-compatible ring maps must match corner algebras.

    Source blocks i, j of equal size have isomorphic corners (via the
    off-diagonal matrix units), so the target corners, free of rank n_i² and
    n_j², must have equal rank.
    """
    n, m = list(block_sizes_in), list(block_sizes_out)
    if len(n) != len(m):
        raise ValueError("splittings must have the same number of blocks")
    if any(k < 1 for k in n + m):
        raise ValueError("block sizes must be positive")
    pairs = []
    for i in range(len(m)):
        for j in range(i + 1, len(m)):
            if m[i] == m[j] and n[i] != n[j]:
                pairs.append((i + 1, j + 1, n[i] * n[i], n[j] * n[j]))
    return AnnulusReport(tuple(pairs))
