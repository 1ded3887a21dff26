"""File formats and the command-line interface.

Every file is line oriented; blank lines and ``#`` comments are ignored.

    field Q                      (or: field 7)
    chord y1 weight=1 degree=0 [action=3/2] [from=L0] [to=L1] [winding=0] [location=inside]
    const d=2 F=1,2 w=4,1,1 in=x1,x2 out=x0 value=-1     (F=- for the empty set)
    formal y1                    (restriction files only)
    arrow src=y1 tgt=y2 value=1  (differential and continuation files)

Exit codes: 0 all checks pass, 1 a check failed, 2 malformed input.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence, TextIO

from . import ainfty_engine as engine
from . import cascade_moduli, popsicle_moduli, signs, symbolic_reducer
from . import viterbo_restriction as restriction
from . import wrapped_telescope as telescope
from .ainfty_engine import Chord, ConstantsTable
from .field_algebra import DSquaredError, Field, ModP
from .trees import Flavour

EXIT_OK, EXIT_FAIL, EXIT_MALFORMED = 0, 1, 2

CHORD_FIELDS = {"weight", "degree", "action", "from", "to", "winding", "location"}
CONST_FIELDS = {"d", "F", "w", "in", "out", "value"}
ARROW_FIELDS = {"src", "tgt", "value"}


class MalformedInput(ValueError):
    def __init__(self, source: str, lineno: int | None, message: str):
        where = f"{source}:{lineno}" if lineno is not None else source
        super().__init__(f"{where}: {message}")


# ---------------------------------------------------------------------------
# parsing

@dataclass
class Document:
    field: Field
    chords: dict[str, Chord]
    consts: list[tuple[int, dict]]
    formal: list[tuple[int, str]]
    arrows: list[tuple[int, dict]]
    source: str = "<input>"


def _fields(tokens: Sequence[str], allowed: set, required: set, source: str, lineno: int) -> dict:
    out = {}
    for tok in tokens:
        key, eq, val = tok.partition("=")
        if not eq:
            raise MalformedInput(source, lineno, f"expected key=value, got {tok!r}")
        if key not in allowed:
            raise MalformedInput(source, lineno, f"unknown field {key!r}")
        if key in out:
            raise MalformedInput(source, lineno, f"field {key!r} given twice")
        out[key] = val
    missing = required - set(out)
    if missing:
        raise MalformedInput(source, lineno, f"missing field(s) {', '.join(sorted(missing))}")
    return out


def _int(text: str, source: str, lineno: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise MalformedInput(source, lineno, f"{what} must be an integer, got {text!r}") from None


def _int_list(text: str, source: str, lineno: int, what: str) -> tuple[int, ...]:
    if text in ("", "-"):
        return ()
    return tuple(_int(t, source, lineno, what) for t in text.split(","))


def _id_list(text: str) -> tuple[str, ...]:
    return () if text in ("", "-") else tuple(text.split(","))


def parse_document(text: str, source: str = "<input>", default_field: Field | None = None) -> Document:
    field_: Field | None = None
    chords: dict[str, Chord] = {}
    consts, formal, arrows = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "field":
            if field_ is not None:
                raise MalformedInput(source, lineno, "field given twice")
            if len(rest) != 1:
                raise MalformedInput(source, lineno, "expected 'field Q' or 'field P'")
            try:
                field_ = Field.rationals() if rest[0] == "Q" else Field.prime(int(rest[0]))
            except ValueError as exc:
                raise MalformedInput(source, lineno, str(exc)) from None
        elif head == "chord":
            if not rest:
                raise MalformedInput(source, lineno, "chord needs an id")
            cid, *toks = rest
            if "=" in cid:
                raise MalformedInput(source, lineno, "chord id missing")
            if cid in chords:
                raise MalformedInput(source, lineno, f"duplicate chord id {cid}")
            f = _fields(toks, CHORD_FIELDS, {"weight", "degree"}, source, lineno)
            try:
                chords[cid] = Chord(
                    cid,
                    _int(f["weight"], source, lineno, "weight"),
                    _int(f["degree"], source, lineno, "degree"),
                    Fraction(f["action"]) if "action" in f else None,
                    f.get("from"),
                    f.get("to"),
                    _int(f["winding"], source, lineno, "winding") if "winding" in f else None,
                    f.get("location"),
                )
            except (ValueError, ZeroDivisionError) as exc:
                if isinstance(exc, MalformedInput):
                    raise
                raise MalformedInput(source, lineno, str(exc)) from None
        elif head == "const":
            consts.append((lineno, _fields(rest, CONST_FIELDS, {"d", "in", "out", "value"}, source, lineno)))
        elif head == "formal":
            if len(rest) != 1:
                raise MalformedInput(source, lineno, "formal takes exactly one chord id")
            formal.append((lineno, rest[0]))
        elif head == "arrow":
            arrows.append((lineno, _fields(rest, ARROW_FIELDS, ARROW_FIELDS, source, lineno)))
        else:
            raise MalformedInput(source, lineno, f"unknown record {head!r}")
    if field_ is None:
        if default_field is None:
            raise MalformedInput(source, None, "missing field header")
        field_ = default_field
    return Document(field_, chords, consts, formal, arrows, source)


def _fill(table: ConstantsTable, doc: Document) -> None:
    seen = set()
    for lineno, f in doc.consts:
        d = _int(f["d"], doc.source, lineno, "d")
        F = _int_list(f.get("F", "-"), doc.source, lineno, "F")
        ins = _id_list(f["in"])
        if len(ins) != d:
            raise MalformedInput(doc.source, lineno, f"{len(ins)} inputs for d={d}")
        for cid in (*ins, f["out"]):
            if cid not in table.chords:
                raise MalformedInput(doc.source, lineno, f"unresolved chord id {cid}")
        w = _int_list(f["w"], doc.source, lineno, "w") if "w" in f else None
        try:
            value = table.field.parse(f["value"])
        except ValueError as exc:
            raise MalformedInput(doc.source, lineno, str(exc)) from None
        key = table.key(d, F, ins, f["out"], w)
        if key in seen:
            raise MalformedInput(doc.source, lineno, f"duplicate constant {engine.format_key(key)}")
        seen.add(key)
        table.add(d, F, ins, f["out"], value, weights=w)


def parse_constants(text: str, source: str = "<constants>") -> ConstantsTable:
    doc = parse_document(text, source)
    if doc.formal or doc.arrows:
        raise MalformedInput(source, None, "constants files hold only field, chord and const records")
    table = ConstantsTable(doc.field, doc.chords)
    _fill(table, doc)
    return table


def parse_qconstants(text: str, source: str = "<q-constants>") -> restriction.QConstantsTable:
    doc = parse_document(text, source)
    if doc.arrows:
        raise MalformedInput(source, None, "arrow records are not allowed here")
    table = restriction.QConstantsTable(doc.field, doc.chords)
    _fill(table, doc)
    for lineno, cid in doc.formal:
        try:
            table.add_formal(cid)
        except ValueError as exc:
            raise MalformedInput(source, lineno, str(exc)) from None
    return table


def parse_chords(text: str, source: str = "<chords>") -> tuple[Field, dict[str, Chord]]:
    doc = parse_document(text, source)
    if doc.consts or doc.formal or doc.arrows:
        raise MalformedInput(source, None, "chord files hold only field and chord records")
    return doc.field, doc.chords


def parse_arrows(text: str, field_: Field, source: str = "<arrows>") -> list[tuple[str, str, Any]]:
    doc = parse_document(text, source, default_field=field_)
    if doc.field != field_:
        raise MalformedInput(source, None, f"field {doc.field} differs from the chord file's {field_}")
    if doc.chords or doc.consts or doc.formal:
        raise MalformedInput(source, None, "arrow files hold only field and arrow records")
    out = []
    for lineno, f in doc.arrows:
        try:
            out.append((f["src"], f["tgt"], field_.parse(f["value"])))
        except ValueError as exc:
            raise MalformedInput(source, lineno, str(exc)) from None
    return out


# ---------------------------------------------------------------------------
# emission

def format_scalar(field_: Field, x: Any) -> str:
    x = field_(x)
    if isinstance(x, ModP):
        return str(x.v)
    return field_.format(x)


def emit_chord(c: Chord) -> str:
    parts = [f"chord {c.id}", f"weight={c.weight}", f"degree={c.degree}"]
    if c.action is not None:
        parts.append(f"action={c.action}")
    if c.obj_from is not None:
        parts.append(f"from={c.obj_from}")
    if c.obj_to is not None:
        parts.append(f"to={c.obj_to}")
    if c.winding is not None:
        parts.append(f"winding={c.winding}")
    if c.location is not None:
        parts.append(f"location={c.location}")
    return " ".join(parts)


def emit_constants(table: ConstantsTable) -> str:
    lines = [f"field {table.field.header()}"]
    lines += [emit_chord(table.chords[c]) for c in sorted(table.chords)]
    for k in sorted(table.entries, key=engine._key_sort):
        d, F, w, ins, out = k
        lines.append(f"const d={d} F={','.join(map(str, F)) or '-'} w={','.join(map(str, w))} "
                     f"in={','.join(ins)} out={out} value={format_scalar(table.field, table.entries[k])}")
    for cid in sorted(getattr(table, "formal", ())):
        lines.append(f"formal {cid}")
    return "\n".join(lines) + "\n"


def emit_arrows(field_: Field, arrows: Iterable[tuple[str, str, Any]]) -> str:
    lines = [f"field {field_.header()}"]
    for s, t, c in arrows:
        lines.append(f"arrow src={s} tgt={t} value={format_scalar(field_, c)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands

def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise MalformedInput(path, None, f"cannot read file: {exc.strerror}") from None


def _flavour(text: str) -> Flavour:
    try:
        return Flavour(tuple(int(t) for t in text.split(",")) if text.strip() else ())
    except ValueError:
        raise MalformedInput("--p", None, f"expected comma-separated integers, got {text!r}") from None


def _subset(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",")) if text.strip() and text != "-" else ()
    except ValueError:
        raise MalformedInput("--F", None, f"expected comma-separated integers, got {text!r}") from None


def _basis(b) -> str:
    c, q = b
    return f"q{c}" if q else str(c)


def cmd_strata(args, out: TextIO) -> int:
    flavour = _flavour(args.p)
    strata = popsicle_moduli.enumerate_strata(args.d, flavour)
    fv = popsicle_moduli.f_vector(strata)
    print(f"f-vector: {','.join(map(str, fv))}", file=out)
    print(f"euler: {popsicle_moduli.euler_characteristic(strata)}", file=out)
    by_codim: dict[int, list[int]] = {}
    for orb in popsicle_moduli.orbits(strata):
        by_codim.setdefault(orb[0].codim, []).append(len(orb))
    for k in sorted(by_codim):
        print(f"orbits codim={k}: {','.join(map(str, sorted(by_codim[k], reverse=True)))}", file=out)
    if args.dot:
        print(popsicle_moduli.poset_dot(strata), file=out)
    else:
        for line in popsicle_moduli.poset_records(strata):
            print(line, file=out)
    return EXIT_OK


def cmd_cascades(args, out: TextIO) -> int:
    flavour = _flavour(args.p)
    comps = cascade_moduli.enumerate_components(args.d, flavour)
    print(f"components: {len(comps)} dim={cascade_moduli.component_dimension(args.d, flavour)}", file=out)
    for dec in comps:
        print(f"component {dec.encode()} faces={','.join(map(str, cascade_moduli.face_counts(dec)))}", file=out)
    for s in cascade_moduli.enumerate_cascade_strata(args.d, flavour, args.max_codim):
        print(f"stratum codim={s.codim} {s}", file=out)
    if args.w:
        w = _subset(args.w)
        ends, bnds = cascade_moduli.classify_ends(args.d, flavour, w)
        print(f"ends: {len(ends)} boundaries: {len(bnds)}", file=out)
        for e in ends:
            print(str(e), file=out)
        for b in bnds:
            print(str(b), file=out)
    return EXIT_OK


def cmd_cuts(args, out: TextIO) -> int:
    F = _subset(args.F)
    degs = _subset(args.degs) if args.degs else (0,) * args.d
    if len(degs) != args.d:
        raise MalformedInput("--degs", None, f"need {args.d} degrees")
    ok = True
    for cut in signs.enumerate_cuts(args.d, F):
        parts = [cut.label(), f"stable={'yes' if cut.stable else 'no'}",
                 f"relation={signs.relation_sign(cut, degs)}"]
        if cut.stable:
            a, b = signs.sign_aleph(cut, degs), signs.aleph_via_triangle(cut, degs)
            parts += [f"aleph={a}", f"via-triangle={b}", f"triangle={signs.sign_triangle(cut)}"]
            ok &= a == b
        if args.d == 1:
            parts.append(f"strip={signs.sign_unstable([f for _, f in cut.iota_plus], [f for _, f in cut.iota_minus])}")
        print("cut " + " ".join(parts), file=out)
    print("routes agree" if ok else "routes DISAGREE", file=out)
    return EXIT_OK if ok else EXIT_FAIL


def _load_valid(path: str) -> tuple[ConstantsTable, list]:
    table = parse_constants(_read(path), path)
    try:
        return table, engine.validate(table)
    except ValueError as exc:
        raise MalformedInput(path, None, str(exc)) from None


def cmd_assemble(args, out: TextIO) -> int:
    table, problems = _load_valid(args.constants)
    for v in problems:
        print(str(v), file=out)
    if problems:
        print(f"invalid: {len(problems)} violation(s)", file=out)
        return EXIT_FAIL
    print(f"valid: {len(table.entries)} constant(s)", file=out)
    mu = engine.assemble_mu(table, top_weight=args.top_weight)
    for t in sorted(mu.values, key=lambda t: (len(t), [(str(c), q) for c, q in t])):
        for b in sorted(mu.values[t], key=lambda b: (str(b[0]), b[1])):
            print(f"mu d={len(t)} in=({','.join(map(_basis, t))}) out={_basis(b)} "
                  f"value={table.field.format(mu.values[t][b])}", file=out)
    return EXIT_OK


def cmd_check_ainfty(args, out: TextIO) -> int:
    table, problems = _load_valid(args.constants)
    for v in problems:
        print(str(v), file=out)
    if problems:
        return EXIT_FAIL
    mu = engine.assemble_mu(table, top_weight=args.top_weight)
    try:
        res = engine.check_ainfty(mu, args.max_d, max_generators=args.max_generators)
    except ValueError as exc:
        print(f"error: {exc}", file=out)
        return EXIT_FAIL
    for r in res:
        print(r.describe(table.field), file=out)
    print(f"residuals: {len(res)} (d ≤ {args.max_d})", file=out)
    return EXIT_OK if not res else EXIT_FAIL


def _sparse_maps(field_, chords, arrows, kind, W, source):
    from .field_algebra import SparseMap

    mods = {w: telescope.weight_module(chords.values(), w, field_) for w in range(1, W + 2)}
    grouped: dict[int, list] = {}
    for s, t, c in arrows:
        for cid in (s, t):
            if cid not in chords:
                raise MalformedInput(source, None, f"unresolved chord id {cid}")
        ws, wt = chords[s].weight, chords[t].weight
        if (kind == "delta" and wt != ws) or (kind == "kappa" and wt != ws + 1):
            raise MalformedInput(source, None, f"arrow {s}→{t} has the wrong weights for {kind}")
        if ws <= W:
            grouped.setdefault(ws, []).append((s, t, c))
    out = {}
    for w, arr in grouped.items():
        if kind == "kappa" and w >= W:
            continue
        tgt = mods[w] if kind == "delta" else mods[w + 1]
        try:
            out[w] = telescope.sparse_from_arrows(mods[w], tgt, arr, 1 if kind == "delta" else 0)
        except ValueError as exc:
            raise MalformedInput(source, None, str(exc)) from None
    return out


def cmd_telescope(args, out: TextIO) -> int:
    field_, chords = parse_chords(_read(args.chords), args.chords)
    delta = _sparse_maps(field_, chords, parse_arrows(_read(args.delta), field_, args.delta), "delta", args.W, args.delta)
    kappa = _sparse_maps(field_, chords, parse_arrows(_read(args.kappa), field_, args.kappa), "kappa", args.W, args.kappa)
    try:
        tc = telescope.build_telescope(chords.values(), delta, kappa, args.W, args.mode, field_)
    except (DSquaredError, telescope.ChainMapError) as exc:
        print(f"rejected: {exc}", file=out)
        return EXIT_FAIL
    h = tc.homology()
    print(f"homology ({args.mode}, W={args.W}): " +
          (" ".join(f"H^{k}={b}" for k, b in sorted(h.items())) or "0"), file=out)
    ok = True
    nus = [args.nu] if args.nu else range(1, args.W + 1)
    for nu in nus:
        r = telescope.check_partial_forget(tc, nu)
        ok &= r
        print(f"partial-forget nu={nu}: {'pass' if r else 'FAIL'}", file=out)
    if args.mode == "C_W":
        rep = telescope.check_homotopy_limit(tc)
        ok &= bool(rep)
        print(f"homotopy-limit: top-inclusion {'pass' if rep.top_iso else 'FAIL'}, "
              f"homotopy {'pass' if rep.homotopy_ok else 'FAIL'}", file=out)
        for f in rep.failures:
            print(f"  {f}", file=out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_restrict(args, out: TextIO) -> int:
    m, p1 = _load_valid(args.m)
    m_in, p2 = _load_valid(args.m_in)
    q = parse_qconstants(_read(args.q), args.q)
    try:
        p3 = restriction.validate_q(q)
    except ValueError as exc:
        raise MalformedInput(args.q, None, str(exc)) from None
    problems = p1 + p2 + p3
    for v in problems:
        print(str(v), file=out)
    if problems:
        return EXIT_FAIL
    qres = restriction.check_q_relations(m, m_in, q)
    for r in qres:
        print(r.describe(m.field), file=out)
    print(f"q-relation residuals: {len(qres)}", file=out)
    hres = restriction.check_restriction(m, m_in, q, args.max_d)
    for r in hres:
        print(r.describe(m.field), file=out)
    print(f"homomorphism residuals: {len(hres)} (d ≤ {args.max_d})", file=out)
    chords = list(q.chords.values())
    if chords and all(c.action is not None and c.location is not None for c in chords):
        profile = restriction.ActionProfile.from_chords(chords)
        try:
            print(f"nu: {restriction.nu_threshold(profile)}", file=out)
        except ValueError as exc:
            print(f"nu: none ({exc})", file=out)
        for k in sorted(q.entries, key=engine._key_sort):
            d, F, w, ins, x0 = k
            try:
                rho = restriction.rho_threshold(profile, d, F, w, x0)
                print(f"rho* {engine.format_key(k)}: {rho}", file=out)
            except ValueError as exc:
                print(f"rho* {engine.format_key(k)}: n/a ({exc})", file=out)
    else:
        print("thresholds: skipped (chords lack action or location)", file=out)
    return EXIT_OK if not qres and not hres else EXIT_FAIL


def cmd_symbolic(args, out: TextIO) -> int:
    F = _subset(args.F)
    degree_values = _subset(args.degrees)
    try:
        certs = symbolic_reducer.certificate(args.d, F, degree_values, _subset(args.weights))
    except ValueError as exc:
        raise MalformedInput("symbolic", None, str(exc)) from None
    ok = True
    for c in certs:
        print(c.line(), file=out)
        if args.verbose:
            for line in symbolic_reducer.expand_as(c.d, c.F, c.weights, c.degs).lines():
                print(f"  {line}", file=out)
        ok &= c.ok and c.pinned
    print(f"certificate: {len(certs)} configuration(s), {'all residuals zero' if ok else 'NONZERO residual'}",
          file=out)
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wrapped-ainfty", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("strata", help="strata of popsicle moduli spaces")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--p", default="", help="comma-separated sprinkle leaves")
    s.add_argument("--dot", action="store_true", help="emit the face poset as DOT")
    s.set_defaults(func=cmd_strata)

    s = sub.add_parser("cascades", help="cascade components and strata")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--p", default="")
    s.add_argument("--max-codim", type=int, default=1)
    s.add_argument("--w", default="", help="weights w0,...,wd to list ends and boundaries")
    s.set_defaults(func=cmd_cascades)

    s = sub.add_parser("cuts", help="admissible cuts and their signs")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--F", default="")
    s.add_argument("--degs", default="")
    s.set_defaults(func=cmd_cuts)

    for name, func in (("assemble", cmd_assemble), ("check-ainfty", cmd_check_ainfty)):
        s = sub.add_parser(name)
        s.add_argument("--constants", required=True)
        s.add_argument("--top-weight", type=int, default=None)
        if name == "check-ainfty":
            s.add_argument("--max-d", type=int, default=4)
            s.add_argument("--max-generators", type=int, default=64)
        s.set_defaults(func=func)

    s = sub.add_parser("telescope", help="telescope homology and lemma checks")
    s.add_argument("--chords", required=True)
    s.add_argument("--delta", required=True)
    s.add_argument("--kappa", required=True)
    s.add_argument("--W", type=int, required=True)
    s.add_argument("--nu", type=int, default=None)
    s.add_argument("--mode", choices=telescope.MODES, default="C_W")
    s.set_defaults(func=cmd_telescope)

    s = sub.add_parser("restrict", help="restriction relations and thresholds")
    s.add_argument("--m", required=True)
    s.add_argument("--m-in", required=True)
    s.add_argument("--q", required=True)
    s.add_argument("--max-d", type=int, default=1)
    s.set_defaults(func=cmd_restrict)

    s = sub.add_parser("symbolic", help="reduction certificate")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--F", default="")
    s.add_argument("--degrees", default="0,1")
    s.add_argument("--weights", default="1,2")
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(func=cmd_symbolic)
    return ap


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_MALFORMED if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except MalformedInput as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except ValueError as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
