"""Command-line interface and the JSON interchange formats.

Exit codes: 0 success, 1 I/O or parse error, 2 invalid input,
3 maximality of the self-local equivalence could not be certified.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .connected import DEFAULT_CAP, DEFAULT_RESTARTS, ConnectedReport, connected_report
from .graded_roots import (
    InvalidRoot,
    SymmetricGradedRoot,
    monotone_subroot,
    realize,
    root_connected_homology,
)
from .involutive import ParityViolation, correction_terms
from .iota_complex import IotaComplex, InvalidInput, NotLocal, dual, reduce, tensor, validate
from .surgery import (
    InvalidStaircase,
    InvalidVSequence,
    Staircase,
    TruncationUnstable,
    Unsorted,
    VSequence,
    surgery_homology,
    surgery_root,
    torus_staircase,
    vs_from_staircase,
)
from .ufu_algebra import (
    MixedCoset,
    MonomialMatrix,
    NotAComplex,
    TruncationTooSmall,
    format_grading,
    homology,
    oracle_module,
    to_grading,
)

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_UNCERTIFIED = 0, 1, 2, 3

_INVALID = (
    InvalidInput,
    InvalidRoot,
    InvalidStaircase,
    InvalidVSequence,
    MixedCoset,
    NotAComplex,
    NotLocal,
    ParityViolation,
    TruncationTooSmall,
    TruncationUnstable,
    Unsorted,
)


class ParseError(ValueError):
    """Malformed file: bad JSON, missing fields, unknown ids."""


# ---------------------------------------------------------------------------
# Complex files


def _map_entries(m: MonomialMatrix, names) -> list[dict]:
    return [{"from": names[c], "to": names[r], "upow": k} for r, c, k in sorted(m.entries(), key=lambda e: (e[1], e[0]))]


def complex_to_json(C: IotaComplex) -> dict:
    return {
        "name": C.name,
        "generators": [{"id": x, "gr": format_grading(g)} for x, g in zip(C.names, C.gradings)],
        "differential": _map_entries(C.d, C.names),
        "iota": _map_entries(C.iota, C.names),
    }


def complex_from_json(data: dict) -> IotaComplex:
    try:
        gens = data["generators"]
        names = [str(g["id"]) for g in gens]
        grs = [to_grading(g["gr"]) for g in gens]
        index = {x: i for i, x in enumerate(names)}
        if len(index) != len(names):
            raise InvalidInput("generator ids are not unique")

        def build(entries, degree, label):
            sup = np.zeros((len(names),) * 2, dtype=np.uint8)
            claimed = []
            for e in entries:
                r, c = index[str(e["to"])], index[str(e["from"])]
                sup[r, c] ^= 1
                claimed.append((r, c, int(e["upow"])))
            try:
                m = MonomialMatrix(grs, grs, degree, sup)
            except ValueError as exc:
                raise InvalidInput(f"{label}: {exc}") from None
            for r, c, k in claimed:
                if m.exponent(r, c) != k:
                    raise InvalidInput(
                        f"{label}: upow {k} for {names[c]} -> {names[r]} disagrees with the gradings "
                        f"(forced {m.exponent(r, c)})"
                    )
            return m

        d = build(data.get("differential", []), -1, "differential")
        iota = build(data.get("iota", []), 0, "iota")
        return IotaComplex(names, grs, d, iota, name=str(data.get("name", "")))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, _INVALID):
            raise
        raise ParseError(f"malformed complex file: missing or bad field {exc}") from None


# ---------------------------------------------------------------------------
# Root files


def root_to_json(M: SymmetricGradedRoot) -> dict:
    J = M.involution
    return {
        "vertices": [{"id": x, "gr": format_grading(g)} for x, g in zip(M.ids, M.gradings)],
        "edges": [[M.ids[v], M.ids[M.down[v]]] for v in range(len(M.ids)) if M.down[v] != -1],
        "involution": [[M.ids[v], M.ids[J[v]]] for v in range(len(M.ids)) if v <= J[v]],
        "stem_bottom": M.ids[M.stem_bottom],
    }


def root_from_json(data: dict) -> SymmetricGradedRoot:
    try:
        ids = [str(v["id"]) for v in data["vertices"]]
        grs = [to_grading(v["gr"]) for v in data["vertices"]]
        index = {x: i for i, x in enumerate(ids)}
        edges = [(index[str(a)], index[str(b)]) for a, b in data["edges"]]
        J = list(range(len(ids)))
        for a, b in data.get("involution", []):
            J[index[str(a)]], J[index[str(b)]] = index[str(b)], index[str(a)]
        return SymmetricGradedRoot(ids, grs, edges, index[str(data["stem_bottom"])], J)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, _INVALID):
            raise
        raise ParseError(f"malformed root file: {exc}") from None


def canonical_root(M: SymmetricGradedRoot) -> SymmetricGradedRoot:
    """The same root rebuilt from its leaf sequence, with ids ``v0, v1, ...``."""
    return SymmetricGradedRoot.from_leaves(*M.leaf_sequence())


# ---------------------------------------------------------------------------
# Reports


def report_to_json(rep: ConnectedReport, timings: bool = False) -> dict:
    out = {
        "d_lower": format_grading(rep.d_lower),
        "d": format_grading(rep.d),
        "d_upper": format_grading(rep.d_upper),
        "omega": rep.omega,
        "towers": [{"top": format_grading(a), "len": n} for a, n in rep.towers],
        "certificate": rep.certificate,
    }
    if timings:
        out["timings"] = {k: round(v, 6) for k, v in rep.timings.items()}
    return out


def report_text(rep: ConnectedReport, timings: bool = False) -> str:
    towers = " + ".join(f"T_{format_grading(a)}({n})" for a, n in rep.towers) or "0"
    lines = [
        f"d_lower  {format_grading(rep.d_lower)}",
        f"d        {format_grading(rep.d)}",
        f"d_upper  {format_grading(rep.d_upper)}",
        f"omega    {rep.omega}",
        f"H_conn   {towers}",
        f"certified {'yes' if rep.certificate else 'no'}",
    ]
    if timings:
        lines += [f"time {k} {v:.4f}s" for k, v in rep.timings.items()]
    return "\n".join(lines) + "\n"


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _read_json(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot write {path}: {exc.strerror}") from None


def _emit_report(args, rep: ConnectedReport) -> int:
    if args.format == "json":
        _write(dumps(report_to_json(rep, args.timings)), None)
    else:
        _write(report_text(rep, args.timings), None)
    return EXIT_OK if rep.certificate else EXIT_UNCERTIFIED


def _run_report(args, C: IotaComplex) -> ConnectedReport:
    if getattr(args, "truncation", None) is not None:
        if oracle_module(C.d, args.truncation) != homology(C.d):
            raise TruncationTooSmall(f"truncated homology at U^{args.truncation} disagrees with the exact homology")
    clock = time.perf_counter if args.timings else None
    return connected_report(C, mode=args.mode, seed=args.seed, cap=args.cap, restarts=args.restarts, clock=clock)


# ---------------------------------------------------------------------------
# Commands


def cmd_validate(args) -> int:
    C = complex_from_json(_read_json(args.path))
    rep = validate(C)
    if args.format == "json":
        body = {"valid": rep.ok, "failures": [{"check": k, "witness": w} for k, w in rep.failures]}
        _write(dumps(body), None)
    else:
        _write("valid\n" if rep.ok else "".join(f"{k}: {w}\n" for k, w in rep.failures), None)
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_invariants(args) -> int:
    C = complex_from_json(_read_json(args.path))
    return _emit_report(args, _run_report(args, C))


def cmd_tensor(args) -> int:
    Cs = [complex_from_json(_read_json(p)) for p in args.paths]
    out = Cs[0]
    for C in Cs[1:]:
        out = tensor(out, C)
    if args.reduce:
        out = reduce(out)
    _write(dumps(complex_to_json(out)), args.output)
    return EXIT_OK


def cmd_dual(args) -> int:
    C = dual(complex_from_json(_read_json(args.path)))
    _write(dumps(complex_to_json(C)), args.output)
    return EXIT_OK


def _pair(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected p,q")
    return int(parts[0]), int(parts[1])


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def cmd_surgery(args) -> int:
    if args.framing >= 0:
        raise InvalidInput("only negative integer framings are supported")
    n = -args.framing
    if args.torus is not None:
        V = vs_from_staircase(torus_staircase(*args.torus))
    elif args.staircase is not None:
        V = vs_from_staircase(Staircase(args.staircase))
    else:
        V = VSequence(args.vseq)
    surgery_homology(V, n)
    root = surgery_root(V, n)
    C = realize(root)
    if args.emit_root:
        _write(dumps(root_to_json(root)), args.emit_root)
    if args.emit_complex:
        _write(dumps(complex_to_json(C)), args.emit_complex)
    return _emit_report(args, _run_report(args, C))


def cmd_root(args) -> int:
    M = root_from_json(_read_json(args.path))
    if args.action == "subroot":
        _write(dumps(root_to_json(monotone_subroot(M).to_root())), args.output)
        return EXIT_OK
    t0 = time.perf_counter()
    H = root_connected_homology(M)
    lo, d, hi = correction_terms(reduce(realize(M)))
    timings = {"root": time.perf_counter() - t0} if args.timings else {}
    rep = ConnectedReport(lo, d, hi, H.max_tower_length(), H.towers, True, timings)
    return _emit_report(args, rep)


# ---------------------------------------------------------------------------
# Parser


def _report_flags(p: argparse.ArgumentParser, search: bool = True) -> None:
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings (not byte-stable)")
    if not search:
        return
    p.add_argument("--mode", choices=("exhaustive", "greedy"), default="exhaustive")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truncation", type=int, default=None, help="cross-check homology against C/U^N")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest search dimension enumerated exhaustively")
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS, help="candidate budget of the algebraic search")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iota-forge", description="Invariants of ι-complexes over F2[U].")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the ι-complex axioms")
    p.add_argument("path")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("invariants", help="correction terms, connected homology and omega")
    p.add_argument("path")
    _report_flags(p)
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("tensor", help="tensor product of complex files")
    p.add_argument("paths", nargs="+")
    p.add_argument("-o", "--output")
    p.add_argument("--reduce", action="store_true", help="cancel unit differentials before writing")
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("dual", help="dual complex")
    p.add_argument("path")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("surgery", help="negative surgery on an L-space knot")
    knot = p.add_mutually_exclusive_group(required=True)
    knot.add_argument("--torus", type=_pair, metavar="P,Q")
    knot.add_argument("--staircase", type=_int_list, metavar="S1,S2,...")
    knot.add_argument("--vseq", type=_int_list, metavar="V0,V1,...")
    p.add_argument("--framing", type=int, required=True, metavar="-N")
    p.add_argument("--emit-root", metavar="FILE")
    p.add_argument("--emit-complex", metavar="FILE")
    _report_flags(p)
    p.set_defaults(func=cmd_surgery)

    p = sub.add_parser("root", help="graded-root operations")
    p.add_argument("action", choices=("subroot", "conn"))
    p.add_argument("path")
    p.add_argument("-o", "--output")
    _report_flags(p, search=False)
    p.set_defaults(func=cmd_root)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _INVALID as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
