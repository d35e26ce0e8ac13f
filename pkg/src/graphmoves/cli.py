"""Command-line interface.  Exit codes: 0 success, 1 domain error, 2 usage error."""

from __future__ import annotations

import argparse
import json
import sys
from typing import TextIO

from .canonical import Certificate, CertificateError, canonicalize, check_canonical, verify_certificate
from .core import DBPair, Graph, GraphError, components, from_db, fresh_name, to_db, validate_graph, vertex_class
from .extnat import dump, parse
from .ktheory import component_cok, component_k0, pointed_k0
from .matops import CompileError, OpError, OpRecord, apply_op, normalize
from .moves import Move, MoveError, MoveScript, ScriptError, apply_move, apply_script

GRAPH_KEYS = {"vertices", "adjacency"}
DB_KEYS = {"vertices", "B", "D"}
DB_OPTIONAL = {"source", "source_pos"}


class InputError(ValueError):
    pass


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _load_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _matrix(rows, what):
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise InputError(f"{what} must be a list of lists")
    try:
        return [[parse(x) for x in r] for r in rows]
    except (ValueError, TypeError, OverflowError) as exc:
        raise InputError(f"{what}: {exc}") from None


def parse_graph(data: bytes | str) -> Graph:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    obj = _load_json(text, "graph")
    if not isinstance(obj, dict):
        raise InputError("graph: top level must be an object")
    if set(obj) != GRAPH_KEYS:
        extra, missing = set(obj) - GRAPH_KEYS, GRAPH_KEYS - set(obj)
        raise InputError(f"graph: unexpected keys {sorted(extra)}, missing {sorted(missing)}")
    names = obj["vertices"]
    if not isinstance(names, list) or not all(isinstance(v, str) for v in names):
        raise InputError("graph: vertices must be a list of strings")
    adj = _matrix(obj["adjacency"], "graph adjacency")
    if len(adj) != len(names) or any(len(r) != len(names) for r in adj):
        raise InputError("graph: adjacency must be square with one row per vertex")
    try:
        return Graph.make(names, adj)
    except GraphError as exc:
        raise InputError(f"graph: {exc}") from None


def graph_to_json(g: Graph) -> dict:
    return {"vertices": list(g.vertices), "adjacency": [[dump(x) for x in r] for r in g.adjacency]}


def emit_graph(g: Graph) -> bytes:
    return canonical_json(graph_to_json(g)).encode("utf-8")


def pair_to_json(p: DBPair) -> dict:
    return {
        "vertices": list(p.names),
        "B": [[dump(x) for x in r] for r in p.b],
        "D": [dump(x) for x in p.d],
        "source": p.source_name,
        "source_pos": p.source_pos,
    }


def parse_pair(obj: dict) -> DBPair:
    keys = set(obj)
    if not DB_KEYS <= keys or keys - DB_KEYS - DB_OPTIONAL:
        raise InputError(f"pair: expected keys {sorted(DB_KEYS)} (optionally {sorted(DB_OPTIONAL)})")
    b = _matrix(obj["B"], "pair B")
    d = _matrix([obj["D"]], "pair D")[0]
    names = obj["vertices"]
    src = obj.get("source") or fresh_name("s", set(names))
    try:
        return DBPair.make(b, d, names, source_name=src, source_pos=int(obj.get("source_pos", 0)))
    except GraphError as exc:
        raise InputError(f"pair: {exc}") from None


def load_any(path: str) -> DBPair:
    """A graph file or a pair file, as a pair."""
    obj = _load_json(_read(path), path)
    if isinstance(obj, dict) and "adjacency" in obj:
        return to_db(parse_graph(_read(path)))
    if isinstance(obj, dict):
        return parse_pair(obj)
    raise InputError(f"{path}: not a graph or pair file")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str, out: TextIO):
    if path is None or path == "-":
        out.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _k0_json(k) -> dict:
    return {
        "factors": list(k.factors),
        "free_rank": k.free_rank,
        "class": list(k.torsion) + list(k.free),
        "mr": k.mr,
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args, out):
    text = _read(args.graph)
    g = parse_graph(text)
    problems = validate_graph(g)
    if args.machine:
        out.write(canonical_json({"valid": not problems, "problems": problems}))
    else:
        out.write("valid\n" if not problems else "\n".join(problems) + "\n")
    return 0 if not problems else 1


def cmd_info(args, out):
    g = parse_graph(_read(args.graph))
    p = to_db(g)
    struct = components(p)
    rep = check_canonical(p)
    comps = []
    for c, blk in enumerate(struct.blocks):
        comps.append(
            {
                "vertices": [p.names[i] for i in blk],
                "regular": struct.regular_count[c],
                "singular": struct.singular_count[c],
                "cyclic": struct.cyclic[c],
                "trichotomy": rep.trichotomy[c],
                "mr": component_cok(p, c, struct).mr,
                "k0": _k0_json(component_k0(p, c, struct)),
                "below": [e for e in range(len(struct)) if e != c and struct.le(e, c)],
            }
        )
    info = {
        "classes": {str(v): vertex_class(g, v) for v in g.vertices},
        "components": comps,
        "k0": _k0_json(pointed_k0(p)),
        "canonical": rep.to_json(),
    }
    if args.machine:
        out.write(canonical_json(info))
        return 0
    out.write("vertices:\n")
    for v, cls in info["classes"].items():
        out.write(f"  {v}: {cls}\n")
    out.write(f"pointed K0: {pointed_k0(p)}\n")
    out.write("components (upstream first):\n")
    for c, comp in enumerate(comps):
        k0 = component_k0(p, c, struct)
        out.write(
            f"  [{c}] {{{', '.join(map(str, comp['vertices']))}}} regular={comp['regular']} "
            f"singular={comp['singular']} flavor={comp['trichotomy']} mr={comp['mr']} K0={k0}\n"
        )
    out.write(f"canonical form: {rep.summary()}\n")
    out.write("(D, B):\n" + str(p) + "\n")
    return 0


def cmd_to_db(args, out):
    p = to_db(parse_graph(_read(args.graph)))
    out.write(canonical_json(pair_to_json(p)))
    return 0


def cmd_from_db(args, out):
    p = parse_pair(_load_json(_read(args.pair), args.pair))
    out.write(emit_graph(from_db(p)).decode())
    return 0


def _emit_transform(args, out, g: Graph, script: MoveScript, extra: dict | None = None):
    graph_text = emit_graph(g).decode()
    if args.out or args.script_out:
        _write(args.out, graph_text, out)
        if args.script_out:
            _write(args.script_out, script.to_jsonl(), out)
        return 0
    if args.machine:
        doc = {"graph": graph_to_json(g), "script": [m.to_json() for m in script], "pair": pair_to_json(to_db(g))}
        doc.update(extra or {})
        out.write(canonical_json(doc))
    else:
        out.write(graph_text)
        out.write(f"# {len(script)} moves\n")
        out.write(script.to_jsonl())
        out.write(str(to_db(g)) + "\n")
    return 0


def _read_script(path: str) -> MoveScript:
    try:
        return MoveScript.from_jsonl(_read(path))
    except MoveError as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_apply(args, out):
    g = parse_graph(_read(args.graph))
    script = _read_script(args.script)
    end, _ = apply_script(g, script)
    return _emit_transform(args, out, end, script)


def cmd_compile_op(args, out):
    g = parse_graph(_read(args.graph))
    text = args.op if args.op.lstrip().startswith("{") else _read(args.op)
    obj = _load_json(text, "operation")
    if not isinstance(obj, dict):
        raise InputError("operation must be an object")
    try:
        rec = OpRecord.from_json(obj)
    except (KeyError, TypeError) as exc:
        raise InputError(f"operation: missing or bad field {exc}") from None
    _, script = normalize(g)
    _, ops = apply_op(to_db(g), rec)
    script.extend(ops)
    end, _ = apply_script(g, script)
    return _emit_transform(args, out, end, script, {"op": rec.to_json()})


def cmd_canonicalize(args, out):
    g = parse_graph(_read(args.graph))
    _, script = normalize(g)
    _, steps = canonicalize(to_db(g), budget=args.step_budget)
    script.extend(steps)
    end, _ = apply_script(g, script)
    return _emit_transform(args, out, end, script)


def cmd_check_canonical(args, out):
    p = to_db(parse_graph(_read(args.graph)))
    rep = check_canonical(p)
    if args.machine:
        out.write(canonical_json(rep.to_json()))
    else:
        out.write(rep.summary() + "\n")
        for c in ("I", "II", "III", "IV"):
            out.write(f"  ({c}) {'pass' if rep.passed(c) else 'FAIL'}\n")
        out.write(f"  trichotomy: {', '.join(rep.trichotomy)}\n")
    return 0


def cmd_verify_cert(args, out):
    pe, pf = load_any(args.E), load_any(args.F)
    cert = Certificate.from_json(_load_json(_read(args.cert), args.cert))
    verdict = verify_certificate(pe, pf, cert)
    if args.machine:
        out.write(canonical_json(verdict.to_json()))
    else:
        out.write(f"strongest level: {verdict.level or 'none'}\n")
        for k, v in verdict.checks.items():
            out.write(f"  {k}: {'pass' if v else 'FAIL'}\n")
        out.write(f"claimed {verdict.claimed}: {'accepted' if verdict.claim_holds else 'rejected'}\n")
        for note in verdict.notes:
            out.write(f"  note: {note}\n")
    return 0 if verdict.claim_holds else 1


def cmd_repl(args, out, inp: TextIO):
    g = parse_graph(_read(args.graph))

    def show():
        p = to_db(g)
        if args.machine:
            out.write(canonical_json({"graph": graph_to_json(g), "pair": pair_to_json(p), "k0": _k0_json(pointed_k0(p))}))
        else:
            out.write(str(g) + "\n(D, B):\n" + str(p) + f"\nK0: {pointed_k0(p)}\n")
        out.flush()

    show()
    for line in inp:
        line = line.strip()
        if not line:
            continue
        if line in ("quit", "exit"):
            break
        try:
            mv = Move.from_json(json.loads(line))
            g = apply_move(g, mv)
        except (MoveError, GraphError, KeyError, ValueError, TypeError) as exc:
            out.write(canonical_json({"refused": str(exc)}) if args.machine else f"refused: {exc}\n")
            out.flush()
            continue
        show()
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def flags(defaults: bool) -> argparse.ArgumentParser:
        # subcommands suppress their defaults so a flag given before the subcommand survives
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--machine", action="store_true", default=False if defaults else argparse.SUPPRESS, help="JSON output")
        p.add_argument(
            "--seed",
            type=int,
            default=0 if defaults else argparse.SUPPRESS,
            help="seed for randomized searches (currently all searches are deterministic)",
        )
        return p

    common = flags(False)
    ap = argparse.ArgumentParser(prog="graphmoves", description="Geometric moves on graphs and their (D, B) pairs.", parents=[flags(True)])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[common])

    def transform_flags(sp):
        sp.add_argument("-o", "--out", help="write the result graph here")
        sp.add_argument("-s", "--script-out", help="write the move script here")

    add("validate", "check a graph file").add_argument("graph")
    add("info", "classes, components, K0, canonical form").add_argument("graph")
    add("to-db", "graph file to (D, B) pair file").add_argument("graph")
    add("from-db", "(D, B) pair file to graph file").add_argument("pair")
    sp = add("apply", "replay a move script")
    sp.add_argument("graph")
    sp.add_argument("script")
    transform_flags(sp)
    sp = add("compile-op", "compile a matrix operation into moves")
    sp.add_argument("graph")
    sp.add_argument("op", help='operation file, or inline JSON such as {"op":"rowAdd","src":0,"dst":1}')
    transform_flags(sp)
    sp = add("canonicalize", "bring a graph into augmented canonical form")
    sp.add_argument("graph")
    sp.add_argument("--step-budget", type=int, default=None)
    transform_flags(sp)
    add("check-canonical", "evaluate conditions (I)-(IV)").add_argument("graph")
    sp = add("verify-cert", "verify a GL/SL certificate between two pairs")
    sp.add_argument("E")
    sp.add_argument("F")
    sp.add_argument("cert")
    add("repl", "apply moves read one per line from stdin").add_argument("graph")
    return ap


COMMANDS = {
    "validate": cmd_validate,
    "info": cmd_info,
    "to-db": cmd_to_db,
    "from-db": cmd_from_db,
    "apply": cmd_apply,
    "compile-op": cmd_compile_op,
    "canonicalize": cmd_canonicalize,
    "check-canonical": cmd_check_canonical,
    "verify-cert": cmd_verify_cert,
}

DOMAIN_ERRORS = (
    InputError,
    GraphError,
    MoveError,
    ScriptError,
    OpError,
    CertificateError,
    CompileError,
    ValueError,
    OverflowError,
)


def run(argv=None, out: TextIO | None = None, inp: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    inp = sys.stdin if inp is None else inp
    args = build_parser().parse_args(argv)
    try:
        if args.command == "repl":
            return cmd_repl(args, out, inp)
        return COMMANDS[args.command](args, out)
    except DOMAIN_ERRORS as exc:
        out.write(canonical_json({"error": str(exc)}))
        return 1
    except RuntimeError as exc:  # budget exhaustion and internal defects
        out.write(canonical_json({"error": f"{type(exc).__name__}: {exc}"}))
        return 1


def main() -> None:
    sys.exit(run())
