"""Command-line surface for the stratum-class engine.

Commands: ``stratum-class`` computes a decorated class, ``graphs`` lists the
two-level twisted graphs of a signature, ``picard`` prints the divisor
identities, ``verify-paper`` runs the golden-value suite, and ``segre``
prints the pushforward of a stratum class to the moduli of pointed curves.
Output is deterministic for a fixed configuration: JSON objects have sorted
keys and graph listings are sorted by canonical form.

Exit codes: 0 success, 2 invalid input, 3 resource cap exceeded,
4 not implemented.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import picard, residues, strata, tautring
from .graphs import (
    Signature,
    canonical_key,
    enumerate_bicolored,
    multiplicity,
    single,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RESOURCE = 3
EXIT_UNIMPLEMENTED = 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


def _parse_orders(text: str, what: str) -> tuple[int, ...]:
    if not text:
        return ()
    try:
        vals = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise CliError(f"{what} must be a comma-separated integer list")
    if any(v <= 0 for v in vals):
        raise CliError(f"{what} entries must be positive")
    return vals


def _load_residue_space(path: str, sig: Signature):
    try:
        with open(path) as fh:
            data = json.load(fh)
        rows = [
            tuple(Fraction(str(x)) for x in row) for row in data["constraints"]
        ]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CliError(f"cannot read residue matrix: {exc}")
    cut = residues.from_constraints(sig.pole_blocks(), rows)
    return residues.intersect(residues.full_space(sig), cut)


def _emit(payload: dict, fmt: str, text_lines) -> None:
    if fmt == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _render_class(cls, fmt: str, payload_key: str, extra: dict | None = None):
    payload = {payload_key: cls.to_jsonable()}
    if extra:
        payload.update(extra)
    lines = []
    for entry in payload[payload_key]:
        lines.append(json.dumps(entry, sort_keys=True))
    if extra:
        lines += [f"{k}: {v}" for k, v in extra.items()]
    _emit(payload, fmt, lines)


def cmd_stratum_class(args) -> int:
    Z = _parse_orders(args.Z, "--Z")
    P = _parse_orders(args.P, "--P")
    sig = single(args.g, Z, P)
    R = _load_residue_space(args.R, sig) if args.R else None
    try:
        sp = strata.spec(args.g, Z, P, R)
    except ValueError as exc:
        raise CliError(str(exc))
    cls = strata.class_of_stratum(sp, max_vertices=args.max_vertices)
    _render_class(cls, args.format, "stratum_class")
    return EXIT_OK


def cmd_graphs(args) -> int:
    Z = _parse_orders(args.Z, "--Z")
    P = _parse_orders(args.P, "--P")
    sig = single(args.g, Z, P)
    R = _load_residue_space(args.R, sig) if args.R else residues.full_space(sig)
    rows = []
    for tg in enumerate_bicolored(sig, max_vertices=args.max_vertices):
        md = multiplicity(tg, sig)
        entry = {
            "key": canonical_key(
                tg.graph, twist=tg.twist, level=tg.level
            ).hex(),
            "genus": list(tg.graph.genus),
            "level": list(tg.level),
            "edges": [list(e) for e in tg.graph.edges],
            "twists": list(tg.twist),
            "legs": [[list(l), v] for l, v in sorted(tg.graph.legs)],
            "m": md.m,
            "divisor": residues.check_starstar(tg, sig, R),
        }
        rows.append(entry)
    rows.sort(key=lambda e: e["key"])
    payload = {"count": len(rows), "graphs": rows}
    if args.oracle:
        from .oracle import brute_force_bicolored

        oracle_keys = sorted(
            k.hex() for k in brute_force_bicolored(sig, max_vertices=args.max_vertices)
        )
        payload["oracle_count"] = len(oracle_keys)
        payload["oracle_match"] = oracle_keys == sorted(e["key"] for e in rows)
    _emit(
        payload,
        args.format,
        [json.dumps(e, sort_keys=True) for e in rows]
        + ([f"count: {payload['count']}"] if args.format == "text" else [])
        + (
            [f"oracle_match: {payload['oracle_match']}"]
            if args.oracle
            else []
        ),
    )
    return EXIT_OK


def cmd_picard(args) -> int:
    Z = _parse_orders(args.Z, "--Z")
    P = _parse_orders(args.P, "--P")
    rows = []
    for rel in (1, 2, 3, 4):
        try:
            if rel == 1:
                lhs, rhs = picard.relation(args.g, Z, P, 1, i=1)
            elif rel == 2 and len(Z) >= 2:
                lhs, rhs = picard.relation(args.g, Z, P, 2, i=1, j=2)
            elif rel == 3 and len(P) >= 2:
                sig = single(args.g, Z, P)
                R = (
                    _load_residue_space(args.R, sig)
                    if args.R
                    else residues.zero_space(sig)
                )
                lhs, rhs = picard.relation(args.g, Z, P, 3, R=R)
            elif rel == 4 and not P:
                lhs, rhs = picard.relation(args.g, Z, P, 4)
            else:
                continue
        except ValueError as exc:
            raise CliError(str(exc))
        rows.append(
            {"identity": rel, "lhs": lhs.pretty(), "rhs": rhs.pretty()}
        )
    _emit(
        {"identities": rows},
        args.format,
        [f"({r['identity']})  {r['lhs']}  =  {r['rhs']}" for r in rows],
    )
    return EXIT_OK


def cmd_verify_paper(args) -> int:
    from .golden import run_golden_suite

    results = run_golden_suite()
    ok = all(r["pass"] for r in results)
    _emit(
        {"checks": results, "all_pass": ok},
        args.format,
        [
            f"{'PASS' if r['pass'] else 'FAIL'}  {r['name']}: "
            f"computed {r['computed']} expected {r['expected']}"
            for r in results
        ]
        + [f"all_pass: {ok}"],
    )
    return EXIT_OK if ok else 1


def cmd_segre(args) -> int:
    Z = _parse_orders(args.Z, "--Z")
    P = _parse_orders(args.P, "--P")
    if P:
        raise CliError(
            "pushforward to pointed curves requires a poleless signature", EXIT_UNIMPLEMENTED
        )
    try:
        cls = strata.class_on_moduli_with_point(args.g, Z)
    except ValueError as exc:
        raise CliError(str(exc))
    _render_class(cls, args.format, "pushforward")
    return EXIT_OK


COMMANDS = {
    "stratum-class": cmd_stratum_class,
    "graphs": cmd_graphs,
    "picard": cmd_picard,
    "verify-paper": cmd_verify_paper,
    "segre": cmd_segre,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strataclass",
        description="Exact classes of strata of meromorphic differentials.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--g", type=int, default=2)
    parser.add_argument("--Z", default="", help="comma-separated zero orders")
    parser.add_argument("--P", default="", help="comma-separated pole orders")
    parser.add_argument("--R", default=None, help="path to residue-matrix JSON")
    parser.add_argument("--format", choices=("json", "text"), default="text")
    parser.add_argument("--max-vertices", type=int, default=None)
    parser.add_argument("--max-depth", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--oracle", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(json.dumps({"error": str(exc), "code": exc.code}), file=sys.stderr)
        return exc.code
    except RecursionError:
        print(
            json.dumps({"error": "recursion cap exceeded", "code": EXIT_RESOURCE}),
            file=sys.stderr,
        )
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
