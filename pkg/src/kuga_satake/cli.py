"""kuga-satake: classify C^+(Q), build Kuga-Satake reports, run the self-test.

Exit codes: 0 success, 2 parse error, 3 invalid form or plane, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import acceptance, brauer, hodge, variety
from .config import ConfigError, RunConfig, load_config
from .qform import DegenerateFormError, DiagonalForm, FormError, format_rational, form_from_json, parse_rational, signature

EXIT_OK, EXIT_PARSE, EXIT_FORM, EXIT_VERIFY = 0, 2, 3, 4

# options whose values may start with '-' (e.g. --diag -1,-1,3)
_LIST_OPTIONS = ("--diag", "--v", "--w", "--a", "--b")


class ParseError(ValueError):
    pass


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _LIST_OPTIONS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _split_list(text: str) -> list[str]:
    return [t for t in (s.strip() for s in text.split(",")) if t]


def _rational_or_float(tok: str):
    try:
        return parse_rational(tok)
    except FormError:
        try:
            return float(tok)
        except ValueError as exc:
            raise ParseError(f"not a number: {tok!r}") from exc


def read_form(args) -> tuple[DiagonalForm, Optional[dict]]:
    if args.diag:
        try:
            return DiagonalForm(_split_list(args.diag)), None
        except DegenerateFormError:
            raise
        except FormError as exc:
            raise ParseError(str(exc)) from exc
    if args.gram:
        text = args.gram
    elif args.input:
        text = sys.stdin.read() if args.input == "-" else Path(args.input).read_text()
    else:
        raise ParseError("give a form with --diag, --gram or --input")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    try:
        form, gram = form_from_json(data)
    except DegenerateFormError:
        raise
    except FormError as exc:
        raise ParseError(str(exc)) from exc
    extra = None
    if gram is not None:
        extra = {"change_of_basis": [[format_rational(x) for x in row] for row in form.change_of_basis]}
    if isinstance(data, dict) and "plane" in data:
        extra = dict(extra or {}, plane=data["plane"])
    return form, extra


def read_plane(args, form: DiagonalForm, cfg: RunConfig, extra: Optional[dict]) -> hodge.HodgeStructure2:
    if not form.is_kuga_satake_signature():
        raise DegenerateFormError("form must have signature (2-, (n-2)+) with d1, d2 < 0")
    plane_data = (extra or {}).get("plane")
    if args.plane:
        try:
            plane_data = json.loads(args.plane)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid plane JSON: {exc}") from exc
    if args.v or args.w:
        if not (args.v and args.w):
            raise ParseError("--v and --w go together")
        plane_data = {"v": _split_list(args.v), "w": _split_list(args.w)}
    if args.a is not None or args.b is not None:
        plane_data = {"a": _split_list(args.a or ""), "b": _split_list(args.b or "")}
    if getattr(args, "random_plane", False):
        return hodge.random_plane(form, np.random.default_rng(cfg.seed))
    if plane_data is None:
        return hodge.aligned(form)
    if not isinstance(plane_data, dict):
        raise ParseError("plane must be a JSON object")
    conv = lambda xs: [_rational_or_float(str(x)) if not isinstance(x, (int, float)) else x for x in xs]
    if "v" in plane_data and "w" in plane_data:
        return hodge.from_plane(form, conv(plane_data["v"]), conv(plane_data["w"]))
    if "a" in plane_data and "b" in plane_data:
        return hodge.from_parameters(form, conv(plane_data["a"]), conv(plane_data["b"]))
    raise ParseError('plane needs keys "v","w" or "a","b"')


def classify_json(form: DiagonalForm, cfg: RunConfig) -> dict:
    struct = brauer.even_clifford_structure(form)
    out = {"form": form.to_json(), "signature": list(signature(form)), **struct.to_json()}
    symbols = []
    for s in struct.symbols:
        res = brauer.is_split(s, cfg.witness_height)
        symbols.append(
            {
                "symbol": [s.a, s.b],
                "ram": res.ramification.places(),
                "split": res.split,
                "witness": list(res.witness) if res.witness else None,
            }
        )
    out["symbols"] = symbols
    if form.n >= 3:
        out["isogeny"] = brauer.isogeny_decomposition(struct, form.n).to_json()
    return out


def _emit(payload, cfg: RunConfig) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=str)
    if cfg.output:
        Path(cfg.output).write_text(text + "\n")
    else:
        print(text)


def cmd_classify(args, cfg: RunConfig) -> int:
    form, extra = read_form(args)
    out = classify_json(form, cfg)
    if extra and "change_of_basis" in extra:
        out["change_of_basis"] = extra["change_of_basis"]
    _emit(out, cfg)
    return EXIT_OK


def cmd_report(args, cfg: RunConfig) -> int:
    form, extra = read_form(args)
    if args.sweep:
        if not form.is_kuga_satake_signature():
            raise DegenerateFormError("form must have signature (2-, (n-2)+) with d1, d2 < 0")
        rng = np.random.default_rng(cfg.seed)
        runs = []
        for _ in range(args.sweep):
            rep = variety.ks_report(form, hodge.random_plane(form, rng), cfg.tolerance)
            runs.append(rep.to_json(include_matrices=False))
        ok = all(all(c["pass"] for c in r["checks"]) for r in runs)
        _emit({"sweep": runs, "pass": ok}, cfg)
        return EXIT_OK if ok else EXIT_VERIFY
    plane = read_plane(args, form, cfg, extra)
    rep = variety.ks_report(form, plane, cfg.tolerance)
    out = rep.to_json(include_matrices=not args.summary)
    out["embedding_residual"] = variety.verify_embedding(rep, form, plane)
    out["pass"] = rep.passed and out["embedding_residual"] < cfg.tolerance
    _emit(out, cfg)
    return EXIT_OK if out["pass"] else EXIT_VERIFY


def cmd_hodge_verify(args, cfg: RunConfig) -> int:
    form, extra = read_form(args)
    plane = read_plane(args, form, cfg, extra)
    checks = hodge.hodge_report(plane, np.random.default_rng(cfg.seed), cfg.tolerance)
    ok = all(c.passed for c in checks)
    _emit({"plane": plane.to_json(), "checks": [c.to_json() for c in checks], "pass": ok}, cfg)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_selftest(args, cfg: RunConfig) -> int:
    # keep stdout pure JSON when a JSON summary is printed there
    stream = sys.stderr if cfg.output is None and args.json else sys.stdout
    results = []
    for crit in acceptance.CRITERIA:
        r = crit(cfg)
        results.append(r)
        print(r.line(), file=stream, flush=True)
        for f in r.failures[:5]:
            print(f"    {json.dumps(f, default=str)}", file=stream, flush=True)
    ok = all(r.passed for r in results)
    if args.json or cfg.output:
        _emit({"pass": ok, "criteria": [r.to_json() for r in results]}, cfg)
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kuga-satake", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON file with tolerance/witness_height/oracle_bound/seed/output")
    common.add_argument("--seed", type=int)
    common.add_argument("--tolerance", type=float)
    common.add_argument("--witness-height", type=int, dest="witness_height")
    common.add_argument("--oracle-bound", type=int, dest="oracle_bound")
    common.add_argument("--output", help="write JSON here instead of stdout")

    form_opts = argparse.ArgumentParser(add_help=False)
    form_opts.add_argument("--diag", help="comma separated rationals, e.g. -1,-1,3")
    form_opts.add_argument("--gram", help='JSON object {"gram": [[...], ...]} or {"diag": [...]}')
    form_opts.add_argument("--input", help="JSON file with the form (and optionally a plane); '-' for stdin")

    plane_opts = argparse.ArgumentParser(add_help=False)
    plane_opts.add_argument("--plane", help='JSON {"v": [...], "w": [...]} or {"a": [...], "b": [...]}')
    plane_opts.add_argument("--v", help="first spanning vector (diagonal-basis coordinates)")
    plane_opts.add_argument("--w", help="second spanning vector")
    plane_opts.add_argument("--a", help="parameters a' of (1, 0, a')")
    plane_opts.add_argument("--b", help="parameters b' of (0, 1, b')")
    plane_opts.add_argument("--random-plane", action="store_true", help="random admissible plane from --seed")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common, form_opts], help="structure of C^+(Q) and isogeny factors").set_defaults(func=cmd_classify)
    rp = sub.add_parser("report", parents=[common, form_opts, plane_opts], help="Kuga-Satake report for a plane")
    rp.add_argument("--summary", action="store_true", help="omit period and polarization matrices")
    rp.add_argument("--sweep", type=int, default=0, help="check N random planes instead of one")
    rp.set_defaults(func=cmd_report)
    sub.add_parser("hodge-verify", parents=[common, form_opts, plane_opts], help="numerical Hodge checks").set_defaults(func=cmd_hodge_verify)
    st = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    st.add_argument("--json", action="store_true", help="also print a JSON summary")
    st.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = cfg.updated(
            seed=args.seed,
            tolerance=args.tolerance,
            witness_height=args.witness_height,
            oracle_bound=args.oracle_bound,
            output=args.output,
        )
    except (ConfigError, OSError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        return args.func(args, cfg)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except hodge.VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (DegenerateFormError, hodge.HodgeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORM
    except FormError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
