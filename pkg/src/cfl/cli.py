"""Command line front end.

Subcommands:

  check    compile lexicon files and report diagnostics
  resolve  resolve one frame file against a lexicon (or generate from a
           semantic frame with --generate)
  batch    resolve a frame directory against a gold table

``resolve`` writes nothing but canonical frames and ``---`` separators to
stdout; everything human-facing (matched sense ids, stage labels, traces,
errors) goes to stderr so the output can be piped back into other tools.

Exit codes: 0 success, 1 no match or gold mismatch, 2 bad input or usage,
3 lexicon error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dsl import DslError, parse_frame, serialize_frame
from .lexicon import CompileError, CompiledLexicon, load_lexicon
from .resolver import MalformedFrameError, generate, resolve

OK, NO_MATCH, BAD_INPUT, BAD_LEXICON = 0, 1, 2, 3


def _err(*parts: object) -> None:
    print(*parts, file=sys.stderr)


def _load(args) -> CompiledLexicon:
    return load_lexicon(
        args.lexicon,
        prelude=not args.no_prelude,
        prelude_file=args.prelude,
    )


def _add_lexicon_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "-l",
        "--lexicon",
        action="append",
        required=True,
        metavar="FILE",
        help="lexicon file; repeat to layer files onto one lattice",
    )
    p.add_argument(
        "--no-prelude", action="store_true", help="do not load the built-in prelude"
    )
    p.add_argument(
        "--prelude", metavar="FILE", default=None, help="replace the built-in prelude"
    )


def _cmd_check(args) -> int:
    status = OK
    for path in args.lexicon:
        try:
            lex = load_lexicon(
                [path], prelude=not args.no_prelude, prelude_file=args.prelude
            )
        except CompileError as exc:
            for diag in exc.diagnostics:
                _err(f"{path}: {diag}")
            status = BAD_LEXICON
            continue
        except (OSError, DslError) as exc:
            _err(f"{path}: {exc}")
            status = BAD_LEXICON
            continue
        print(
            f"ok: {path}: {lex.lattice.n_core} types, "
            f"{len(lex.constraints)} constraints, {len(lex.senses)} senses, "
            f"{len(lex.frames)} frames"
        )
    return status


def _read_frame_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _emit_frames(frames) -> None:
    for i, fs in enumerate(frames):
        if i:
            print("---")
        print(serialize_frame(fs))


def _cmd_resolve(args) -> int:
    try:
        lex = _load(args)
    except (CompileError, OSError, DslError) as exc:
        _err(f"lexicon error: {exc}")
        return BAD_LEXICON
    try:
        text = _read_frame_text(args.frame)
        frame = parse_frame(text, lex, source=args.frame)
    except OSError as exc:
        _err(f"cannot read frame: {exc}")
        return BAD_INPUT
    except DslError as exc:
        _err(f"bad frame: {exc}")
        return BAD_INPUT

    if args.generate:
        try:
            realized = generate(lex, frame)
        except MalformedFrameError as exc:
            _err(f"bad frame: {exc}")
            return BAD_INPUT
        for sid, _ in realized:
            _err(f"generated: {sid}")
        _emit_frames(fs for _, fs in realized)
        if not realized:
            _err("no sense realizes this semantic frame")
            return NO_MATCH
        return OK

    try:
        matches, report = resolve(lex, frame, all_stages=args.all_stages)
    except MalformedFrameError as exc:
        _err(f"bad frame: {exc}")
        return BAD_INPUT
    for m in matches:
        _err(f"resolved: {m.sense_id} @ {m.stage_label}")
        for note in m.notes:
            _err(f"  note: {note}")
        for slot, sub in sorted(m.embedded.items()):
            _err(f"  embedded {slot}: {sub.sense_id} @ {sub.stage_label}")
    if args.trace or not matches:
        for rec in report.records:
            _err(f"trace: {rec}")
    _emit_frames(m.frame for m in matches)
    if not matches:
        _err("no sense matches this frame at any stage")
        return NO_MATCH
    return OK


def _parse_gold(path: Path) -> list[tuple[str, str, str]]:
    rows = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path}: expected 3 tab-separated fields: {line!r}")
        rows.append((parts[0], parts[1], parts[2]))
    return rows


def _cmd_batch(args) -> int:
    try:
        lex = _load(args)
    except (CompileError, OSError, DslError) as exc:
        _err(f"lexicon error: {exc}")
        return BAD_LEXICON
    frames_dir = Path(args.frames)
    gold_path = Path(args.gold) if args.gold else frames_dir / "gold.tsv"
    try:
        rows = _parse_gold(gold_path)
    except (OSError, ValueError) as exc:
        _err(f"bad gold table: {exc}")
        return BAD_INPUT
    if not rows:
        _err(f"gold table {gold_path} has no rows")
        return BAD_INPUT

    mismatches = 0
    for fname, want_ids, want_stage in rows:
        fpath = frames_dir / fname
        try:
            frame = parse_frame(
                fpath.read_text(encoding="utf-8"), lex, source=str(fpath)
            )
            matches, _ = resolve(lex, frame)
        except (OSError, DslError, MalformedFrameError) as exc:
            _err(f"FAIL {fname}: {exc}")
            mismatches += 1
            continue
        got_ids = ",".join(m.sense_id for m in matches) or "NONE"
        got_stage = str(matches[0].stage) if matches else "-"
        if got_ids == want_ids and got_stage == want_stage:
            _err(f"ok   {fname}: {got_ids} @ {got_stage}")
        else:
            _err(
                f"FAIL {fname}: want {want_ids} @ {want_stage}, "
                f"got {got_ids} @ {got_stage}"
            )
            mismatches += 1
    _err(f"{len(rows) - mismatches}/{len(rows)} frames match gold")
    return NO_MATCH if mismatches else OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfl", description="constraint-based case-frame lexicon"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="compile lexicon files and report")
    _add_lexicon_opts(p_check)
    p_check.set_defaults(func=_cmd_check)

    p_res = sub.add_parser("resolve", help="resolve a frame file")
    _add_lexicon_opts(p_res)
    p_res.add_argument("frame", metavar="FRAME", help="frame file, or - for stdin")
    p_res.add_argument(
        "--all-stages",
        action="store_true",
        help="report matches at every voice stage, not just the earliest",
    )
    p_res.add_argument(
        "--trace", action="store_true", help="print per-sense failure analysis"
    )
    p_res.add_argument(
        "--generate",
        action="store_true",
        help="treat the input as a semantic frame and emit realizations",
    )
    p_res.set_defaults(func=_cmd_resolve)

    p_batch = sub.add_parser("batch", help="resolve a frame directory against gold")
    _add_lexicon_opts(p_batch)
    p_batch.add_argument("frames", metavar="FRAMES_DIR")
    p_batch.add_argument(
        "--gold", metavar="TSV", default=None, help="gold table (default: FRAMES_DIR/gold.tsv)"
    )
    p_batch.set_defaults(func=_cmd_batch)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    return args.func(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
