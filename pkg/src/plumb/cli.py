"""``plumb`` command line: analyze, verify, batch.

Exit codes: 0 success, 1 verification failure (or a failed file in a batch),
2 input error, 3 precondition refusal.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .graph import GeneratorParams, GraphError, generate_candidates, read_graph, serialize_graph
from .invariants import PreconditionError, verify_theorem
from .report import DEFAULT_SPINC_LIMIT, analyze, to_json, to_text

EXIT_OK, EXIT_VERIFY_FAIL, EXIT_INPUT, EXIT_REFUSED = 0, 1, 2, 3

log = logging.getLogger("plumb")


def _analyze_file(path: str, trace: bool, uncertified: bool, spinc_limit: int) -> tuple[int, dict | None, str | None]:
    try:
        g = read_graph(path)
    except OSError as exc:
        return EXIT_INPUT, None, f"cannot read {path}: {exc.strerror or exc}"
    except GraphError as exc:
        return EXIT_INPUT, None, f"{path}: {exc}"
    try:
        return EXIT_OK, analyze(g, trace=trace, uncertified=uncertified, spinc_limit=spinc_limit), None
    except PreconditionError as exc:
        return EXIT_REFUSED, None, f"{path}: {exc}"


def cmd_analyze(args) -> int:
    code, report, err = _analyze_file(args.file, args.trace, args.uncertified, args.spinc_limit)
    if err:
        print(f"plumb: {err}", file=sys.stderr)
        return code
    sys.stdout.write(to_json(report) if args.json else to_text(report))
    return EXIT_OK


def _verify_one(g):
    r = verify_theorem(g)
    return r.passed, r.error, r.counterexamples


def cmd_verify(args) -> int:
    try:
        params = GeneratorParams(
            max_vertices=args.max_vertices,
            weight_min=args.weight_min,
            seed=args.seed,
            count=args.random,
            require_rational=True,
        )
    except ValueError as exc:
        print(f"plumb: {exc}", file=sys.stderr)
        return EXIT_INPUT
    corpus = list(generate_candidates(params))
    digest = hashlib.sha256("".join(serialize_graph(g) + "\n" for g in corpus).encode()).hexdigest()
    if args.corpus_out:
        out = Path(args.corpus_out)
        out.mkdir(parents=True, exist_ok=True)
        for k, g in enumerate(corpus):
            (out / f"graph_{k:05d}.plumb").write_text(serialize_graph(g), encoding="utf-8")
    jobs = args.jobs or os.cpu_count() or 1
    if jobs > 1 and len(corpus) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_verify_one, corpus, chunksize=4))
    else:
        results = [_verify_one(g) for g in corpus]
    print(f"corpus: {len(corpus)} graphs, max_vertices={args.max_vertices}, "
          f"weight_min={args.weight_min}, seed={args.seed}, sha256={digest}")
    failures = [(k, g, res) for k, (g, res) in enumerate(zip(corpus, results)) if not res[0]]
    print(f"{len(corpus) - len(failures)}/{len(corpus)} verified")
    if failures:
        k, g, (_, error, cex) = failures[0]
        path = Path(args.counterexample)
        body = f"# counterexample: corpus index {k}\n"
        if error:
            body += f"# error: {error}\n"
        for c in cex:
            body += f"# wu_set={c['wu_set']} mubar={c['mubar']} d_oracle={c['d_oracle']} d_path={c['d_path']}\n"
        path.write_text(body + serialize_graph(g), encoding="utf-8")
        print(f"counterexample written to {path}")
        return EXIT_VERIFY_FAIL
    return EXIT_OK


def _expand(paths: list[str]) -> list[str]:
    files = []
    for p in paths:
        pp = Path(p)
        if pp.is_dir():
            files.extend(str(f) for f in sorted(pp.glob("*.plumb")))
        else:
            files.append(p)
    return files


def _batch_worker(item):
    path, trace, uncertified, spinc_limit = item
    return _analyze_file(path, trace, uncertified, spinc_limit)


def cmd_batch(args) -> int:
    files = _expand(args.paths)
    items = [(f, args.trace, args.uncertified, args.spinc_limit) for f in files]
    jobs = args.jobs or os.cpu_count() or 1
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_batch_worker, items))
    else:
        results = [_batch_worker(it) for it in items]

    entries = []
    for f, (code, report, err) in zip(files, results):
        entry = {"file": f, "status": "ok" if code == EXIT_OK else "error", "exit_code": code}
        if err:
            entry["error"] = err
        if report is not None:
            entry["identity_holds"] = all(r["mubar_equals_minus_4d"] for r in report["spin"]) \
                if report["rationality"]["verdict"] == "rational" else None
            entry["report"] = report
        entries.append(entry)
    n_ok = sum(e["status"] == "ok" for e in entries)
    aggregate = {
        "files": len(entries),
        "ok": n_ok,
        "errors": len(entries) - n_ok,
        "identity_verified": sum(e.get("identity_holds") is True for e in entries),
        "identity_failed": sum(e.get("identity_holds") is False for e in entries),
    }
    if args.json:
        sys.stdout.write(json.dumps({"reports": entries, "aggregate": aggregate}, indent=2) + "\n")
    else:
        for e in entries:
            print(f"== {e['file']}")
            if e["status"] == "ok":
                sys.stdout.write(to_text(e["report"]))
            else:
                print(f"error: {e['error']}")
            print()
        width = max([len(e["file"]) for e in entries] + [4])
        print(f"{'file'.ljust(width)}  status  det         rational      mubar=-4d")
        for e in entries:
            if e["status"] == "ok":
                rep = e["report"]
                print(f"{e['file'].ljust(width)}  ok      {rep['lattice']['det'].ljust(10)}  "
                      f"{rep['rationality']['verdict'].ljust(12)}  {_yn(e['identity_holds'])}")
            else:
                print(f"{e['file'].ljust(width)}  error")
        print(f"{aggregate['ok']}/{aggregate['files']} analyzed, "
              f"{aggregate['identity_verified']} verified, {aggregate['identity_failed']} failed")
    if aggregate["errors"]:
        return EXIT_VERIFY_FAIL
    return EXIT_VERIFY_FAIL if aggregate["identity_failed"] else EXIT_OK


def _yn(x):
    return "-" if x is None else ("yes" if x else "NO")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plumb", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"plumb {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="emit JSON instead of text")
        sp.add_argument("--trace", action="store_true", help="include reduction, Laufer and discharge traces")
        sp.add_argument("--uncertified", action="store_true",
                        help="report formula values of d for graphs that are not Laufer-rational")
        sp.add_argument("--spinc-limit", type=int, default=DEFAULT_SPINC_LIMIT,
                        help="skip the per-spin^c table when |det| exceeds this (default %(default)s)")

    a = sub.add_parser("analyze", help="analyze one plumb file")
    a.add_argument("file")
    common(a)
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="check mubar = -4d on random rational graphs")
    v.add_argument("--random", type=int, required=True, metavar="N")
    v.add_argument("--max-vertices", type=int, default=8, metavar="K")
    v.add_argument("--weight-min", type=int, default=-9, metavar="W")
    v.add_argument("--seed", type=int, default=0, metavar="S")
    v.add_argument("--jobs", type=int, default=None, metavar="J")
    v.add_argument("--counterexample", default="plumb-counterexample.plumb", metavar="PATH")
    v.add_argument("--corpus-out", default=None, metavar="DIR", help="also write the generated graphs here")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("batch", help="analyze many plumb files")
    b.add_argument("paths", nargs="*", metavar="PATH")
    b.add_argument("--jobs", type=int, default=None, metavar="J")
    common(b)
    b.set_defaults(func=cmd_batch)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
