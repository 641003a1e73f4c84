"""``corkcalc`` command line: each invocation runs one request and writes its certificate."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .groups import GroupError
from .ledger import MODES
from .pipeline import make_request, run, verify_document


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corkcalc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, group=False):
        if group:
            p.add_argument("--group", required=True, help="catalog name, JSON file or inline JSON document")
        p.add_argument("--out", type=Path, help="certificate path (default: stdout)")
        p.add_argument("--allow-large", action="store_true", help="lift the r/n_i/m bounds")

    common(sub.add_parser("embed", help="embed a solvable group into an iterated wreath product"), group=True)

    p = sub.add_parser("block", help="build and certify the block action of Z_n1 wr ... wr Z_nr")
    p.add_argument("--n", type=int, nargs="+", required=True, help="cyclic orders n_1 ... n_r")
    p.add_argument("--window", type=int, help="window radius for open actions")
    common(p)

    p = sub.add_parser("cork", help="full twist ledger with effectiveness certificate")
    p.add_argument("--m", type=int, default=1, help="rank m of the Z^m coefficients")
    p.add_argument("--ball", type=int, default=200, help="number of elements to label and check")
    p.add_argument("--window", type=int, help="window radius when G is infinite")
    p.add_argument("--mode", choices=MODES, default="weak")
    common(p, group=True)

    p = sub.add_parser("verify", help="replay a certificate")
    p.add_argument("certificate", type=Path)
    p.add_argument("--out", type=Path)

    common(sub.add_parser("catalog", help="list built-in groups"))
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        try:
            text = args.certificate.read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            print(f"corkcalc: {exc}", file=sys.stderr)
            return 2
        cert = verify_document(text)
    else:
        fields = {k: getattr(args, k, None) for k in ("group", "n", "m", "ball", "window")}
        if args.command == "cork":
            fields["mode"] = args.mode
        try:
            req = make_request(args.command, allow_large=args.allow_large, **fields)
        except GroupError as exc:
            print(f"corkcalc: {exc}", file=sys.stderr)
            return 2
        cert = run(req)

    text = cert.to_json()
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(cert.summary(), file=sys.stderr)
    print("PASS" if cert.passed else "FAIL", file=sys.stderr)
    return 0 if cert.passed else 1


if __name__ == "__main__":
    sys.exit(main())
