import argparse
import sys

from .figures import ColumnError, plot_fl, plot_traces, sumrate_spec


def build_parser():
    parser = argparse.ArgumentParser(prog="plotkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sumrate", help="sum-rate traces, one line per solver")
    p.add_argument("--in", dest="input_csv", required=True)
    p.add_argument("--out", dest="output_path", required=True)
    p.add_argument("--x-col", dest="x_col", default="iteration")

    p = sub.add_parser("fl", help="accuracy vs time and vs round, per arm")
    p.add_argument("--in", dest="input_csv", required=True)
    p.add_argument("--out", dest="output_path", required=True)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        if args.command == "sumrate":
            out = plot_traces(sumrate_spec(args.input_csv, args.output_path,
                                           args.x_col))
        else:
            out = plot_fl(args.input_csv, args.output_path)
    except (ColumnError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
