"""emit-figures: render every figure described in a JSON spec file."""
from __future__ import annotations

import argparse
import sys

from .core import SchemaError, load_specs, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="emit-figures",
        description="Render performance/rarity figures from epblab CSV files",
    )
    parser.add_argument("--spec", required=True,
                        help="JSON list of figure specs (input, kind, output)")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)
    try:
        specs = load_specs(args.spec)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for spec in specs:
        try:
            out = render(spec)
        except (OSError, SchemaError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        if not args.quiet:
            print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
