"""Script entry point: render the standard figures from an artifact directory."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import ArtifactError, FigureSpec, render

STANDARD = (
    ("spectrum-scatter", "spectrum.csv", "spectrum.png"),
    ("resolvent-loglog", "resolvent.csv", "resolvent.png"),
    ("energy-decay", "energy.csv", "energy.png"),
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="beamplots", description="Render report figures from CSV artifacts."
    )
    parser.add_argument("--in", dest="in_dir", type=Path, required=True)
    parser.add_argument("--out", dest="out_dir", type=Path, required=True)
    parser.add_argument(
        "--kinds",
        nargs="*",
        default=[k for k, _, _ in STANDARD],
        choices=[k for k, _, _ in STANDARD],
    )
    args = parser.parse_args(argv)

    failures = 0
    for kind, csv_name, png_name in STANDARD:
        if kind not in args.kinds:
            continue
        inputs = {"main": args.in_dir / csv_name}
        if kind == "energy-decay" and (args.in_dir / "spectrum.csv").exists():
            inputs["spectrum"] = args.in_dir / "spectrum.csv"
        spec = FigureSpec(kind=kind, inputs=inputs, output=args.out_dir / png_name)
        try:
            result = render(spec)
        except ArtifactError as exc:
            print(f"error: {exc}", file=sys.stderr)
            failures += 1
            continue
        notes = " ".join(f"{k}={v:.5g}" for k, v in result.annotations.items())
        print(f"wrote {result.path} {notes}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
