"""Command-line fixture generation.

Examples:
    chemgen H2 --bond-lengths 0.3 0.5 0.75 1.0 1.5 2.0 2.5 3.0 --out fixtures/
    chemgen LiH --bond-lengths 1.5 --out fixtures/
"""

from __future__ import annotations

import argparse
import sys

from .generate import generate_series
from .molecules import SUPPORTED


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="chemgen",
        description="Generate qubit-Hamiltonian fixture files (STO-3G RHF/CASCI).",
    )
    parser.add_argument("molecule", choices=SUPPORTED)
    parser.add_argument(
        "--bond-lengths", type=float, nargs="*", default=[],
        metavar="R", help="bond lengths in Angstrom",
    )
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    try:
        written = generate_series(args.molecule, args.bond_lengths, args.out)
    except Exception as exc:  # report and signal failure
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
