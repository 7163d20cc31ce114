"""Entropy CDF figure: empirical CDF of the entropy fraction per ensemble."""

import argparse
from collections import defaultdict

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import (PROFILE_COLUMNS, exit_on_schema_error, parse_float,
                 read_rows)


def collect_fractions(paths, cut=None):
    by_ensemble = defaultdict(list)
    for path in paths:
        for row in read_rows(path, PROFILE_COLUMNS):
            if cut is not None and int(row["cut"]) != cut:
                continue
            by_ensemble[row["ensemble"]].append(
                parse_float(row, "entropy_frac", path))
    return by_ensemble


def render(by_ensemble, out_path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for ensemble, fracs in sorted(by_ensemble.items()):
        x = np.sort(fracs)
        y = np.arange(1, len(x) + 1) / len(x)
        ax.step(100 * x, y, where="post", label=ensemble)
    ax.set_xlabel("entanglement entropy [% of manifold cap]")
    ax.set_ylabel("cumulative fraction of samples")
    ax.set_xlim(0, 100)
    ax.set_ylim(0, 1)
    ax.legend(frameon=False, loc="upper left")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


@exit_on_schema_error
def main(argv=None):
    parser = argparse.ArgumentParser(
        description="Plot the empirical CDF of entropy fractions.")
    parser.add_argument("inputs", nargs="+", help="profile.csv paths")
    parser.add_argument("--out", required=True, help="output image (png/svg)")
    parser.add_argument("--cut", type=int, default=None,
                        help="restrict to one cut (default: pool all cuts)")
    args = parser.parse_args(argv)
    render(collect_fractions(args.inputs, args.cut), args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
