"""Spectrum figure: eigenvalue histogram with Marchenko-Pastur overlays."""

import argparse

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import mp
from .io import (SPECTRUM_COLUMNS, exit_on_schema_error, parse_float,
                 read_rows)


def collect_scaled_eigenvalues(path, cut=None):
    values = []
    for row in read_rows(path, SPECTRUM_COLUMNS):
        if cut is not None and int(row["cut"]) != cut:
            continue
        values.append(parse_float(row, "scaled_eigenvalue", path))
    return np.array(values)


def render(values, c_list, out_path, bins=60):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    hi = max([values.max()] + [mp.support(c)[1] for c in c_list]) * 1.05
    ax.hist(values, bins=np.linspace(0, hi, bins + 1), density=True,
            alpha=0.5, color="tab:orange", label="samples")
    for c in c_list:
        x, y = mp.overlay_curve(c)
        ax.plot(x, y, color="black", linewidth=1,
                label=f"MP(c = {c:.4g})")
    ax.set_xlabel("scaled eigenvalue")
    ax.set_ylabel("density")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


@exit_on_schema_error
def main(argv=None):
    parser = argparse.ArgumentParser(
        description="Histogram scaled environment eigenvalues with MP "
                    "reference curves.")
    parser.add_argument("input", help="spectrum.csv path")
    parser.add_argument("--out", required=True, help="output image (png/svg)")
    parser.add_argument("--c", type=float, action="append", default=None,
                        help="MP aspect ratio to overlay (repeatable)")
    parser.add_argument("--cut", type=int, default=None,
                        help="restrict to one cut (default: pool all)")
    parser.add_argument("--bins", type=int, default=60)
    args = parser.parse_args(argv)
    values = collect_scaled_eigenvalues(args.input, args.cut)
    render(values, args.c or [], args.out, args.bins)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
