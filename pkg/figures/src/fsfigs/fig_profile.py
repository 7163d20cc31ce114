"""Entanglement-profile figure: mean +/- std per cut for each ensemble."""

import argparse
from collections import defaultdict

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import (PROFILE_COLUMNS, SchemaError, exit_on_schema_error,
                 parse_float, read_rows)

ENSEMBLE_STYLE = {
    "rmps": dict(color="tab:blue", label="RMPS"),
    "central": dict(color="tab:green", label="central gauge"),
    "fs": dict(color="tab:red", label="FS"),
}


def collect_profiles(paths):
    """{ensemble: {cut: [entropy_bits...]}} plus the entanglement cap."""
    by_ensemble = defaultdict(lambda: defaultdict(list))
    cap_estimates = []
    for path in paths:
        for row in read_rows(path, PROFILE_COLUMNS):
            bits = parse_float(row, "entropy_bits", path)
            frac = parse_float(row, "entropy_frac", path)
            try:
                cut = int(row["cut"])
            except ValueError:
                raise SchemaError(f"{path}: cut={row['cut']!r} is not an "
                                  "integer")
            by_ensemble[row["ensemble"]][cut].append(bits)
            if frac > 1e-9:
                cap_estimates.append(bits / frac)
    cap = float(np.median(cap_estimates)) if cap_estimates else None
    return by_ensemble, cap


def render(by_ensemble, cap, out_path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for ensemble, cuts in sorted(by_ensemble.items()):
        xs = sorted(cuts)
        mean = np.array([np.mean(cuts[x]) for x in xs])
        std = np.array([np.std(cuts[x], ddof=1) if len(cuts[x]) > 1 else 0.0
                        for x in xs])
        style = ENSEMBLE_STYLE.get(ensemble, dict(label=ensemble))
        line, = ax.plot(xs, mean, marker="o", markersize=3, **style)
        ax.fill_between(xs, mean - std, mean + std, alpha=0.25,
                        color=line.get_color(), linewidth=0)
    if cap is not None:
        ax.axhline(cap, color="black", linestyle="--", linewidth=1,
                   label="manifold cap")
    ax.set_xlabel("cut")
    ax.set_ylabel("entanglement entropy [bits]")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


@exit_on_schema_error
def main(argv=None):
    parser = argparse.ArgumentParser(
        description="Plot mean entanglement profiles from profile.csv files.")
    parser.add_argument("inputs", nargs="+", help="profile.csv paths")
    parser.add_argument("--out", required=True, help="output image (png/svg)")
    parser.add_argument("--cap", type=float, default=None,
                        help="override the dashed entanglement-cap line")
    args = parser.parse_args(argv)
    by_ensemble, cap = collect_profiles(args.inputs)
    render(by_ensemble, args.cap if args.cap is not None else cap, args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
