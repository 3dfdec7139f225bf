"""plot-collision-ratio: render a collision-ratio CSV sweep to a figure.

One error-bar series per (ensemble, q) against the photon-number axis; error
bars are standard deviations across circuits.  ``--dump-json`` writes the
plotted aggregates so the data path is testable without image diffing.
"""

from __future__ import annotations

import argparse
import json
import sys

from .aggregate import SchemaError, aggregate, read_records, series_to_jsonable


def render_figure(series, out_path: str, title: str | None = None) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    markers = ["o", "s", "^", "D", "v", "P", "X"]
    for idx, s in enumerate(series):
        xs = [p.photons for p in s.points]
        ys = [p.mean for p in s.points]
        errs = [p.std for p in s.points]
        ax.errorbar(
            xs,
            ys,
            yerr=errs,
            label=s.label,
            marker=markers[idx % len(markers)],
            capsize=3,
            linewidth=1.2,
        )
    ax.set_xlabel("N")
    ax.set_ylabel("ratio")
    if title:
        ax.set_title(title)
    ax.set_ylim(0.0, 1.05)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-collision-ratio",
        description="Collision-free ratio figure from a bosonlab CSV sweep.",
    )
    parser.add_argument("--in", dest="input", required=True, help="collision-ratio CSV")
    parser.add_argument("--out", dest="output", required=True, help="output image path")
    parser.add_argument("--dump-json", dest="dump_json", default=None)
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)

    try:
        records = read_records(args.input)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    series = aggregate(records)
    if args.dump_json:
        with open(args.dump_json, "w") as fh:
            json.dump(series_to_jsonable(series), fh, indent=2, sort_keys=True)
            fh.write("\n")
    render_figure(series, args.output)
    print(f"wrote {args.output} ({len(series)} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
