#!/usr/bin/env python3
"""Render figures from simulation CSV files.

Usage: render.py <kind> <csv...> -o <png>

Kinds:
  va             variance-vs-average polarization curves
                 (schema: snr_db,avg,var,variant,channel,N,M)
  capacity_bars  per-index sub-channel capacity bars at a single snr
                 (schema: snr_db,i,estimate,stderr,M,variant,channel,N)
  fer            frame error rate vs snr with 95% CI whiskers
                 (schema: snr_db,N,K,variant,channel,list,trials,errors,
                  fer,ci_lo,ci_hi,seed)

The scripts are pure file-to-file transforms: nothing is computed beyond
what the CSVs already contain, and identical inputs yield identical images.
"""

from __future__ import annotations

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

VA_FIELDS = ["snr_db", "avg", "var", "variant", "channel", "N", "M"]
CAP_FIELDS = ["snr_db", "i", "estimate", "stderr", "M", "variant", "channel", "N"]
FER_FIELDS = ["snr_db", "N", "K", "variant", "channel", "list", "trials",
              "errors", "fer", "ci_lo", "ci_hi", "seed"]


class SchemaError(Exception):
    pass


def read_rows(paths, fields):
    rows = []
    for path in paths:
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames != fields:
                raise SchemaError(
                    f"{path}: header {reader.fieldnames} does not match "
                    f"expected schema {fields}")
            rows.extend(reader)
    if not rows:
        raise SchemaError("no data rows in input CSVs")
    return rows


def series_label(row, keys=("variant", "channel")):
    return " ".join(row[k] for k in keys)


def plot_va(paths, out):
    rows = read_rows(paths, VA_FIELDS)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    labels = []
    for row in rows:
        lab = series_label(row)
        if lab not in labels:
            labels.append(lab)
    for lab in labels:
        pts = sorted(((float(r["avg"]), float(r["var"]))
                      for r in rows if series_label(r) == lab))
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                marker="o", markersize=3, label=lab)
    ax.set_xlabel("capacity average")
    ax.set_ylabel("capacity variance")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)


def plot_capacity_bars(paths, out):
    rows = read_rows(paths, CAP_FIELDS)
    snrs = {r["snr_db"] for r in rows}
    if len(snrs) != 1:
        raise SchemaError(f"capacity_bars needs a single snr, got {sorted(snrs)}")
    fig, ax = plt.subplots(figsize=(7, 4))
    labels = []
    for row in rows:
        lab = series_label(row)
        if lab not in labels:
            labels.append(lab)
    width = 0.8 / len(labels)
    for j, lab in enumerate(labels):
        sub = sorted((r for r in rows if series_label(r) == lab),
                     key=lambda r: int(r["i"]))
        # group index pairs (2j, 2j+1): small gap between pairs
        xs = [int(r["i"]) + 0.25 * (int(r["i"]) // 2) + j * width for r in sub]
        ax.bar(xs, [float(r["estimate"]) for r in sub], width=width, label=lab)
    ax.set_xlabel("sub-channel index (paired)")
    ax.set_ylabel("capacity estimate")
    ax.set_ylim(bottom=0)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)


def plot_fer(paths, out):
    rows = read_rows(paths, FER_FIELDS)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    labels = []
    for row in rows:
        lab = series_label(row, ("variant", "channel", "N", "list"))
        if lab not in labels:
            labels.append(lab)
    for lab in labels:
        sub = sorted((r for r in rows
                      if series_label(r, ("variant", "channel", "N", "list")) == lab),
                     key=lambda r: float(r["snr_db"]))
        xs, ys, los, his = [], [], [], []
        for r in sub:
            x, fer = float(r["snr_db"]), float(r["fer"])
            lo, hi = float(r["ci_lo"]), float(r["ci_hi"])
            if int(r["errors"]) == 0:
                # zero-error point: drawn at the CI upper bound, open marker
                ax.plot([x], [hi], marker="v", mfc="none", ls="none",
                        color=f"C{labels.index(lab)}")
                continue
            xs.append(x)
            ys.append(fer)
            los.append(fer - lo)
            his.append(hi - fer)
        if xs:
            ax.errorbar(xs, ys, yerr=[los, his], marker="o", markersize=3,
                        capsize=2, label=lab, color=f"C{labels.index(lab)}")
        else:
            ax.plot([], [], marker="o", label=lab, color=f"C{labels.index(lab)}")
    ax.set_yscale("log")
    ax.set_xlabel("snr (dB)")
    ax.set_ylabel("FER")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)


KINDS = {"va": plot_va, "capacity_bars": plot_capacity_bars, "fer": plot_fer}


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="render.py", description=__doc__)
    p.add_argument("kind", choices=sorted(KINDS))
    p.add_argument("csvs", nargs="+", help="input CSV files")
    p.add_argument("-o", "--output", required=True, help="output PNG path")
    ns = p.parse_args(argv)
    try:
        KINDS[ns.kind](ns.csvs, ns.output)
    except (SchemaError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
