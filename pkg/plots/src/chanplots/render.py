"""Render figures from heatchan result CSVs.

Three figure kinds, each consuming one of the CSV schemas emitted by the
heatchan CLI (this package reads the files only; it never imports the
simulator):

* ``rate_vs_snr``    one curve per coefficient spec, rate against SNR
* ``err_vs_rate``    block-error probability against rate, error bars from
                     the Wilson interval columns where present
* ``concentration``  normalized-norm means against block length with
                     horizontal target lines

Rendering is deterministic: fixed style, no timestamps or random ids in the
output bytes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = ["FigureSpec", "SchemaError", "read_rows", "build_figure", "render",
           "FIGURE_KINDS"]

REQUIRED_COLUMNS = {
    "rate_vs_snr": ["spec", "snr", "rate_nats"],
    "err_vs_rate": ["spec", "rate_nats", "err_prob"],
    "concentration": ["n", "mean_y", "mean_z", "target_y", "target_z"],
}
FIGURE_KINDS = tuple(REQUIRED_COLUMNS)

# stable ids in SVG output; no metadata that varies run to run
matplotlib.rcParams["svg.hashsalt"] = "chanplots"
_METADATA = {
    ".png": {"Software": None},
    ".svg": {"Date": None},
    ".pdf": {"CreationDate": None},
}


class SchemaError(ValueError):
    """An input file does not carry the columns its figure kind needs."""


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple
    kind: str
    output: str
    logx: bool | None = None  # default: log-SNR axis for rate_vs_snr
    dpi: int = 150

    def __post_init__(self):
        if self.kind not in REQUIRED_COLUMNS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; "
                              f"expected one of {', '.join(FIGURE_KINDS)}")
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")


def _parse(value: str):
    if value == "":
        return None
    try:
        return float(value)
    except ValueError:
        return value


def read_rows(path, kind: str):
    """Rows of one result CSV, validated against the figure kind's schema."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    table = list(csv.reader(lines))
    if not table:
        raise SchemaError(f"{path}: empty input")
    columns = table[0]
    for col in REQUIRED_COLUMNS[kind]:
        if col not in columns:
            raise SchemaError(f"{path}: missing column {col!r} required by {kind}")
    rows = [dict(zip(columns, map(_parse, line))) for line in table[1:] if line]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _group_by_spec(rows):
    groups = {}
    for row in rows:
        groups.setdefault(row["spec"], []).append(row)
    return groups


def build_figure(spec: FigureSpec):
    """Build the matplotlib figure for `spec` without writing it."""
    rows = []
    for path in spec.inputs:
        rows.extend(read_rows(path, spec.kind))
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if spec.kind == "rate_vs_snr":
        for label, grp in sorted(_group_by_spec(rows).items()):
            grp = sorted(grp, key=lambda r: r["snr"])
            ax.plot([r["snr"] for r in grp], [r["rate_nats"] for r in grp],
                    marker="o", label=label)
        if spec.logx is not False:
            ax.set_xscale("log")
        ax.set_xlabel("SNR")
        ax.set_ylabel("rate [nats/use]")
        ax.legend()
    elif spec.kind == "err_vs_rate":
        for label, grp in sorted(_group_by_spec(rows).items()):
            grp = sorted(grp, key=lambda r: r["rate_nats"])
            xs = [r["rate_nats"] for r in grp]
            ys = [r["err_prob"] for r in grp]
            if all("ci_lo" in r and r.get("ci_lo") is not None
                   and r.get("ci_hi") is not None for r in grp):
                lo = [r["err_prob"] - r["ci_lo"] for r in grp]
                hi = [r["ci_hi"] - r["err_prob"] for r in grp]
                ax.errorbar(xs, ys, yerr=[lo, hi], marker="o", capsize=3,
                            label=label)
            else:
                ax.plot(xs, ys, marker="o", label=label)
        if spec.logx is True:
            ax.set_xscale("log")
        ax.set_xlabel("rate [nats/use]")
        ax.set_ylabel("block-error probability")
        ax.legend()
    else:  # concentration
        rows = sorted(rows, key=lambda r: r["n"])
        ns = [r["n"] for r in rows]
        ax.plot(ns, [r["mean_y"] for r in rows], marker="o",
                label="|y|^2 / m")
        ax.plot(ns, [r["mean_z"] for r in rows], marker="s",
                label="|z|^2 / m")
        for key, style in (("target_y", "--"), ("target_z", ":")):
            for target in sorted({r[key] for r in rows}):
                ax.axhline(target, linestyle=style, color="gray", linewidth=1)
        if spec.logx is True:
            ax.set_xscale("log")
        ax.set_xlabel("block length n")
        ax.set_ylabel("normalized squared norm")
        ax.legend()
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> str:
    """Write the figure to spec.output; returns the output path."""
    fig = build_figure(spec)
    suffix = "." + spec.output.rsplit(".", 1)[-1].lower() if "." in spec.output else ""
    metadata = _METADATA.get(suffix)
    try:
        fig.savefig(spec.output, dpi=spec.dpi, metadata=metadata)
    finally:
        plt.close(fig)
    return spec.output
