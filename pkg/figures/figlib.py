"""Readers and renderers for the experiment CSVs.

The CSVs carry two `#` comment lines (manifest hash and column units) before
the header row; readers here skip any comment line wherever it appears and
fail loudly on anything else unexpected.
"""

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


class FigureError(Exception):
    """Raised for unreadable, malformed, or column-deficient input."""


@dataclass
class FigureSpec:
    csv_path: str
    x: str
    y: str
    out_path: str
    yerr: str = ""
    logx: bool = False
    title: str = ""


def read_columns(path, names):
    """Named numeric columns as lists of floats; `#` lines are skipped."""
    try:
        with open(path) as fh:
            lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise FigureError(f"cannot read {path}: {exc}")
    if not lines:
        raise FigureError(f"{path}: no data")
    reader = csv.DictReader(lines)
    missing = [n for n in names if n not in (reader.fieldnames or [])]
    if missing:
        raise FigureError(f"{path}: missing columns: {', '.join(missing)}")
    cols = {n: [] for n in names}
    for row in reader:
        for n in names:
            value = row.get(n)
            try:
                cols[n].append(float(value))
            except (TypeError, ValueError):
                raise FigureError(f"{path}: bad value {value!r} in column {n}")
    if not cols[names[0]]:
        raise FigureError(f"{path}: header but no data rows")
    return [cols[n] for n in names]


def render(spec: FigureSpec) -> None:
    names = [spec.x, spec.y] + ([spec.yerr] if spec.yerr else [])
    data = read_columns(spec.csv_path, names)
    xs, ys = data[0], data[1]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    if spec.yerr:
        ax.errorbar(xs, ys, yerr=data[2], fmt="o-", capsize=3)
    else:
        ax.plot(xs, ys, "o-")
    if spec.logx:
        ax.set_xscale("log", base=2)
    ax.set_xlabel(spec.x)
    ax.set_ylabel(spec.y)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=120)
    plt.close(fig)
