"""Report files for suite results.

Each suite produces three files in the output directory:

* ``<suite>.txt``    plain-text summary followed by detail lines;
* ``<suite>.csv``    machine-readable results, one record per check,
                     field order: suite, case_id, verdict, detail;
* ``<suite>.png``    a rendered figure of the suite's outcome.

Nothing time- or environment-dependent is written, so two runs with the
same configuration and seed produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .suites import SuiteResult  # noqa: E402

CSV_FIELDS = ("suite", "case_id", "verdict", "detail")


def render_text(result: SuiteResult) -> str:
    lines = [f"ulab {result.name} report", "=" * (len(result.name) + 12)]
    lines.extend(result.summary)
    if result.detail_lines:
        lines.append("")
        lines.extend(result.detail_lines)
    lines.append("")
    for case_id, verdict, detail in result.rows:
        lines.append(f"{case_id} {verdict} {detail}")
    return "\n".join(lines) + "\n"


def render_csv(result: SuiteResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for case_id, verdict, detail in result.rows:
        writer.writerow((result.name, case_id, verdict, detail))
    return buf.getvalue()


def render_figure(result: SuiteResult, path: Path) -> None:
    spec = result.figure
    if spec is None:
        return
    fig, ax = plt.subplots(figsize=(8, 4.5))
    kind = spec["kind"]
    if kind == "bars":
        xs = range(len(spec["labels"]))
        ax.bar(xs, spec["values"], color="#3b6ea5")
        if spec.get("sparse_ticks") and len(spec["labels"]) > 20:
            step = max(1, len(spec["labels"]) // 10)
            ax.set_xticks(list(xs)[::step])
            ax.set_xticklabels(spec["labels"][::step], rotation=45, ha="right")
        else:
            ax.set_xticks(list(xs))
            ax.set_xticklabels(spec["labels"], rotation=45 if len(spec["labels"]) > 6 else 0, ha="right")
        if "ymax" in spec:
            ax.set_ylim(0, spec["ymax"] * 1.05)
    elif kind == "stacked_bars":
        xs = list(range(len(spec["labels"])))
        bottom = [0] * len(xs)
        colors = ["#3b6ea5", "#c0392b", "#7f8c8d"]
        for i, (name, values) in enumerate(spec["series"]):
            ax.bar(xs, values, bottom=bottom, label=name, color=colors[i % len(colors)])
            bottom = [b + v for b, v in zip(bottom, values)]
        ax.set_xticks(xs)
        ax.set_xticklabels(spec["labels"], rotation=45 if len(xs) > 6 else 0, ha="right")
        ax.legend()
    elif kind == "step":
        for name, values in spec["series"]:
            ax.step(spec["x"], values, where="post", label=name)
        ax.set_ylim(-0.1, 1.1)
        ax.legend()
    elif kind == "curves":
        for name, xs, ys in spec["series"]:
            ax.plot(xs, ys, marker=".", label=name)
        ax.legend()
    elif kind == "scatter":
        ax.scatter(spec["x"], spec["y"], s=18, color="#3b6ea5")
    else:
        raise ValueError(f"unknown figure kind {kind!r}")
    ax.set_title(spec.get("title", result.name))
    ax.set_xlabel(spec.get("xlabel", ""))
    ax.set_ylabel(spec.get("ylabel", ""))
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": "ulab"})
    plt.close(fig)


def write_reports(outdir: str | Path, result: SuiteResult) -> List[Path]:
    """Write the text, delimited, and figure files; returns the paths."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    txt = out / f"{result.name}.txt"
    txt.write_text(render_text(result), encoding="utf-8")
    paths.append(txt)
    csv_path = out / f"{result.name}.csv"
    csv_path.write_text(render_csv(result), encoding="utf-8")
    paths.append(csv_path)
    if result.figure is not None:
        png = out / f"{result.name}.png"
        render_figure(result, png)
        paths.append(png)
    return paths
