"""Figures for complexes and action tables, written as deterministic PNGs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .algebra import TWO_VAR, monomial_str  # noqa: E402
from .complexes import Complex  # noqa: E402

DPI = 120
# No timestamps or version strings in the file, so equal inputs give equal bytes.
PNG_METADATA = {"Software": None}

plt.rcParams.update({
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "cfkcable",
})


def _positions(C: Complex) -> dict[str, tuple[float, float]]:
    """Knot complexes sit at (Alexander, gr_U); surgery complexes at (slot, Maslov)."""
    pos = {}
    used: dict[tuple, int] = {}
    for g in C.names:
        gu, gv = C.gradings[g]
        key = ((gu - gv) / 2, gu) if C.mode == TWO_VAR else (0, gu)
        k = used.get(key, 0)
        used[key] = k + 1
        pos[g] = (key[0] + 0.28 * k if C.mode == TWO_VAR else float(k), float(key[1]))
    return pos


def plot_complex(C: Complex, path: str | Path, title: str | None = None) -> Path:
    pos = _positions(C)
    xs = [p[0] for p in pos.values()] or [0.0]
    ys = [p[1] for p in pos.values()] or [0.0]
    width = min(12.0, 2.5 + 0.9 * (max(xs) - min(xs) + 1))
    fig, ax = plt.subplots(figsize=(width, 4.0))
    for s in C.names:
        for t, i, j in sorted(C.diff[s]):
            (x0, y0), (x1, y1) = pos[s], pos[t]
            ax.annotate("", xy=(x1, y1), xytext=(x0, y0),
                        arrowprops={"arrowstyle": "->", "color": "0.35", "lw": 0.8,
                                    "shrinkA": 8, "shrinkB": 8})
            mono = monomial_str(i, j)
            if mono != "1":
                ax.text((x0 + x1) / 2, (y0 + y1) / 2, mono, fontsize=7, color="C3",
                        ha="center", va="center")
    for g, (x, y) in pos.items():
        ax.plot(x, y, "o", color="C0", ms=5)
        ax.text(x, y + 0.15, g, ha="center", va="bottom", fontsize=7)
    ax.set_xlabel("Alexander grading" if C.mode == TWO_VAR else "generator")
    ax.set_ylabel("gr_U" if C.mode == TWO_VAR else "Maslov grading")
    ax.set_xlim(min(xs) - 0.6, max(xs) + 0.6)
    ax.set_ylim(min(ys) - 0.6, max(ys) + 0.8)
    ax.set_title(title or C.label or "complex")
    fig.tight_layout()
    return _save(fig, path)


def plot_action_table(rows: list[dict], path: str | Path, title: str = "Induced actions") -> Path:
    head = ["Homology class", "Type", "Image under ι", "Image under τ"]
    cells = [[r["class"], r["type"], r["iota"], r["tau"]] for r in rows]
    fig, ax = plt.subplots(figsize=(9.0, 0.5 + 0.35 * (len(rows) + 1)))
    ax.axis("off")
    if cells:
        table = ax.table(cellText=cells, colLabels=head, loc="center", cellLoc="left")
        table.auto_set_font_size(False)
        table.set_fontsize(8)
        table.auto_set_column_width(list(range(len(head))))
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=DPI, format="png", metadata=PNG_METADATA)
    plt.close(fig)
    return path


def render_report_figures(report, directory: str | Path) -> list[Path]:
    """One PNG per recorded complex and per action table, numbered by step."""
    out = []
    directory = Path(directory)
    for k, (operation, obj) in enumerate(report.artifacts, start=1):
        stem = f"{k:02d}-{operation}"
        if isinstance(obj, Complex):
            out.append(plot_complex(obj, directory / f"{stem}-complex.png"))
        else:
            out.append(plot_action_table(obj, directory / f"{stem}.png"))
    return out


__all__ = ["plot_complex", "plot_action_table", "render_report_figures", "PNG_METADATA"]
