"""BER curve figures rendered to files (no interactive display)."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.8),
    "figure.dpi": 150,
    "savefig.bbox": "tight",
    "font.family": "serif",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
}
MARKERS = "osd^v<>ph*"


def _curves(rows: Iterable[dict]) -> dict[str, tuple[list[float], list[float]]]:
    out: dict[str, tuple[list[float], list[float]]] = {}
    for r in rows:
        if r["bit_errors"] == 0:
            continue  # nothing to draw on a log axis
        xs, ys = out.setdefault(r["scheme"], ([], []))
        xs.append(r["ebno_db"])
        ys.append(r["ber"])
    return out


def plot_ber(rows: Sequence[dict], path: str | Path, title: str = "",
             overlays: dict[str, tuple[Sequence[float], Sequence[float]]] | None = None) -> Path:
    """Semilog BER against Eb/N0, one line per scheme, plus optional reference curves.

    ``rows`` are CSV rows as returned by :func:`ptc.harness.read_csv`.
    """
    path = Path(path)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for i, (name, (x, y)) in enumerate(_curves(rows).items()):
            ax.semilogy(x, y, marker=MARKERS[i % len(MARKERS)], ms=4, lw=1, label=name)
        for name, (x, y) in (overlays or {}).items():
            pts = [(a, b) for a, b in zip(x, y) if b > 0]
            if pts:
                ax.semilogy(*zip(*pts), ls="--", lw=1, color="k" if "bound" in name else "grey", label=name)
        ax.set_xlabel(r"$E_b/N_0$ (dB)")
        ax.set_ylabel("BER")
        ax.set_ylim(bottom=1e-6, top=1.0)
        if title:
            ax.set_title(title)
        ax.legend(loc="lower left")
        fig.savefig(path)
        plt.close(fig)
    return path
