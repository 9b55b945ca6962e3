"""Belief reports: per-focal-set mass with belief and plausibility columns.

Reports render as human-readable text, as byte-stable tab-separated values
(nine decimal places, subsets in frame element order), or as a grouped bar
chart written to an image file.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import fsum

from .frames import SubsetRef
from .mass import MassFunction


@dataclass
class BeliefReport:
    title: str
    mass: MassFunction
    conflicts: tuple[str, ...] = ()
    provenance: tuple[str, ...] = ()
    extra_sections: tuple[tuple[str, tuple[str, ...]], ...] = field(default=())

    def rows(self) -> list[tuple[SubsetRef, float, float, float]]:
        return [
            (subset, value, self.mass.belief(subset), self.mass.plausibility(subset))
            for subset, value in self.mass.items()
        ]


def render_text(report: BeliefReport) -> str:
    rows = report.rows()
    width = max(len(str(s)) for s, *_ in rows)
    lines = [report.title]
    lines.append(
        f"frame {report.mass.frame.name} = {{ " + ", ".join(report.mass.frame.elements) + " }"
    )
    for subset, m, bel, pl in rows:
        lines.append(f"  {str(subset):<{width}}  mass {m:.9f}  bel {bel:.9f}  pl {pl:.9f}")
    total = fsum(v for _, v in report.mass.items())
    lines.append(f"  total mass {total:.9f}")
    if report.conflicts:
        lines.append("conflict:")
        lines.extend(f"  {c}" for c in report.conflicts)
    if report.provenance:
        lines.append("provenance:")
        lines.extend(f"  {p}" for p in report.provenance)
    for heading, body in report.extra_sections:
        lines.append(f"{heading}:")
        lines.extend(f"  {line}" for line in body)
    return "\n".join(lines) + "\n"


def render_tsv(report: BeliefReport) -> str:
    lines = ["SET\tMASS\tBEL\tPL"]
    for subset, m, bel, pl in report.rows():
        lines.append(f"{subset}\t{m:.9f}\t{bel:.9f}\t{pl:.9f}")
    return "\n".join(lines) + "\n"


def save_figure(report: BeliefReport, path: str) -> None:
    """Render the report as a grouped bar chart (mass, belief, plausibility)."""
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    rows = report.rows()
    labels = [str(s) for s, *_ in rows]
    masses = [r[1] for r in rows]
    beliefs = [r[2] for r in rows]
    plausibilities = [r[3] for r in rows]
    positions = range(len(rows))
    width = 0.27

    fig, ax = plt.subplots(figsize=(max(6.0, 1.6 * len(rows)), 4.2))
    ax.bar([p - width for p in positions], masses, width, label="mass", color="#33669a")
    ax.bar(positions, beliefs, width, label="belief", color="#7aa874")
    ax.bar(
        [p + width for p in positions],
        plausibilities,
        width,
        label="plausibility",
        color="#d9a346",
    )
    ax.set_xticks(list(positions))
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("value")
    ax.set_title(report.title)
    ax.legend(loc="upper left", framealpha=0.9)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
