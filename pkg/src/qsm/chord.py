"""Chordgraph layout and static SVG rendering of migration matrices.

Angles in a :class:`ChordLayout` are clockwise offsets in degrees from
``start_angle`` (measured counter-clockwise from the positive x axis, so the
default 90 is twelve o'clock).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .core import MigrationMatrix

PALETTE = (
    "#e41a1c", "#17becf", "#4daf4a", "#984ea3", "#ff7f00", "#a6761d",
    "#377eb8", "#f781bf", "#999999", "#66a61e", "#e6ab02", "#1b9e77",
)


class ChordError(ValueError):
    pass


@dataclass(frozen=True)
class Arc:
    label: str
    start: float
    end: float
    units: int
    color: str

    @property
    def span(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class SubArc:
    cls: int
    start: float
    end: float

    @property
    def span(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class Ribbon:
    source: SubArc
    target: SubArc
    count: int
    color: str


@dataclass(frozen=True)
class ChordLayout:
    arcs: tuple[Arc, ...]
    ribbons: tuple[Ribbon, ...]
    ticks: tuple[tuple[int, ...], ...]
    tick_step: int
    gap: float
    start_angle: float
    degrees_per_unit: float


def tick_step(total: int) -> int:
    if total <= 50:
        return 1
    if total <= 500:
        return 5
    return 10 ** math.ceil(math.log10(total) / 50)


def layout(
    m: MigrationMatrix,
    gap_degrees: float = 2.0,
    start_angle: float = 90.0,
    palette: tuple[str, ...] = PALETTE,
) -> ChordLayout:
    """Place one arc per class, sized by outgoing plus incoming counts.

    Along each arc the outgoing sub-arcs (by target class) come first, then
    the incoming ones (by source class). Classes with no counts get no arc
    and no gap.
    """
    counts = np.asarray(m.counts, dtype=np.int64)
    total = int(counts.sum())
    if total <= 0:
        raise ChordError("cannot lay out an all-zero migration matrix")
    k = counts.shape[0]
    units = counts.sum(axis=1) + counts.sum(axis=0)
    present = [i for i in range(k) if units[i] > 0]
    usable = 360.0 - gap_degrees * len(present)
    if usable <= 0:
        raise ChordError("gaps leave no room for arcs")
    per_unit = usable / (2 * total)

    arcs: list[Arc | None] = [None] * k
    cursor = 0.0
    for i in present:
        span = units[i] * per_unit
        arcs[i] = Arc(m.classes[i], cursor, cursor + span, int(units[i]), palette[i % len(palette)])
        cursor += span + gap_degrees

    out_sub: dict[tuple[int, int], SubArc] = {}
    in_sub: dict[tuple[int, int], SubArc] = {}
    for i in present:
        # positions in integer units keep tiling exact
        pos = 0
        for j in range(k):
            c = int(counts[i, j])
            if c:
                out_sub[i, j] = SubArc(i, arcs[i].start + pos * per_unit, arcs[i].start + (pos + c) * per_unit)
                pos += c
        for j in range(k):
            c = int(counts[j, i])
            if c:
                in_sub[j, i] = SubArc(i, arcs[i].start + pos * per_unit, arcs[i].start + (pos + c) * per_unit)
                pos += c

    ribbons = tuple(
        Ribbon(out_sub[i, j], in_sub[i, j], int(counts[i, j]), arcs[i].color)
        for i in range(k)
        for j in range(k)
        if counts[i, j]
    )
    step = tick_step(total)
    ticks = tuple(tuple(range(0, arc.units + 1, step)) for arc in arcs if arc is not None)
    return ChordLayout(
        tuple(a for a in arcs if a is not None), ribbons, ticks, step, gap_degrees, start_angle, per_unit
    )


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _Canvas:
    def __init__(self, size: int, start_angle: float):
        self.c = size / 2.0
        self.start_angle = start_angle

    def point(self, radius: float, offset: float) -> tuple[float, float]:
        theta = math.radians(self.start_angle - offset)
        return self.c + radius * math.cos(theta), self.c - radius * math.sin(theta)

    def xy(self, radius, offset) -> str:
        x, y = self.point(radius, offset)
        return f"{_fmt(x)},{_fmt(y)}"

    def arc_to(self, radius: float, a0: float, a1: float) -> str:
        """Path segments along a circle from offset ``a0`` to ``a1`` (either direction)."""
        sweep = 1 if a1 >= a0 else 0
        steps = max(1, math.ceil(abs(a1 - a0) / 90.0))
        parts = []
        for s in range(1, steps + 1):
            a = a0 + (a1 - a0) * s / steps
            parts.append(f"A{_fmt(radius)},{_fmt(radius)} 0 0 {sweep} {self.xy(radius, a)}")
        return " ".join(parts)


def _arc_path(cv: _Canvas, r_in: float, r_out: float, arc: Arc) -> str:
    return (
        f"M{cv.xy(r_out, arc.start)} {cv.arc_to(r_out, arc.start, arc.end)} "
        f"L{cv.xy(r_in, arc.end)} {cv.arc_to(r_in, arc.end, arc.start)} Z"
    )


def _ribbon_path(cv: _Canvas, r: float, rb: Ribbon) -> str:
    s, t = rb.source, rb.target
    mid = cv.xy(0.0, 0.0)
    return (
        f"M{cv.xy(r, s.start)} {cv.arc_to(r, s.start, s.end)} "
        f"C{mid} {mid} {cv.xy(r, t.start)} "
        f"{cv.arc_to(r, t.start, t.end)} "
        f"C{mid} {mid} {cv.xy(r, s.start)} Z"
    )


def render_svg(lay: ChordLayout, size: int = 600, title: str = "") -> str:
    """Standalone SVG 1.1 document; identical input gives identical bytes."""
    if size < 100:
        raise ChordError("size must be at least 100 pixels")
    cv = _Canvas(size, lay.start_angle)
    r_in = size * 0.36
    r_out = size * 0.39
    r_label = size * 0.46
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}" font-family="sans-serif">',
        f"<title>{escape(title)}</title>",
        '<rect width="100%" height="100%" fill="#ffffff"/>',
        '<g class="ribbons" fill-opacity="0.65" stroke="none">',
    ]
    for rb in lay.ribbons:
        out.append(f'<path class="ribbon" fill="{rb.color}" d="{_ribbon_path(cv, r_in, rb)}"/>')
    out.append("</g>")
    out.append('<g class="arcs" stroke="#333333" stroke-width="0.5">')
    for arc in lay.arcs:
        out.append(f'<path class="arc" fill="{arc.color}" d="{_arc_path(cv, r_in, r_out, arc)}"/>')
    out.append("</g>")
    out.append('<g class="ticks" stroke="#333333" stroke-width="0.5" font-size="{}">'.format(_fmt(size / 60)))
    most = max((len(t) for t in lay.ticks), default=1)
    label_every = lay.tick_step * max(1, math.ceil(most / 20))
    for arc, ticks in zip(lay.arcs, lay.ticks):
        for t in ticks:
            a = arc.start + t * lay.degrees_per_unit
            out.append(
                f'<line class="tick" x1="{_fmt(cv.point(r_out, a)[0])}" y1="{_fmt(cv.point(r_out, a)[1])}" '
                f'x2="{_fmt(cv.point(r_out + size * 0.012, a)[0])}" y2="{_fmt(cv.point(r_out + size * 0.012, a)[1])}"/>'
            )
            if t % label_every == 0:
                x, y = cv.point(r_out + size * 0.03, a)
                out.append(
                    f'<text class="tick-label" x="{_fmt(x)}" y="{_fmt(y)}" stroke="none" '
                    f'text-anchor="middle" dominant-baseline="middle">{t}</text>'
                )
    out.append("</g>")
    out.append(f'<g class="labels" font-size="{_fmt(size / 30)}">')
    for arc in lay.arcs:
        x, y = cv.point(r_label, (arc.start + arc.end) / 2)
        out.append(
            f'<text class="label" x="{_fmt(x)}" y="{_fmt(y)}" text-anchor="middle" '
            f'dominant-baseline="middle">{escape(arc.label)}</text>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def chord_svg(m: MigrationMatrix, size: int = 600, title: str = "", **opts) -> str:
    return render_svg(layout(m, **opts), size=size, title=title)
