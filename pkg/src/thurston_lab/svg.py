"""Minimal SVG writer for convex polygons in a 1000x1000 viewbox."""

from __future__ import annotations

from xml.sax.saxutils import escape

VIEW = 1000
MARGIN = 60


def _transform(pts):
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    span = max(max(xs) - min(xs), max(ys) - min(ys)) or 1.0
    scale = (VIEW - 2 * MARGIN) / span
    cx = (max(xs) + min(xs)) / 2
    cy = (max(ys) + min(ys)) / 2

    def f(p):
        # y axis points up in the chart, down in SVG
        return (VIEW / 2 + (p[0] - cx) * scale, VIEW / 2 - (p[1] - cy) * scale)

    return f


def polygon_svg(pts, labels=None, highlight_edges=(), title: str = "", label_edges: bool = False) -> str:
    """Closed polygon through ``pts`` with optional text labels.

    ``labels`` maps a vertex index to its text.  With ``label_edges`` the
    text for index i is placed at the midpoint of edge (i-1, i) instead.
    Edges listed in ``highlight_edges`` (by starting index) are drawn in red.
    """
    labels = labels or {}
    f = _transform(pts)
    screen = [f(p) for p in pts]
    n = len(screen)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {VIEW} {VIEW}" width="{VIEW}" height="{VIEW}">',
        f'<rect width="{VIEW}" height="{VIEW}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="20" y="30" font-size="20" font-family="sans-serif">{escape(title)}</text>')
    origin = f((0.0, 0.0))
    out.append(f'<circle cx="{origin[0]:.3f}" cy="{origin[1]:.3f}" r="3" fill="gray"/>')
    path = " ".join(f"{x:.3f},{y:.3f}" for x, y in screen)
    out.append(f'<polygon points="{path}" fill="none" stroke="black" stroke-width="1.5"/>')
    for i in highlight_edges:
        (x1, y1), (x2, y2) = screen[i % n], screen[(i + 1) % n]
        out.append(f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}" stroke="red" stroke-width="4"/>')
    for i, text in sorted(labels.items()):
        if label_edges:
            (x1, y1), (x2, y2) = screen[(i - 1) % n], screen[i % n]
            x, y = (x1 + x2) / 2, (y1 + y2) / 2
        else:
            x, y = screen[i]
            out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="3" fill="black"/>')
        dx, dy = x - origin[0], y - origin[1]
        r = (dx * dx + dy * dy) ** 0.5 or 1.0
        tx, ty = x + 18 * dx / r, y + 18 * dy / r
        out.append(f'<text x="{tx:.3f}" y="{ty:.3f}" font-size="14" font-family="monospace" '
                   f'text-anchor="middle" dominant-baseline="middle">{escape(text)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
