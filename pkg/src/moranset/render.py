"""SVG and Wavefront OBJ emitters for generation snapshots.

Output text depends only on the input arrays, so identical trees produce
identical bytes.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .errors import ValidationError
from .tree import GenerationTree

ADJUSTED = "#c0392b"
CLASSIC = "#2e6fba"
FILL = "#1f2d3d"


def _f(x: float) -> str:
    return f"{x:.4f}".rstrip("0").rstrip(".") if math.isfinite(x) else "0"


def _svg(width: float, height: float, body: list[str], title: str = "") -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        '<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" "http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">',
        f'<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" '
        f'height="{_f(height)}" viewBox="0 0 {_f(width)} {_f(height)}">',
    ]
    if title:
        head.append(f"<title>{escape(title)}</title>")
    return "\n".join(head + body + ["</svg>"]) + "\n"


def svg_intervals(
    trees: list[GenerationTree],
    colors: list[str] | None = None,
    *,
    width: float = 800.0,
    row_height: float = 10.0,
    gap: float = 6.0,
    margin: float = 20.0,
    title: str = "",
) -> str:
    """Generations stacked top to bottom; with several trees each generation gets one row per tree."""
    if not trees or any(t.family.name != "cantor" for t in trees):
        raise ValidationError("interval rendering needs cantor trees")
    colors = colors or [ADJUSTED, CLASSIC][: len(trees)] + [FILL] * max(0, len(trees) - 2)
    E0 = trees[0].initial_set
    x0, x1 = float(E0[0]), float(E0[1])
    scale = width / (x1 - x0) if x1 > x0 else 1.0
    n = min(t.n for t in trees)
    body = []
    y = margin
    for g in range(n + 1):
        for tree, color in zip(trees, colors):
            rects = []
            for a, b in tree.sets(g):
                rects.append(
                    f'<rect x="{_f(margin + (a - x0) * scale)}" y="{_f(y)}" '
                    f'width="{_f((b - a) * scale)}" height="{_f(row_height)}"/>'
                )
            body.append(f'<g id="gen{g}-{len(body)}" fill="{color}" stroke="none">')
            body.extend(rects)
            body.append("</g>")
            y += row_height + 2
        y += gap
    return _svg(width + 2 * margin, y + margin - gap, body, title)


def svg_triangles(tree: GenerationTree, *, size: float = 800.0, margin: float = 20.0, title: str = "") -> str:
    """Filled triangles of the last generation, y axis flipped to point up."""
    if tree.family.name != "sierpinski":
        raise ValidationError("triangle rendering needs a sierpinski tree")
    tris = tree.sets()
    E0 = tree.initial_set
    lo, hi = E0.min(axis=0), E0.max(axis=0)
    scale = size / float(max(hi - lo)) if np.any(hi > lo) else 1.0
    w = float(hi[0] - lo[0]) * scale
    h = float(hi[1] - lo[1]) * scale
    body = [f'<g fill="{FILL}" stroke="none">']
    for T in tris:
        pts = " ".join(f"{_f(margin + (x - lo[0]) * scale)},{_f(margin + (hi[1] - y) * scale)}" for x, y in T)
        body.append(f'<polygon points="{pts}"/>')
    body.append("</g>")
    return _svg(w + 2 * margin, h + 2 * margin, body, title)


_QUADS = ((0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3))


def prism_corners(P: np.ndarray) -> np.ndarray:
    """8 corners ordered by (a, b, c) in {0,1}^3 as O + a(A-O) + b(B-O) + c(C-O)."""
    O = P[0]
    u, v, w = P[1] - O, P[2] - O, P[3] - O
    return np.array([O + a * u + b * v + c * w for a in (0, 1) for b in (0, 1) for c in (0, 1)])


def obj_prisms(tree: GenerationTree, *, comment: str = "") -> str:
    """One 8-vertex, 12-triangle box per prism of the last generation."""
    if tree.family.name != "menger":
        raise ValidationError("OBJ output is only available for the menger family")
    lines = [f"# {comment}" if comment else "# moranset menger generation", "o generation"]
    faces = []
    for i, P in enumerate(tree.sets()):
        for x, y, z in prism_corners(P):
            lines.append(f"v {x:.12g} {y:.12g} {z:.12g}")
        base = 8 * i + 1
        for q in _QUADS:
            faces.append(f"f {base + q[0]} {base + q[1]} {base + q[2]}")
            faces.append(f"f {base + q[0]} {base + q[2]} {base + q[3]}")
    return "\n".join(lines + faces) + "\n"


def svg_prisms(tree: GenerationTree, *, size: float = 800.0, margin: float = 20.0, title: str = "") -> str:
    """Isometric projection of the last generation: camera-facing faces, back to front."""
    if tree.family.name != "menger":
        raise ValidationError("prism rendering needs a menger tree")
    right = np.array([1.0, -1.0, 0.0]) / math.sqrt(2)
    up = np.array([-1.0, -1.0, 2.0]) / math.sqrt(6)
    view = np.ones(3) / math.sqrt(3)
    shades = ("#5d6d7e", "#85929e", "#aeb6bf")
    polys = []
    for P in tree.sets():
        C = prism_corners(P)
        centre = C.mean(axis=0)
        for qi, q in enumerate(_QUADS):
            F = C[list(q)]
            normal = np.cross(F[1] - F[0], F[2] - F[0])
            if normal @ (F.mean(axis=0) - centre) < 0:
                normal = -normal
            if normal @ view <= 0:
                continue
            polys.append((float(F.mean(axis=0) @ view), qi // 2, F @ right, F @ up))
    if not polys:
        return _svg(2 * margin, 2 * margin, [], title)
    polys.sort(key=lambda p: p[0])
    xs = np.concatenate([p[2] for p in polys])
    ys = np.concatenate([p[3] for p in polys])
    scale = size / max(float(np.ptp(xs)), float(np.ptp(ys)), 1e-300)
    body = ['<g stroke="none">']
    for _, shade, px, py in polys:
        pts = " ".join(
            f"{_f(margin + (x - xs.min()) * scale)},{_f(margin + (ys.max() - y) * scale)}" for x, y in zip(px, py)
        )
        body.append(f'<polygon fill="{shades[shade]}" points="{pts}"/>')
    body.append("</g>")
    return _svg(float(np.ptp(xs)) * scale + 2 * margin, float(np.ptp(ys)) * scale + 2 * margin, body, title)
