"""JSON/CSV serialization, bundled JSON schemas and SVG rendering (n = 2)."""
from __future__ import annotations

import csv
import io
import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import SpecError

SCHEMAS = ("bounds", "census", "verify", "oracle_scan")


def load_json_arg(text):
    """Parse inline JSON, or the contents of a file when ``text`` starts with '@'."""
    if text.startswith("@"):
        path = Path(text[1:])
        try:
            text = path.read_text()
        except OSError as exc:
            raise SpecError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc}") from None


def matrix_to_json(R):
    """Row-major nested lists with ``None`` for NaN (the empty diagonal)."""
    return [[None if math.isnan(x) else float(x) for x in row] for row in np.asarray(R)]


def dumps(doc):
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def load_schema(name):
    if name not in SCHEMAS:
        raise KeyError(name)
    ref = resources.files("critframes") / "schemas" / f"{name}.schema.json"
    return json.loads(ref.read_text())


def census_csv(orbits):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "objective", "residual_max", "morse_index", "hessian_nullity",
                "hits", "degenerate", "canonical_frame"])
    for k, o in enumerate(orbits):
        w.writerow([k, repr(o.objective), repr(o.residual_max),
                    "" if o.morse_index is None else o.morse_index,
                    o.hessian_nullity, o.hits, int(o.degenerate),
                    json.dumps(o.canonical_frame.to_list())])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# SVG


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


class _Canvas:
    def __init__(self, points, size=480, margin=24):
        P = np.asarray(points)
        self.lo = P.min(axis=0)
        span = float(np.max(P.max(axis=0) - self.lo)) or 1.0
        self.scale = (size - 2 * margin) / span
        self.margin, self.size = margin, size
        self.items = []

    def xy(self, p):
        x = self.margin + (p[0] - self.lo[0]) * self.scale
        y = self.size - self.margin - (p[1] - self.lo[1]) * self.scale
        return f"{x:.3f},{y:.3f}"

    def polygon(self, pts, stroke, fill="none", width=1.5):
        coords = " ".join(self.xy(p) for p in pts)
        self.items.append(f'<polygon points="{coords}" fill="{fill}" stroke="{stroke}" '
                          f'stroke-width="{width}"/>')

    def line(self, a, b, stroke, width=1.5):
        (x1, y1), (x2, y2) = (self.xy(a).split(","), self.xy(b).split(","))
        self.items.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{stroke}" '
                          f'stroke-width="{width}"/>')

    def dot(self, p, fill, r=3.0):
        x, y = self.xy(p).split(",")
        self.items.append(f'<circle cx="{x}" cy="{y}" r="{r}" fill="{fill}"/>')

    def render(self):
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" '
                f'height="{self.size}" viewBox="0 0 {self.size} {self.size}">')
        body = "\n".join("  " + item for item in self.items)
        return f'{head}\n  <rect width="100%" height="100%" fill="white"/>\n{body}\n</svg>\n'


def parallelotope_svg(body, parallelotopes):
    """Body boundary, the four edges of each parallelogram and its support points."""
    boundary = body.boundary_points(256)
    quads = []
    for par in parallelotopes:
        V = par.vertices()     # order: (l,l), (l,u), (u,l), (u,u)
        quads.append(V[[0, 1, 3, 2]])
    canvas = _Canvas(np.vstack([boundary] + quads))
    canvas.polygon(boundary, "black", fill="#eeeeee")
    for k, (par, quad) in enumerate(zip(parallelotopes, quads)):
        color = _COLORS[k % len(_COLORS)]
        canvas.polygon(quad, color)
        for pm, pp in par.support_points:
            canvas.dot(pm, color)
            canvas.dot(pp, color)
    return canvas.render()


def bj_svg(unit_ball, frames):
    """Unit ball of the norm with each basis drawn from the origin."""
    boundary = unit_ball.boundary_points(256)
    canvas = _Canvas(np.vstack([boundary] + [f.vectors for f in frames] + [np.zeros((1, 2))]))
    canvas.polygon(boundary, "black", fill="#eeeeee")
    origin = np.zeros(2)
    for k, f in enumerate(frames):
        color = _COLORS[k % len(_COLORS)]
        for v in f.vectors:
            canvas.line(origin, v, color, width=2.0)
            canvas.dot(v, color)
    return canvas.render()
