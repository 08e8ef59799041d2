"""CSV and SVG emitters, key-value config files and theta preset strings."""
from __future__ import annotations

import ast
import csv
import math
import operator
import re
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .heavy_sampler import (
    ArcUniform,
    ConfigurationError,
    DiscreteAtoms,
    SpectralMeasureSpec,
    preset,
)

EIGENVALUE_HEADER = ("re", "im")
SINGULAR_VALUE_HEADER = ("s",)
STIELTJES_HEADER = ("eta_im", "m_re", "m_im")
PWIT_HEADER = ("z_re", "z_im", "eta_im", "a_re", "a_im", "b_re", "b_im",
               "bp_re", "bp_im", "c_re", "c_im", "se_a")
POPULATION_HEADER = ("a_re", "a_im", "b_re", "b_im", "bp_re", "bp_im", "c_re", "c_im")
DENSITY_HEADER = ("E", "density")
MU_GRID_HEADER = ("z_re", "z_im", "mass")


def fmt(x) -> str:
    """Shortest round-tripping text for a number."""
    if x is None:
        return "nan"
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float).reshape(len(rows) - 1, len(rows[0]))


def write_eigenvalues(path, eigs) -> Path:
    e = np.asarray(eigs, dtype=complex)
    return write_csv(path, EIGENVALUE_HEADER, zip(e.real, e.imag))


def write_singular_values(path, svals) -> Path:
    return write_csv(path, SINGULAR_VALUE_HEADER, ((s,) for s in np.asarray(svals, dtype=float)))


def write_stieltjes(path, rows) -> Path:
    """``rows`` of (eta_im, m)."""
    return write_csv(path, STIELTJES_HEADER, ((t, complex(m).real, complex(m).imag) for t, m in rows))


def pwit_row(z: complex, eta_im: float, block, se_a) -> tuple:
    z = complex(z)
    vals = [block.a, block.b, block.b_prime, block.c]
    flat = [p for v in vals for p in (v.real, v.imag)]
    return (z.real, z.imag, eta_im, *flat, math.nan if se_a is None else se_a)


def write_population(path, pop) -> Path:
    cols = [pop.a, pop.b, pop.bp, pop.c]
    parts = [p for c in cols for p in (c.real, c.imag)]
    return write_csv(path, POPULATION_HEADER, zip(*parts))


def write_density(path, grid) -> Path:
    return write_csv(path, DENSITY_HEADER, zip(grid.abscissae, grid.values))


def write_mu_grid(path, measure) -> Path:
    pts = measure.points().ravel()
    return write_csv(path, MU_GRID_HEADER, zip(pts.real, pts.imag, measure.mass.ravel()))


# ------------------------------------------------------------------- svg

def svg_scatter(path, points, window=None, size: int = 800, radius: float = 1.2,
                title: str | None = None) -> Path:
    """Minimal scatter plot. ``window`` = (xmin, xmax, ymin, ymax) crops the
    plot; without it the bounding box of the data is used."""
    pts = np.asarray(points, dtype=complex).ravel()
    if window is None:
        if pts.size:
            xmin, xmax = pts.real.min(), pts.real.max()
            ymin, ymax = pts.imag.min(), pts.imag.max()
        else:
            xmin = ymin = -1.0
            xmax = ymax = 1.0
        padx = 0.02 * (xmax - xmin or 1.0)
        pady = 0.02 * (ymax - ymin or 1.0)
        window = (xmin - padx, xmax + padx, ymin - pady, ymax + pady)
    xmin, xmax, ymin, ymax = map(float, window)
    keep = (pts.real >= xmin) & (pts.real <= xmax) & (pts.imag >= ymin) & (pts.imag <= ymax)
    pts = pts[keep]
    px = (pts.real - xmin) / (xmax - xmin) * size
    py = (ymax - pts.imag) / (ymax - ymin) * size
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<rect width="{size}" height="{size}" fill="white"/>']
    if xmin < 0 < xmax:
        x0 = -xmin / (xmax - xmin) * size
        lines.append(f'<line x1="{x0:.2f}" y1="0" x2="{x0:.2f}" y2="{size}" stroke="#bbb"/>')
    if ymin < 0 < ymax:
        y0 = ymax / (ymax - ymin) * size
        lines.append(f'<line x1="0" y1="{y0:.2f}" x2="{size}" y2="{y0:.2f}" stroke="#bbb"/>')
    if title:
        lines.append(f'<text x="8" y="20" font-family="sans-serif" font-size="14">{title}</text>')
    lines.extend(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{radius}" fill="black"/>'
                 for x, y in zip(px, py))
    lines.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------- config

def read_config(path) -> dict:
    """``key = value`` per line; blank lines and ``#`` comments ignored."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def write_config(path, options: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{k} = {v}" for k, v in sorted(options.items()) if v is not None]
    path.write_text("\n".join(lines) + "\n")
    return path


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.USub: operator.neg, ast.UAdd: operator.pos}


def eval_number(text: str) -> float:
    """Arithmetic on numbers and ``pi`` (e.g. ``5*pi/4``, ``3pi/2``)."""
    src = re.sub(r"(\d)\s*pi", r"\1*pi", text.strip())

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ConfigurationError(f"cannot evaluate {text!r}")

    try:
        return ev(ast.parse(src, mode="eval"))
    except SyntaxError as exc:
        raise ConfigurationError(f"cannot evaluate {text!r}") from exc


def read_atoms(path, total_mass: float | None = None) -> DiscreteAtoms:
    """Atom file with columns re1,im1,re2,im2,weight."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    atoms = []
    for r in rows:
        re1, im1, re2, im2, w = (float(x) for x in r[:5])
        atoms.append(((complex(re1, im1), complex(re2, im2)), w))
    if not atoms:
        raise ConfigurationError(f"{path}: no atoms")
    return DiscreteAtoms(tuple(atoms))


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def parse_theta(text: str, alpha: float, b: float | None = None,
                base_dir=None) -> SpectralMeasureSpec:
    """``iid | circle | arcs(centers=...; b=...) | atoms(file=...)`` or a named preset.

    A bare preset name takes its half-width factor from ``b``.
    """
    text = text.strip()
    m = re.fullmatch(r"(\w[\w-]*)\s*(?:\((.*)\))?", text)
    if not m:
        raise ConfigurationError(f"cannot parse theta {text!r}")
    name, body = m.group(1), m.group(2)
    args = {}
    if body:
        for part in body.split(";"):
            if part.strip():
                k, _, v = part.partition("=")
                args[k.strip()] = v.strip()
    if name == "arcs":
        centers = tuple(eval_number(c) % (2 * math.pi) for c in args.get("centers", "0").split(","))
        bb = eval_number(args["b"]) if "b" in args else (b or 0.0)
        return SpectralMeasureSpec(alpha, ArcUniform(centers, bb * math.pi / 4))
    if name == "atoms":
        if "file" not in args:
            raise ConfigurationError("atoms(...) needs file=")
        f = Path(args["file"])
        if base_dir is not None and not f.is_absolute():
            f = Path(base_dir) / f
        atoms = read_atoms(f)
        return SpectralMeasureSpec(alpha, atoms, float(atoms.weights.sum()))
    return preset(name, alpha, b or 0.0)
