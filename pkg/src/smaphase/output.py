"""CSV and SVG artifact writers."""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .chebyshev import cgl_nodes, spectral_operators
from .material import full_density_2d, landau_density
from .objective import DisplacementField, pack, strains_2d

FIELD_HEADER_1D = ["x", "u", "eps", "density"]
FIELD_HEADER_2D = ["x", "y", "ux", "uy", "e1", "e2", "e3", "density"]


def _fmt(v) -> str:
    return format(float(v), ".17g")


def field_rows(artifacts):
    prob = artifacts.problem
    dtheta = prob.thermal.delta_theta
    if prob.dims == 1:
        x = prob.dom.coordinates()
        u = artifacts.final_field.u1
        eps = artifacts.strain_fields
        dens = landau_density(eps, dtheta, prob.params)
        return FIELD_HEADER_1D, zip(x, u, eps, dens)
    X, Y = prob.dom.coordinates()
    f = artifacts.final_field
    s = artifacts.strain_fields
    dens = full_density_2d(s.e1, s.e2, s.e3, dtheta, prob.params)
    cols = [X, Y, f.u1, f.u2, s.e1, s.e2, s.e3, dens]
    return FIELD_HEADER_2D, zip(*(c.ravel() for c in cols))


def write_field_csv(artifacts, path) -> Path:
    """One row per node, row-major in (i, j) node order."""
    path = Path(path)
    header, rows = field_rows(artifacts)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_field_csv(path) -> dict:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    return {name: data[:, k] for k, name in enumerate(header)}


def unknowns_from_csv(path, order: int) -> np.ndarray:
    """Packed interior displacement vector stored in a field CSV."""
    cols = read_field_csv(path)
    if "ux" in cols:
        shape = (order + 1, order + 1)
        return pack(DisplacementField(cols["ux"].reshape(shape), cols["uy"].reshape(shape)))
    return pack(DisplacementField(cols["u"]))


def write_trace_csv(artifacts, directory) -> tuple[Path, Path]:
    directory = Path(directory)
    ga_path = directory / "ga_trace.csv"
    bfgs_path = directory / "bfgs_trace.csv"
    with open(ga_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["generation", "best_energy"])
        for k, e in enumerate(artifacts.ga_trace):
            w.writerow([k, _fmt(e)])
    with open(bfgs_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "step_norm"])
        for k, s in enumerate(artifacts.bfgs_trace, 1):
            w.writerow([k, _fmt(s)])
    return ga_path, bfgs_path


# ---------------------------------------------------------------- heatmap

def cell_colors(values) -> np.ndarray:
    """
    Diverging colour per node: blue for negative, white at zero, red for
    positive, on a scale symmetric about zero. Returns '#rrggbb' strings.
    """
    v = np.asarray(values, dtype=float)
    vmax = np.max(np.abs(v)) if v.size else 0.0
    t = np.zeros_like(v) if vmax == 0 else v / vmax
    fade = np.rint(255.0 * (1.0 - np.abs(t))).astype(int)
    r = np.where(t >= 0, 255, fade)
    b = np.where(t <= 0, 255, fade)
    g = fade
    out = np.empty(v.shape, dtype=object)
    for idx in np.ndindex(v.shape):
        out[idx] = f"#{r[idx]:02x}{g[idx]:02x}{b[idx]:02x}"
    return out


def _cell_edges(nodes):
    """Cell boundaries half way between neighbouring nodes, clipped to the ends."""
    nodes = np.asarray(nodes, dtype=float)
    mids = 0.5 * (nodes[1:] + nodes[:-1])
    return np.concatenate([[nodes[0]], mids, [nodes[-1]]])


def render_heatmap_svg(field, path, x=None, y=None, title: str = "", size: int = 360) -> Path:
    """
    Write ``field[i, j]`` (value at x_i, y_j) as an SVG heatmap.

    Each node owns the rectangle between the midpoints to its neighbours, so
    no interpolation happens. Coordinates default to CGL nodes on [-1, 1].
    """
    field = np.asarray(field, dtype=float)
    if field.ndim != 2:
        raise ValueError("heatmap needs a 2D nodal grid")
    nx, ny = field.shape
    x = cgl_nodes(nx - 1) if x is None else np.asarray(x, dtype=float)
    y = cgl_nodes(ny - 1) if y is None else np.asarray(y, dtype=float)
    xe, ye = _cell_edges(x), _cell_edges(y)
    x0, x1 = min(xe[0], xe[-1]), max(xe[0], xe[-1])
    y0, y1 = min(ye[0], ye[-1]), max(ye[0], ye[-1])
    margin, legend_h = 20, 50
    sx = size / (x1 - x0)
    sy = size / (y1 - y0)

    def px(v):
        return margin + (v - x0) * sx

    def py(v):
        return margin + (y1 - v) * sy

    colors = cell_colors(field)
    width = size + 2 * margin
    height = size + 2 * margin + legend_h
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}">',
    ]
    if title:
        parts.append(f'<title>{title}</title>')
    for i in range(nx):
        left, right = sorted((px(xe[i]), px(xe[i + 1])))
        for j in range(ny):
            top, bottom = sorted((py(ye[j]), py(ye[j + 1])))
            parts.append(
                f'<rect x="{left:.3f}" y="{top:.3f}" width="{right - left:.3f}" '
                f'height="{bottom - top:.3f}" fill="{colors[i, j]}"/>'
            )
    vmin, vmax = float(field.min()), float(field.max())
    ly = size + 2 * margin
    lo_c, hi_c = cell_colors(np.array([vmin, vmax])) if (vmin or vmax) else ("#ffffff", "#ffffff")
    parts += [
        f'<rect x="{margin}" y="{ly}" width="20" height="14" fill="{lo_c}" stroke="black"/>',
        f'<text x="{margin + 26}" y="{ly + 12}" font-size="12">min {vmin:.6g}</text>',
        f'<rect x="{margin + size // 2}" y="{ly}" width="20" height="14" fill="{hi_c}" stroke="black"/>',
        f'<text x="{margin + size // 2 + 26}" y="{ly + 12}" font-size="12">max {vmax:.6g}</text>',
        "</svg>",
    ]
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path


def write_artifacts(artifacts, directory) -> list[Path]:
    """Write field/trace CSVs, metadata and (2D) heatmaps; mark failed runs."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = [write_field_csv(artifacts, directory / "field.csv")]
    written += list(write_trace_csv(artifacts, directory))
    meta = directory / "metadata.json"
    meta.write_text(json.dumps(artifacts.metadata, indent=2, sort_keys=True) + "\n")
    written.append(meta)
    if artifacts.problem.dims == 2:
        X, Y = artifacts.problem.dom.coordinates()
        written.append(render_heatmap_svg(artifacts.strain_fields.e2, directory / "e2.svg",
                                          X[:, 0], Y[0, :], title="e2 (refined)"))
        ga_dom = artifacts.spec.domain(artifacts.spec.ga_order)
        gx, gy = ga_dom.coordinates()
        ga_e2 = strains_2d(artifacts.ga_field, ga_dom, spectral_operators(ga_dom.order)).e2
        written.append(render_heatmap_svg(ga_e2, directory / "e2_ga.svg",
                                          gx[:, 0], gy[0, :], title="e2 (GA estimate)"))
    marker = directory / "NOT_CONVERGED"
    if artifacts.status == "not_converged":
        marker.write_text("BFGS refinement hit max_iterations before the step-norm tolerance\n")
        written.append(marker)
    elif marker.exists():
        os.remove(marker)
    return written
