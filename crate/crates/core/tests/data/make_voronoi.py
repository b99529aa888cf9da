"""Regenerates voronoi_unit_square.json: a bounded Voronoi mesh of the unit
square from random seeds smoothed by a few Lloyd iterations.

    python3 make_voronoi.py [n_seeds] [seed]
"""

import json
import sys

import numpy as np
from scipy.spatial import Voronoi


def bounded_voronoi(points):
    # Mirroring the seeds across the four sides puts every bisector of the
    # original cells that meets the boundary exactly on it.
    mirrored = [points]
    for axis, value in [(0, 0.0), (0, 1.0), (1, 0.0), (1, 1.0)]:
        m = points.copy()
        m[:, axis] = 2.0 * value - m[:, axis]
        mirrored.append(m)
    vor = Voronoi(np.vstack(mirrored))
    cells = []
    for i in range(len(points)):
        region = vor.regions[vor.point_region[i]]
        assert -1 not in region
        cells.append(np.clip(vor.vertices[region], 0.0, 1.0))
    return cells


def polygon_centroid(poly):
    x, y = poly[:, 0], poly[:, 1]
    xs, ys = np.roll(x, -1), np.roll(y, -1)
    cross = x * ys - xs * y
    area = cross.sum() / 2.0
    return np.array([((x + xs) * cross).sum(), ((y + ys) * cross).sum()]) / (6.0 * area)


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 60
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 7
    rng = np.random.default_rng(seed)
    points = rng.uniform(0.05, 0.95, size=(n, 2))
    for _ in range(30):
        points = np.array([polygon_centroid(orient(c)) for c in bounded_voronoi(points)])

    vertices, index, cells = [], {}, []
    for poly in bounded_voronoi(points):
        poly = orient(poly)
        ids = []
        for x, y in poly:
            # snap to the boundary and merge coincident vertices
            x = 0.0 if abs(x) < 1e-12 else 1.0 if abs(x - 1.0) < 1e-12 else x
            y = 0.0 if abs(y) < 1e-12 else 1.0 if abs(y - 1.0) < 1e-12 else y
            key = (round(x, 10), round(y, 10))
            if key not in index:
                index[key] = len(vertices)
                vertices.append([x, y])
            if not ids or ids[-1] != index[key]:
                ids.append(index[key])
        if ids[0] == ids[-1]:
            ids.pop()
        cells.append(ids)

    # mirroring makes the corners Voronoi vertices; anything else is a bug
    for key in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]:
        if key not in index:
            raise SystemExit(f"corner {key} missing; try another seed")

    with open("voronoi_unit_square.json", "w") as f:
        json.dump({"vertices": vertices, "cells": cells}, f, indent=1)
    print(f"{len(cells)} cells, {len(vertices)} vertices")


def orient(poly):
    c = poly.mean(axis=0)
    angles = np.arctan2(poly[:, 1] - c[1], poly[:, 0] - c[0])
    return poly[np.argsort(angles)]


if __name__ == "__main__":
    main()
