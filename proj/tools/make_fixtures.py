#!/usr/bin/env python3
"""Regenerate the synthetic fixtures in tests/fixtures.

Everything is seeded; rerunning produces identical files. Ground truth for
each fixture is written next to it as *_truth.json.
"""

import argparse
import json
import math
from pathlib import Path

import numpy as np

SEED = 20160301


def rotate(x, y, deg):
    t = math.radians(deg)
    c, s = math.cos(t), math.sin(t)
    return c * x - s * y, s * x + c * y


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(v if isinstance(v, str) else f"{v:.6f}" for v in r) + "\n")


def write_json(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def lattice_points(rng, origin, deg, spacing, nx, ny, jitter):
    pts = []
    for i in range(nx):
        for j in range(ny):
            x, y = rotate(i * spacing, j * spacing, deg)
            pts.append((origin[0] + x + rng.normal(0, jitter), origin[1] + y + rng.normal(0, jitter)))
    return pts


def lattice_noise(out, rng):
    # Two patches of one 20 degree lattice, well apart, with sparse noise.
    a = lattice_points(rng, (5.0, 5.0), 20.0, 1.5, 8, 8, 0.06)
    b = lattice_points(rng, (40.0, 30.0), 20.0, 1.5, 7, 7, 0.06)
    noise = [(rng.uniform(0, 60), rng.uniform(0, 50)) for _ in range(25)]
    rows = []
    for k, (x, y) in enumerate(a + b + noise):
        rows.append((f"p{k + 1}", x, y))
    write_csv(out / "lattice_noise_points.csv", ["id", "x", "y"], rows)
    write_json(out / "lattice_noise_truth.json", {
        "orientation_deg": 20.0, "spacing": 1.5, "lattice_points": len(a) + len(b),
        "noise_points": len(noise), "patches": 2, "expected_axiality": "perpendicular"})


def pure_noise(out, rng):
    rows = [(f"n{k + 1}", rng.uniform(0, 50), rng.uniform(0, 50)) for k in range(250)]
    write_csv(out / "noise_points.csv", ["id", "x", "y"], rows)
    write_json(out / "noise_truth.json", {"points": len(rows), "expected_axiality": "neither"})


def two_grids(out, rng):
    q = 4.32
    sigma = 0.1
    grids = [
        {"prefix": "A", "orientation_deg": 12.0, "offset": (1.7, 0.9), "origin_cells": (0, 0)},
        {"prefix": "B", "orientation_deg": 33.0, "offset": (0.4, 2.6), "origin_cells": (0, 0)},
    ]
    rows = []
    truth = {"quantum": q, "sigma": sigma, "grids": [], "straddlers": []}
    for g in grids:
        ids = []
        for b in range(12):
            i = int(rng.integers(0, 8)) + g["origin_cells"][0]
            j = int(rng.integers(0, 8)) + g["origin_cells"][1]
            w = int(rng.integers(1, 4))
            h = int(rng.integers(1, 4))
            bid = f"{g['prefix']}{b + 1}"
            ids.append(bid)
            for k, (u, v) in enumerate([(i, j), (i + w, j), (i + w, j + h), (i, j + h)]):
                x, y = rotate(g["offset"][0] + u * q, g["offset"][1] + v * q, g["orientation_deg"])
                rows.append((bid, str(k), x + rng.normal(0, sigma), y + rng.normal(0, sigma)))
        truth["grids"].append({"orientation_deg": g["orientation_deg"], "offset_x": g["offset"][0],
                               "offset_y": g["offset"][1], "buildings": ids})
    # One building whose long walls follow the first grid and short walls the second.
    ox, oy = 20.0, 12.0
    ux, uy = rotate(6.0, 0.0, grids[0]["orientation_deg"])
    vx, vy = rotate(0.0, 5.0, grids[1]["orientation_deg"])
    for k, (x, y) in enumerate([(ox, oy), (ox + ux, oy + uy), (ox + ux + vx, oy + uy + vy), (ox + vx, oy + vy)]):
        rows.append(("X1", str(k), x, y))
    truth["straddlers"].append("X1")
    write_csv(out / "two_grids_corners.csv", ["building", "corner_index", "x", "y"], rows)
    write_json(out / "two_grids_truth.json", truth)


def disc(img, cx, cy, r):
    h, w = img.shape
    for y in range(max(0, cy - r), min(h, cy + r + 1)):
        for x in range(max(0, cx - r), min(w, cx + r + 1)):
            if (x - cx) ** 2 + (y - cy) ** 2 <= r * r:
                img[y, x] = 1


def write_pbm(path, img):
    h, w = img.shape
    packed = np.packbits(img.astype(np.uint8), axis=1)
    with open(path, "wb") as f:
        f.write(f"P4\n{w} {h}\n".encode())
        f.write(packed.tobytes())


def plan_raster(out, rng):
    w, h = 400, 300
    img = np.zeros((h, w), dtype=np.uint8)
    dots = []
    for i in range(7):
        for j in range(5):
            cx = 40 + 40 * i + int(rng.integers(-2, 3))
            cy = 40 + 40 * j + int(rng.integers(-2, 3))
            if j == 2:
                cy += 10  # keep clear of the wall line
            disc(img, cx, cy, 3)
            dots.append((cx, cy))
    # A wall drawn as a long thin line between rows.
    img[118:121, 20:320] = 1
    # Legend in the lower right: a scale bar and a few marks.
    img[270:273, 340:390] = 1
    for k in range(3):
        disc(img, 345 + 15 * k, 255, 3)
    write_pbm(out / "plan.pbm", img)
    write_json(out / "plan_truth.json", {
        "width": w, "height": h, "dots": len(dots), "dot_radius": 3,
        "dot_centres": [list(d) for d in dots], "wall_line": [20, 118, 320, 121],
        "legend_box": [330, 240, 400, 300], "crop_without_legend": [0, 0, 330, 300]})


def quantum_values(out, rng):
    q = 4.32
    base = rng.uniform(0, 60, size=21)
    base = np.round(base / q) * q + rng.normal(0, 0.05, size=base.size)
    vals = [abs(base[i] - base[j]) for i in range(len(base)) for j in range(i + 1, len(base))][:200]
    write_csv(out / "quantum_values.csv", ["value_m"], [(v,) for v in vals])
    write_json(out / "quantum_values_truth.json", {"quantum": q, "sigma": 0.05, "values": len(vals)})


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "fixtures")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for k, fn in enumerate([lattice_noise, pure_noise, two_grids, plan_raster, quantum_values]):
        fn(args.out, np.random.default_rng(SEED + k))


if __name__ == "__main__":
    main()
