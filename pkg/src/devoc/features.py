"""Stage-two features: 4x4 zoning of the 100x100 skeleton.

Each of the 16 tiles (25x25 pixels) contributes an (intersection count,
open-end count) pair, giving a 32-value vector. Point classification uses
full-image neighbor counts, so tile boundaries never create phantom ends.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .raster import NORM_SIZE, OutOfBoundsError, neighbor_count_grid

TILE = 25
GRID = 4
N_FEATURES = 2 * GRID * GRID


class WrongDimensionsError(Exception):
    pass


class PointKind(Enum):
    INTERSECTION = "intersection"
    OPEN_END = "open_end"


@dataclass(frozen=True)
class FeaturePoint:
    position: tuple  # (row, col)
    kind: PointKind


def tile_of(row, col):
    """Tile index 0..15 in row-major 4x4 order."""
    if not (0 <= row < NORM_SIZE and 0 <= col < NORM_SIZE):
        raise OutOfBoundsError("(%d,%d) outside the %d grid" % (row, col, NORM_SIZE))
    return (row // TILE) * GRID + col // TILE


def find_feature_points(skel):
    """Classify every foreground pixel by its 8-neighbor count:
    1 -> open end, >=3 -> intersection, anything else emits nothing."""
    counts = neighbor_count_grid(skel)
    points = []
    for r, c in np.argwhere(skel & (counts == 1)):
        points.append(FeaturePoint((int(r), int(c)), PointKind.OPEN_END))
    for r, c in np.argwhere(skel & (counts >= 3)):
        points.append(FeaturePoint((int(r), int(c)), PointKind.INTERSECTION))
    return points


def extract_features(skel):
    """32 counts: tiles in row-major order, each contributing the adjacent
    pair (intersections, open ends)."""
    if skel.shape != (NORM_SIZE, NORM_SIZE):
        raise WrongDimensionsError("expected %dx%d skeleton, got %r" % (NORM_SIZE, NORM_SIZE, skel.shape))
    vec = np.zeros(N_FEATURES, dtype=np.int64)
    for pt in find_feature_points(skel):
        t = tile_of(*pt.position)
        offset = 0 if pt.kind == PointKind.INTERSECTION else 1
        vec[2 * t + offset] += 1
    return vec


def scale_features(vec, cap=5.0):
    """Network input conditioning: counts divided by cap, clamped to [0,1]."""
    return np.clip(np.asarray(vec, dtype=float) / cap, 0.0, 1.0)


def write_features_csv(path, rows):
    """rows: iterable of (label, group, 32-vector). Header row mandatory."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "group"] + ["f%d" % i for i in range(N_FEATURES)])
        for label, group, vec in rows:
            writer.writerow([label, group] + [int(v) for v in vec])
