"""Bounding-box grid construction over a country polygon.

A square grid of boxes (side = grid spacing, centers at integer multiples
of the spacing) is laid over the polygon's bounding rectangle; a box is
kept when it intersects the polygon. Boxes on the border ring additionally
spawn diagonally shifted copies so the ragged national boundary stays
covered. Box sides are capped at 25 miles, the platform's query limit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

from shapely.geometry import Polygon, box as shapely_box
from shapely.prepared import prep

from .errors import ConstraintError, GeometryError

MILES_PER_DEG_LAT = 69.0
MAX_BOX_MILES = 25.0

# Diagonal border shift, as a fraction of the spacing.
SHIFT_HALF = "half"
SHIFT_FULL = "full"


@dataclass(frozen=True)
class BoundingBox:
    south: float
    west: float
    north: float
    east: float

    def __post_init__(self):
        if not (self.north > self.south and self.east > self.west):
            raise GeometryError(f"degenerate box: {self}")

    @property
    def mid_lat(self) -> float:
        return 0.5 * (self.south + self.north)

    def height_miles(self) -> float:
        return (self.north - self.south) * MILES_PER_DEG_LAT

    def width_miles(self) -> float:
        return (self.east - self.west) * MILES_PER_DEG_LAT * math.cos(
            math.radians(self.mid_lat)
        )

    def contains(self, lat: float, lon: float) -> bool:
        # South/west edges inclusive, north/east exclusive.
        return self.south <= lat < self.north and self.west <= lon < self.east


@dataclass
class TileSet:
    boxes: list[BoundingBox]
    spacing_deg: float
    source_polygon_id: str
    # Integer box centers in units of spacing/2; even coordinates are base
    # grid boxes, odd ones are diagonally shifted border boxes.
    _centers: set[tuple[int, int]] = field(default_factory=set, repr=False)

    def __len__(self):
        return len(self.boxes)

    def center_keys(self) -> set[tuple[int, int]]:
        if not self._centers:
            half = self.spacing_deg / 2.0
            self._centers = {
                (round(b.mid_lat / half), round((b.west + b.east) / 2.0 / half))
                for b in self.boxes
            }
        return self._centers


def load_polygon_file(path):
    """Rings of (lat, lon) pairs from a polygon JSON file.

    Accepts either the package's {"rings": [[[lat, lon], ...], ...]} form or
    a GeoJSON Polygon geometry/feature (whose coordinates are [lon, lat]).
    """
    import json

    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if isinstance(payload, dict) and "rings" in payload:
        return [[(lat, lon) for lat, lon in ring] for ring in payload["rings"]]
    geom = payload.get("geometry", payload) if isinstance(payload, dict) else None
    if isinstance(geom, dict) and geom.get("type") == "Polygon":
        return [[(lat, lon) for lon, lat in ring] for ring in geom["coordinates"]]
    raise GeometryError(f"{path}: expected a rings file or a GeoJSON Polygon")


def _as_polygon(rings) -> Polygon:
    # Accept a bare ring of (lat, lon) pairs or a list of rings (first =
    # shell, rest = holes).
    if rings and isinstance(rings[0], (tuple, list)) and len(rings[0]) == 2 and \
            isinstance(rings[0][0], (int, float)):
        rings = [rings]
    if not rings or len(rings[0]) < 3:
        raise GeometryError("polygon needs at least 3 vertices")
    shells = [[(lon, lat) for lat, lon in ring] for ring in rings]
    poly = Polygon(shells[0], holes=shells[1:])
    if poly.is_empty or poly.area == 0:
        raise GeometryError("polygon has zero area")
    if not poly.is_valid:
        raise GeometryError("polygon is self-intersecting or otherwise invalid")
    return poly


def _check_spacing(spacing_deg: float, lat_min: float, lat_max: float):
    if spacing_deg <= 0:
        raise ConstraintError("spacing must be positive")
    height = spacing_deg * MILES_PER_DEG_LAT
    if height > MAX_BOX_MILES:
        raise ConstraintError(
            f"spacing {spacing_deg}° gives {height:.1f}-mile boxes; limit is {MAX_BOX_MILES}"
        )
    # Width is widest at the latitude closest to the equator.
    if lat_min <= 0.0 <= lat_max:
        widest = 0.0
    else:
        widest = min(abs(lat_min), abs(lat_max))
    width = spacing_deg * MILES_PER_DEG_LAT * math.cos(math.radians(widest))
    if width > MAX_BOX_MILES:
        raise ConstraintError(
            f"spacing {spacing_deg}° gives {width:.1f}-mile-wide boxes at latitude {widest}"
        )


def _box_at(ci: int, cj: int, half: float) -> BoundingBox:
    lat, lon = ci * half, cj * half
    return BoundingBox(lat - half, lon - half, lat + half, lon + half)


def tile_polygon(polygon, spacing_deg: float = 0.3, shift: str = SHIFT_HALF,
                 polygon_id: str = "polygon") -> TileSet:
    """Cover `polygon` (ring(s) of (lat, lon) pairs) with grid boxes.

    Base boxes sit at integer multiples of `spacing_deg` and are kept when
    they intersect the polygon; border boxes (kept boxes with a rejected
    8-neighbor) add the four diagonally shifted copies that still intersect
    the polygon. Duplicates are removed.
    """
    if shift not in (SHIFT_HALF, SHIFT_FULL):
        raise ConstraintError(f"unknown shift mode {shift!r}")
    poly = _as_polygon(polygon)
    lon_min, lat_min, lon_max, lat_max = poly.bounds
    _check_spacing(spacing_deg, lat_min, lat_max)
    prepared = prep(poly)
    s = spacing_deg
    half = s / 2.0

    i_lo = math.floor((lat_min - half) / s)
    i_hi = math.ceil((lat_max + half) / s)
    j_lo = math.floor((lon_min - half) / s)
    j_hi = math.ceil((lon_max + half) / s)

    def grid_box(i, j):
        return shapely_box(j * s - half, i * s - half, j * s + half, i * s + half)

    kept = {
        (i, j)
        for i in range(i_lo, i_hi + 1)
        for j in range(j_lo, j_hi + 1)
        if prepared.intersects(grid_box(i, j))
    }

    # Border ring: kept cells with any rejected edge-neighbor.
    border = [
        (i, j)
        for (i, j) in kept
        if any(
            (i + di, j + dj) not in kept
            for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1))
        )
    ]

    # Integer centers in units of half-spacing: base cells are even/even.
    centers = {(2 * i, 2 * j) for (i, j) in kept}
    step = 1 if shift == SHIFT_HALF else 2
    for (i, j) in border:
        for di in (-step, step):
            for dj in (-step, step):
                key = (2 * i + di, 2 * j + dj)
                if key in centers:
                    continue
                cand = shapely_box(
                    key[1] * half - half, key[0] * half - half,
                    key[1] * half + half, key[0] * half + half,
                )
                if prepared.intersects(cand):
                    centers.add(key)

    boxes = [_box_at(ci, cj, half) for (ci, cj) in sorted(centers)]
    tiles = TileSet(boxes=boxes, spacing_deg=s, source_polygon_id=polygon_id)
    tiles._centers = centers
    return tiles


def covers(tiles: TileSet, point) -> bool:
    """True when (lat, lon) lies in at least one box of the tile set.

    Membership uses the inclusive-south/west, exclusive-north/east
    convention, so the un-shifted base grid partitions the plane.
    """
    lat, lon = point
    half = tiles.spacing_deg / 2.0
    s = tiles.spacing_deg
    centers = tiles.center_keys()
    base = (2 * math.floor(lat / s + 0.5), 2 * math.floor(lon / s + 0.5))
    if base in centers:
        return True
    shifted = (2 * math.floor(lat / s) + 1, 2 * math.floor(lon / s) + 1)
    return shifted in centers


def covers_many(tiles: TileSet, lats, lons):
    """Vectorized `covers` for parallel arrays; returns a boolean list-like."""
    import numpy as np

    lats = np.asarray(lats, dtype=float)
    lons = np.asarray(lons, dtype=float)
    s = tiles.spacing_deg
    centers = tiles.center_keys()
    bi = (2 * np.floor(lats / s + 0.5)).astype(np.int64)
    bj = (2 * np.floor(lons / s + 0.5)).astype(np.int64)
    si = (2 * np.floor(lats / s) + 1).astype(np.int64)
    sj = (2 * np.floor(lons / s) + 1).astype(np.int64)
    out = np.fromiter(
        (
            (int(b1), int(b2)) in centers or (int(s1), int(s2)) in centers
            for b1, b2, s1, s2 in zip(bi, bj, si, sj)
        ),
        dtype=bool,
        count=len(lats),
    )
    return out


def write_tiles_csv(tiles: TileSet, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["south", "west", "north", "east"])
        for b in tiles.boxes:
            writer.writerow([repr(b.south), repr(b.west), repr(b.north), repr(b.east)])


def read_tiles_csv(path, spacing_deg: float, polygon_id: str = "csv") -> TileSet:
    boxes = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            boxes.append(BoundingBox(
                float(row["south"]), float(row["west"]),
                float(row["north"]), float(row["east"]),
            ))
    return TileSet(boxes=boxes, spacing_deg=spacing_deg, source_polygon_id=polygon_id)
