"""Cover the continental US with bounding boxes the way a coordinate-query
collector would: a 0.3-degree grid, boxes capped at 25 miles per side,
diagonal shifted copies along the border.
"""

from samplab import geo, tiler

ring = geo.continental_outline()
tiles = tiler.tile_polygon(ring, spacing_deg=0.3, polygon_id="us_continental_v1")

base = sum(1 for c in tiles.center_keys() if c[0] % 2 == 0)
print(f"grid: {len(tiles):,} boxes ({base:,} on the base lattice, "
      f"{len(tiles) - base:,} border-shifted)")

sides = [(b.height_miles(), b.width_miles()) for b in tiles.boxes]
print(f"max box side: {max(max(s) for s in sides):.1f} miles (limit 25)")

for point in [(40.0, -100.0), (25.9, -80.3), (47.5, -115.0), (30.0, -60.0)]:
    print(f"covers {point}: {tiler.covers(tiles, point)}")

# Doubling the spacing would break the 25-mile cap:
try:
    tiler.tile_polygon(ring, spacing_deg=0.6)
except Exception as exc:
    print(f"0.6 degrees rejected: {exc}")
