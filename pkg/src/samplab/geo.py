"""Static US geography: state codes, Census Bureau divisions/regions,
state adjacency, and per-state coordinate rectangles.

The division/region grouping is the Census Bureau's standard grouping of
the 50 states plus DC into nine divisions and four regions. Rectangles are
deliberately conservative "inner" boxes used only for drawing synthetic
tweet coordinates; they are not authoritative state boundaries.
"""

from __future__ import annotations

import json
from importlib import resources

from .errors import DataError

STATE_LEVEL = "state"
DIVISION_LEVEL = "division"
REGION_LEVEL = "region"
LEVELS = (STATE_LEVEL, DIVISION_LEVEL, REGION_LEVEL)

# Coarseness order: state < division < region.
_LEVEL_RANK = {STATE_LEVEL: 0, DIVISION_LEVEL: 1, REGION_LEVEL: 2}

DC = "DC"

# Census division id -> member states.
DIVISIONS = {
    "new_england": ("CT", "ME", "MA", "NH", "RI", "VT"),
    "middle_atlantic": ("NJ", "NY", "PA"),
    "east_north_central": ("IL", "IN", "MI", "OH", "WI"),
    "west_north_central": ("IA", "KS", "MN", "MO", "NE", "ND", "SD"),
    "south_atlantic": ("DE", "FL", "GA", "MD", "NC", "SC", "VA", "WV", "DC"),
    "east_south_central": ("AL", "KY", "MS", "TN"),
    "west_south_central": ("AR", "LA", "OK", "TX"),
    "mountain": ("AZ", "CO", "ID", "MT", "NV", "NM", "UT", "WY"),
    "pacific": ("AK", "CA", "HI", "OR", "WA"),
}

REGIONS = {
    "northeast": ("new_england", "middle_atlantic"),
    "midwest": ("east_north_central", "west_north_central"),
    "south": ("south_atlantic", "east_south_central", "west_south_central"),
    "west": ("mountain", "pacific"),
}

STATE_TO_DIVISION = {
    state: division for division, states in DIVISIONS.items() for state in states
}
DIVISION_TO_REGION = {
    division: region for region, divisions in REGIONS.items() for division in divisions
}
STATE_TO_REGION = {
    state: DIVISION_TO_REGION[div] for state, div in STATE_TO_DIVISION.items()
}

STATES = tuple(sorted(STATE_TO_DIVISION))          # 51 codes incl. DC
STATES_NO_DC = tuple(s for s in STATES if s != DC)  # the 50 states

# Approximate inner rectangles (south, west, north, east) per state, used to
# draw synthetic coordinates. Kept intentionally tight so most points fall
# inside the continental outline; coastal leakage is tolerated.
STATE_RECTS = {
    "AL": (31.0, -88.0, 34.5, -85.5),
    "AK": (58.0, -162.0, 68.0, -145.0),
    "AZ": (32.0, -114.0, 36.5, -109.5),
    "AR": (33.5, -94.0, 36.2, -90.2),
    "CA": (33.5, -122.0, 41.0, -115.5),
    "CO": (37.2, -108.8, 40.8, -102.3),
    "CT": (41.3, -73.4, 41.9, -72.0),
    "DE": (38.7, -75.7, 39.7, -75.1),
    "FL": (27.0, -82.5, 30.4, -81.0),
    "GA": (31.0, -85.0, 34.5, -81.8),
    "HI": (19.3, -158.2, 21.7, -155.2),
    "ID": (42.5, -116.5, 48.5, -112.5),
    "IL": (37.5, -90.8, 42.2, -87.8),
    "IN": (38.2, -87.7, 41.5, -85.2),
    "IA": (40.7, -96.2, 43.3, -90.8),
    "KS": (37.2, -101.8, 39.8, -95.0),
    "KY": (36.8, -88.8, 38.6, -82.8),
    "LA": (30.2, -93.5, 32.7, -91.0),
    "ME": (43.8, -70.5, 46.8, -68.0),
    "MD": (38.5, -79.0, 39.6, -76.2),
    "MA": (42.1, -73.2, 42.7, -71.0),
    "MI": (42.0, -86.0, 45.3, -83.8),
    "MN": (43.8, -96.2, 48.5, -92.8),
    "MS": (31.0, -91.2, 34.6, -88.5),
    "MO": (36.5, -95.2, 40.3, -90.3),
    "MT": (44.8, -115.5, 48.7, -104.5),
    "NE": (40.2, -103.5, 42.8, -96.3),
    "NV": (36.5, -118.5, 41.5, -114.5),
    "NH": (42.9, -72.4, 44.8, -71.0),
    "NJ": (39.4, -75.3, 41.1, -74.2),
    "NM": (31.8, -108.8, 36.8, -103.3),
    "NY": (40.7, -78.7, 44.6, -73.8),
    "NC": (34.6, -83.5, 36.4, -76.8),
    "ND": (46.2, -103.5, 48.8, -97.2),
    "OH": (38.9, -84.4, 41.5, -81.0),
    "OK": (34.0, -102.0, 36.8, -95.2),
    "OR": (42.4, -123.2, 45.9, -117.5),
    "PA": (39.9, -80.2, 41.9, -75.3),
    "RI": (41.4, -71.8, 41.9, -71.3),
    "SC": (32.6, -82.8, 34.8, -79.7),
    "SD": (42.9, -103.5, 45.7, -97.0),
    "TN": (35.2, -89.5, 36.4, -82.5),
    "TX": (27.5, -103.5, 35.5, -94.8),
    "UT": (37.3, -113.7, 41.7, -109.4),
    "VT": (42.9, -73.2, 44.7, -71.8),
    "VA": (36.8, -82.5, 38.8, -77.2),
    "WA": (46.0, -123.2, 48.7, -117.8),
    "WV": (37.6, -82.0, 40.0, -78.6),
    "WI": (42.8, -92.3, 45.6, -88.2),
    "WY": (41.2, -110.8, 44.8, -104.3),
    "DC": (38.82, -77.1, 38.98, -76.92),
}

# Land-border adjacency (corner-only contacts like AZ-CO excluded). AK and
# HI have no land neighbors; DC borders MD and VA.
ADJACENCY = {
    "AL": ("FL", "GA", "MS", "TN"),
    "AK": (),
    "AZ": ("CA", "NM", "NV", "UT"),
    "AR": ("LA", "MO", "MS", "OK", "TN", "TX"),
    "CA": ("AZ", "NV", "OR"),
    "CO": ("KS", "NE", "NM", "OK", "UT", "WY"),
    "CT": ("MA", "NY", "RI"),
    "DE": ("MD", "NJ", "PA"),
    "FL": ("AL", "GA"),
    "GA": ("AL", "FL", "NC", "SC", "TN"),
    "HI": (),
    "ID": ("MT", "NV", "OR", "UT", "WA", "WY"),
    "IL": ("IA", "IN", "KY", "MO", "WI"),
    "IN": ("IL", "KY", "MI", "OH"),
    "IA": ("IL", "MN", "MO", "NE", "SD", "WI"),
    "KS": ("CO", "MO", "NE", "OK"),
    "KY": ("IL", "IN", "MO", "OH", "TN", "VA", "WV"),
    "LA": ("AR", "MS", "TX"),
    "ME": ("NH",),
    "MD": ("DC", "DE", "PA", "VA", "WV"),
    "MA": ("CT", "NH", "NY", "RI", "VT"),
    "MI": ("IN", "OH", "WI"),
    "MN": ("IA", "ND", "SD", "WI"),
    "MS": ("AL", "AR", "LA", "TN"),
    "MO": ("AR", "IA", "IL", "KS", "KY", "NE", "OK", "TN"),
    "MT": ("ID", "ND", "SD", "WY"),
    "NE": ("CO", "IA", "KS", "MO", "SD", "WY"),
    "NV": ("AZ", "CA", "ID", "OR", "UT"),
    "NH": ("MA", "ME", "VT"),
    "NJ": ("DE", "NY", "PA"),
    "NM": ("AZ", "CO", "OK", "TX"),
    "NY": ("CT", "MA", "NJ", "PA", "VT"),
    "NC": ("GA", "SC", "TN", "VA"),
    "ND": ("MN", "MT", "SD"),
    "OH": ("IN", "KY", "MI", "PA", "WV"),
    "OK": ("AR", "CO", "KS", "MO", "NM", "TX"),
    "OR": ("CA", "ID", "NV", "WA"),
    "PA": ("DE", "MD", "NJ", "NY", "OH", "WV"),
    "RI": ("CT", "MA"),
    "SC": ("GA", "NC"),
    "SD": ("IA", "MN", "MT", "ND", "NE", "WY"),
    "TN": ("AL", "AR", "GA", "KY", "MO", "MS", "NC", "VA"),
    "TX": ("AR", "LA", "NM", "OK"),
    "UT": ("AZ", "CO", "ID", "NV", "WY"),
    "VT": ("MA", "NH", "NY"),
    "VA": ("DC", "KY", "MD", "NC", "TN", "WV"),
    "WA": ("ID", "OR"),
    "WV": ("KY", "MD", "OH", "PA", "VA"),
    "WI": ("IA", "IL", "MI", "MN"),
    "WY": ("CO", "ID", "MT", "NE", "SD", "UT"),
    "DC": ("MD", "VA"),
}


def geo_units(level: str, include_dc: bool = False):
    """Sorted geo-unit identifiers at a level."""
    if level == STATE_LEVEL:
        return list(STATES) if include_dc else list(STATES_NO_DC)
    if level == DIVISION_LEVEL:
        return sorted(DIVISIONS)
    if level == REGION_LEVEL:
        return sorted(REGIONS)
    raise DataError(f"unknown geo level: {level!r}")


def map_state(state: str, level: str) -> str:
    """Map a state code to its identifier at a coarser level."""
    if level == STATE_LEVEL:
        return state
    if level == DIVISION_LEVEL:
        return STATE_TO_DIVISION[state]
    if level == REGION_LEVEL:
        return STATE_TO_REGION[state]
    raise DataError(f"unknown geo level: {level!r}")


def is_coarser(target: str, source: str) -> bool:
    for level in (target, source):
        if level not in _LEVEL_RANK:
            raise DataError(f"unknown geo level: {level!r}")
    return _LEVEL_RANK[target] > _LEVEL_RANK[source]


def continental_outline():
    """Outer ring of the continental US outline fixture as (lat, lon) pairs."""
    with resources.files("samplab.data").joinpath("us_continental.json").open() as fh:
        payload = json.load(fh)
    return [tuple(pt) for pt in payload["rings"][0]]
