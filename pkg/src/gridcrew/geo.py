"""Geodesic helpers: great-circle distances and local-grid placement."""

from __future__ import annotations

import math

import numpy as np

# Mean Earth radius (meters); fixed so distances are reproducible.
EARTH_RADIUS_M = 6_371_000.0

# Meters per degree of latitude, used by the affine placement helper.
_M_PER_DEG_LAT = 111_320.0


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in meters between two lat/lon points (degrees).

    Identical coordinates return exactly 0.0.
    """
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlmb = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(a)))


def haversine_m_vec(lat: float, lon: float, lats: np.ndarray, lons: np.ndarray) -> np.ndarray:
    """Distances in meters from one point to arrays of lat/lon (degrees)."""
    phi1 = math.radians(lat)
    phi2 = np.radians(lats)
    dphi = np.radians(lats - lat)
    dlmb = np.radians(lons - lon)
    a = np.sin(dphi / 2.0) ** 2 + math.cos(phi1) * np.cos(phi2) * np.sin(dlmb / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.minimum(1.0, np.sqrt(a)))


def local_to_geodesic(
    xy: np.ndarray,
    origin_lat: float,
    origin_lon: float,
    meters_per_unit: float = 1.0,
) -> np.ndarray:
    """Affine placement of local planar coordinates onto lat/lon degrees.

    Maps local (x, y) points (x east, y north, arbitrary units) to geodesic
    coordinates around an origin using a flat-earth scaling at the origin
    latitude. Returns an array of (lat, lon) rows.
    """
    xy = np.asarray(xy, dtype=float)
    if xy.ndim != 2 or xy.shape[1] != 2:
        raise ValueError("xy must be an (n, 2) array of local coordinates")
    m_per_deg_lon = _M_PER_DEG_LAT * math.cos(math.radians(origin_lat))
    lat = origin_lat + xy[:, 1] * meters_per_unit / _M_PER_DEG_LAT
    lon = origin_lon + xy[:, 0] * meters_per_unit / m_per_deg_lon
    return np.column_stack([lat, lon])
