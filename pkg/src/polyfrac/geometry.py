"""Planar geometry primitives shared by the mesh and refinement tooling.

All polygon routines assume an (n, 2) float array of vertex coordinates in
counter-clockwise order unless stated otherwise.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def polygon_signed_area(coords):
    """Shoelace signed area; positive for counter-clockwise cycles."""
    x = coords[:, 0]
    y = coords[:, 1]
    return 0.5 * (np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def polygon_area(coords):
    return abs(polygon_signed_area(coords))


def polygon_centroid(coords):
    """Area-weighted centroid of a simple polygon."""
    x = coords[:, 0]
    y = coords[:, 1]
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    if abs(a) < 1e-300:
        return coords.mean(axis=0)
    cx = ((x + xn) * cross).sum() / (6.0 * a)
    cy = ((y + yn) * cross).sum() / (6.0 * a)
    return np.array([cx, cy])


def polygon_diameter(coords):
    """Maximum pairwise vertex distance."""
    d = coords[:, None, :] - coords[None, :, :]
    return float(np.sqrt((d * d).sum(axis=2)).max())


def edge_lengths(coords):
    d = np.roll(coords, -1, axis=0) - coords
    return np.sqrt((d * d).sum(axis=1))


def edge_outward_normals(coords):
    """Unit outward normals per edge of a CCW polygon (edge i: v_i -> v_{i+1})."""
    t = np.roll(coords, -1, axis=0) - coords
    lengths = np.sqrt((t * t).sum(axis=1))
    n = np.column_stack([t[:, 1], -t[:, 0]]) / lengths[:, None]
    return n


def polygon_is_convex(coords, tol=1e-12):
    v = np.roll(coords, -1, axis=0) - coords
    cross = v[:, 0] * np.roll(v, -1, axis=0)[:, 1] - v[:, 1] * np.roll(v, -1, axis=0)[:, 0]
    scale = (v * v).sum(axis=1).max()
    return bool((cross >= -tol * scale).all())


def polygon_is_simple(coords, tol=1e-12):
    """O(n^2) segment-crossing test; adjacent edges may share endpoints only."""
    n = len(coords)
    segs = [(coords[i], coords[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_cross(segs[i][0], segs[i][1], segs[j][0], segs[j][1], tol):
                return False
    return True


def _segments_cross(a, b, c, d, tol):
    r = b - a
    s = d - c
    denom = r[0] * s[1] - r[1] * s[0]
    qp = c - a
    if abs(denom) < tol:
        return False
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    u = (qp[0] * r[1] - qp[1] * r[0]) / denom
    return tol < t < 1 - tol and tol < u < 1 - tol


def point_in_polygon(point, coords):
    """Winding-number containment test (boundary counts as inside)."""
    x, y = point
    inside = False
    n = len(coords)
    j = n - 1
    for i in range(n):
        xi, yi = coords[i]
        xj, yj = coords[j]
        if abs((xj - xi) * (y - yi) - (yj - yi) * (x - xi)) < 1e-14 * (1 + abs(x) + abs(y)):
            if min(xi, xj) - 1e-12 <= x <= max(xi, xj) + 1e-12 and \
               min(yi, yj) - 1e-12 <= y <= max(yi, yj) + 1e-12:
                return True
        if (yi > y) != (yj > y):
            xint = xi + (y - yi) * (xj - xi) / (yj - yi)
            if x < xint:
                inside = not inside
        j = i
    return inside


def project_point_on_segment(p, a, b):
    """Parameter t in [0, 1] of the closest point on segment ab, plus distance."""
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return 0.0, float(np.hypot(*(p - a)))
    t = float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    closest = a + t * ab
    return t, float(np.hypot(*(p - closest)))


def segment_ray_intersection(origin, direction, a, b, tol=1e-12):
    """Intersection of the ray origin + t*direction (t > tol) with segment ab.

    Returns (t, u) with u in [0, 1] along the segment, or None.
    """
    s = b - a
    denom = direction[0] * s[1] - direction[1] * s[0]
    if abs(denom) < tol:
        return None
    qp = a - origin
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    u = (qp[0] * direction[1] - qp[1] * direction[0]) / denom
    if t <= tol or u < -tol or u > 1 + tol:
        return None
    return float(t), float(min(max(u, 0.0), 1.0))


def ccw_angle(angle_from, angle_to):
    """Counter-clockwise angular distance in [0, 2*pi)."""
    return (angle_to - angle_from) % TWO_PI


def wedge_representative_angle(center, prev_pt, next_pt):
    """Angle of a ray from `center` strictly inside the polygon wedge.

    The wedge is bounded by the cycle edges center->next_pt and
    center->prev_pt of a CCW polygon; the interior lies CCW from the
    first direction to the second.
    """
    a_next = np.arctan2(next_pt[1] - center[1], next_pt[0] - center[0])
    a_prev = np.arctan2(prev_pt[1] - center[1], prev_pt[0] - center[0])
    span = ccw_angle(a_next, a_prev)
    return (a_next + 0.5 * span) % TWO_PI, span
