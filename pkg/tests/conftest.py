import numpy as np
import pytest

from polyfrac import geometry as geo


def random_polygon(rng, n_vertices=None):
    """Random simple CCW polygon with 3-12 vertices, random scale/offset.

    Vertices are star-shaped around a center with bounded angular gaps so
    the polygon is simple and free of slivers.
    """
    n = int(n_vertices if n_vertices is not None else rng.integers(3, 13))
    while True:
        ang = np.sort(rng.uniform(0.0, 2.0 * np.pi, n))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2.0 * np.pi]]))
        if gaps.min() > 0.1 * (2.0 * np.pi / n) and gaps.max() < 2.6:
            break
    rad = rng.uniform(0.4, 1.0, n)
    pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    pts *= rng.uniform(0.1, 10.0)
    pts += rng.uniform(-5.0, 5.0, 2)
    assert geo.polygon_signed_area(pts) > 0
    return pts


def linear_field(coeffs):
    """(u_x, u_y) = (a0 + a1 x + a2 y, b0 + b1 x + b2 y)."""
    a0, a1, a2, b0, b1, b2 = coeffs

    def u(x, y):
        return a0 + a1 * x + a2 * y, b0 + b1 * x + b2 * y

    return u


def interpolate_field(mesh, u):
    out = np.empty(2 * mesh.n_vertices)
    for v, (x, y) in enumerate(mesh.vertices):
        out[2 * v], out[2 * v + 1] = u(x, y)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
