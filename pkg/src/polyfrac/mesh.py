"""Polygonal mesh data model, structured generators, and text file I/O.

A mesh is a flat list of vertices plus vertex-index cycles (one per
element, counter-clockwise).  Cracks are mesh-conforming: the two faces of
a crack are carried by geometrically coincident but topologically distinct
vertex pairs, so the displacement field may jump across them.  Hanging
nodes are ordinary vertices absorbed into the cycle of the coarse
neighbor, which simply becomes a polygon with one more (collinear) vertex.
"""

import numpy as np

from . import geometry as geo

CRACK_TAG = "crack"

# Relative snapping tolerance for crack polylines onto existing
# vertices/edges (scaled by local element diameter).
SNAP_REL = 1e-8


class CrackTip:
    """An active crack tip: mesh vertex, position, and local tangent.

    The tangent angle points in the direction of potential growth (from
    the crack interior through the tip).
    """

    def __init__(self, vertex, point, angle, crack_index=0):
        self.vertex = int(vertex)
        self.point = np.asarray(point, dtype=float)
        self.angle = float(angle)
        self.crack_index = int(crack_index)

    def __repr__(self):
        return f"CrackTip(vertex={self.vertex}, point={self.point.tolist()}, angle={self.angle:.6g})"


class CrackGeometry:
    """Explicit crack topology: polylines, active tips, duplicated face pairs.

    face_pairs holds (plus, minus) vertex-index pairs that coincide
    geometrically; `plus` lies on the left of the polyline walked toward
    the tip.
    """

    def __init__(self, polylines=None, tips=None, face_pairs=None):
        self.polylines = [np.asarray(p, dtype=float) for p in (polylines or [])]
        self.tips = list(tips or [])
        self.face_pairs = [(int(a), int(b)) for a, b in (face_pairs or [])]

    def copy(self):
        return CrackGeometry(
            [p.copy() for p in self.polylines],
            [CrackTip(t.vertex, t.point.copy(), t.angle, t.crack_index) for t in self.tips],
            list(self.face_pairs),
        )

    @property
    def n_cracks(self):
        return len(self.polylines)

    def __bool__(self):
        return bool(self.polylines)


class ElementGeometry:
    """Centroid, diameter, area, and outward unit edge normals of one element."""

    def __init__(self, coords):
        self.coords = coords
        self.area = geo.polygon_area(coords)
        self.centroid = geo.polygon_centroid(coords)
        self.diameter = geo.polygon_diameter(coords)
        self.normals = geo.edge_outward_normals(coords)
        self.edge_lengths = geo.edge_lengths(coords)


class PolyMesh:
    """Immutable polygonal mesh with crack topology.

    Attributes:
        vertices: (nv, 2) float array.
        elements: list of CCW vertex-index cycles (list of ints each).
        boundary: list of (element, local_edge, tag) records; the tag
            ``"crack"`` marks crack-face edges, any other tag marks a true
            domain boundary.
        crack: CrackGeometry (may be empty).
        hanging: frozenset of hanging vertex indices.
        nvb_newest: per-element local index of the newest vertex
            (triangle meshes only, None otherwise).
        levels: per-element subdivision depth used by the balanced
            quadtree-style refinement (None until first used).

    All queries are read-only; mutating operations return new meshes.
    """

    def __init__(self, vertices, elements, boundary=None, crack=None,
                 hanging=None, nvb_newest=None, levels=None, normalize=True):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.elements = [list(map(int, cyc)) for cyc in elements]
        if normalize:
            for cyc in self.elements:
                if geo.polygon_signed_area(self.vertices[cyc]) < 0:
                    cyc.reverse()
        self.boundary = [(int(e), int(le), str(tag)) for e, le, tag in (boundary or [])]
        self.crack = crack if crack is not None else CrackGeometry()
        self.hanging = frozenset(int(h) for h in (hanging or ()))
        self.nvb_newest = None if nvb_newest is None else [int(k) for k in nvb_newest]
        self.levels = None if levels is None else np.asarray(levels, dtype=int)
        self._edge_map = None
        self._vertex_elements = None
        self._geom_cache = {}

    # -- basic queries -------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_elements(self):
        return len(self.elements)

    def element_coords(self, e):
        return self.vertices[self.elements[e]]

    def element_geometry(self, e):
        """Centroid/area by the shoelace formulas, diameter, unit normals."""
        g = self._geom_cache.get(e)
        if g is None:
            g = ElementGeometry(self.element_coords(e))
            self._geom_cache[e] = g
        return g

    def total_area(self):
        return sum(self.element_geometry(e).area for e in range(self.n_elements))

    def edge_map(self):
        """Undirected edge -> list of (element, local_edge) incidences."""
        if self._edge_map is None:
            em = {}
            for e, cyc in enumerate(self.elements):
                m = len(cyc)
                for k in range(m):
                    a, b = cyc[k], cyc[(k + 1) % m]
                    key = (a, b) if a < b else (b, a)
                    em.setdefault(key, []).append((e, k))
            self._edge_map = em
        return self._edge_map

    def vertex_elements(self):
        """Vertex -> list of incident element ids."""
        if self._vertex_elements is None:
            ve = [[] for _ in range(self.n_vertices)]
            for e, cyc in enumerate(self.elements):
                for v in cyc:
                    ve[v].append(e)
            self._vertex_elements = ve
        return self._vertex_elements

    def boundary_edges(self, tag=None, exclude_crack=False):
        """Boundary records, optionally filtered by tag."""
        out = []
        for e, le, t in self.boundary:
            if tag is not None and t != tag:
                continue
            if exclude_crack and t == CRACK_TAG:
                continue
            out.append((e, le, t))
        return out

    def edge_vertices(self, e, local_edge):
        cyc = self.elements[e]
        return cyc[local_edge], cyc[(local_edge + 1) % len(cyc)]

    def boundary_nodes(self, tags=None, exclude_crack=False):
        """Set of vertex ids lying on (tagged) boundary edges."""
        nodes = set()
        for e, le, t in self.boundary:
            if tags is not None and t not in tags:
                continue
            if exclude_crack and t == CRACK_TAG:
                continue
            a, b = self.edge_vertices(e, le)
            nodes.add(a)
            nodes.add(b)
        return nodes

    # -- validation ----------------------------------------------------

    def validate(self, check_simple=False):
        """Raise ValueError when a structural invariant is violated."""
        nv = self.n_vertices
        for e, cyc in enumerate(self.elements):
            if len(cyc) < 3:
                raise ValueError(f"element {e} has fewer than 3 vertices")
            if len(set(cyc)) != len(cyc):
                raise ValueError(f"element {e} repeats a vertex")
            if any(v < 0 or v >= nv for v in cyc):
                raise ValueError(f"element {e} references a missing vertex")
            if geo.polygon_signed_area(self.vertices[cyc]) <= 0:
                raise ValueError(f"element {e} is not positively oriented")
            if check_simple and not geo.polygon_is_simple(self.vertices[cyc]):
                raise ValueError(f"element {e} is self-intersecting")
        tagged = {}
        for e, le, t in self.boundary:
            a, b = self.edge_vertices(e, le)
            tagged[(min(a, b), max(a, b))] = t
        for key, incid in self.edge_map().items():
            if len(incid) > 2:
                raise ValueError(f"edge {key} shared by {len(incid)} elements")
            if len(incid) == 1 and key not in tagged:
                raise ValueError(f"untagged boundary edge {key}")
            if len(incid) == 2 and key in tagged:
                raise ValueError(f"interior edge {key} carries a boundary tag")
        for a, b in self.crack.face_pairs:
            if not np.allclose(self.vertices[a], self.vertices[b], atol=1e-9):
                raise ValueError(f"crack face pair ({a}, {b}) does not coincide")
        for h in self.hanging:
            if not self._is_hanging_somewhere(h):
                raise ValueError(f"vertex {h} flagged hanging but is a corner everywhere")
        return self

    def _is_hanging_somewhere(self, v):
        for e in self.vertex_elements()[v]:
            cyc = self.elements[e]
            k = cyc.index(v)
            a = self.vertices[cyc[k - 1]]
            b = self.vertices[cyc[(k + 1) % len(cyc)]]
            p = self.vertices[v]
            cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
            if abs(cross) <= 1e-9 * max(1.0, float(np.hypot(*(b - a))) ** 2):
                return True
        return False


# -- structured generators ----------------------------------------------


def _rect_tag(x, y, x0, y0, x1, y1, tol):
    if abs(x - x0) < tol:
        return "left"
    if abs(x - x1) < tol:
        return "right"
    if abs(y - y0) < tol:
        return "bottom"
    if abs(y - y1) < tol:
        return "top"
    return None


def _tag_rectangle_boundary(vertices, elements, rect):
    x0, y0, x1, y1 = rect
    tol = 1e-9 * max(x1 - x0, y1 - y0)
    edge_count = {}
    for e, cyc in enumerate(elements):
        m = len(cyc)
        for k in range(m):
            a, b = cyc[k], cyc[(k + 1) % m]
            key = (min(a, b), max(a, b))
            edge_count[key] = edge_count.get(key, 0) + 1
    boundary = []
    for e, cyc in enumerate(elements):
        m = len(cyc)
        for k in range(m):
            a, b = cyc[k], cyc[(k + 1) % m]
            key = (min(a, b), max(a, b))
            if edge_count[key] != 1:
                continue
            mx, my = 0.5 * (vertices[a] + vertices[b])
            tag = _rect_tag(mx, my, x0, y0, x1, y1, tol)
            if tag is None:
                raise ValueError("boundary edge off the rectangle outline")
            boundary.append((e, k, tag))
    return boundary


def generate_structured(kind, rect, nx, ny):
    """Structured quad or triangle mesh of an axis-aligned rectangle.

    kind: "q4" for quads, "t3" for triangles (each cell split along a
    diagonal whose direction alternates to avoid directional bias).
    rect: (x0, y0, x1, y1).
    """
    kind = kind.lower()
    if kind not in ("q4", "t3"):
        raise ValueError(f"unknown structured mesh kind {kind!r}")
    x0, y0, x1, y1 = (float(v) for v in rect)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("degenerate rectangle")
    if nx < 1 or ny < 1:
        raise ValueError("need nx, ny >= 1")
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    xx, yy = np.meshgrid(xs, ys)
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(ix, iy):
        return iy * (nx + 1) + ix

    elements = []
    for iy in range(ny):
        for ix in range(nx):
            n1, n2 = vid(ix, iy), vid(ix + 1, iy)
            n3, n4 = vid(ix + 1, iy + 1), vid(ix, iy + 1)
            if kind == "q4":
                elements.append([n1, n2, n3, n4])
            elif (ix + iy) % 2 == 0:
                elements.append([n1, n2, n3])
                elements.append([n1, n3, n4])
            else:
                elements.append([n1, n2, n4])
                elements.append([n2, n3, n4])
    boundary = _tag_rectangle_boundary(vertices, elements, (x0, y0, x1, y1))
    return PolyMesh(vertices, elements, boundary)


def generate_voronoi(rect, n_seeds, lloyd_iterations=0, rng_seed=0, seeds=None):
    """Clipped Voronoi tessellation of a rectangle, optionally Lloyd-relaxed.

    Seeds are reflected across all four sides before the tessellation so
    every interior cell is bounded and clipped exactly to the rectangle;
    all cells are convex.  Deterministic for a fixed rng_seed.
    """
    x0, y0, x1, y1 = (float(v) for v in rect)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("degenerate rectangle")
    if seeds is None:
        if n_seeds < 4:
            raise ValueError("need at least 4 seeds")
        rng = np.random.default_rng(rng_seed)
        seeds = np.column_stack([
            rng.uniform(x0, x1, n_seeds),
            rng.uniform(y0, y1, n_seeds),
        ])
    else:
        seeds = np.asarray(seeds, dtype=float).copy()
        if len(seeds) < 4:
            raise ValueError("need at least 4 seeds")
    for _ in range(int(lloyd_iterations)):
        cells = _clipped_voronoi_cells(seeds, (x0, y0, x1, y1))
        seeds = np.array([geo.polygon_centroid(c) for c in cells])
    cells = _clipped_voronoi_cells(seeds, (x0, y0, x1, y1))
    return _mesh_from_cells(cells, (x0, y0, x1, y1))


def _clipped_voronoi_cells(seeds, rect):
    from scipy.spatial import Voronoi

    x0, y0, x1, y1 = rect
    n = len(seeds)
    mirrored = [seeds]
    for refl in (
        lambda p: np.column_stack([2 * x0 - p[:, 0], p[:, 1]]),
        lambda p: np.column_stack([2 * x1 - p[:, 0], p[:, 1]]),
        lambda p: np.column_stack([p[:, 0], 2 * y0 - p[:, 1]]),
        lambda p: np.column_stack([p[:, 0], 2 * y1 - p[:, 1]]),
    ):
        mirrored.append(refl(seeds))
    vor = Voronoi(np.vstack(mirrored))
    tolx = 1e-9 * (x1 - x0)
    toly = 1e-9 * (y1 - y0)
    cells = []
    for i in range(n):
        region = vor.regions[vor.point_region[i]]
        if -1 in region or not region:
            raise RuntimeError("unbounded clipped cell; seeds too degenerate")
        coords = vor.vertices[region].copy()
        coords[:, 0] = np.clip(coords[:, 0], x0, x1)
        coords[:, 1] = np.clip(coords[:, 1], y0, y1)
        coords[np.abs(coords[:, 0] - x0) < tolx, 0] = x0
        coords[np.abs(coords[:, 0] - x1) < tolx, 0] = x1
        coords[np.abs(coords[:, 1] - y0) < toly, 1] = y0
        coords[np.abs(coords[:, 1] - y1) < toly, 1] = y1
        if geo.polygon_signed_area(coords) < 0:
            coords = coords[::-1]
        cells.append(coords)
    return cells


def _mesh_from_cells(cells, rect):
    scale = max(rect[2] - rect[0], rect[3] - rect[1])
    key_of = lambda p: (round(p[0] / scale, 12), round(p[1] / scale, 12))
    vert_ids = {}
    vertices = []
    elements = []
    for coords in cells:
        cyc = []
        for p in coords:
            k = key_of(p)
            if k not in vert_ids:
                vert_ids[k] = len(vertices)
                vertices.append((p[0], p[1]))
            vid = vert_ids[k]
            if not cyc or cyc[-1] != vid:
                cyc.append(vid)
        if cyc and cyc[0] == cyc[-1]:
            cyc.pop()
        if len(cyc) >= 3:
            elements.append(cyc)
    vertices = np.array(vertices)
    boundary = _tag_rectangle_boundary(vertices, elements, rect)
    return PolyMesh(vertices, elements, boundary)


def element_geometry(mesh, e):
    """Geometry record of element e (see ElementGeometry)."""
    return mesh.element_geometry(e)


def insert_crack(mesh, polyline):
    """Split the mesh conformingly along a crack polyline.

    Endpoints may lie on the domain boundary (crack mouth) or strictly
    inside (crack tip).  Elements traversed by the polyline are split
    along it, path vertices other than tips are duplicated into face
    pairs, and each interior endpoint becomes an active CrackTip.
    """
    from .cracks import carve_crack

    return carve_crack(mesh, polyline)


# -- text file I/O --------------------------------------------------------


def write_mesh(mesh, path):
    """Serialize to the plain-text mesh format (see README for grammar)."""
    lines = [f"{mesh.n_vertices} {mesh.n_elements} {mesh.crack.n_cracks}"]
    for x, y in mesh.vertices:
        lines.append(f"{float(x)!r} {float(y)!r}")
    for cyc in mesh.elements:
        lines.append(" ".join([str(len(cyc))] + [str(v) for v in cyc]))
    lines.append(str(len(mesh.boundary)))
    for e, le, tag in mesh.boundary:
        lines.append(f"{e} {le} {tag}")
    for ci in range(mesh.crack.n_cracks):
        poly = mesh.crack.polylines[ci]
        tips = [t for t in mesh.crack.tips if t.crack_index == ci]
        lines.append(f"{len(poly)} {len(tips)}")
        for x, y in poly:
            lines.append(f"{float(x)!r} {float(y)!r}")
        for t in tips:
            lines.append(f"{t.vertex} {float(t.angle)!r}")
    pairs = mesh.crack.face_pairs
    lines.append(str(len(pairs)))
    for a, b in pairs:
        lines.append(f"{a} {b}")
    lines.append(str(len(mesh.hanging)))
    for h in sorted(mesh.hanging):
        lines.append(str(h))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_mesh(path):
    """Inverse of write_mesh; vertices round-trip bit exactly."""
    with open(path) as f:
        tokens = f.read().split("\n")
    tokens = [t for t in tokens if t.strip()]
    it = iter(tokens)
    nv, ne, nc = (int(v) for v in next(it).split())
    vertices = np.empty((nv, 2))
    for i in range(nv):
        a, b = next(it).split()
        vertices[i] = (float(a), float(b))
    elements = []
    for _ in range(ne):
        parts = next(it).split()
        k = int(parts[0])
        elements.append([int(v) for v in parts[1:1 + k]])
    boundary = []
    for _ in range(int(next(it))):
        e, le, tag = next(it).split()
        boundary.append((int(e), int(le), tag))
    polylines = []
    tips = []
    for ci in range(nc):
        np_, nt = (int(v) for v in next(it).split())
        pts = np.empty((np_, 2))
        for i in range(np_):
            a, b = next(it).split()
            pts[i] = (float(a), float(b))
        polylines.append(pts)
        for _ in range(nt):
            v, ang = next(it).split()
            v = int(v)
            tips.append(CrackTip(v, vertices[v], float(ang), ci))
    pairs = []
    for _ in range(int(next(it))):
        a, b = next(it).split()
        pairs.append((int(a), int(b)))
    hanging = [int(next(it)) for _ in range(int(next(it)))]
    crack = CrackGeometry(polylines, tips, pairs)
    return PolyMesh(vertices, elements, boundary, crack, hanging, normalize=False)
