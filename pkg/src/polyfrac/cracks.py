"""Conforming crack surgery: carve a polyline through a polygonal mesh.

Elements traversed by the path are split along it, the path becomes a
chain of mesh edges, and every chain vertex except active tips is
duplicated into a coincident face pair so the displacement may jump
across the crack.  An endpoint strictly inside an element is handled by
splitting that element along the extended chord, which leaves the tip as
a regular vertex with a plain (non-crack) edge ahead of it.
"""

import numpy as np

from . import geometry as geo
from .mesh import PolyMesh, CrackGeometry, CrackTip, CRACK_TAG, SNAP_REL


class CrackPathError(ValueError):
    """Raised when a crack polyline cannot be carved into the mesh."""


class _Builder:
    """Mutable surgery workspace; PolyMesh is rebuilt on finalize."""

    def __init__(self, mesh):
        self.mesh = mesh
        self.vertices = [np.array(v, dtype=float) for v in mesh.vertices]
        self.elements = [list(c) for c in mesh.elements]
        self.alive = [True] * len(self.elements)
        self.vertex_elems = [set() for _ in range(len(self.vertices))]
        for e, cyc in enumerate(self.elements):
            for v in cyc:
                self.vertex_elems[v].add(e)
        self.levels = None if mesh.levels is None else list(mesh.levels)
        lo = mesh.vertices.min(axis=0)
        hi = mesh.vertices.max(axis=0)
        self.scale = float(np.hypot(*(hi - lo)))
        self.boundary_segments = [
            (mesh.vertices[a].copy(), mesh.vertices[b].copy(), tag)
            for (e, le, tag) in mesh.boundary
            for a, b in [mesh.edge_vertices(e, le)]
        ]
        self.crack = mesh.crack.copy()
        self.hanging = set(mesh.hanging)

    # -- bookkeeping ---------------------------------------------------

    def add_vertex(self, p):
        self.vertices.append(np.array(p, dtype=float))
        self.vertex_elems.append(set())
        return len(self.vertices) - 1

    def kill(self, e):
        self.alive[e] = False
        for v in self.elements[e]:
            self.vertex_elems[v].discard(e)

    def spawn(self, cyc, parent=None):
        eid = len(self.elements)
        self.elements.append(list(cyc))
        self.alive.append(True)
        if self.levels is not None:
            self.levels.append(self.levels[parent] if parent is not None else 0)
        for v in cyc:
            self.vertex_elems[v].add(eid)
        return eid

    def coords(self, e):
        return np.array([self.vertices[v] for v in self.elements[e]])

    def elem_snap(self, e):
        return SNAP_REL * geo.polygon_diameter(self.coords(e))

    def consecutive_in(self, e, a, b):
        """Local edge index if a->b or b->a are consecutive in e, else None."""
        cyc = self.elements[e]
        m = len(cyc)
        for k in range(m):
            u, w = cyc[k], cyc[(k + 1) % m]
            if (u, w) == (a, b) or (u, w) == (b, a):
                return k
        return None

    def edge_elements(self, a, b):
        return [e for e in (self.vertex_elems[a] & self.vertex_elems[b])
                if self.alive[e] and self.consecutive_in(e, a, b) is not None]

    def insert_on_edge(self, e, a, b, vid):
        """Insert vid into e's cycle between the consecutive pair (a, b)."""
        cyc = self.elements[e]
        m = len(cyc)
        for k in range(m):
            u, w = cyc[k], cyc[(k + 1) % m]
            if (u, w) == (a, b) or (u, w) == (b, a):
                cyc.insert(k + 1, vid)
                self.vertex_elems[vid].add(e)
                return
        raise CrackPathError("edge not found during vertex insertion")

    # -- splitting primitives --------------------------------------------

    def split_edge(self, a, b, point):
        """New vertex on edge (a, b); inserted into every incident element."""
        vid = self.add_vertex(point)
        for e in self.edge_elements(a, b):
            self.insert_on_edge(e, a, b, vid)
        return vid

    def split_chord(self, e, start, end, interior=()):
        """Split element e along the chord start -> interior... -> end.

        start/end are vertex ids already present in e's cycle; interior
        ids are new vertices strictly inside e.  Returns the two children.
        """
        cyc = self.elements[e]
        i_s, i_e = cyc.index(start), cyc.index(end)
        m = len(cyc)
        path_a = [cyc[(i_s + k) % m] for k in range((i_e - i_s) % m + 1)]
        path_b = [cyc[(i_e + k) % m] for k in range((i_s - i_e) % m + 1)]
        interior = list(interior)
        child_a = path_a + interior[::-1]
        child_b = path_b + interior
        for child in (child_a, child_b):
            if len(child) < 3 or geo.polygon_signed_area(
                    np.array([self.vertices[v] for v in child])) <= 0:
                raise CrackPathError("chord split produced a degenerate polygon")
        self.kill(e)
        return self.spawn(child_a, e), self.spawn(child_b, e)

    # -- point location --------------------------------------------------

    def locate(self, p):
        """('vertex', vid) | ('edge', (a, b)) | ('inside', e) | None."""
        p = np.asarray(p, dtype=float)
        best_v, best_d = None, np.inf
        for vid, q in enumerate(self.vertices):
            if self.vertex_elems[vid]:
                d = float(np.hypot(*(p - q)))
                if d < best_d:
                    best_v, best_d = vid, d
        if best_v is not None and best_d <= SNAP_REL * self.scale * 10:
            return ("vertex", best_v)
        for e in range(len(self.elements)):
            if not self.alive[e]:
                continue
            cyc = self.elements[e]
            snap = self.elem_snap(e)
            m = len(cyc)
            for k in range(m):
                a, b = cyc[k], cyc[(k + 1) % m]
                _, dist = geo.project_point_on_segment(p, self.vertices[a], self.vertices[b])
                if dist <= snap:
                    return ("edge", (a, b))
            if geo.point_in_polygon(p, self.coords(e)):
                return ("inside", e)
        return None


def _direction_angle(d):
    return float(np.arctan2(d[1], d[0]))


class _Marcher:
    """Walks a straight segment from a mesh vertex, splitting as it goes."""

    def __init__(self, builder):
        self.b = builder

    def neighbors(self, v):
        out = set()
        for e in self.b.vertex_elems[v]:
            if not self.b.alive[e]:
                continue
            cyc = self.b.elements[e]
            k = cyc.index(v)
            out.add(cyc[k - 1])
            out.add(cyc[(k + 1) % len(cyc)])
        return out

    def wedge_element(self, v, direction):
        """Alive element whose angular wedge at v contains `direction`."""
        a_dir = _direction_angle(direction)
        pv = self.b.vertices[v]
        for e in sorted(self.b.vertex_elems[v]):
            if not self.b.alive[e]:
                continue
            cyc = self.b.elements[e]
            k = cyc.index(v)
            nxt = self.b.vertices[cyc[(k + 1) % len(cyc)]]
            prv = self.b.vertices[cyc[k - 1]]
            a_next = _direction_angle(nxt - pv)
            a_prev = _direction_angle(prv - pv)
            span = geo.ccw_angle(a_next, a_prev)
            t = geo.ccw_angle(a_next, a_dir)
            if 1e-12 < t < span - 1e-12:
                return e
        return None

    def advance_edge(self, cur, target, remaining):
        """Move along an existing collinear edge toward the target, if any.

        Returns (next_vertex, done) or None.  `done` means the target was
        reached (possibly by splitting the edge at the target point).
        """
        p = self.b.vertices[cur]
        d = target - p
        dn = d / np.linalg.norm(d)
        for w in sorted(self.neighbors(cur)):
            q = self.b.vertices[w]
            ev = q - p
            elen = float(np.hypot(*ev))
            if elen == 0.0:
                continue
            en = ev / elen
            if abs(en[0] * dn[1] - en[1] * dn[0]) > 1e-7 or en @ dn < 0.0:
                continue
            snap = SNAP_REL * self.b.scale * 10
            if elen <= remaining + snap:
                return w, elen >= remaining - snap
            # target strictly inside this edge: split it there
            vid = self.b.split_edge(cur, w, target)
            return vid, True
        return None

    def march_segment(self, cur, target):
        """Carve the straight segment from vertex `cur` to `target`.

        Returns (chain, status) where chain is the list of vertex ids
        visited after `cur` and status is 'reached', 'interior-end'
        (target strictly inside an element, chord-split applied so the
        last chain vertex sits at the target), or 'boundary-exit'.
        """
        b = self.b
        chain = []
        guard = 0
        while True:
            guard += 1
            if guard > 100000:
                raise CrackPathError("path marching failed to terminate")
            p = b.vertices[cur]
            d = np.asarray(target, dtype=float) - p
            remaining = float(np.hypot(*d))
            snap = SNAP_REL * b.scale * 10
            if remaining <= snap:
                return chain, "reached"
            step = self.advance_edge(cur, np.asarray(target, dtype=float), remaining)
            if step is not None:
                nxt, done = step
                chain.append(nxt)
                cur = nxt
                if done:
                    return chain, "reached"
                continue
            e = self.wedge_element(cur, d)
            if e is None:
                return chain, "boundary-exit"
            nxt, status = self._cross_element(e, cur, np.asarray(target, dtype=float))
            chain.append(nxt)
            cur = nxt
            if status != "continue":
                return chain, status

    def _cross_element(self, e, cur, target):
        b = self.b
        cyc = b.elements[e]
        coords = b.coords(e)
        snap = b.elem_snap(e)
        p = b.vertices[cur]
        d = target - p
        remaining = float(np.hypot(*d))
        dn = d / remaining

        # nearest ray exit over edges not incident to cur
        m = len(cyc)
        best = None
        for k in range(m):
            a_id, b_id = cyc[k], cyc[(k + 1) % m]
            if cur in (a_id, b_id):
                continue
            hit = geo.segment_ray_intersection(p, dn, coords[k], coords[(k + 1) % m],
                                               tol=1e-14)
            if hit is None:
                continue
            t, u = hit
            if best is None or t < best[0]:
                best = (t, u, k, a_id, b_id)
        if best is None:
            raise CrackPathError("ray failed to exit element; degenerate geometry")
        t_exit, u, k, a_id, b_id = best

        if remaining < t_exit - snap:
            # target strictly inside: chord split through it, extending the
            # chord straight on to the exit so both children stay simple
            exit_pt = p + t_exit * dn
            t_id = b.add_vertex(target)
            end_id, end_new = self._exit_vertex(e, a_id, b_id, u, exit_pt, snap)
            b.split_chord(e, cur, end_id, interior=[t_id])
            return t_id, "interior-end"

        # path exits this element (possibly exactly at the target)
        exit_pt = p + t_exit * dn
        end_id, _ = self._exit_vertex(e, a_id, b_id, u, exit_pt, snap)
        if b.consecutive_in(e, cur, end_id) is None:
            b.split_chord(e, cur, end_id)
        if abs(t_exit - remaining) <= snap:
            return end_id, "reached-exit"
        return end_id, "continue"

    def _exit_vertex(self, e, a_id, b_id, u, exit_pt, snap):
        """Vertex id at the ray exit: snapped endpoint or a new edge split."""
        b = self.b
        pa, pb = b.vertices[a_id], b.vertices[b_id]
        if float(np.hypot(*(exit_pt - pa))) <= snap:
            return a_id, False
        if float(np.hypot(*(exit_pt - pb))) <= snap:
            return b_id, False
        return b.split_edge(a_id, b_id, exit_pt), True


def _classify_sides(builder, v, a_ref_angle, t_split=None, swap=False):
    """Partition elements around v into (plus, minus) by the crack directions.

    t_split is the CCW angle from the reference crack direction to the
    second crack direction; None means v lies on the domain boundary and
    the exterior gap acts as the second separator.
    """
    pv = builder.vertices[v]
    entries = []
    for e in sorted(builder.vertex_elems[v]):
        if not builder.alive[e]:
            continue
        cyc = builder.elements[e]
        k = cyc.index(v)
        nxt = builder.vertices[cyc[(k + 1) % len(cyc)]]
        prv = builder.vertices[cyc[k - 1]]
        rep, span = geo.wedge_representative_angle(pv, prv, nxt)
        t_start = geo.ccw_angle(a_ref_angle, _direction_angle(nxt - pv))
        t_rep = geo.ccw_angle(a_ref_angle, rep)
        entries.append((t_start, t_rep, span, e))
    if t_split is not None:
        plus = [e for (_, t_rep, _, e) in entries if t_rep < t_split]
        minus = [e for (_, t_rep, _, e) in entries if t_rep >= t_split]
    else:
        entries.sort()
        plus, minus = [], []
        cursor = 0.0
        in_plus = True
        for t_start, t_rep, span, e in entries:
            if in_plus and t_start > cursor + 1e-9:
                in_plus = False          # crossed the exterior gap
            (plus if in_plus else minus).append(e)
            cursor = max(cursor, t_start + span)
    if swap:
        plus, minus = minus, plus
    return plus, minus


def duplicate_chain(builder, chain, dup_first, dup_last,
                    prev_anchor=None, face_pairs=None):
    """Duplicate chain vertices into crack face pairs.

    chain: consecutive mesh vertices along the crack (edges must exist).
    dup_first/dup_last: whether the endpoints are duplicated (mouths on
    the boundary are, active tips are not).
    prev_anchor: point before chain[0] when the chain continues an
    existing crack (so the first vertex is an interior path vertex).
    """
    if face_pairs is None:
        face_pairs = []
    n = len(chain)
    for idx, v in enumerate(chain):
        at_start = idx == 0
        at_end = idx == n - 1
        if (at_start and not dup_first) or (at_end and not dup_last):
            continue
        pv = builder.vertices[v]
        if at_end:
            # mouth at the far end: reference points back along the crack
            a_ref = _direction_angle(builder.vertices[chain[idx - 1]] - pv)
            plus, minus = _classify_sides(builder, v, a_ref, t_split=None, swap=True)
        else:
            nxt = builder.vertices[chain[idx + 1]]
            a_ref = _direction_angle(nxt - pv)
            if at_start and prev_anchor is None:
                plus, minus = _classify_sides(builder, v, a_ref, t_split=None)
            else:
                prev_pt = (np.asarray(prev_anchor, dtype=float)
                           if at_start else builder.vertices[chain[idx - 1]])
                a_prev = _direction_angle(prev_pt - pv)
                t_split = geo.ccw_angle(a_ref, a_prev)
                plus, minus = _classify_sides(builder, v, a_ref, t_split=t_split)
        if not plus or not minus:
            raise CrackPathError(f"face duplication found a one-sided vertex {v}")
        v_new = builder.add_vertex(pv)
        for e in minus:
            cyc = builder.elements[e]
            builder.vertex_elems[v].discard(e)
            builder.vertex_elems[v_new].add(e)
            self_idx = cyc.index(v)
            cyc[self_idx] = v_new
        face_pairs.append((v, v_new))
    return face_pairs


def finalize(builder, crack, nvb_newest=None):
    """Compact the builder into a fresh validated PolyMesh."""
    old_to_new = {}
    elements = []
    levels = [] if builder.levels is not None else None
    for e, cyc in enumerate(builder.elements):
        if not builder.alive[e]:
            continue
        old_to_new[e] = len(elements)
        elements.append(list(cyc))
        if levels is not None:
            levels.append(builder.levels[e])
    vertices = np.array(builder.vertices)
    mesh = PolyMesh(vertices, elements, boundary=[], crack=crack,
                    hanging=builder.hanging, levels=levels, nvb_newest=nvb_newest,
                    normalize=True)
    boundary = _retag_boundary(mesh, builder.boundary_segments, crack)
    return PolyMesh(vertices, mesh.elements, boundary, crack,
                    hanging=builder.hanging & set(range(len(vertices))),
                    levels=levels, nvb_newest=nvb_newest, normalize=False)


def _retag_boundary(mesh, old_segments, crack):
    """Tag single-incidence edges by inheritance from old boundary segments."""
    boundary = []
    scale = max(mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0))
    tol = 1e-9 * scale
    for (a, b), incid in mesh.edge_map().items():
        if len(incid) != 1:
            continue
        e, k = incid[0]
        mid = 0.5 * (mesh.vertices[a] + mesh.vertices[b])
        tag = None
        for pa, pb, t in old_segments:
            _, dist = geo.project_point_on_segment(mid, pa, pb)
            if dist <= tol:
                tag = t
                break
        if tag is None:
            for poly in crack.polylines:
                for i in range(len(poly) - 1):
                    _, dist = geo.project_point_on_segment(mid, poly[i], poly[i + 1])
                    if dist <= tol:
                        tag = CRACK_TAG
                        break
                if tag:
                    break
        if tag is None:
            raise CrackPathError(f"could not retag boundary edge ({a}, {b})")
        boundary.append((e, k, tag))
    return boundary


def _check_no_crack_crossing(mesh, points):
    for poly in mesh.crack.polylines:
        for i in range(len(poly) - 1):
            for j in range(len(points) - 1):
                if geo._segments_cross(poly[i], poly[i + 1],
                                       np.asarray(points[j], dtype=float),
                                       np.asarray(points[j + 1], dtype=float), 1e-12):
                    raise CrackPathError("crack polyline intersects an existing crack")


def carve_crack(mesh, polyline):
    """Insert a new crack along `polyline`; returns the cracked mesh."""
    points = [np.asarray(p, dtype=float) for p in polyline]
    if len(points) < 2:
        raise CrackPathError("crack polyline needs at least two points")
    _check_no_crack_crossing(mesh, points)
    builder = _Builder(mesh)
    marcher = _Marcher(builder)

    loc0 = builder.locate(points[0])
    loc1 = builder.locate(points[-1])
    if loc0 is None or loc1 is None:
        raise CrackPathError("crack polyline endpoint lies outside the mesh")

    start_id, start_is_tip = _materialize_endpoint(builder, marcher, loc0,
                                                   points[0], points[1])
    chain = [start_id]
    for seg in range(1, len(points)):
        sub, status = marcher.march_segment(chain[-1], points[seg])
        chain.extend(sub)
        if status == "boundary-exit":
            raise CrackPathError("crack polyline exits the domain away from its endpoint")
    end_is_tip = _endpoint_is_interior(builder, chain[-1])

    face_pairs = duplicate_chain(builder, chain,
                                 dup_first=not start_is_tip,
                                 dup_last=not end_is_tip)

    crack = builder.crack
    chain_pts = np.array([builder.vertices[v] for v in chain])
    ci = crack.n_cracks
    crack.polylines.append(chain_pts)
    if start_is_tip:
        ang = _direction_angle(chain_pts[0] - chain_pts[1])
        crack.tips.append(CrackTip(chain[0], chain_pts[0], ang, ci))
    if end_is_tip:
        ang = _direction_angle(chain_pts[-1] - chain_pts[-2])
        crack.tips.append(CrackTip(chain[-1], chain_pts[-1], ang, ci))
    if not (start_is_tip or end_is_tip):
        raise CrackPathError("crack polyline has no interior tip")
    crack.face_pairs.extend(face_pairs)
    return finalize(builder, crack)


def _materialize_endpoint(builder, marcher, loc, point, toward):
    """Make the path start a mesh vertex; returns (vertex_id, is_tip)."""
    kind, data = loc
    if kind == "vertex":
        vid = data
        return vid, not _vertex_on_boundary(builder, vid)
    if kind == "edge":
        a, b = data
        on_boundary = len(builder.edge_elements(a, b)) == 1
        vid = builder.split_edge(a, b, point)
        return vid, not on_boundary
    # interior start: split the containing element along the full chord
    # through the point so it becomes a regular vertex (tip)
    e = data
    d = np.asarray(toward, dtype=float) - np.asarray(point, dtype=float)
    dn = d / np.hypot(*d)
    coords = builder.coords(e)
    cyc = list(builder.elements[e])
    snap = builder.elem_snap(e)
    hits = []
    m = len(cyc)
    for k in range(m):
        for sgn in (1.0, -1.0):
            hit = geo.segment_ray_intersection(np.asarray(point, dtype=float), sgn * dn,
                                               coords[k], coords[(k + 1) % m], tol=1e-14)
            if hit is not None:
                hits.append((sgn, hit[0], hit[1], k))
    fwd = min((h for h in hits if h[0] > 0), key=lambda h: h[1], default=None)
    bwd = min((h for h in hits if h[0] < 0), key=lambda h: h[1], default=None)
    if fwd is None or bwd is None:
        raise CrackPathError("could not anchor interior crack endpoint")
    tid = builder.add_vertex(point)
    ends = []
    for sgn, t, u, k in (fwd, bwd):
        exit_pt = np.asarray(point, dtype=float) + sgn * t * dn
        a_id, b_id = cyc[k], cyc[(k + 1) % m]
        vid, _ = marcher._exit_vertex(e, a_id, b_id, u, exit_pt, snap)
        ends.append(vid)
    builder.split_chord(e, ends[1], ends[0], interior=[tid])
    return tid, True


def _vertex_on_boundary(builder, vid):
    p = builder.vertices[vid]
    for pa, pb, _tag in builder.boundary_segments:
        _, dist = geo.project_point_on_segment(p, pa, pb)
        if dist <= SNAP_REL * builder.scale * 10:
            return True
    return False


def _endpoint_is_interior(builder, vid):
    return not _vertex_on_boundary(builder, vid)


def extend_crack_geometry(mesh, tip, theta, delta_a):
    """Grow the crack at `tip` by one straight segment.

    theta is measured from the current tip tangent (CCW positive).
    Returns (new_mesh, status, new_tip) with status 'extended' or
    'crack reached boundary' (then new_tip is None).
    """
    if delta_a <= 0:
        raise ValueError("extension length must be positive")
    tips = [t for t in mesh.crack.tips
            if t.vertex == getattr(tip, "vertex", tip)]
    if not tips:
        raise ValueError("tip not found in mesh crack geometry")
    tip = tips[0]
    psi = tip.angle + theta
    target = tip.point + delta_a * np.array([np.cos(psi), np.sin(psi)])

    builder = _Builder(mesh)
    marcher = _Marcher(builder)
    sub, status = marcher.march_segment(tip.vertex, target)
    if not sub:
        raise CrackPathError("crack extension produced no new path")
    chain = [tip.vertex] + sub

    poly = mesh.crack.polylines[tip.crack_index]
    prev_anchor = poly[-2] if np.allclose(poly[-1], tip.point) else poly[-1]

    reached_boundary = status == "boundary-exit" or (
        status in ("reached", "reached-exit", "interior-end")
        and _vertex_on_boundary(builder, chain[-1]))
    face_pairs = duplicate_chain(builder, chain,
                                 dup_first=True,
                                 dup_last=reached_boundary,
                                 prev_anchor=prev_anchor)

    crack = builder.crack
    chain_pts = np.array([builder.vertices[v] for v in chain])
    crack.polylines[tip.crack_index] = np.vstack([poly, chain_pts[1:]])
    crack.tips = [t for t in crack.tips if t.vertex != tip.vertex]
    new_tip = None
    if not reached_boundary:
        ang = _direction_angle(chain_pts[-1] - chain_pts[-2])
        new_tip = CrackTip(chain[-1], chain_pts[-1], ang, tip.crack_index)
        crack.tips.append(new_tip)
    crack.face_pairs.extend(face_pairs)
    new_mesh = finalize(builder, crack)
    status_out = "crack reached boundary" if reached_boundary else "extended"
    return new_mesh, status_out, new_tip
