import numpy as np
import pytest

import polyfrac as pf
from polyfrac import geometry as geo


class TestStructured:
    def test_q4_counts(self):
        m = pf.generate_structured("q4", (0, -2, 16, 2), 4, 1)
        assert m.n_elements == 4
        assert m.n_vertices == 10

    def test_t3_unit_square(self):
        m = pf.generate_structured("t3", (0, 0, 1, 1), 1, 1)
        assert m.n_elements == 2
        assert m.n_vertices == 4
        assert m.total_area() == pytest.approx(1.0, abs=1e-15)

    def test_q4_beam_area(self):
        m = pf.generate_structured("q4", (0, -2, 16, 2), 32, 8)
        assert m.total_area() == pytest.approx(64.0, abs=1e-12)

    def test_degenerate_rectangle(self):
        with pytest.raises(ValueError):
            pf.generate_structured("q4", (0, 0, 0, 1), 2, 2)

    def test_boundary_tags(self):
        m = pf.generate_structured("q4", (0, 0, 2, 1), 2, 1)
        tags = {t for _, _, t in m.boundary}
        assert tags == {"left", "right", "bottom", "top"}
        assert len(m.boundary_edges(tag="bottom")) == 2
        m.validate(check_simple=True)


class TestVoronoi:
    def test_quadrant_seeds_give_rectangles(self):
        seeds = [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)]
        m = pf.generate_voronoi((0, 0, 1, 1), 4, seeds=seeds)
        assert m.n_elements == 4
        for e in range(4):
            g = m.element_geometry(e)
            assert len(m.elements[e]) == 4
            assert g.area == pytest.approx(0.25, abs=1e-12)

    def test_area_partition(self):
        m = pf.generate_voronoi((0, 0, 3, 2), 100, rng_seed=42)
        assert m.total_area() == pytest.approx(6.0, rel=1e-10)
        m.validate(check_simple=True)

    def test_deterministic(self):
        a = pf.generate_voronoi((0, 0, 1, 1), 50, 2, rng_seed=9)
        b = pf.generate_voronoi((0, 0, 1, 1), 50, 2, rng_seed=9)
        assert np.array_equal(a.vertices, b.vertices)
        assert a.elements == b.elements

    def test_lloyd_improves_cells(self):
        def min_angle(mesh):
            worst = np.pi
            for e in range(mesh.n_elements):
                c = mesh.element_coords(e)
                n = len(c)
                for k in range(n):
                    v1 = c[k - 1] - c[k]
                    v2 = c[(k + 1) % n] - c[k]
                    cosang = v1 @ v2 / (np.linalg.norm(v1) * np.linalg.norm(v2))
                    worst = min(worst, np.arccos(np.clip(cosang, -1, 1)))
            return worst

        raw = pf.generate_voronoi((0, 0, 1, 1), 100, 0, rng_seed=42)
        relaxed = pf.generate_voronoi((0, 0, 1, 1), 100, 50, rng_seed=42)
        assert min_angle(relaxed) > min_angle(raw)


class TestElementGeometry:
    def test_unit_square(self):
        m = pf.generate_structured("q4", (0, 0, 1, 1), 1, 1)
        g = pf.element_geometry(m, 0)
        assert g.centroid == pytest.approx([0.5, 0.5])
        assert g.area == pytest.approx(1.0)
        assert g.diameter == pytest.approx(np.sqrt(2.0))

    def test_right_triangle(self):
        coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        assert geo.polygon_area(coords) == pytest.approx(0.5)
        assert geo.polygon_centroid(coords) == pytest.approx([1 / 3, 1 / 3])

    def test_regular_pentagon_area(self):
        # closed form: (5/2) R^2 sin(72 deg) for circumradius R = 1
        ang = 2 * np.pi * np.arange(5) / 5
        coords = np.column_stack([np.cos(ang), np.sin(ang)])
        expected = 2.5 * np.sin(np.radians(72.0))
        assert geo.polygon_area(coords) == pytest.approx(expected, rel=1e-12)

    def test_normals_unit_and_orthogonal(self, rng):
        from conftest import random_polygon

        for _ in range(50):
            coords = random_polygon(rng)
            normals = geo.edge_outward_normals(coords)
            tang = np.roll(coords, -1, axis=0) - coords
            tang /= np.linalg.norm(tang, axis=1)[:, None]
            assert np.abs((normals * tang).sum(axis=1)).max() < 1e-14
            assert np.abs(np.linalg.norm(normals, axis=1) - 1).max() < 1e-14


class TestMeshIO:
    def test_round_trip_bit_exact(self, tmp_path, rng):
        m = pf.generate_voronoi((0, 0, 2, 1), 40, 1, rng_seed=3)
        path = tmp_path / "mesh.txt"
        pf.write_mesh(m, path)
        m2 = pf.read_mesh(path)
        assert np.array_equal(m.vertices, m2.vertices)
        assert m.elements == m2.elements
        assert m.boundary == m2.boundary
        assert m.hanging == m2.hanging

    def test_round_trip_with_crack(self, tmp_path):
        m = pf.generate_structured("q4", (0, 0, 10, 10), 4, 4)
        mc = pf.insert_crack(m, [(0.0, 5.0), (5.0, 5.0)])
        path = tmp_path / "cracked.txt"
        pf.write_mesh(mc, path)
        m2 = pf.read_mesh(path)
        assert np.array_equal(mc.vertices, m2.vertices)
        assert mc.elements == m2.elements
        assert mc.crack.face_pairs == m2.crack.face_pairs
        assert len(m2.crack.tips) == 1
        assert m2.crack.tips[0].vertex == mc.crack.tips[0].vertex
