import json
import unittest

import numpy as np

from src.core.exceptions import AssignmentError, MeshError
from src.geometry import MacroTriangulation, build_lshape_macro
from src.mesh import (
    ANISO, BOUNDARY_LAYER, CORNER_LAYER, DEFAULT_PATTERNS_PATH, GEOMETRIC, LARGE, MIXED, PATTERN_KINDS,
    TENSOR_PRODUCT, TRIVIAL, MeshParams, build_pattern, build_reference_mesh, cell_aspect_ratio,
    check_conformity, closure_marks, compute_kappa, corner_cells, default_assignment,
    expected_cell_count, generate_mesh, load_assignment, merge_vertices, mesh_from_patterns,
    omega0_distance, quad_area, validate_assignment,
)


def unit_square() -> MacroTriangulation:
    return MacroTriangulation.from_quadrilaterals([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2, 3]])


class TestMeshParams(unittest.TestCase):
    """
    Tests for the layer width and mesh parameters
    """

    def test_kappa(self):
        self.assertAlmostEqual(compute_kappa(1.0, 1, 1e-2), 1e-2)
        self.assertAlmostEqual(compute_kappa(1.0, 7, 1e-8), 7e-8)
        self.assertEqual(compute_kappa(1.0, 3, 1.0), 0.5)

    def test_kappa_rejects_bad_input(self):
        for lam, p, eps in ((0.0, 1, 1e-2), (1.0, 0, 1e-2), (1.0, 1, 0.0), (1.0, 1, 2.0)):
            with self.assertRaises(MeshError):
                compute_kappa(lam, p, eps)

    def test_for_degree(self):
        params = MeshParams.for_degree(1.0, 3, 1e-4, 12)
        self.assertEqual(params.layers, (4,) * 12)
        self.assertAlmostEqual(params.kappa, 3e-4)
        self.assertEqual(params.to_dict()["lambda"], 1.0)

    def test_kappa_in_physical_units(self):
        self.assertAlmostEqual(compute_kappa(1.0, 3, 1e-4, mu=0.25), 1.2e-3)
        self.assertEqual(compute_kappa(1.0, 5, 1e-1, mu=0.25), 0.5)
        with self.assertRaises(MeshError):
            compute_kappa(1.0, 1, 1e-2, mu=0.0)

    def test_for_macro_uses_layer_scale(self):
        macro = build_lshape_macro()
        params = MeshParams.for_macro(macro, 1.0, 3, 1e-4)
        self.assertAlmostEqual(params.mu, 0.25, places=12)
        self.assertAlmostEqual(params.kappa, 1.2e-3, places=15)
        self.assertEqual(params.layers, (4,) * 12)
        self.assertAlmostEqual(params.to_dict()["mu"], 0.25, places=12)

    def test_explicit_layers_length(self):
        with self.assertRaises(MeshError):
            MeshParams.for_degree(1.0, 2, 1e-2, 12, layers=[3, 3])

    def test_invalid_sigma(self):
        with self.assertRaises(MeshError):
            MeshParams(kappa=0.1, sigma=1.0)


class TestPatterns(unittest.TestCase):
    """
    Tests for the refinement patterns of the reference square
    """

    def test_cell_counts_match_ring_enumeration(self):
        for kind in PATTERN_KINDS:
            for layers in range(0, 11):
                pattern = build_pattern(kind, kappa=0.01, sigma=0.5, layers=layers)
                self.assertEqual(len(pattern), expected_cell_count(kind, layers), f"{kind}, L={layers}")

    def test_patterns_tile_the_square(self):
        for kind in PATTERN_KINDS:
            pattern = build_pattern(kind, kappa=1e-3, sigma=0.5, layers=4)
            self.assertAlmostEqual(pattern.area(), 1.0, places=13)
            for cell in pattern.cells:
                self.assertGreater(quad_area(cell), 0.0)

    def test_corner_layer_covers_kappa_square(self):
        kappa = 0.02
        for kind in (TENSOR_PRODUCT, MIXED, GEOMETRIC):
            pattern = build_pattern(kind, kappa=kappa, sigma=0.5, layers=3)
            corner = pattern.cells_with_tag(CORNER_LAYER)
            self.assertAlmostEqual(sum(quad_area(c) for c in corner), kappa ** 2, places=15)
            self.assertLessEqual(corner.max(), kappa + 1e-15)

    def test_corner_cells_are_graded(self):
        cells = np.array(corner_cells(1.0, 0.5, 3))
        self.assertEqual(len(cells), 7)
        np.testing.assert_allclose(cells[-1], [[0, 0], [0.125, 0], [0.125, 0.125], [0, 0.125]])

    def test_region_tags(self):
        tensor = build_pattern(TENSOR_PRODUCT, kappa=0.01, layers=2)
        self.assertEqual(len(tensor.cells_with_tag(ANISO)), 2)
        self.assertEqual(len(tensor.cells_with_tag(LARGE)), 1)
        boundary = build_pattern(BOUNDARY_LAYER, kappa=0.01)
        self.assertEqual(boundary.tags, (ANISO, LARGE))
        mixed = build_pattern(MIXED, kappa=0.01, layers=2)
        self.assertEqual(len(mixed.cells_with_tag(ANISO)), 1)
        self.assertEqual(len(mixed.cells_with_tag(LARGE)), 3)

    def test_shape_regularity_independent_of_kappa(self):
        for kind in (TENSOR_PRODUCT, MIXED, GEOMETRIC):
            worst = []
            for kappa in (0.5, 1e-2, 1e-6):
                pattern = build_pattern(kind, kappa=kappa, sigma=0.5, layers=3)
                regular = [c for c, t in zip(pattern.cells, pattern.tags) if t in (LARGE, CORNER_LAYER)]
                worst.append(max(cell_aspect_ratio(c) for c in regular))
            self.assertLess(max(worst), 6.0, kind)

    def test_aniso_cells_are_thin(self):
        pattern = build_pattern(BOUNDARY_LAYER, kappa=1e-4)
        self.assertGreater(cell_aspect_ratio(pattern.cells_with_tag(ANISO)[0]), 1e3)

    def test_mirrored_mixed(self):
        plain = build_pattern(MIXED, kappa=0.01, layers=2)
        mirrored = build_pattern(MIXED, kappa=0.01, layers=2, mirrored=True)
        self.assertTrue(mirrored.mirrored)
        self.assertAlmostEqual(mirrored.area(), 1.0, places=13)
        for cell in mirrored.cells:
            self.assertGreater(quad_area(cell), 0.0)
        corner = mirrored.cells_with_tag(CORNER_LAYER)
        self.assertGreaterEqual(corner[:, :, 0].min(), 1.0 - 0.01 - 1e-15)
        self.assertEqual(sorted(plain.tags), sorted(mirrored.tags))

    def test_invalid_patterns(self):
        with self.assertRaises(MeshError):
            build_pattern("spiral")
        with self.assertRaises(MeshError):
            build_pattern(TENSOR_PRODUCT, kappa=0.75)
        with self.assertRaises(MeshError):
            build_pattern(TENSOR_PRODUCT, kappa=0.1, layers=-1)
        with self.assertRaises(MeshError):
            build_pattern(GEOMETRIC, kappa=0.1, mirrored=True)


class TestMergeVertices(unittest.TestCase):

    def test_first_occurrence_numbering(self):
        points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [1.0, 1e-17], [0.5, 0.5]])
        unique, ids = merge_vertices(points, 1e-14)
        self.assertEqual(len(unique), 3)
        np.testing.assert_array_equal(ids, [0, 1, 0, 1, 2])
        np.testing.assert_allclose(unique[2], [0.5, 0.5])


class TestLShapeMesh(unittest.TestCase):
    """
    Tests for the spectral boundary layer mesh of the L-shaped domain
    """

    def setUp(self):
        self.macro = build_lshape_macro()
        self.assignment = load_assignment(DEFAULT_PATTERNS_PATH)
        self.params = MeshParams.for_degree(1.0, 1, 1e-2, len(self.macro))
        self.mesh = generate_mesh(self.macro, self.assignment, self.params)

    def test_assignment_file_matches_default_rule(self):
        self.assertEqual(self.assignment, default_assignment(self.macro))
        validate_assignment(self.macro, self.assignment)

    def test_element_count(self):
        expected = sum(expected_cell_count(kind, 2) for kind in self.assignment)
        self.assertEqual(len(self.mesh), expected)

    def test_conformity_and_area(self):
        report = check_conformity(self.mesh)
        self.assertTrue(report.passed, report.violations)
        self.assertAlmostEqual(report.area, 0.75, places=12)
        self.assertAlmostEqual(self.mesh.area(), 0.75, places=12)

    def test_omega0_distance(self):
        self.assertAlmostEqual(omega0_distance(self.mesh), self.params.kappa / 4.0, places=12)

    def test_study_strip_is_p_eps_wide(self):
        for p, eps in ((1, 1e-2), (3, 1e-4), (7, 1e-8)):
            params = MeshParams.for_macro(self.macro, 1.0, p, eps)
            mesh = generate_mesh(self.macro, self.assignment, params)
            self.assertAlmostEqual(omega0_distance(mesh), p * eps, delta=1e-12 + 1e-10 * p * eps)

    def test_all_tags_present(self):
        counts = self.mesh.tag_counts()
        for tag in (LARGE, ANISO, CORNER_LAYER):
            self.assertGreater(counts[tag], 0)

    def test_small_eps_meshes_conform(self):
        for p, eps in ((3, 1e-6), (7, 1e-8)):
            params = MeshParams.for_degree(1.0, p, eps, len(self.macro))
            mesh = generate_mesh(self.macro, self.assignment, params)
            report = check_conformity(mesh)
            self.assertTrue(report.passed, report.violations)
            self.assertGreaterEqual(report.omega0_distance, params.kappa / 4.0 - 1e-14)

    def test_element_maps_orientation(self):
        xi = np.array([[0.0, 0.0], [1.0, 1.0], [0.5, 0.5]])
        for element in self.mesh.elements:
            self.assertTrue(np.all(np.linalg.det(element.jacobians(xi)) > 0))

    def test_boundary_edges(self):
        boundary_length = sum(np.linalg.norm(self.mesh.vertices[a] - self.mesh.vertices[b])
                              for a, b in self.mesh.boundary_edges)
        self.assertAlmostEqual(boundary_length, 4.0, places=12)

    def test_json_dump(self):
        report = check_conformity(self.mesh)
        data = json.loads(self.mesh.to_json(report))
        self.assertEqual(len(data["elements"]), len(self.mesh))
        self.assertTrue(data["conformity"]["passed"])
        self.assertEqual(data["params"]["layers"], [2] * 12)
        self.assertIn(data["elements"][0]["tag"], (LARGE, ANISO, CORNER_LAYER))


class TestMeshErrors(unittest.TestCase):
    """
    Tests for rejected assignments and non-conforming pattern choices
    """

    def setUp(self):
        self.macro = build_lshape_macro()
        self.params = MeshParams.for_degree(1.0, 1, 1e-2, len(self.macro))

    def test_wrong_length(self):
        with self.assertRaises(AssignmentError):
            validate_assignment(self.macro, [TENSOR_PRODUCT] * 3)

    def test_pattern_not_admissible(self):
        assignment = default_assignment(self.macro)
        assignment[1] = GEOMETRIC
        with self.assertRaises(AssignmentError):
            generate_mesh(self.macro, assignment, self.params)

    def test_mismatched_kappa_leaves_hanging_nodes(self):
        assignment = default_assignment(self.macro)
        patterns = [build_pattern(kind, 0.01, 0.5, 2) for kind in assignment]
        patterns[1] = build_pattern(assignment[1], 0.02, 0.5, 2)
        mesh = mesh_from_patterns(self.macro, patterns, self.params, assignment)
        report = check_conformity(mesh)
        self.assertFalse(report.passed)
        self.assertTrue(any("has no neighbour" in v for v in report.violations))

    def test_elements_below_merge_resolution(self):
        params = MeshParams(kappa=1e-2, sigma=0.5, layers=(60,) * 12)
        with self.assertRaises(MeshError):
            generate_mesh(self.macro, None, params)

    def test_unit_square_trivial(self):
        square = unit_square()
        mesh = generate_mesh(square, [TRIVIAL], MeshParams(kappa=0.5, layers=(0,)))
        self.assertEqual(len(mesh), 1)
        self.assertEqual(len(mesh.boundary_edges), 4)
        self.assertEqual(omega0_distance(mesh), 0.0)


class TestReferenceMesh(unittest.TestCase):
    """
    Tests for the nested fine mesh used by reference solutions
    """

    def setUp(self):
        macro = build_lshape_macro()
        self.mesh = generate_mesh(macro, None, MeshParams.for_degree(1.0, 1, 1e-2, len(macro)))
        self.fine = build_reference_mesh(self.mesh, corner_rings=2)

    def test_aniso_elements_are_split(self):
        marks = closure_marks(self.mesh)
        for element in self.mesh.elements_with_tag(ANISO):
            self.assertTrue(marks[element.index])
        children = {}
        for element in self.fine.elements:
            children[element.parent] = children.get(element.parent, 0) + 1
        for element in self.mesh.elements_with_tag(ANISO):
            self.assertGreaterEqual(children[element.index], 2)

    def test_nested_and_conforming(self):
        self.assertGreater(len(self.fine), len(self.mesh))
        self.assertTrue(check_conformity(self.fine).passed)
        self.assertAlmostEqual(self.fine.area(), 0.75, places=12)
        for element in self.fine.elements:
            parent = self.mesh.elements[element.parent]
            self.assertEqual(element.tag, parent.tag)
            centroid = element.points(np.array([[0.5, 0.5]]))
            xi = parent.inverse(centroid)[0]
            self.assertTrue(np.all(xi >= -1e-10) and np.all(xi <= 1 + 1e-10))


if __name__ == '__main__':
    unittest.main()
