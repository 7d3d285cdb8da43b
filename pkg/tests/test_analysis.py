import math
import tempfile
import unittest

import numpy as np

from src.analysis import (
    CSV_COLUMNS, CellLocator, ErrorReport, NormSet, build_reference, callable_evaluator, difference,
    discrete_norms, error_norms, function_norms, space_evaluator, transfer_evaluator,
    weighted_l2_projection,
)
from src.core.exceptions import MeshError, SpaceError
from src.geometry import MacroTriangulation, build_lshape_macro
from src.mesh import ANISO, LARGE, TRIVIAL, MeshParams, build_reference_mesh, generate_mesh
from src.mesh.generator import assemble_mesh
from src.mesh.patterns import rectangle
from src.space import build_space
from src.system import assemble, example_problem, solve


def lshape_mesh(p: int = 1, eps: float = 1e-2):
    macro = build_lshape_macro()
    return generate_mesh(macro, None, MeshParams.for_degree(1.0, p, eps, len(macro)))


class TestNormSet(unittest.TestCase):

    def test_balanced(self):
        norms = NormSet(l2=0.5, h1_semi=10.0, energy=1.0, linf=2.0, eps=1e-2)
        self.assertAlmostEqual(norms.balanced_seminorm, 1.0)
        self.assertAlmostEqual(norms.balanced, 1.5)
        self.assertIn("balanced_seminorm", norms.to_dict())


class TestFunctionNorms(unittest.TestCase):
    """
    Tests for quadrature of known functions over the L-shaped domain
    """

    def setUp(self):
        self.mesh = lshape_mesh()

    def test_constant(self):
        norms = function_norms(self.mesh, callable_evaluator(lambda x: np.ones(len(x))), 0.1, 3)
        self.assertAlmostEqual(norms.l2, math.sqrt(0.75), places=12)
        self.assertEqual(norms.h1_semi, 0.0)
        self.assertAlmostEqual(norms.energy, math.sqrt(0.75), places=12)
        self.assertAlmostEqual(norms.linf, 1.0)

    def test_linear(self):
        eps = 0.1
        evaluator = callable_evaluator(lambda x: x[:, 0], lambda x: np.tile([1.0, 0.0], (len(x), 1)))
        norms = function_norms(self.mesh, evaluator, eps, 3)
        self.assertAlmostEqual(norms.l2 ** 2, 0.1875, places=12)
        self.assertAlmostEqual(norms.h1_semi ** 2, 0.75, places=12)
        self.assertAlmostEqual(norms.energy ** 2, eps ** 2 * 0.75 + 0.1875, places=12)
        self.assertAlmostEqual(norms.linf, 1.0)

    def test_restricted_to_tags(self):
        one = callable_evaluator(lambda x: np.ones(len(x)))
        large = function_norms(self.mesh, one, 0.1, 2, tags=[LARGE])
        aniso = function_norms(self.mesh, one, 0.1, 2, tags=[ANISO])
        self.assertLess(large.l2 ** 2, 0.75)
        self.assertGreater(aniso.l2, 0.0)

    def test_difference_of_equal_functions(self):
        one = callable_evaluator(lambda x: np.ones(len(x)))
        norms = function_norms(self.mesh, difference(one, one), 0.1, 2)
        self.assertEqual(norms.l2, 0.0)
        self.assertEqual(norms.linf, 0.0)

    def test_discrete_norms_of_zero(self):
        space = build_space(self.mesh, 2)
        norms = discrete_norms(space, np.zeros(space.n_dofs), 0.1)
        self.assertEqual((norms.l2, norms.h1_semi, norms.energy, norms.linf), (0.0, 0.0, 0.0, 0.0))


class TestTransfer(unittest.TestCase):
    """
    Tests for evaluating discrete functions on nested and non-nested meshes
    """

    def setUp(self):
        self.mesh = lshape_mesh(p=1)
        self.space = build_space(self.mesh, 2)
        self.coeffs = np.random.default_rng(3).standard_normal(self.space.n_dofs)
        self.fine = build_reference_mesh(self.mesh, corner_rings=2)

    def test_nested_and_located_agree(self):
        nested = transfer_evaluator(self.space, self.coeffs, self.fine, nested=True)
        located = transfer_evaluator(self.space, self.coeffs, self.fine, nested=False)
        xi = np.array([[0.2, 0.3], [0.5, 0.5], [0.9, 0.1]])
        for element in self.fine.elements[::7]:
            u1, g1 = nested(element, xi)
            u2, g2 = located(element, xi)
            np.testing.assert_allclose(u1, u2, atol=1e-10)
            np.testing.assert_allclose(g1, g2, rtol=1e-7, atol=1e-6)

    def test_norms_preserved_on_refinement(self):
        coarse = discrete_norms(self.space, self.coeffs, 0.1, quad_order=6)
        fine = function_norms(self.fine, transfer_evaluator(self.space, self.coeffs, self.fine, nested=True), 0.1, 8)
        self.assertAlmostEqual(fine.l2 / coarse.l2, 1.0, places=10)

    def test_locator_rejects_outside_points(self):
        with self.assertRaises(MeshError):
            CellLocator(self.mesh).locate(0, np.array([[1.5, 0.5]]))

    def test_own_mesh_evaluator(self):
        element = self.mesh.elements[3]
        xi = np.array([[0.25, 0.75]])
        u, _ = space_evaluator(self.space, self.coeffs)(element, xi)
        expected, _ = self.space.evaluate_points(self.coeffs, element.index, xi)
        np.testing.assert_allclose(u, expected)


class TestReferenceAndErrors(unittest.TestCase):
    """
    Tests for reference solutions, error reports and their cache
    """

    def setUp(self):
        self.eps = 1e-2
        self.mesh = lshape_mesh(p=1, eps=self.eps)
        self.problem = example_problem("constant", self.eps)

    def test_error_report(self):
        reference = build_reference(self.mesh, self.problem, p_max=1, degree_factor=2)
        reference.check_nesting()
        space = build_space(self.mesh, 1)
        coeffs = solve(assemble(space, self.problem))
        report = error_norms(space, coeffs, reference, self.eps, self.problem, example="constant")
        self.assertEqual(report.status, "ok")
        self.assertGreater(report.l2_error, 0.0)
        self.assertTrue(math.isfinite(report.linf_error))
        self.assertAlmostEqual(report.balanced_error, report.balanced_seminorm_error + report.l2_error)

    def test_reference_against_itself(self):
        reference = build_reference(self.mesh, self.problem, p_max=1, degree_factor=2)
        report = error_norms(reference.space, reference.coeffs, reference, self.eps)
        self.assertLess(report.l2_error, 1e-10)
        self.assertLess(report.energy_error, 1e-10)

    def test_cache(self):
        with tempfile.TemporaryDirectory() as tmp:
            first = build_reference(self.mesh, self.problem, p_max=1, cache_dir=tmp)
            second = build_reference(self.mesh, self.problem, p_max=1, cache_dir=tmp)
            self.assertFalse(first.from_cache)
            self.assertTrue(second.from_cache)
            self.assertEqual(first.key, second.key)
            np.testing.assert_array_equal(first.coeffs, second.coeffs)

    def test_failed_report_row(self):
        report = ErrorReport.failed(3, 1e-4, "constant", "solver diverged")
        row = report.to_row()
        self.assertEqual(list(row), CSV_COLUMNS)
        self.assertTrue(report.status.startswith("failed"))
        self.assertTrue(math.isnan(row["l2_error"]))
        self.assertTrue(math.isnan(row["residual"]))


class TestProjection(unittest.TestCase):
    """
    Tests for the weighted L2 projection onto Omega_0
    """

    def setUp(self):
        self.mesh = lshape_mesh(p=2)
        self.space = build_space(self.mesh, 2)

    def test_reproduces_discrete_functions(self):
        u = np.random.default_rng(11).standard_normal(self.space.n_dofs)
        projection = weighted_l2_projection(self.space, u)
        np.testing.assert_allclose(projection.coeffs, u[projection.dofs], atol=1e-9)
        np.testing.assert_allclose(projection.extend(u), u, atol=1e-9)
        self.assertLess(projection.residual(), 1e-10)

    def test_callable_target(self):
        projection = weighted_l2_projection(self.space, lambda x: np.sin(3 * x[:, 0]) * x[:, 1])
        self.assertGreater(len(projection.dofs), 0)
        self.assertLess(projection.residual(), 1e-10)

    def test_idempotent(self):
        first = weighted_l2_projection(self.space, lambda x: np.exp(x[:, 0]))
        self.assertLess(first.residual(), 1e-10)
        projected = first.extend(np.zeros(self.space.n_dofs))
        second = weighted_l2_projection(self.space, projected)
        np.testing.assert_array_equal(second.dofs, first.dofs)
        np.testing.assert_allclose(second.coeffs, first.coeffs, rtol=1e-9, atol=1e-11)

    def test_wrong_length(self):
        with self.assertRaises(SpaceError):
            weighted_l2_projection(self.space, np.zeros(self.space.n_dofs + 2))

    def test_empty_omega0(self):
        square = MacroTriangulation.from_quadrilaterals([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2, 3]])
        cell = np.array(rectangle(0.0, 1.0, 0.0, 1.0))
        mesh = assemble_mesh(square, MeshParams(kappa=0.5), [TRIVIAL], [0], [cell], [ANISO])
        with self.assertRaises(SpaceError):
            weighted_l2_projection(build_space(mesh, 2), lambda x: np.ones(len(x)))


if __name__ == '__main__':
    unittest.main()
