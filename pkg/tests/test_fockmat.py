import math
import os
import tempfile
import unittest
from pathlib import Path

import numpy as np

from focklab.constant import OperatorKind
from focklab.fockmat import (
    TruncatedOperator,
    boundedness_signature,
    build,
    build_composition,
    build_multiplication,
    compactness_proxy,
    compose_basis,
    difference,
    export_binary,
    export_json,
    export_svals_csv,
    integrate_basis,
    multiply_basis,
    parts_identity_residual,
    resolvent_norm,
    schatten_norm,
    singular_values,
    to_bytes,
)
from focklab.object import AffineMap, SymbolPair
from focklab.symbols import monomial, polynomial


DIMS: list[int] = [32, 64, 128]


def v_pair(degree: int, psi: AffineMap | None = None) -> SymbolPair:
    return SymbolPair(g=monomial(degree), psi=psi or AffineMap.identity(), kind=OperatorKind.V)


class BasisTestCase(unittest.TestCase):
    def test_integrate(self) -> None:
        v = np.zeros(4, dtype=np.complex128)
        v[1] = 1

        np.testing.assert_allclose(integrate_basis(v), [0, 0, 1 / math.sqrt(2), 0])

    def test_multiply_by_z(self) -> None:
        # z·e_m = √(m+1)·e_{m+1}
        v = np.zeros(5, dtype=np.complex128)
        v[2] = 1

        np.testing.assert_allclose(multiply_basis(v, monomial(1)), [0, 0, 0, math.sqrt(3), 0])

    def test_compose_with_dilation(self) -> None:
        column = compose_basis(3, AffineMap(a=0.5, b=0), 6)

        np.testing.assert_allclose(column, [0, 0, 0, 0.125, 0, 0])

    def test_compose_with_translation(self) -> None:
        # e_2(z+1) = (z² + 2z + 1)/√2 = e_2 + √2·e_1 + e_0/√2
        column = compose_basis(2, AffineMap(a=1, b=1), 4)

        np.testing.assert_allclose(column, [1 / math.sqrt(2), math.sqrt(2), 1, 0], atol=1e-14)

    def test_compose_with_constant_map(self) -> None:
        column = compose_basis(2, AffineMap(a=0, b=2), 4)

        np.testing.assert_allclose(column, [4 / math.sqrt(2), 0, 0, 0])


class BuildTestCase(unittest.TestCase):
    def test_volterra_of_linear_symbol(self) -> None:
        # V_z e_n = e_{n+1}/√(n+1)
        t = build(v_pair(1), 8)

        expected = np.zeros((8, 8))
        for n in range(7):
            expected[n + 1, n] = 1 / math.sqrt(n + 1)
        np.testing.assert_allclose(t.entries, expected, atol=1e-15)
        self.assertEqual(t.dim, 8)

    def test_j_of_constant_symbol(self) -> None:
        t = build(SymbolPair(g=monomial(0), kind=OperatorKind.J), 6)

        np.testing.assert_allclose(t.entries, np.diag([0, 1, 1, 1, 1, 1]), atol=1e-15)

    def test_nesting(self) -> None:
        pair = SymbolPair(g=polynomial([1, 2, 3]), psi=AffineMap(a=0.5, b=1), kind=OperatorKind.J)
        small = build(pair, 16).entries
        big = build(pair, 32).entries

        self.assertLessEqual(float(np.max(np.abs(big[:16, :16] - small))), 1e-12)

    def test_first_row_of_volterra_is_zero(self) -> None:
        t = build(v_pair(3, AffineMap(a=0.5, b=1)), 16)

        self.assertTrue(np.all(t.entries[0] == 0))

    def test_parts_identity(self) -> None:
        for g in (polynomial([2, 1]), polynomial([1j, 0, 3]), polynomial([0, 0, 0, 1])):
            self.assertLessEqual(parts_identity_residual(g, 32), 1e-12)

    def test_parts_identity_absolute_residual(self) -> None:
        for g in (polynomial([2, 1]), polynomial([0, 0, 0, 1]), polynomial([1] * 9)):
            relative = parts_identity_residual(g, 64)
            absolute = parts_identity_residual(g, 64, relative=False)

            self.assertGreaterEqual(absolute, relative)
            self.assertLessEqual(relative, 1e-12)
            self.assertLessEqual(absolute, 1e-6)

        # M_g 元素都不超过 1 时两者相同
        g = polynomial([0.5])
        self.assertEqual(parts_identity_residual(g, 16), parts_identity_residual(g, 16, relative=False))

    def test_composition_and_multiplication(self) -> None:
        c = build_composition(AffineMap(a=1j, b=0), 6)
        np.testing.assert_allclose(np.diag(c.entries), [1j**n for n in range(6)], atol=1e-15)

        m = build_multiplication(monomial(1), 6)
        self.assertAlmostEqual(m.entries[1, 0].real, 1.0)
        self.assertEqual(m.kind, OperatorKind.M)

    def test_dimension_limits(self) -> None:
        with self.assertRaises(ValueError):
            build(v_pair(1), 3)

        os.environ["FOCKLAB_MAX_DIM"] = "16"
        try:
            with self.assertRaises(ValueError):
                build(v_pair(1), 32)
        finally:
            del os.environ["FOCKLAB_MAX_DIM"]

    def test_non_affine_rejected(self) -> None:
        with self.assertRaises(ValueError):
            build(SymbolPair(g=monomial(1), psi=monomial(2)), 8)

    def test_difference_requires_same_dimension(self) -> None:
        with self.assertRaises(ValueError):
            difference(build(v_pair(1), 8), build(v_pair(2), 16))


class SpectrumTestCase(unittest.TestCase):
    def test_singular_values_of_volterra(self) -> None:
        spectrum = singular_values(build(v_pair(1), 16))

        expected = sorted([1 / math.sqrt(n + 1) for n in range(15)] + [0.0], reverse=True)
        np.testing.assert_allclose(spectrum.values, expected, atol=1e-14)
        self.assertAlmostEqual(spectrum.largest, 1.0)
        self.assertEqual(spectrum.nonzero().size, 15)

    def test_schatten_norm(self) -> None:
        t = build(v_pair(1), 16)
        expected = math.sqrt(sum(1 / (n + 1) for n in range(15)))

        self.assertAlmostEqual(schatten_norm(t, 2), expected, places=12)
        with self.assertRaises(ValueError):
            schatten_norm(t, 0)

    def test_schatten_norm_grows_with_dimension(self) -> None:
        norms = [schatten_norm(build(v_pair(1), n), 2) for n in DIMS]

        self.assertTrue(norms[0] < norms[1] < norms[2])


class ProxyTestCase(unittest.TestCase):
    def test_compact_volterra(self) -> None:
        evidence = compactness_proxy(v_pair(1), DIMS)

        self.assertTrue(evidence.holds)
        self.assertTrue(boundedness_signature(v_pair(1), DIMS).holds)
        self.assertEqual(evidence.to_dict()["dims"], DIMS)

    def test_bounded_but_not_compact(self) -> None:
        self.assertTrue(boundedness_signature(v_pair(2), DIMS).holds)
        self.assertFalse(compactness_proxy(v_pair(2), DIMS).holds)

    def test_unbounded(self) -> None:
        self.assertFalse(boundedness_signature(v_pair(3), DIMS).holds)
        self.assertFalse(compactness_proxy(v_pair(3), DIMS).holds)

    def test_zero_operator(self) -> None:
        self.assertTrue(boundedness_signature(v_pair(0), DIMS).holds)
        self.assertTrue(compactness_proxy(v_pair(0), DIMS).holds)

    def test_gaussian_decay(self) -> None:
        self.assertTrue(compactness_proxy(v_pair(2, AffineMap(a=0.5, b=1)), DIMS).holds)

    def test_difference_source(self) -> None:
        pair1 = v_pair(2)
        pair2 = SymbolPair(g=polynomial([0, 1, 1]))

        def make(n: int) -> TruncatedOperator:
            return difference(build(pair1, n), build(pair2, n))

        self.assertTrue(compactness_proxy(make, DIMS).holds)

    def test_dims_validation(self) -> None:
        with self.assertRaises(ValueError):
            boundedness_signature(v_pair(1), [32, 64])
        with self.assertRaises(ValueError):
            compactness_proxy(v_pair(1), [64, 32, 128])
        with self.assertRaises(ValueError):
            compactness_proxy(v_pair(1), DIMS, tail_fraction=1.5)


class ResolventTestCase(unittest.TestCase):
    def test_nilpotent_resolvent(self) -> None:
        # 幂零阵的预解式在谱圆盘内随维数增长，圆盘外趋于稳定
        pair = SymbolPair(g=monomial(2, -1))
        ladder = [*DIMS, 256]
        inside = [resolvent_norm(build(pair, n), 1.5) for n in ladder]
        outside = [resolvent_norm(build(pair, n), 2.5) for n in ladder]

        self.assertTrue(all(a < b for a, b in zip(inside, inside[1:])))
        self.assertLess(abs(outside[3] - outside[2]) / outside[2], 0.05)

    def test_boundary_convergence_is_slow(self) -> None:
        # 紧贴圆盘边界时 64 → 128 的变化仍超过 5%，但之后的加密逐次变小
        pair = SymbolPair(g=monomial(2, -1))
        outside = [resolvent_norm(build(pair, n), 2.5) for n in (64, 128, 256)]

        first = abs(outside[1] - outside[0]) / outside[0]
        second = abs(outside[2] - outside[1]) / outside[1]
        self.assertGreater(first, 0.05)
        self.assertLess(second, first)


class ExportTestCase(unittest.TestCase):
    def test_binary_layout(self) -> None:
        t = build(v_pair(1), 4)
        data = to_bytes(t)

        self.assertEqual(len(data), 4 * 4 * 16)
        decoded = np.frombuffer(data, dtype="<c16").reshape(4, 4)
        np.testing.assert_array_equal(decoded, t.entries)

    def test_json_export(self) -> None:
        data = export_json(build(v_pair(1), 4))

        self.assertEqual(data["dim"], 4)
        self.assertEqual(data["kind"], "V")
        self.assertEqual(data["entries"][1][0], [1.0, 0.0])

        with self.assertRaises(ValueError):
            export_json(build(v_pair(1), 64))

    def test_files(self) -> None:
        t = build(v_pair(1), 4)
        with tempfile.TemporaryDirectory() as folder:
            binary = export_binary(t, Path(folder, "matrix.bin"))
            csv = export_svals_csv(singular_values(t), Path(folder, "svals.csv"))

            self.assertEqual(binary.stat().st_size, 256)
            lines = csv.read_text(encoding="utf-8").splitlines()
            self.assertEqual(lines[0], "index,value")
            self.assertEqual(len(lines), 5)


if __name__ == "__main__":
    unittest.main()
