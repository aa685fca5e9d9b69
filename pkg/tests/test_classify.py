import math
import unittest

from focklab.classify import (
    berezin,
    berezin_lower_constant,
    composition_verdict,
    criterion,
    criterion_limit,
    difference_compact,
    difference_schatten,
    eval_M,
    eval_Mtilde,
    kernel_norm,
    lr_norm_M,
    multiplication_verdict,
    spectrum_contains,
    spectrum_disk,
    verdict,
)
from focklab.constant import DifferenceBranch, OperatorKind, Rule
from focklab.object import AffineMap, ClassificationVerdict, SymbolPair
from focklab.symbols import constant, monomial, polynomial, scale


IDENTITY: AffineMap = AffineMap.identity()
HALF: AffineMap = AffineMap(a=0.5, b=0)
SHIFT: AffineMap = AffineMap(a=1, b=1)


def v_pair(degree: int, psi: AffineMap = IDENTITY) -> SymbolPair:
    return SymbolPair(g=monomial(degree), psi=psi, kind=OperatorKind.V)


def j_pair(degree: int, psi: AffineMap = IDENTITY) -> SymbolPair:
    return SymbolPair(g=monomial(degree), psi=psi, kind=OperatorKind.J)


class VerdictTestCase(unittest.TestCase):
    def test_volterra_degree_ladder(self) -> None:
        linear = verdict(v_pair(1), 2, 2)
        self.assertTrue(linear.bounded)
        self.assertTrue(linear.compact)
        self.assertEqual(linear.schatten_cutoff, 2.0)
        self.assertEqual(linear.reasons, [Rule.POLYNOMIAL_GROWTH, Rule.SCHATTEN_RADIAL])

        quadratic = verdict(v_pair(2), 2, 2)
        self.assertTrue(quadratic.bounded)
        self.assertFalse(quadratic.compact)
        self.assertEqual(quadratic.schatten_cutoff, math.inf)

        cubic = verdict(v_pair(3), 2, 2)
        self.assertFalse(cubic.bounded)

    def test_rotation_behaves_like_identity(self) -> None:
        rotation = AffineMap(a=1j, b=0)
        for degree in range(4):
            self.assertEqual(verdict(v_pair(degree, rotation), 2, 2), verdict(v_pair(degree), 2, 2))

    def test_zero_operator_comes_first(self) -> None:
        result = verdict(v_pair(0, AffineMap(a=3, b=0)), 2, 2)

        self.assertTrue(result.compact)
        self.assertEqual(result.schatten_cutoff, 0.0)
        self.assertEqual(result.reasons, [Rule.ZERO_OPERATOR])

    def test_dilation_rules(self) -> None:
        self.assertEqual(verdict(v_pair(3, HALF), 2, 2).reasons, [Rule.GAUSSIAN_DECAY])
        self.assertTrue(verdict(v_pair(3, HALF), 2, 2).in_schatten(0.5))
        self.assertEqual(verdict(v_pair(1, AffineMap(a=2, b=0)), 2, 2).reasons, [Rule.DILATION_ABOVE_ONE])
        self.assertEqual(verdict(v_pair(1, SHIFT), 2, 2).reasons, [Rule.TRANSLATION_GROWTH])

    def test_non_affine_symbol(self) -> None:
        pair = SymbolPair(g=monomial(1), psi=polynomial([0, 0, 1]))
        result = verdict(pair, 2, 2)

        self.assertFalse(result.bounded)
        self.assertEqual(result.reasons, [Rule.NON_AFFINE_SYMBOL])

    def test_shrinking_target_needs_integrability(self) -> None:
        # r = pq/(p−q)：p=4, q=2 → r=4；p=3, q=2 → r=6；p=2, q=1 → r=2
        self.assertTrue(verdict(v_pair(1), 4, 2).compact)
        self.assertTrue(verdict(v_pair(1), 3, 2).bounded)
        self.assertFalse(verdict(v_pair(1), 2, 1).bounded)
        self.assertFalse(verdict(v_pair(2), 4, 2).bounded)
        self.assertIn(Rule.INTEGRABILITY, verdict(v_pair(1), 4, 2).reasons)

    def test_j_type(self) -> None:
        self.assertTrue(verdict(j_pair(0), 2, 2).bounded)
        self.assertFalse(verdict(j_pair(0), 2, 2).compact)
        self.assertFalse(verdict(j_pair(1), 2, 2).bounded)
        self.assertFalse(verdict(j_pair(0), 4, 2).bounded)
        self.assertTrue(verdict(j_pair(1, HALF), 2, 2).compact)

    def test_verdict_invariants(self) -> None:
        with self.assertRaises(ValueError):
            ClassificationVerdict(bounded=False, compact=True, reasons=[Rule.ZERO_OPERATOR])
        with self.assertRaises(ValueError):
            ClassificationVerdict(bounded=True, compact=False, schatten_cutoff=2, reasons=[Rule.CONSTANT_SYMBOL])
        with self.assertRaises(ValueError):
            verdict(v_pair(1), 0, 2)

    def test_cutoff_serializes_as_inf(self) -> None:
        data = verdict(v_pair(2), 2, 2).model_dump(mode="json")

        self.assertEqual(data["schatten_cutoff"], "inf")
        self.assertEqual(data["reasons"], ["polynomial-growth"])

    def test_composition_and_multiplication(self) -> None:
        self.assertTrue(composition_verdict(IDENTITY, 2, 2).bounded)
        self.assertFalse(composition_verdict(IDENTITY, 2, 2).compact)
        self.assertTrue(composition_verdict(HALF, 2, 2).compact)
        self.assertFalse(composition_verdict(SHIFT, 2, 2).bounded)

        self.assertTrue(multiplication_verdict(constant(3)).bounded)
        self.assertFalse(multiplication_verdict(monomial(1)).bounded)
        self.assertTrue(multiplication_verdict(polynomial([])).compact)


class CriterionTestCase(unittest.TestCase):
    def test_closed_forms(self) -> None:
        self.assertAlmostEqual(eval_M(v_pair(2), 3), 2 * 3 / 4)
        self.assertAlmostEqual(eval_M(v_pair(1, HALF), 2), math.exp((1 - 4) / 2) / 3)
        self.assertAlmostEqual(eval_Mtilde(j_pair(0), 5j), 1.0)
        self.assertEqual(criterion(v_pair(0), 1), 0.0)

    def test_scaling_symbol(self) -> None:
        pairs = [v_pair(1), v_pair(2), v_pair(3, HALF), v_pair(1, SHIFT), j_pair(0), j_pair(1, HALF)]
        for pair in pairs:
            for c in (3, -0.5j, 1e-3):
                scaled = pair.with_symbol(scale(pair.g, c))
                for z in (1 + 0j, 2 + 1j, 5j):
                    self.assertAlmostEqual(criterion(scaled, z) / criterion(pair, z), abs(c), delta=1e-12 * abs(c))

                before = verdict(pair, 2, 2)
                after = verdict(scaled, 2, 2)
                self.assertEqual(
                    (after.bounded, after.compact, after.schatten_cutoff),
                    (before.bounded, before.compact, before.schatten_cutoff),
                )

    def test_type_guard(self) -> None:
        with self.assertRaises(ValueError):
            eval_M(j_pair(1), 1)
        with self.assertRaises(ValueError):
            eval_Mtilde(v_pair(1), 1)

    def test_limits(self) -> None:
        self.assertEqual(criterion_limit(v_pair(1)), 0.0)
        self.assertEqual(criterion_limit(SymbolPair(g=monomial(2, 3))), 6.0)
        self.assertEqual(criterion_limit(v_pair(3)), math.inf)
        self.assertEqual(criterion_limit(j_pair(0)), 1.0)

    def test_lr_norm(self) -> None:
        # ∫(1+|z|)^{−3} dA = 2π∫ t(1+t)^{−3} dt = π
        norm = lr_norm_M(v_pair(1), 3)
        self.assertTrue(norm.finite)
        assert norm.value is not None
        self.assertAlmostEqual(norm.value, math.pi, places=8)

        self.assertFalse(lr_norm_M(v_pair(1), 2).finite)
        self.assertFalse(lr_norm_M(v_pair(2), 3).finite)
        self.assertTrue(lr_norm_M(v_pair(2, HALF), 1).finite)


class BerezinTestCase(unittest.TestCase):
    def test_kernel_norm(self) -> None:
        for w in (0j, 1 + 1j, 3 + 0j):
            for p in (1.0, 2.0, 4.0):
                expected = math.exp(abs(w) ** 2 / 2)
                self.assertAlmostEqual(kernel_norm(w, p) / expected, 1.0, places=7)

    def test_lower_bound(self) -> None:
        p = 2.0
        c = berezin_lower_constant(p)
        for pair in (v_pair(2), v_pair(1, HALF), j_pair(0)):
            for zeta in (1 + 0j, 2 + 1j):
                value = berezin(pair, p, complex(pair.psi_at(zeta)))
                self.assertGreaterEqual(value, c * criterion(pair, zeta) ** p)

    def test_berezin_of_zero_operator(self) -> None:
        self.assertEqual(berezin(v_pair(0), 2.0, 1j), 0.0)

    def test_non_affine_rejected(self) -> None:
        with self.assertRaises(ValueError):
            berezin(SymbolPair(g=monomial(1), psi=monomial(2)), 2.0, 0j)


class DifferenceTestCase(unittest.TestCase):
    def test_cancellation_branch(self) -> None:
        pair1 = v_pair(2)
        pair2 = SymbolPair(g=polynomial([0, 1, 1]))
        result = difference_compact(pair1, pair2, 2, 2)

        self.assertTrue(result.compact)
        self.assertEqual(result.branch, DifferenceBranch.CANCELLATION)
        assert result.cancellation_evidence is not None
        self.assertTrue(result.cancellation_evidence.psi_equal)
        self.assertEqual(result.cancellation_evidence.limit, 0.0)

    def test_neither_branch(self) -> None:
        pair1 = v_pair(2)
        pair2 = SymbolPair(g=monomial(2, 2))
        result = difference_compact(pair1, pair2, 2, 2)

        self.assertFalse(result.compact)
        self.assertEqual(result.branch, DifferenceBranch.NEITHER)

    def test_both_compact(self) -> None:
        result = difference_compact(v_pair(1), v_pair(3, HALF), 2, 2)

        self.assertEqual(result.branch, DifferenceBranch.BOTH_COMPACT)
        self.assertIsNone(result.cancellation_evidence)

    def test_symmetric_in_arguments(self) -> None:
        cases = [
            (v_pair(2), SymbolPair(g=polynomial([0, 1, 1]))),
            (v_pair(1), v_pair(3, HALF)),
            (v_pair(2), SymbolPair(g=monomial(2, 2))),
            (v_pair(1, HALF), v_pair(2)),
            (j_pair(0), SymbolPair(g=constant(2), kind=OperatorKind.J)),
        ]
        for pair1, pair2 in cases:
            forward = difference_compact(pair1, pair2, 2, 2)
            backward = difference_compact(pair2, pair1, 2, 2)

            self.assertEqual(forward.compact, backward.compact)
            self.assertEqual(forward.branch, backward.branch)
            self.assertEqual(forward.cancellation_evidence, backward.cancellation_evidence)

    def test_shrinking_target_rejected(self) -> None:
        with self.assertRaisesRegex(ValueError, "p ≤ q"):
            difference_compact(v_pair(1), v_pair(2), 4, 2)
        self.assertTrue(difference_compact(v_pair(1), v_pair(3, HALF), 2, 4).compact)

    def test_unbounded_summand_rejected(self) -> None:
        with self.assertRaises(ValueError):
            difference_compact(v_pair(3), v_pair(1), 2, 2)
        with self.assertRaises(ValueError):
            difference_compact(v_pair(1), j_pair(0), 2, 2)

    def test_schatten(self) -> None:
        pair1 = v_pair(2)
        pair2 = SymbolPair(g=polynomial([0, 1, 1]))

        above = difference_schatten(pair1, pair2, 3)
        self.assertTrue(above.schatten_for_p)
        self.assertEqual(above.branch, DifferenceBranch.CANCELLATION)

        at_cutoff = difference_schatten(pair1, pair2, 2)
        self.assertFalse(at_cutoff.schatten_for_p)
        self.assertTrue(at_cutoff.compact)


class SpectrumTestCase(unittest.TestCase):
    def test_disk(self) -> None:
        g1 = monomial(2)
        g2 = monomial(2, 2)

        self.assertEqual(spectrum_disk(g1, g2), 2.0)
        self.assertTrue(spectrum_contains(g1, g2, 1.5))
        self.assertTrue(spectrum_contains(g1, g2, 2.0))
        self.assertFalse(spectrum_contains(g1, g2, 2.5))
        self.assertTrue(spectrum_contains(g1, g2, 0))

    def test_degree_above_two(self) -> None:
        with self.assertRaisesRegex(ValueError, "degree > 2"):
            spectrum_disk(monomial(3), monomial(1))


if __name__ == "__main__":
    unittest.main()
