#!/usr/bin/env python3

import ast
import os
import sys
import unittest
from fractions import Fraction

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from blocks.descriptor import TORSION_BANNER, BlockDescriptor, c2_block, evaluate_block
from blocks.fano_table import (block_examples_table, check_nodal_cubics, fano_descriptors,
                               fano_rank1_table, nodal_cubic_table, reproduce_fano_rank1)
from blocks.invariants import (BlowupSpec, FanoDescriptor, SmoothingData, acyl_profile,
                               betti3_nodal, betti3_semifano, block_cohomology, blowup_numbers,
                               c2_restriction, defect, div_c2_bounds, divisibility_modulo,
                               fano_block_row, fibre_coefficients, flop_update, genus_degree,
                               namikawa_check, riemann_roch_3fold, rigidity_h1)
from lattice.gram import GramLattice, lattice_profile
from lattice.standard import standard_lattice
from utils.errors import (InconsistentC2, InconsistentReport, MalformedInput, NegativeBetti,
                          NegativeDefect, NonFanoWarning, NonIntegralChi, OddDegree,
                          RankNullityViolation, SchemaError, TorsionUnknown)

DATA = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'data')


def load_block(name):
    return BlockDescriptor.from_file(os.path.join(DATA, name))


def quartic_plane_dict():
    return {
        "picard_gram": [[-2, 1], [1, 4]],
        "anticanonical": [0, 1],
        "c2c1sq": [16, 28],
        "b3_Y": 44,
        "e": 9,
        "base_curves": [{"genus": 3}],
    }


class TestGenusDegree(unittest.TestCase):

    def test_values(self):
        """Test genus and sections of -K"""
        self.assertEqual(genus_degree(22).g, 12)
        self.assertEqual(genus_degree(22).h0_antiK, 14)
        self.assertEqual(genus_degree(64).g, 33)
        self.assertEqual((genus_degree(2).g, genus_degree(2).h0_antiK), (2, 4))

    def test_invalid_degree(self):
        """Test odd and non-positive degrees"""
        with self.assertRaises(OddDegree):
            genus_degree(5)
        with self.assertRaises(MalformedInput):
            genus_degree(0)


class TestRiemannRoch(unittest.TestCase):

    def test_trivial_bundle(self):
        """Test χ(O) = 1 from K·c2 = -24"""
        self.assertEqual(riemann_roch_3fold(0, 0, 0, -24), 1)

    def test_anticanonical_quartic(self):
        """Test χ(-K) = g + 2 for a degree-4 Fano"""
        self.assertEqual(riemann_roch_3fold(4, -4, 28, -24), 5)
        self.assertEqual(riemann_roch_3fold(0, 0, 0, 0), 0)

    def test_non_integral(self):
        """Test a warning for a fractional Euler characteristic"""
        with self.assertWarns(NonIntegralChi):
            chi = riemann_roch_3fold(1, 0, 0, 0)
        self.assertEqual(chi, Fraction(1, 6))


class TestBlowups(unittest.TestCase):

    def setUp(self):
        self.V10 = FanoDescriptor("V10", rank=1, index=1, degree=10, b3=20)
        self.V12 = FanoDescriptor("V12", rank=1, index=1, degree=12, b3=14)

    def test_line(self):
        """Test blowing up a line on V10"""
        result = blowup_numbers(self.V10, BlowupSpec.curve(genus=0, degree=1))
        self.assertEqual(result.degree_Y, 6)
        self.assertEqual(result.picard_gram.rows(), [[-2, 3], [3, 6]])
        self.assertEqual(result.genus_Y, 4)
        self.assertEqual(result.b3_Y, 20)

    def test_conic(self):
        """Test blowing up a conic on V10"""
        result = blowup_numbers(self.V10, BlowupSpec.curve(genus=0, degree=2))
        self.assertEqual(result.picard_gram.rows(), [[-2, 4], [4, 4]])
        self.assertEqual(result.genus_Y, 3)
        self.assertEqual(result.E3, 0)

    def test_point(self):
        """Test blowing up a point on V12 gives the conic lattice again"""
        result = blowup_numbers(self.V12, BlowupSpec.point())
        self.assertEqual(result.degree_Y, 4)
        self.assertEqual(result.picard_gram.rows(), [[-2, 4], [4, 4]])
        self.assertEqual(result.E3, 1)

    def test_curve_genus_adds_to_b3(self):
        """Test b3 grows by twice the genus of the centre"""
        result = blowup_numbers(self.V12, BlowupSpec.curve(genus=2, degree=4))
        self.assertEqual(result.b3_Y, 14 + 4)

    def test_determinant(self):
        """Test the 2x2 determinant against direct expansion"""
        P3 = FanoDescriptor("P3", rank=1, index=4, degree=64, b3=0)
        for g in range(4):
            for d in range(11):
                result = blowup_numbers(P3, BlowupSpec.curve(genus=g, degree=d))
                expected = (2 * g - 2) * result.degree_Y - (d + 2 - 2 * g) ** 2
                self.assertEqual(result.picard_gram.matrix.det(), expected)

    def test_non_fano_warning(self):
        """Test -K stops being big"""
        V2 = FanoDescriptor("V2", rank=1, index=1, degree=2, b3=104)
        with self.assertWarns(NonFanoWarning):
            result = blowup_numbers(V2, BlowupSpec.curve(genus=0, degree=2))
        self.assertEqual(result.degree_Y, -4)

    def test_invalid_fano(self):
        """Test descriptor validation"""
        with self.assertRaises(OddDegree):
            FanoDescriptor("X", rank=1, index=1, degree=5, b3=0)
        with self.assertRaises(MalformedInput):
            FanoDescriptor("X", rank=1, index=1, degree=4, b3=60, h21=29)
        with self.assertRaises(MalformedInput):
            FanoDescriptor("X", rank=1, index=2, degree=12, b3=0)
        with self.assertRaises(MalformedInput):
            BlowupSpec.curve(genus=-1, degree=2)


class TestNamikawa(unittest.TestCase):

    def test_quartic(self):
        """Test the quartic bound allows 45 nodes"""
        result = namikawa_check(30, 1, 45)
        self.assertEqual(result.bound, 49)
        self.assertTrue(result.ok)
        self.assertFalse(namikawa_check(30, 1, 45, [3, 2]).ok)

    def test_sextic_double_solid(self):
        """Test the largest bound"""
        self.assertEqual(namikawa_check(52, 1, 0).bound, 71)

    def test_no_singularities(self):
        """Test e = 0 passes any non-negative bound"""
        self.assertTrue(namikawa_check(0, 20, 0).ok)
        with self.assertRaises(MalformedInput):
            namikawa_check(30, 1, -1)


class TestDefectAndBetti(unittest.TestCase):

    def test_defect(self):
        """Test σ = b3(X) - b3(X_t) + e"""
        self.assertEqual(defect(SmoothingData(52, 60), 9), 1)
        self.assertEqual(defect(SmoothingData(60, 60), 0), 0)
        self.assertEqual(defect(SmoothingData(52, 60, (1,) * 9)), 1)

    def test_burkhardt(self):
        """Test 45 nodes and defect 15 force b3(X) = 30 and b3(Y) = 0"""
        self.assertEqual(defect(SmoothingData(30, 60), 45), 15)
        self.assertEqual(betti3_nodal(30, 45, 15), 0)
        self.assertEqual(betti3_semifano(60, 45, 15), 0)

    def test_negative(self):
        """Test inconsistent inputs raise"""
        with self.assertRaises(NegativeDefect):
            defect(SmoothingData(40, 60), 9)
        with self.assertRaises(NegativeBetti):
            betti3_semifano(10, 8, 0)
        with self.assertRaises(MalformedInput):
            SmoothingData(40, 60, (0,))
        with self.assertRaises(MalformedInput):
            defect(SmoothingData(40, 60))

    def test_betti_values(self):
        """Test b - 2e + 2σ"""
        self.assertEqual(betti3_semifano(60, 9, 1), 44)
        self.assertEqual(betti3_semifano(60, 45, 15), 0)
        self.assertEqual(betti3_semifano(10, 10, 5), 0)

    def test_two_routes_agree(self):
        """Test b - 2e + 2σ equals b3(X) - e + σ with σ from the defect formula"""
        for b in range(0, 61, 6):
            for e in range(12):
                for sigma in range(e + 1):
                    b3_X = b - e + sigma
                    self.assertEqual(defect(SmoothingData(b3_X, b), e), sigma)
                    if b - 2 * e + 2 * sigma >= 0:
                        self.assertEqual(betti3_semifano(b, e, sigma),
                                         betti3_nodal(b3_X, e, sigma))


class TestBlockCohomology(unittest.TestCase):

    def test_single_component(self):
        """Test the quartic-with-plane block"""
        result = block_cohomology(2, 44, [3])
        self.assertEqual((result.b2_Z, result.b3_Z, result.rank_K), (3, 50, 0))

    def test_reducible_base_curve(self):
        """Test four plane quartics on projective space"""
        result = block_cohomology(1, 0, [3, 3, 3, 3], rank_N=1)
        self.assertEqual((result.b2_Z, result.b3_Z, result.rank_K), (5, 24, 3))
        self.assertEqual(result.constraint, "(rank N - 1) + (rank K - 0) = 3")

    def test_rational_curve(self):
        """Test a rational base curve leaves b3 unchanged"""
        self.assertEqual(block_cohomology(1, 20, [0]).b3_Z, 20)

    def test_invalid(self):
        """Test impossible ranks and empty curves"""
        with self.assertRaises(RankNullityViolation):
            block_cohomology(1, 0, [0, 0], rank_N=4)
        with self.assertRaises(MalformedInput):
            block_cohomology(1, 0, [])


class TestChernRestrictions(unittest.TestCase):

    def test_restrictions(self):
        """Test (c2 + c1²)|D from the surface and the Gram"""
        self.assertEqual(c2_restriction(12, 0, -2, 1), 16)
        self.assertEqual(c2_restriction(20, 0, -2, 2), 26)
        self.assertEqual(c2_restriction(5, 5, 0, 0), 0)
        self.assertEqual(c2_restriction(3, 9, -2, 1), -2)

    def test_flops(self):
        """Test the flop shifts by twice the change in D³"""
        self.assertEqual(flop_update(16, -9), -2)
        self.assertEqual(flop_update(38, -17), 4)
        self.assertEqual(flop_update(7, 0), 7)

    def test_flop_keeps_gram(self):
        """Test a changed Gram is rejected"""
        G = GramLattice.from_rows([[-2, 1], [1, 4]])
        self.assertEqual(flop_update(16, -9, G, G), -2)
        with self.assertRaises(InconsistentReport):
            flop_update(16, -9, G, GramLattice.from_rows([[-2, 2], [2, 4]]))


class TestC2Formulas(unittest.TestCase):

    def test_bounds(self):
        """Test gcd((24 + (-K)³)/r, 24)"""
        self.assertEqual(div_c2_bounds(64, 4), (2, 2))
        self.assertEqual(div_c2_bounds(4, 1), (2, 4))
        self.assertEqual(div_c2_bounds(24, 2), (2, 24))
        with self.assertRaises(InconsistentC2):
            div_c2_bounds(4, 3)

    def test_fibre_coefficients(self):
        """Test differences of consecutive K³ values"""
        self.assertEqual(fibre_coefficients(4, []), [-4])
        self.assertEqual(fibre_coefficients(64, [-36, -16, -4]), [-28, -20, -12, -4])

    def test_divisibility_modulo(self):
        """Test divisibility in a quotient"""
        self.assertEqual(divisibility_modulo([16, 28], []), 4)
        self.assertEqual(divisibility_modulo([16, 28], [[1, 4]]), 12)
        self.assertEqual(divisibility_modulo([2], []), 2)
        self.assertEqual(divisibility_modulo([5, 7], [[1, 0], [0, 1]]), 24)


class TestAcylProfile(unittest.TestCase):

    def test_four_components(self):
        """Test b2, b3, b4 of V for four plane quartics"""
        profile = acyl_profile(5, 24, GramLattice.diagonal([4]), 3)
        self.assertEqual(profile.b_V, (0, 4, 45, 4, 0))
        self.assertEqual(profile.rank_T, 21)

    def test_burkhardt(self):
        """Test the rank-16 case"""
        N = GramLattice.from_file(os.path.join(DATA, 'burkhardt.gram'))
        self.assertEqual(acyl_profile(17, 6, N, 0).b_V[2], 12)

    def test_minimal(self):
        """Test the smallest shape"""
        profile = acyl_profile(2, 0, GramLattice.diagonal([4]), 0)
        self.assertEqual(profile.b_V, (0, 1, 21, 1, 0))

    def test_rank_nullity(self):
        """Test b4 = rank K + 1 and b2 = rank K + rank N, and the violation"""
        for rank_K in range(4):
            profile = acyl_profile(2 + rank_K, 10, GramLattice.diagonal([4]), rank_K)
            self.assertEqual(profile.b_V[3], rank_K + 1)
            self.assertEqual(profile.b_V[1], rank_K + profile.rank_N)
        with self.assertRaises(RankNullityViolation):
            acyl_profile(5, 24, GramLattice.diagonal([4]), 2)


class TestFanoTables(unittest.TestCase):

    def test_single_rows(self):
        """Test projective space, V12 and the cubic"""
        by_name = {W.name: W for W in fano_descriptors()}
        row = fano_block_row(by_name['P3'])
        self.assertEqual((row.b3_Z, row.div_c2), (66, 2))
        row = fano_block_row(by_name['V12'])
        self.assertEqual((row.b3_Z, row.div_c2), (28, 12))
        row = fano_block_row(by_name['B3'])
        self.assertEqual((row.b3_Z, row.div_c2), (36, 24))

    def test_all_rows(self):
        """Test every rank-1 row reproduces b3(Z) and div c2(Z)"""
        expected = fano_rank1_table()
        computed = reproduce_fano_rank1(workers=1)
        self.assertEqual(len(computed), 17)
        self.assertEqual(computed['b3_Z'].tolist(), expected['b3_Z'].tolist())
        self.assertEqual(computed['div_c2'].tolist(), expected['div_c2'].tolist())

    def test_rank_required(self):
        """Test higher Picard rank is refused"""
        with self.assertRaises(MalformedInput):
            fano_block_row(FanoDescriptor("Y", rank=2, index=1, degree=4, b3=0))

    def test_torsion_warning(self):
        """Test a torsion flag warns"""
        W = FanoDescriptor("V22", rank=1, index=1, degree=22, b3=0, torsion_free_h3=False)
        with self.assertWarns(TorsionUnknown):
            fano_block_row(W)

    def test_nodal_cubics(self):
        """Test b3 = 10 - 2e + 2σ and e - σ <= 5 on rows with resolutions"""
        self.assertEqual(check_nodal_cubics(), [])
        df = nodal_cubic_table()
        self.assertEqual(len(df), 15)
        df.loc[5, 'b3_Y'] = 6
        self.assertEqual(len(check_nodal_cubics(df)), 1)

    def test_namikawa_on_cubics(self):
        """Test every cubic row respects the cubic smoothing bound"""
        for row in nodal_cubic_table().itertuples(index=False):
            self.assertTrue(namikawa_check(5, 1, int(row.e)).ok)

    def test_rigidity(self):
        """Test projective space and the degree-22 toric resolution are rigid"""
        self.assertEqual(rigidity_h1(15, 1, 33), 0)
        self.assertEqual(rigidity_h1(3, 10, 12), 0)


class TestDescriptors(unittest.TestCase):

    def test_quartic_with_plane(self):
        """Test the plane example and its flop"""
        result = evaluate_block(load_block('quartic_plane.json'))
        self.assertEqual(result.block.b3_Y, 44)
        self.assertEqual(result.c2.div_c2, 4)
        self.assertEqual(result.c2.fibre, [-4])
        self.assertEqual(result.flops[0].div_c2, 2)
        self.assertEqual(result.div_c2, [2, 4])
        self.assertEqual(result.c2.div_modulo, 12)
        self.assertEqual(result.cohomology.b3_Z, 50)

    def test_quadric_and_scroll(self):
        """Test the quadric and scroll examples"""
        block = load_block('quartic_quadric.json')
        self.assertEqual(block.b3_Y, 38)
        self.assertEqual(evaluate_block(block).div_c2, [2])
        block = load_block('quartic_scroll.json')
        self.assertEqual(block.b3_Y, 28)
        self.assertEqual(evaluate_block(block).div_c2, [2, 4])
        block = load_block('quartic_del_pezzo.json')
        self.assertEqual(block.b3_Y, 30)
        self.assertEqual(evaluate_block(block).div_c2, [4])

    def test_burkhardt_interval_collapses(self):
        """Test one known pairing is enough for the Burkhardt block"""
        result = evaluate_block(load_block('burkhardt_quartic.json'))
        self.assertEqual((result.c2.lower, result.c2.upper), (2, 2))
        self.assertEqual(result.verdict, "isometric")
        self.assertEqual(result.cohomology.b2_Z, 17)

    def test_reducible_pencils(self):
        """Test steps give the exact value and missing steps an interval"""
        result = evaluate_block(load_block('p3_four_quartics.json'))
        self.assertEqual(result.c2.fibre, [-28, -20, -12, -4])
        self.assertEqual(result.c2.div_c2, 2)
        self.assertEqual(result.profile.rank_K, 3)

        result = evaluate_block(load_block('p3_two_conics.json'))
        self.assertIsNone(result.c2.fibre)
        self.assertTrue(result.c2.exact)
        self.assertEqual(result.profile.rank_N, 3)

    def test_partial_interval(self):
        """Test an interval that does not collapse"""
        block = BlockDescriptor.from_dict(dict(quartic_plane_dict(), c2c1sq=[None, 28]))
        result = c2_block(block)
        self.assertEqual((result.lower, result.upper), (2, 4))
        self.assertIsNone(result.div_c2)

    def test_block_examples_table(self):
        """Test every supplied example reproduces its table row"""
        for row in block_examples_table().itertuples(index=False):
            path = os.path.join(DATA, row.descriptor)
            if not os.path.exists(path):
                continue
            with self.subTest(descriptor=row.descriptor):
                result = evaluate_block(BlockDescriptor.from_file(path))
                self.assertEqual(result.block.degree, row.minus_K3)
                self.assertEqual(result.cohomology.b2_Z, row.h2_Z)
                self.assertEqual(result.profile.rank_K, row.rank_K)
                self.assertEqual(result.cohomology.b3_Z, row.b3_Z)
                self.assertEqual(", ".join(str(d) for d in result.div_c2), row.div_c2)
                self.assertEqual(result.block.e, row.e)

                N = result.profile.N_gram
                if row.N.startswith("(("):
                    self.assertEqual(N.rows(), [list(r) for r in ast.literal_eval(row.N)])
                else:
                    expected = lattice_profile(standard_lattice(row.N))
                    actual = lattice_profile(N)
                    self.assertEqual(actual.signature, expected.signature)
                    self.assertEqual(actual.disc_invariant_factors,
                                     expected.disc_invariant_factors)

    def test_round_trip(self):
        """Test to_dict and from_dict agree"""
        block = load_block('quartic_plane.json')
        self.assertEqual(BlockDescriptor.from_dict(block.to_dict()), block)


class TestDescriptorErrors(unittest.TestCase):

    def assertSchemaPath(self, data, path):
        with self.assertRaises(SchemaError) as ctx:
            BlockDescriptor.from_dict(data)
        self.assertEqual(ctx.exception.path, path)

    def test_schema_paths(self):
        """Test schema errors name the key"""
        data = quartic_plane_dict()
        del data['e']
        self.assertSchemaPath(data, ['e'])
        self.assertSchemaPath(dict(quartic_plane_dict(), e="9"), ['e'])
        self.assertSchemaPath(dict(quartic_plane_dict(), c2c1sq=[16]), ['c2c1sq'])
        self.assertSchemaPath(dict(quartic_plane_dict(), colour="red"), ['colour'])
        self.assertSchemaPath(dict(quartic_plane_dict(), base_curves=[{"genus": -1}]),
                              ['base_curves', 0, 'genus'])
        self.assertSchemaPath(dict(quartic_plane_dict(), picard_gram=[[-2, 1], [2, 4]]),
                              ['picard_gram'])
        self.assertSchemaPath(dict(quartic_plane_dict(), index=2), ['index'])

    def test_odd_degree(self):
        """Test an odd anticanonical square"""
        with self.assertRaises(OddDegree):
            BlockDescriptor.from_dict(dict(quartic_plane_dict(), picard_gram=[[-2, 1], [1, 3]]))

    def test_inconsistent_smoothing(self):
        """Test b3_Y against b - 2e + 2σ"""
        with self.assertRaises(InconsistentReport):
            BlockDescriptor.from_dict(dict(quartic_plane_dict(), smoothing={"b": 60, "sigma": 2}))

    def test_inconsistent_c2(self):
        """Test (c2 + c1²)·A must equal 24 + (-K)³"""
        block = BlockDescriptor.from_dict(dict(quartic_plane_dict(), c2c1sq=[16, 20]))
        with self.assertRaises(InconsistentC2):
            evaluate_block(block)

    def test_div_data_conflict(self):
        """Test data-level div values must agree with a computed value"""
        data = dict(quartic_plane_dict(), div_c2_data=[2])
        with self.assertRaises(InconsistentC2):
            evaluate_block(BlockDescriptor.from_dict(data))
        data = dict(quartic_plane_dict(), c2c1sq=[None, 28], div_c2_data=[2])
        self.assertEqual(evaluate_block(BlockDescriptor.from_dict(data)).div_c2, [2])

    def test_torsion_banner(self):
        """Test the torsion flag"""
        block = BlockDescriptor.from_dict(dict(quartic_plane_dict(), torsion_free_h3=False))
        with self.assertWarns(TorsionUnknown):
            result = evaluate_block(block)
        self.assertEqual(result.banner, TORSION_BANNER)

    def test_declared_rank_K(self):
        """Test a wrong rank K is rejected"""
        block = BlockDescriptor.from_dict(dict(quartic_plane_dict(), rank_K=1))
        with self.assertRaises(RankNullityViolation):
            evaluate_block(block)

    def test_quartic_rules(self):
        """Test nodal quartic rules on descriptors"""
        data = dict(quartic_plane_dict(), e=8, b3_Y=46, quartic={"has_planes": True})
        with self.assertRaises(InconsistentReport):
            evaluate_block(BlockDescriptor.from_dict(data))


if __name__ == '__main__':
    unittest.main()
