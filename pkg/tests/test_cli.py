#!/usr/bin/env python3

import io
import json
import os
import shutil
import sys
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cli.acyl import main
from cli.report import InvariantReport, dump_json, parse_json_report
from utils.errors import MalformedInput

DATA = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'data')


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def write(self, name, text):
        path = os.path.join(self.tmp, name)
        with open(path, 'w') as f:
            f.write(text)
        return path


class TestLatticeCommands(CliTestCase):

    def test_burkhardt_profile(self):
        """Test the Burkhardt profile is printed"""
        code, out, _ = run("lattice", "profile", os.path.join(DATA, 'burkhardt.gram'))
        self.assertEqual(code, 0)
        self.assertIn("sig (1,15)", out)
        self.assertIn("disc 3^5", out)

    def test_empty_profile(self):
        """Test the 0x0 Gram gives a rank 0 report"""
        path = self.write('empty.gram', "0\n")
        code, out, _ = run("--json", "lattice", "profile", path)
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)['empty.gram']['rank'], 0)

    def test_isometric(self):
        """Test the complement transform is found and flagged outside the box"""
        target = self.write('diag.gram', "2\n8 0\n0 -16\n")
        first = os.path.join(DATA, 'p1942_complement.gram')
        code, out, _ = run("lattice", "isometric", first, target, "--bound", "4")
        self.assertEqual(code, 0)
        self.assertIn("isometric", out)
        self.assertIn("entries beyond 4", out)
        code, out, _ = run("--json", "lattice", "isometric", first, target, "--bound", "4")
        result = json.loads(out)
        self.assertTrue(result['isometric'])
        self.assertEqual(len(result['transform']), 2)
        self.assertFalse(result['within_bound'])
        self.assertEqual(result['bound'], 4)

    def test_represent_and_snf(self):
        """Test norm search and Smith form output"""
        path = self.write('a1.gram', "1\n-2\n")
        code, out, _ = run("--json", "lattice", "represent", path, "--value", "-2", "--bound", "2")
        self.assertEqual(code, 0)
        self.assertEqual(sorted(json.loads(out)['vectors']), [[-1], [1]])
        code, out, _ = run("--json", "lattice", "snf", os.path.join(DATA, 'p1942_complement.gram'))
        D = json.loads(out)['D']
        self.assertEqual((abs(D[0][0]), abs(D[1][1])), (8, 16))

    def test_complement(self):
        """Test the complement of a diagonal vector in U"""
        ambient = self.write('u.gram', "2\n0 1\n1 0\n")
        sub = self.write('sub.txt', "# one vector\n1 1\n")
        code, out, _ = run("--json", "lattice", "complement", "--ambient", ambient, "--sub", sub)
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)['gram'], [[-2]])

    def test_verify_burkhardt(self):
        """Test the Burkhardt lattice against its decomposition"""
        code, out, _ = run("lattice", "verify", os.path.join(DATA, 'burkhardt.gram'),
                           "--spec", "E6*(-3)+E8(-1)+U")
        self.assertEqual(code, 0)
        self.assertIn("isometric", out)
        self.assertIn("complement T: rank 6, sig (2,4), disc 3^5", out)

    def test_malformed_gram(self):
        """Test a bad Gram file exits with status 1"""
        path = self.write('bad.gram', "2\n1 2\n3\n")
        code, _, err = run("lattice", "profile", path)
        self.assertEqual(code, 1)
        self.assertTrue(err.startswith("Error: "))

    def test_missing_file(self):
        """Test a missing file exits with status 1"""
        code, _, err = run("lattice", "profile", os.path.join(self.tmp, 'nothing.gram'))
        self.assertEqual(code, 1)
        self.assertIn("Error:", err)


class TestBlockCommand(CliTestCase):

    def test_example_report(self):
        """Test the quartic-with-plane row"""
        code, out, _ = run("--json", "block", os.path.join(DATA, 'quartic_plane.json'))
        self.assertEqual(code, 0)
        report = parse_json_report(out)
        self.assertEqual(report.h2_Z, 3)
        self.assertEqual(report.N_gram, [[-2, 1], [1, 4]])
        self.assertEqual(report.rank_K, 0)
        self.assertEqual(report.b3_Z, 50)
        self.assertEqual(report.div_c2, [2, 4])
        self.assertEqual(report.e, 9)

    def test_text_report(self):
        """Test the human table has every column"""
        code, out, _ = run("block", os.path.join(DATA, 'p1942_split.json'))
        self.assertEqual(code, 0)
        self.assertIn("H²(Z):   Z^23", out)
        self.assertIn("H³(Z):   Z^0", out)
        self.assertIn("e:       33", out)

    def test_deterministic(self):
        """Test identical runs give identical bytes"""
        path = os.path.join(DATA, 'p1942_generic.json')
        self.assertEqual(run("--json", "block", path)[1], run("--json", "block", path)[1])

    def test_fano_table(self):
        """Test the rank-1 Fano table"""
        code, out, _ = run("--json", "block", "--table", "fano-rank1")
        self.assertEqual(code, 0)
        rows = json.loads(out)
        self.assertEqual(len(rows), 17)
        self.assertEqual((rows[-1]['name'], rows[-1]['b3_Z'], rows[-1]['div_c2']), ("V22", 24, 2))

    def test_nodal_cubic_table(self):
        """Test the nodal cubic table is consistent"""
        code, out, _ = run("--json", "block", "--table", "nodal-cubic")
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)['problems'], [])

    def test_inconsistent_c2(self):
        """Test a wrong (c2 + c1²)·A exits with status 2"""
        with open(os.path.join(DATA, 'quartic_plane.json')) as f:
            data = json.load(f)
        data['c2c1sq'] = [16, 30]
        del data['flops']
        path = self.write('bad_c2.json', json.dumps(data))
        code, _, err = run("block", path)
        self.assertEqual(code, 2)
        self.assertIn("24 + 4", err)

    def test_schema_error(self):
        """Test a missing key exits with status 1"""
        path = self.write('missing.json', json.dumps({"picard_gram": [[4]]}))
        code, _, err = run("block", path)
        self.assertEqual(code, 1)
        self.assertIn("anticanonical", err)

    def test_usage_errors(self):
        """Test missing arguments count as bad input"""
        code, _, _ = run("block")
        self.assertEqual(code, 1)
        with redirect_stderr(io.StringIO()), self.assertRaises(SystemExit) as caught:
            main(["toric"])
        self.assertEqual(caught.exception.code, 1)


class TestReport(unittest.TestCase):

    def report(self, **changes):
        values = dict(name="x", degree=4, h2_Z=3, N_gram=[[-2, 1], [1, 4]], rank_K=0, b3_Z=50,
                      div_c2=[2, 4], e=9, checks=["ok"])
        values.update(changes)
        return InvariantReport(**values)

    def test_round_trip(self):
        """Test JSON output parses back to the same report"""
        report = self.report(div_c2=[], div_c2_interval=[2, 4])
        self.assertEqual(parse_json_report(report.to_json()), report)

    def test_consistency_on_emission(self):
        """Test rank-nullity and evenness are re-checked"""
        from utils.errors import InconsistentReport
        with self.assertRaises(InconsistentReport):
            self.report(rank_K=1).to_json()
        with self.assertRaises(InconsistentReport):
            self.report(div_c2=[3]).to_text()

    def test_fraction_rendering(self):
        """Test fractions are written as p/q"""
        from fractions import Fraction
        self.assertEqual(json.loads(dump_json({'x': Fraction(3, 4), 'y': Fraction(2)})),
                         {'x': '3/4', 'y': '2'})

    def test_report_numbers_are_integers(self):
        """Test report JSON carries no p/q strings to read back"""
        data = json.loads(self.report().to_json())
        numbers = [data[k] for k in ("degree", "h2_Z", "rank_K", "b3_Z", "e")] + data['div_c2']
        numbers += [x for row in data['N_gram'] for x in row]
        self.assertTrue(all(isinstance(x, int) for x in numbers))
        import cli.report
        self.assertFalse(hasattr(cli.report, 'parse_fraction'))

    def test_bad_report(self):
        """Test malformed report documents"""
        with self.assertRaises(MalformedInput):
            parse_json_report("[1, 2]")
        with self.assertRaises(MalformedInput):
            parse_json_report('{"name": "x"}')
        with self.assertRaises(MalformedInput):
            parse_json_report("{")


class TestToricCommands(CliTestCase):

    def test_profile(self):
        """Test the polytope 1942 profile"""
        code, out, _ = run("toric", "profile", os.path.join(DATA, 'p1942.txt'))
        self.assertEqual(code, 0)
        self.assertIn("e = 9, ρ(Y) = 10, ρ(X) = 1, σ = 9", out)
        self.assertIn("-K³ = 22", out)

    def test_simplex_json(self):
        """Test the projective space profile as JSON"""
        code, out, _ = run("--json", "toric", "profile", os.path.join(DATA, 'simplex.txt'))
        self.assertEqual(code, 0)
        profile = json.loads(out)['profile']
        self.assertEqual((profile['e'], profile['degree']), (0, 64))

    def test_resolution_classes(self):
        """Test 512 projective resolutions in 84 classes"""
        code, out, _ = run("--json", "toric", "resolutions", os.path.join(DATA, 'p1942.txt'),
                           "--classes")
        self.assertEqual(code, 0)
        record = json.loads(out)
        self.assertEqual((record['total'], record['projective'], record['classes']), (512, 512, 84))
        self.assertNotIn('certificates', record)

    def test_fan_invariants(self):
        """Test one resolution's invariants"""
        code, out, _ = run("--json", "toric", "fan-invariants", os.path.join(DATA, 'p1942.txt'),
                           "--choice", "000000000")
        self.assertEqual(code, 0)
        invariants = json.loads(out)['invariants']
        self.assertEqual(invariants['antiK_cubed'], 22)
        self.assertTrue(invariants['rigid'])

    def test_bad_choice(self):
        """Test a wrong-length bitstring exits with status 1"""
        code, _, err = run("toric", "fan-invariants", os.path.join(DATA, 'p1942.txt'), "--choice", "01")
        self.assertEqual(code, 1)
        self.assertIn("9 parallelogram", err)

    def test_not_terminal(self):
        """Test a single non-terminal polytope exits with status 2"""
        code, _, err = run("toric", "resolutions", os.path.join(DATA, 'cube.txt'))
        self.assertEqual(code, 2)
        self.assertIn("Error:", err)

    def test_batch(self):
        """Test failures in a batch are recorded in input order"""
        texts = []
        for name in ('simplex.txt', 'cube.txt'):
            with open(os.path.join(DATA, name)) as f:
                texts.append(f.read())
        texts.append("3 6\n2 -2 0 0 0 0\n0 0 2 -2 0 0\n0 0 0 0 2 -2\n")
        path = self.write('batch.txt', "".join(texts))
        code, out, _ = run("--json", "toric", "resolutions", path, "--certificates")
        self.assertEqual(code, 0)
        records = json.loads(out)
        self.assertEqual([r['name'] for r in records], ['batch:1', 'batch:2', 'batch:3'])
        self.assertEqual(records[0]['projective'], 1)
        self.assertEqual(list(records[0]['certificates']), [""])
        self.assertEqual(records[1]['kind'], 'NotTerminal')
        self.assertEqual(records[2]['kind'], 'NotReflexive')


if __name__ == '__main__':
    unittest.main()
