import json
import os
import tempfile
import unittest
from drham.constants import SCOPE_EXACT, VERDICT_ERROR, VERDICT_FAIL, VERDICT_PASS
from drham.fault import ConfigurationError
from drham.serialization.report import CheckResult, Report, report_from_dict, save_report

OK = CheckResult("homogeneity", SCOPE_EXACT, VERDICT_PASS)
BAD = CheckResult("K2 display", SCOPE_EXACT, VERDICT_FAIL, residual="u1_1", detail="K2 differs")
BROKEN = CheckResult("recursion d <= 3", SCOPE_EXACT, VERDICT_ERROR, detail="RuntimeError: boom")


class TestReport(unittest.TestCase):
    def test_verdict_precedence(self):
        self.assertEqual(Report("kdv", {}, (OK,)).verdict, VERDICT_PASS)
        self.assertEqual(Report("kdv", {}, (OK, BAD)).verdict, VERDICT_FAIL)
        self.assertEqual(Report("kdv", {}, (BAD, BROKEN, OK)).verdict, VERDICT_ERROR)
        self.assertTrue(Report("kdv", {}, ()).passed)

    def test_as_dict(self):
        obj = Report("kdv", {"genus": 3}, (OK, BAD)).as_dict()
        self.assertEqual(obj["schema"], "drham-report/1")
        self.assertEqual(obj["verdict"], VERDICT_FAIL)
        self.assertEqual(obj["checks"][1]["residual"], "u1_1")
        self.assertIsNone(obj["checks"][0]["wall_time"])

    def test_as_text(self):
        text = Report("kdv", {}, (OK._replace(wall_time=1.234), BAD)).as_text()
        self.assertEqual(text.splitlines(), [
            "PASS  homogeneity  [exact]  1.23s",
            "FAIL  K2 display   [exact]",
            "      K2 differs",
            "      u1_1",
            "kdv: fail",
        ])

    def test_saved_report_reloads(self):
        report = Report("kdv", {"genus": 3}, (OK._replace(wall_time=0.5), BAD, BROKEN))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "kdv.json")
            save_report(path, report)
            with open(path) as f:
                reloaded = report_from_dict(json.load(f))
        self.assertEqual(reloaded, report)

    def test_unwritable_path(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ConfigurationError) as ctx:
                save_report(os.path.join(tmp, "missing", "kdv.json"), Report("kdv", {}, (OK,)))
        self.assertIn("cannot write the report", str(ctx.exception))
