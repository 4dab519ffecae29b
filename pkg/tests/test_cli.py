import contextlib
import json
import os
import tempfile
import unittest
from io import StringIO
from unittest import mock
from drham.__main__ import build_config, get_help, main, parse_args
from drham.checks import clear_caches
from drham.constants import JOBS_ENV_VAR
from drham.fault import ConfigurationError


expected_usage = """drham [-h] [--debug_logging] [--genus=<genus>] [--seed=<seed>] [--json=<path>] [--jobs=<jobs>]
  [--g-file=<path>] [--d-max=<d_max>] [--depth=<depth>] [--degree-cap=<degree>] [--timings]
  <command> [<target>]

Checks the bihamiltonian structure of the double ramification hierarchy for the builtin
theories, exactly or to a stated eps-order. For example:
  drham verify kdv
  drham --genus=2 verify cp1 --json=cp1.json

Commands:
  verify | properties

For help with a specific command:  drham help <command>
"""


def run_main(*args: str):
    actual_output = StringIO()
    with contextlib.redirect_stdout(actual_output):
        code = main(["drham", *args])
    return code, actual_output.getvalue()


class TestCLI(unittest.TestCase):
    def tearDown(self):
        clear_caches()

    def test_usage(self):
        self.assertEqual((0, expected_usage), run_main())
        self.assertEqual((0, expected_usage), run_main("help"))
        self.assertEqual((0, expected_usage), run_main("--help"))
        self.assertEqual((0, expected_usage), run_main("help", "test"))
        self.assertEqual((0, "no command given\n" + expected_usage), run_main("--timings"))

    def test_commands_help(self):
        code, output = run_main("help", "verify")
        self.assertEqual(0, code)
        self.assertTrue(output.startswith("drham [-h] [--debug_logging] verify <target> [--genus=<int>]"))
        self.assertIn("targets: kdv, rspin3, rspin4, rspin5, cp1, genus0, central, lemma, all", output)
        self.assertIn("--mutate adjoint_sign", get_help("properties"))

    def test_unknown_command(self):
        self.assertEqual(
            (3, "drham encountered an error: \"test\" is not a recognized command\n"), run_main("test")
        )

    def test_bad_options(self):
        self.assertEqual(
            (3, "drham encountered an error: --genus expects an integer, got 'two'\n"),
            run_main("--genus=two", "verify", "kdv")
        )
        self.assertEqual(
            (3, "drham encountered an error: unknown option --bogus\n"), run_main("--bogus=1", "verify", "kdv")
        )
        self.assertEqual((3, "drham encountered an error: --seed needs a value\n"), run_main("verify", "--seed"))
        code, output = run_main("--genus=0", "verify", "kdv")
        self.assertEqual(3, code)
        self.assertIn("--genus must be at least 1", output)

    def test_verify_needs_target(self):
        code, output = run_main("verify")
        self.assertEqual(3, code)
        self.assertIn("verify needs a target", output)

    def test_verify_central(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "central.json")
            code, output = run_main("verify", "central", "--json", path)
            self.assertEqual(0, code)
            self.assertTrue(output.endswith("central: pass\n"))
            with open(path) as f:
                written = json.load(f)
        self.assertEqual("pass", written["verdict"])
        self.assertEqual("drham-report/1", written["schema"])
        self.assertNotIn("jobs", written["config"])

    def test_unwritable_report_path(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "missing", "central.json")
            code, output = run_main("verify", "central", "--json=" + path)
        self.assertEqual(3, code)
        self.assertIn("central: pass\n", output)
        self.assertIn(f"drham encountered an error: cannot write the report to {path}", output)

    def test_properties_failure_exit_code(self):
        code, output = run_main("properties", "--suite=omega", "--cases=20", "--mutate=adjoint_sign")
        self.assertEqual(2, code)
        self.assertTrue(output.endswith("omega: fail\n"))


class TestArgumentParsing(unittest.TestCase):
    def test_forms(self):
        options, positional = parse_args(["--d-max", "2", "verify", "--genus=2", "kdv", "--timings"])
        self.assertEqual({'d_max': '2', 'genus': '2', 'timings': True}, dict(options))
        self.assertEqual(["verify", "kdv"], positional)

    def test_config(self):
        cfg = build_config({'d_max': '2', 'timings': True})
        self.assertEqual(2, cfg.d_max)
        self.assertTrue(cfg.timings)
        self.assertIsNone(cfg.json)

    def test_jobs_from_environment(self):
        with mock.patch.dict(os.environ, {JOBS_ENV_VAR: "4"}):
            self.assertEqual(4, build_config({}).jobs)
            self.assertEqual(2, build_config({'jobs': '2'}).jobs)
        with mock.patch.dict(os.environ, {JOBS_ENV_VAR: "many"}):
            with self.assertRaises(ConfigurationError) as ctx:
                build_config({})
            self.assertIn(JOBS_ENV_VAR, str(ctx.exception))
