import json
import os
import tempfile
import unittest
from drham.fault import ModelFileError
from drham.models import cp1, kdv, rspin3
from drham.serialization.model import dumps_model, load_model, loads_model, model_to_dict, save_model


class TestModelFiles(unittest.TestCase):
    def test_round_trip(self):
        for m in (kdv(), rspin3(4), cp1(2)):
            self.assertEqual(loads_model(dumps_model(m)), m, m.name)

    def test_file_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "kdv.json")
            save_model(path, kdv(2))
            loaded = load_model(path)
        self.assertEqual(loaded.g, kdv(2).g)
        self.assertEqual(loaded.ring.max_eps, 2)

    def test_rationals_are_strings(self):
        obj = model_to_dict(kdv())
        self.assertEqual(obj["schema"], "drham-model/1")
        self.assertEqual({t["coeff"] for t in obj["g"]}, {"1/6", "1/48"})
        self.assertTrue(obj["exact"])


class TestModelFileErrors(unittest.TestCase):
    def _broken(self, edit) -> ModelFileError:
        obj = model_to_dict(kdv())
        edit(obj)
        with self.assertRaises(ModelFileError) as ctx:
            loads_model(json.dumps(obj))
        return ctx.exception

    def test_schema(self):
        err = self._broken(lambda obj: obj.update(schema="drham-model/0"))
        self.assertEqual(err.field, "schema")

    def test_missing_field(self):
        err = self._broken(lambda obj: obj["homogeneity"].pop("eta"))
        self.assertEqual(err.field, "homogeneity.eta")
        self.assertEqual(err.reason, "missing required field")

    def test_bad_rational(self):
        err = self._broken(lambda obj: obj["g"][0].update(coeff=0.5))
        self.assertEqual(err.field, "g[0].coeff")
        err = self._broken(lambda obj: obj["g"][0].update(coeff="1/0"))
        self.assertEqual(err.field, "g[0].coeff")

    def test_unknown_field_index(self):
        err = self._broken(lambda obj: obj["g"][0]["vars"][0].__setitem__(0, 2))
        self.assertEqual(err.field, "g[0].vars[0][0]")

    def test_unknown_generator(self):
        err = self._broken(lambda obj: obj["g"][0].update(gens={"q": 1}))
        self.assertEqual(err.field, "g[0].gens.q")

    def test_inconsistent_homogeneity(self):
        err = self._broken(lambda obj: obj["homogeneity"].update(eta=[["0"]]))
        self.assertEqual(err.field, "homogeneity")

    def test_not_json(self):
        with self.assertRaises(ModelFileError) as ctx:
            loads_model("{")
        self.assertIn("not valid JSON", str(ctx.exception))

    def test_unreadable_path(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ModelFileError) as ctx:
                load_model(os.path.join(tmp, "missing.json"))
        self.assertIn("cannot read", ctx.exception.reason)
