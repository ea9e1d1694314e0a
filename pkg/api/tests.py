import io
import json
import os
import tempfile

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from analytic.curve import CURVE_COLUMNS, entropy_s, rate_r1

from .exporters import read_curve_csv

HEMISPHERE_ENTROPY = 0.8112781244591328


class CommandTestMixin:
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def rsp(self, *args):
        out = io.StringIO()
        call_command("rsp", *[str(a) for a in args], stdout=out, stderr=io.StringIO())
        return out.getvalue()

    def rsp_json(self, *args):
        return json.loads(self.rsp(*args))

    def assertExitCode(self, code, *args):
        with self.assertRaises(CommandError) as ctx:
            self.rsp(*args)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception


class CurveCommandTests(CommandTestMixin, SimpleTestCase):
    def test_csv_rows_and_teleportation_end(self):
        out = self.path("curve.csv")
        self.rsp("curve", "--points", 50, "--out", out)
        with open(out, encoding="utf-8") as fh:
            text = fh.read()
        self.assertIn("# command=curve", text)
        header = [ln for ln in text.splitlines() if not ln.startswith("#")][0]
        self.assertEqual(header, ",".join(CURVE_COLUMNS))

        rows = read_curve_csv(text)
        self.assertEqual(len(rows), 50)
        self.assertAlmostEqual(rows[0]["b_bits"], 2.0, delta=1e-3)
        self.assertAlmostEqual(rows[0]["e_ebits"], 1.0, delta=1e-3)

    def test_json_matches_csv(self):
        csv_out, json_out = self.path("c.csv"), self.path("c.json")
        self.rsp("curve", "--points", 30, "--out", csv_out)
        self.rsp("curve", "--points", 30, "--format", "json", "--out", json_out)
        with open(csv_out, encoding="utf-8") as fh:
            rows = read_curve_csv(fh.read())
        with open(json_out, encoding="utf-8") as fh:
            payload = json.load(fh)

        self.assertTrue(payload["diagnostics"]["ok"])
        self.assertEqual(payload["config"]["points"], 30)
        for row, point in zip(rows, payload["points"]):
            for col in CURVE_COLUMNS:
                self.assertAlmostEqual(row[col], point[col], delta=1e-12)

    def test_svg_has_two_panels(self):
        out = self.path("curve.svg")
        self.rsp("curve", "--points", 40, "--format", "svg", "--out", out)
        with open(out, encoding="utf-8") as fh:
            svg = fh.read()
        self.assertTrue(svg.startswith("<svg"))
        self.assertEqual(svg.count("<polyline"), 2)
        self.assertIn("teleporte", svg)
        self.assertIn("<!-- config:", svg)

    def test_config_file_and_flag_precedence(self):
        cfg = self.path("rsp.env")
        with open(cfg, "w", encoding="utf-8") as fh:
            fh.write("POINTS=7\nLAMBDA_MAX=10\nFORMAT=json\n")
        payload = self.rsp_json("curve", "--config", cfg, "--points", 9)
        self.assertEqual(len(payload["points"]), 9)
        self.assertAlmostEqual(payload["points"][-1]["lambda"], 10.0, places=12)

    @override_settings(RSP={"LAMBDA_MIN": 0.01, "LAMBDA_MAX": 5.0, "CURVE_POINTS": 4, "WORKERS": 1})
    def test_settings_defaults(self):
        payload = self.rsp_json("curve", "--format", "json")
        self.assertEqual(len(payload["points"]), 4)
        self.assertAlmostEqual(payload["points"][0]["lambda"], 0.01)

    def test_errors(self):
        self.assertExitCode(1, "curve", "--lambda-min", 5, "--lambda-max", 1)
        self.assertExitCode(1, "curve", "--format", "png")
        self.assertExitCode(1, "curve", "--points", "many")
        self.assertExitCode(3, "curve", "--out", self.path("missing/dir/curve.csv"))
        self.assertExitCode(3, "curve", "--config", self.path("nope.env"))


class InvertAndResourcesTests(CommandTestMixin, SimpleTestCase):
    def test_invert(self):
        payload = self.rsp_json("invert", "--entropy", 0.9)
        self.assertAlmostEqual(entropy_s(payload["lambda"]), 0.9, places=9)
        self.assertAlmostEqual(payload["rate_bits"], rate_r1(payload["lambda"]), places=12)
        self.assertFalse(payload["saturated"])

    def test_invert_rejects_out_of_range(self):
        self.assertExitCode(1, "invert", "--entropy", 1.5)
        self.assertExitCode(1, "invert", "--entropy", 0)

    def test_resources_defaults_to_hemisphere_protocol(self):
        payload = self.rsp_json("resources")
        self.assertAlmostEqual(payload["b_bits"], 1.0 + 2.0 * HEMISPHERE_ENTROPY, places=9)
        self.assertAlmostEqual(payload["e_ebits"], HEMISPHERE_ENTROPY, places=9)
        payload = self.rsp_json("resources", "--rate", 0, "--entropy", 1)
        self.assertEqual((payload["b_bits"], payload["e_ebits"]), (2.0, 1.0))


class LoExampleCommandTests(CommandTestMixin, SimpleTestCase):
    def test_report(self):
        payload = self.rsp_json("lo-example", "--samples", 20000, "--seed", 3)
        self.assertAlmostEqual(payload["exact"], HEMISPHERE_ENTROPY, places=9)
        self.assertLess(payload["gap"], 0.01)
        self.assertEqual(payload["samples"], 20000)
        self.assertEqual(payload["config"]["seed"], 3)

    def test_too_few_samples(self):
        self.assertExitCode(1, "lo-example", "--samples", 10)


class OptimizeCommandTests(CommandTestMixin, SimpleTestCase):
    def test_single_multiplier(self):
        out = self.path("opt.json")
        self.rsp("optimize", "--mu", 1.0, "--caps", 24, "--tol", 1e-10, "--max-iters", 50, "--out", out)
        with open(out, encoding="utf-8") as fh:
            payload = json.load(fh)
        report = payload["report"]
        self.assertTrue(report["converged"])
        self.assertLess(report["mutual_info_bits"], 1e-9)
        self.assertEqual(payload["cap_count"], 24)
        self.assertIn("initial_residual", payload)

    def test_non_convergence_still_writes_report(self):
        out = self.path("opt.json")
        self.assertExitCode(
            2, "optimize", "--mu", 4.0, "--caps", 24, "--init", "random(3)",
            "--tol", 1e-14, "--max-iters", 2, "--out", out,
        )
        with open(out, encoding="utf-8") as fh:
            payload = json.load(fh)
        self.assertFalse(payload["report"]["converged"])
        self.assertEqual(payload["report"]["iterations"], 2)

    def test_sweep_writes_frontier(self):
        out = self.path("sweep.json")
        try:
            self.rsp(
                "optimize", "--mu-grid", "0.5,4.0", "--caps", 24, "--restarts", 1,
                "--tol", 1e-6, "--max-iters", 100, "--out", out,
            )
        except CommandError as exc:
            self.assertEqual(exc.returncode, 2)
        with open(out, encoding="utf-8") as fh:
            payload = json.load(fh)
        self.assertEqual([r["multiplier"] for r in payload["frontier"]], [0.5, 4.0])
        self.assertEqual(payload["config"]["mu_grid"], [0.5, 4.0])

    def test_needs_exactly_one_multiplier_source(self):
        self.assertExitCode(1, "optimize", "--caps", 24)
        self.assertExitCode(1, "optimize", "--mu", 1.0, "--mu-grid", "1,2", "--caps", 24)
        self.assertExitCode(1, "optimize", "--mu", 2.0, "--caps", 24, "--init", "analytic")


class SimulateCommandTests(CommandTestMixin, SimpleTestCase):
    args = (
        "simulate", "--lambda", 2.0, "--n", 4, "--caps", 8, "--samples", 2000,
        "--rate-margin", 0.8, "--delta", 0.2, "--seed", 11,
    )

    def test_same_seed_same_bytes(self):
        a, b = self.path("a.json"), self.path("b.json")
        self.rsp(*self.args, "--out", a)
        self.rsp(*self.args, "--out", b)
        with open(a, "rb") as fa, open(b, "rb") as fb:
            first, second = fa.read(), fb.read()
        self.assertEqual(first, second)

        payload = json.loads(first)
        self.assertTrue(payload["valid"])
        self.assertEqual(payload["config"]["n"], 4)
        for key in ("pooled_rotated_entropy", "encoder_failure_rate", "confidence_halfwidth"):
            self.assertIn(key, payload)

    def test_resource_guard_leaves_no_output(self):
        out = self.path("big.json")
        self.assertExitCode(1, "simulate", "--n", 30, "--rate-margin", 1.0, "--out", out)
        self.assertFalse(os.path.exists(out))


class RestTests(SimpleTestCase):
    def test_curve(self):
        resp = self.client.get("/api/curve/", {"points": 5, "lambda_min": 0.1, "lambda_max": 10})
        self.assertEqual(resp.status_code, 200)
        body = resp.json()
        self.assertEqual(len(body["points"]), 5)
        self.assertEqual(set(body["points"][0]), set(CURVE_COLUMNS))

    def test_invert_and_resources(self):
        body = self.client.get("/api/invert/", {"entropy": 0.5}).json()
        self.assertAlmostEqual(entropy_s(body["lambda"]), 0.5, places=9)
        body = self.client.get("/api/resources/", {"rate": 0.5, "entropy": 0.25}).json()
        self.assertAlmostEqual(body["b_bits"], 1.0)

    def test_bad_request(self):
        resp = self.client.get("/api/invert/", {"entropy": 2})
        self.assertEqual(resp.status_code, 400)
        self.assertIn("detail", resp.json())
