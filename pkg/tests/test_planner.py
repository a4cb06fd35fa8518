"""Tests for the SINR link budget and exhaustive RU-pair planning."""

import itertools
import json
import math
import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np
import numpy.testing as npt

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "scripts"))

from planning import (  # noqa: E402
    LinkGainMatrix,
    load_gain_matrix,
    pair_score,
    plan_exhaustive,
    plan_to_csv,
    rssi,
    save_path_loss_csv,
    sinr,
    sweep_attenuation,
    synthetic_gain_matrix,
    thermal_noise_dbm,
)
from planning.io import read_path_loss_csv  # noqa: E402
from utils.errors import PlanningError  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "data" / "planning"


def brute_score(m: LinkGainMatrix, p: int, q: int) -> float:
    noise_mw = 10 ** (m.thermal_noise_dbm / 10)
    total = 0.0
    for j in range(m.ue_count):
        best = -math.inf
        for s, i in ((p, q), (q, p)):
            sig = 10 ** (rssi(m, s, j) / 10)
            intf = 10 ** (rssi(m, i, j) / 10)
            best = max(best, 10 * math.log10(sig / (noise_mw * 10 ** (m.f_ue_db[j] / 10) + intf)))
        total += best
    return total / m.ue_count


class TestLinkBudget(unittest.TestCase):

    def test_rssi_example(self):
        m = LinkGainMatrix.from_path_loss([[80.0]])
        self.assertAlmostEqual(rssi(m, 0, 0), -49.9)

    def test_thermal_noise(self):
        self.assertAlmostEqual(thermal_noise_dbm(100e6), -94.0)
        with self.assertRaises(PlanningError):
            thermal_noise_dbm(0.0)

    def test_sinr_without_interference_is_snr(self):
        m = LinkGainMatrix.from_path_loss([[80.0, 90.0]])
        expected = -49.9 - (-94.0 + 5.0)
        self.assertAlmostEqual(sinr(m, 0, 0, [0]), expected)

    def test_sinr_equal_interferer(self):
        m = LinkGainMatrix.from_path_loss([[60.0], [60.0]], thermal_noise=-300.0)
        self.assertAlmostEqual(sinr(m, 0, 0, [0, 1]), 0.0, places=9)

    def test_serving_must_be_active(self):
        m = LinkGainMatrix.from_path_loss([[60.0], [70.0]])
        with self.assertRaises(PlanningError):
            sinr(m, 0, 0, [1])

    def test_attenuation_lowers_sinr(self):
        m = LinkGainMatrix.from_path_loss(np.random.default_rng(0).uniform(60, 120, (3, 8)))
        previous = None
        for a in (0.0, 10.0, 20.0, 30.0):
            values = np.array([sinr(m.with_attenuation(a), s, j, (0, 1))
                               for s in (0, 1) for j in range(8)])
            if previous is not None:
                self.assertTrue(np.all(values < previous))
            previous = values

    def test_matrix_validation(self):
        with self.assertRaises(PlanningError):
            LinkGainMatrix.from_path_loss([[80.0, np.nan]])
        with self.assertRaises(PlanningError):
            LinkGainMatrix.from_path_loss([[80.0, 90.0]], g_ue_dbi=[1.0, 2.0, 3.0])
        with self.assertRaises(PlanningError):
            rssi(LinkGainMatrix.from_path_loss([[80.0]]), 1, 0)


class TestPlanner(unittest.TestCase):

    def test_pair_count_24_by_52(self):
        m = synthetic_gain_matrix(24, 52, seed=1)
        result = plan_exhaustive(m)
        self.assertEqual(result.pairs_evaluated, 276)
        self.assertEqual(result.best_score, max(result.scores.values()))

    def test_matches_brute_force(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            m = LinkGainMatrix.from_path_loss(rng.uniform(60, 130, (6, 10)))
            result = plan_exhaustive(m)
            scores = {pq: brute_score(m, *pq) for pq in itertools.combinations(range(6), 2)}
            best = max(scores, key=scores.get)
            self.assertEqual(result.best_pair, best)
            for pq, value in scores.items():
                self.assertAlmostEqual(result.scores[pq], value, places=9)

    def test_workers_give_identical_scores(self):
        m = synthetic_gain_matrix(8, 12, seed=3)
        self.assertEqual(plan_exhaustive(m).scores, plan_exhaustive(m, max_workers=4).scores)

    def test_score_matrix_symmetric(self):
        result = plan_exhaustive(synthetic_gain_matrix(5, 7, seed=4))
        table = result.score_matrix()
        self.assertTrue(np.all(np.isnan(np.diag(table))))
        npt.assert_array_equal(table, table.T)
        self.assertEqual(result.score(3, 1), pair_score(synthetic_gain_matrix(5, 7, seed=4), 1, 3))

    def test_uniform_path_loss_shift_keeps_best_pair_without_noise(self):
        loss = np.random.default_rng(11).uniform(60, 130, (7, 15))
        m = LinkGainMatrix.from_path_loss(loss, thermal_noise=-300.0)
        base = plan_exhaustive(m)
        for delta in (-20.0, 15.0, 30.0):
            shifted = plan_exhaustive(m.with_path_loss_offset(delta))
            self.assertEqual(shifted.best_pair, base.best_pair)
            for pq, value in base.scores.items():
                self.assertAlmostEqual(shifted.scores[pq], value, places=6)

    def test_needs_two_rus(self):
        with self.assertRaises(PlanningError):
            plan_exhaustive(LinkGainMatrix.from_path_loss([[80.0, 90.0]]))
        with self.assertRaises(PlanningError):
            plan_exhaustive(synthetic_gain_matrix(3, 3), pair_size=3)

    def test_sweep_scores_fall(self):
        rows = sweep_attenuation(synthetic_gain_matrix(6, 20, seed=5), (0, 20, 40))
        self.assertEqual([r.attenuation_db for r in rows], [0.0, 20.0, 40.0])
        self.assertGreater(rows[0].max_score, rows[1].max_score)
        self.assertGreater(rows[1].max_score, rows[2].max_score)

    def test_synthetic_is_seeded(self):
        a = synthetic_gain_matrix(4, 6, seed=9)
        b = synthetic_gain_matrix(4, 6, seed=9)
        npt.assert_array_equal(a.path_loss_db, b.path_loss_db)


class TestPlanningFiles(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_fixture_with_sidecar(self):
        m = load_gain_matrix(DATA / "path_loss_4x6.csv", DATA / "sidecar.json")
        self.assertEqual((m.ru_count, m.ue_count), (4, 6))
        self.assertAlmostEqual(m.thermal_noise_dbm, -94.0)
        self.assertAlmostEqual(rssi(m, 0, 0), 24.0 + 5.0 - 72.5 + 1.1)

    def test_sidecar_thermal_noise_override(self):
        sidecar = self.dir / "s.json"
        sidecar.write_text(json.dumps({"thermal_noise_dbm": -100.0, "ru": {"a_db": [0, 3, 0, 0]}}))
        m = load_gain_matrix(DATA / "path_loss_4x6.csv", sidecar)
        self.assertEqual(m.thermal_noise_dbm, -100.0)
        self.assertEqual(m.a_ru_db[1], 3.0)

    def test_bad_rows(self):
        ragged = self.dir / "ragged.csv"
        ragged.write_text("80,90\n85\n")
        with self.assertRaises(PlanningError) as ctx:
            read_path_loss_csv(ragged)
        self.assertEqual(ctx.exception.details["row"], 2)
        text = self.dir / "text.csv"
        text.write_text("80,90\n85,abc\n")
        with self.assertRaises(PlanningError):
            read_path_loss_csv(text)

    def test_bad_sidecar(self):
        sidecar = self.dir / "bad.json"
        sidecar.write_text("{")
        with self.assertRaises(PlanningError):
            load_gain_matrix(DATA / "path_loss_4x6.csv", sidecar)

    def test_missing_files(self):
        with self.assertRaises(PlanningError):
            read_path_loss_csv(self.dir / "missing.csv")
        with self.assertRaises(PlanningError):
            load_gain_matrix(DATA / "path_loss_4x6.csv", self.dir / "missing.json")

    def test_save_and_reload(self):
        m = synthetic_gain_matrix(3, 4, seed=2)
        path = save_path_loss_csv(m, self.dir / "m.csv")
        npt.assert_array_equal(read_path_loss_csv(path), m.path_loss_db)

    def test_plan_csv(self):
        result = plan_exhaustive(synthetic_gain_matrix(4, 5, seed=6))
        lines = plan_to_csv(result, self.dir / "plan.csv").read_text().splitlines()
        self.assertEqual(lines[0], "ru_p,ru_q,score_db")
        self.assertEqual(len(lines), 1 + 6)


if __name__ == '__main__':
    unittest.main()
