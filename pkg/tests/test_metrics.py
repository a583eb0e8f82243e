"""Metric definitions and the evaluation harness."""

import json

import numpy as np
import pytest

import coilscope as cs
from coilscope.metrics import (evaluate, mse_metric, paper_error,
                               relative_error)
from coilscope.model import Prediction, init
from coilscope.training import fit_norm_stats


class TestMseMetric:
    def test_zero_at_equality(self):
        v = [np.array([1.0, 2.0])]
        assert mse_metric(v, v) == 0.0

    def test_single_sample_value(self):
        assert mse_metric([np.array([1.0, 1.0])], [np.array([0.0, 0.0])]) == 2.0

    def test_quadratic_scaling(self):
        rng = np.random.default_rng(0)
        preds = [rng.standard_normal(2) for _ in range(5)]
        labels = [rng.standard_normal(2) for _ in range(5)]
        base = mse_metric(preds, labels)
        doubled = [l + 2 * (p - l) for p, l in zip(preds, labels)]
        assert mse_metric(doubled, labels) == pytest.approx(4 * base)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            mse_metric([np.zeros(2)], [])


class TestPaperError:
    def test_zero_at_equality(self):
        v = [np.array([1.0, 2.0])]
        assert paper_error(v, v) == 0.0

    def test_single_sample_half_sum(self):
        assert paper_error([np.array([1.0, 1.0])], [np.array([0.0, 0.0])]) == 1.0

    def test_identity_with_mse(self):
        rng = np.random.default_rng(1)
        preds = [rng.standard_normal(2) for _ in range(9)]
        labels = [rng.standard_normal(2) for _ in range(9)]
        assert paper_error(preds, labels) == pytest.approx(
            mse_metric(preds, labels) / 2.0, rel=1e-14)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(2)
        pairs = [(rng.standard_normal(2), rng.standard_normal(2))
                 for _ in range(8)]
        base_p = paper_error(*zip(*pairs))
        base_m = mse_metric(*zip(*pairs))
        rng.shuffle(pairs)
        assert paper_error(*zip(*pairs)) == pytest.approx(base_p, rel=1e-14)
        assert mse_metric(*zip(*pairs)) == pytest.approx(base_m, rel=1e-14)


class TestRelativeError:
    def _sample(self, l_h=2e-6, q=100.0):
        samples, _, _ = cs.generate_dataset(num_coils=1, freqs_hz=[1e6], seed=0)
        s = samples[0]
        s.l_label_h, s.q_label = l_h, q
        return s

    def test_exact_prediction(self):
        s = self._sample()
        pred = Prediction(inductance_h=s.l_label_h, quality=s.q_label)
        assert relative_error(pred, s) == (0.0, 0.0)

    def test_double_l(self):
        s = self._sample()
        pred = Prediction(inductance_h=2 * s.l_label_h, quality=s.q_label)
        assert relative_error(pred, s) == (1.0, 0.0)


class TestEvaluate:
    @pytest.fixture(scope="class")
    def small_set(self):
        samples, _, _ = cs.generate_dataset(num_coils=3,
                                            freqs_hz=[1e6, 6.78e6], seed=2)
        return samples

    def test_oracle_against_itself_is_zero(self, small_set):
        # a net whose forward is irrelevant: check the metric identities via
        # paper_error/mse on identical label vectors instead
        stats = fit_norm_stats(small_set)
        labels = [stats.normalize_labels(s.l_label_h, s.q_label)
                  for s in small_set]
        assert mse_metric(labels, labels) == 0.0
        assert paper_error(labels, labels) == 0.0

    def test_fresh_net_report_well_formed(self, small_set):
        net = init(0)
        net.norm = fit_norm_stats(small_set)
        report = evaluate(net, small_set)
        assert report.n_samples == len(small_set)
        for field in ("mse", "paper_error", "mean_rel_err_l", "mean_rel_err_q",
                      "median_rel_err", "baseline_mse"):
            v = getattr(report, field)
            assert np.isfinite(v) and v >= 0.0
        assert report.paper_error == pytest.approx(report.mse / 2.0, rel=1e-12)

    def test_json_and_table_render(self, small_set):
        net = init(0)
        net.norm = fit_norm_stats(small_set)
        report = evaluate(net, small_set)
        obj = json.loads(report.to_json())
        assert obj["n_samples"] == len(small_set)
        assert "mse" in report.to_table()

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError):
            evaluate(init(0), [])
