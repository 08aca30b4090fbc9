import math

import numpy as np
import pytest

from tactisim.errors import StabilityError
from tactisim.queueing import (BatchPlan, QueueModel, delay_violation_probability,
                               plan_batch, required_dmax)


class TestDelayViolation:
    def test_closed_form_value(self):
        model = QueueModel(500, 1000)
        p = delay_violation_probability(model, 0.005)
        assert abs(p - math.exp(-2.5)) < 1e-15
        assert abs(p - 0.0821) < 1e-4

    def test_zero_bound(self):
        assert delay_violation_probability(QueueModel(500, 1000), 0.0) == 1.0

    def test_unstable_rejected(self):
        with pytest.raises(StabilityError):
            delay_violation_probability(QueueModel(1000, 1000), 0.001)
        with pytest.raises(StabilityError):
            delay_violation_probability(QueueModel(1500, 1000), 0.001)

    def test_monotone_in_dmax(self):
        model = QueueModel(700, 1000)
        values = [delay_violation_probability(model, d)
                  for d in np.linspace(0, 0.05, 20)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_monotone_in_rho(self):
        d = 0.004
        values = [delay_violation_probability(QueueModel(rho * 1000, 1000), d)
                  for rho in (0.1, 0.3, 0.5, 0.7, 0.9)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_log_linear_in_dmax(self):
        # exponential shape: three points on log scale are collinear
        model = QueueModel(400, 1000)
        d = np.array([0.002, 0.007, 0.012])
        logs = np.log([delay_violation_probability(model, x) for x in d])
        slope1 = (logs[1] - logs[0]) / (d[1] - d[0])
        slope2 = (logs[2] - logs[1]) / (d[2] - d[1])
        assert abs(slope1 - slope2) < 1e-9


class TestRequiredDmax:
    def test_round_trip(self):
        model = QueueModel(600, 1000)
        for target in (0.5, 0.01, 1e-5):
            d = required_dmax(model, target)
            assert abs(delay_violation_probability(model, d) - target) < 1e-12

    def test_target_one_gives_zero(self):
        assert required_dmax(QueueModel(500, 1000), 1.0) == 0.0

    def test_known_value(self):
        # mu=1000, rho=0.5, target 1e-5 -> ln(1e5)/500
        d = required_dmax(QueueModel(500, 1000), 1e-5)
        assert abs(d - math.log(1e5) / 500) < 1e-12
        assert abs(d - 0.02303) < 1e-4

    def test_bad_targets(self):
        model = QueueModel(500, 1000)
        for target in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                required_dmax(model, target)


class TestPlanBatch:
    def test_basic_floor(self):
        plan = plan_batch(0.010, 0.001, 32, 500)
        assert plan.batch_size == 10
        assert plan.feasible  # 320 <= 500

    def test_infeasible_reports_fallback(self):
        plan = plan_batch(0.020, 0.001, 32, 500)
        assert plan.batch_size == 20
        assert not plan.feasible  # 640 > 500
        assert plan.rb_limited_size == 15

    def test_degenerate_window(self):
        plan = plan_batch(0.001, 0.001, 32, 500)
        assert plan.batch_size == 1

    def test_window_below_period(self):
        with pytest.raises(ValueError):
            plan_batch(0.0005, 0.001, 32, 500)

    def test_monotone_in_window(self):
        sizes = [plan_batch(w, 0.001, 8, 92).batch_size
                 for w in (0.001, 0.005, 0.010, 0.015, 0.020)]
        assert all(b >= a for a, b in zip(sizes, sizes[1:]))

    def test_feasibility_monotone_in_packet_size(self):
        feas = [plan_batch(0.010, 0.001, sp, 92).feasible for sp in (4, 8, 16, 32)]
        assert feas == sorted(feas, reverse=True)

    def test_float_floor_robustness(self):
        # 10 ms / 1 ms must be exactly 10 batches despite binary rounding
        assert plan_batch(10e-3, 1e-3, 8, 92).batch_size == 10
        assert plan_batch(0.02, 0.001, 8, 500).batch_size == 20
