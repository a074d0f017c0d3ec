"""
Tests for the coupled profile-cost model.
"""

import numpy as np
import pytest
from scipy.integrate import quad

from burstadvisor.cost import CostModel
from burstadvisor.coupled import CoupledModel, ModelDomainError, cost_of_time, time_of_cost
from burstadvisor.profile import ApplicationProfile, TimeUnit


def _model(a=7004.86, b=-2.06, alpha=0.067, k=1.0):
    return CoupledModel(ApplicationProfile(a=a, b=b, time_unit=TimeUnit.HOURS), CostModel(alpha=alpha, k=k))


def _quadrature_cost(model, turnaround):
    # k*alpha*P(t) with P(t) = (t/a)**(1/b); the t**(1/b) factor is the algebraic weight
    a, b = model.profile.a, model.profile.b
    rate = model.cost.k * model.cost.alpha * a ** (-1.0 / b)
    value, _ = quad(lambda t: rate, 0.0, turnaround, weight="alg", wvar=(1.0 / b, 0.0),
                     epsabs=0.0, epsrel=1e-11)
    return value


@pytest.mark.unit
class TestCoupledModel:
    """Closed-form cost of a turnaround and its inverse."""

    def test_cost_at_turnaround_a(self):
        model = _model()
        x = 1.0 + 1.0 / -2.06
        assert cost_of_time(model, 7004.86) == pytest.approx(7004.86 * 0.067 / x, rel=1e-12)
        assert cost_of_time(model, 7004.86) == pytest.approx(912.6, rel=1e-3)

    def test_inverse_at_scale(self):
        model = _model()
        assert time_of_cost(model, model.scale) == pytest.approx(7004.86, rel=1e-12)

    def test_domain_error_for_shallow_exponent(self):
        with pytest.raises(ModelDomainError):
            _model(a=1013.5, b=-0.8)
        with pytest.raises(ModelDomainError):
            _model(a=10.0, b=-1.0)

    def test_profile_converted_to_hours(self, cloud_profile):
        model = CoupledModel(cloud_profile, CostModel(alpha=0.067))
        assert model.profile.time_unit is TimeUnit.HOURS
        assert model.profile.a == pytest.approx(7004.86 / 60)

    def test_rejects_non_positive_arguments(self):
        model = _model()
        with pytest.raises(ModelDomainError):
            cost_of_time(model, 0.0)
        with pytest.raises(ModelDomainError):
            time_of_cost(model, -1.0)

    def test_scaling_time_scales_cost(self):
        # a and T in the same unit: stretching both by c stretches cost by c
        for c in (1 / 60, 60.0, 3600.0):
            base = _model(a=116.75, b=-2.06)
            stretched = _model(a=116.75 * c, b=-2.06)
            for turnaround in (0.5, 12.0, 116.75):
                assert cost_of_time(stretched, turnaround * c) == pytest.approx(
                    c * cost_of_time(base, turnaround), rel=1e-12)
                assert time_of_cost(stretched, c * 40.0) == pytest.approx(c * time_of_cost(base, 40.0), rel=1e-12)

    def test_cost_increases_with_turnaround(self):
        model = _model(a=50.0, b=-1.4)
        costs = [cost_of_time(model, t) for t in np.linspace(0.5, 40, 30)]
        assert all(b > a for a, b in zip(costs, costs[1:]))

    def test_matches_quadrature(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            model = _model(
                a=float(rng.uniform(1.0, 500.0)),
                b=float(rng.uniform(-3.0, -1.05)),
                alpha=float(rng.uniform(0.01, 0.2)),
                k=float(rng.uniform(0.5, 3.5)),
            )
            turnaround = float(rng.uniform(0.1, 100.0))
            assert cost_of_time(model, turnaround) == pytest.approx(_quadrature_cost(model, turnaround), rel=1e-8)

    def test_round_trip(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            model = _model(
                a=float(rng.uniform(1.0, 500.0)),
                b=float(rng.uniform(-3.0, -1.05)),
                alpha=float(rng.uniform(0.01, 0.2)),
                k=float(rng.uniform(0.5, 3.5)),
            )
            turnaround = float(rng.uniform(0.1, 100.0))
            assert time_of_cost(model, cost_of_time(model, turnaround)) == pytest.approx(turnaround, rel=1e-9)
            budget = float(rng.uniform(1.0, 1000.0))
            assert cost_of_time(model, time_of_cost(model, budget)) == pytest.approx(budget, rel=1e-9)
