"""Core model types and the mixture operations."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from disptrack import (
    AugmentedDistribution,
    GaussianComponent,
    ModelConfigError,
    Observation,
    SensorModel,
    StateSpace,
    missdetection_mass,
    moment_match,
    predictive_likelihood,
)

from helpers import comp, dist, obs, sensor_1d, unit_dist


class TestTypes:
    def test_state_space_rejects_degenerate_bounds(self):
        with pytest.raises(ModelConfigError):
            StateSpace(1, np.array([[1.0, 1.0]]))
        with pytest.raises(ModelConfigError):
            StateSpace(0, np.zeros((0, 2)))

    def test_component_requires_spd_cov(self):
        with pytest.raises(ModelConfigError):
            GaussianComponent(1.0, np.zeros(2), np.array([[1.0, 0.2], [0.1, 1.0]]))
        with pytest.raises(ModelConfigError):
            GaussianComponent(1.0, np.zeros(1), np.array([[0.0]]))
        with pytest.raises(ModelConfigError):
            GaussianComponent(-0.1, np.zeros(1), np.array([[1.0]]))

    def test_distribution_weights_must_normalize(self):
        with pytest.raises(ModelConfigError):
            AugmentedDistribution(0.5, (comp(0.7, 0.0, 1.0), comp(0.2, 1.0, 1.0)))
        with pytest.raises(ModelConfigError):
            AugmentedDistribution(0.5, ())
        assert AugmentedDistribution(0.0, ()).presence == 0.0

    def test_sensor_p_fa_strictly_below_one(self):
        with pytest.raises(ModelConfigError):
            sensor_1d(p_d=0.9, p_fa=1.0)

    def test_observation_id_normalized(self):
        o = Observation((1, 2), [0.5])
        assert o.id == (1, 2)
        assert o.value.shape == (1,)


class TestPredictiveLikelihood:
    def test_zero_presence_gives_zero(self):
        d = AugmentedDistribution(0.0, ())
        assert predictive_likelihood(d, obs(0, 0, 3.0), sensor_1d()) == 0.0

    def test_unit_gaussian_at_origin(self):
        # N(0; 0, 2) with presence 1, p_d 1: 1 / sqrt(4 pi)
        value = predictive_likelihood(unit_dist(), obs(0, 0, 0.0), sensor_1d())
        assert value == pytest.approx(1.0 / math.sqrt(4.0 * math.pi), abs=1e-12)

    def test_linear_in_presence(self):
        half = predictive_likelihood(unit_dist(0.5), obs(0, 0, 0.0), sensor_1d())
        assert half == pytest.approx(0.5 / math.sqrt(4.0 * math.pi), abs=1e-12)
        rng = np.random.default_rng(1)
        for _ in range(25):
            q = float(rng.uniform(0.01, 1.0))
            z = obs(0, 0, float(rng.uniform(-3, 3)))
            full = predictive_likelihood(unit_dist(1.0), z, sensor_1d(p_d=0.7))
            part = predictive_likelihood(unit_dist(q), z, sensor_1d(p_d=0.7))
            assert part == pytest.approx(q * full, rel=1e-12)

    def test_linear_in_component_weights(self):
        d2 = dist(1.0, (0.3, -1.0, 1.0), (0.7, 2.0, 0.5))
        s = sensor_1d(p_d=0.6)
        z = obs(0, 0, 0.4)
        parts = [
            predictive_likelihood(dist(1.0, (1.0, -1.0, 1.0)), z, s),
            predictive_likelihood(dist(1.0, (1.0, 2.0, 0.5)), z, s),
        ]
        assert predictive_likelihood(d2, z, s) == pytest.approx(
            0.3 * parts[0] + 0.7 * parts[1], rel=1e-12
        )

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ModelConfigError):
            predictive_likelihood(unit_dist(), Observation((0, 0), [0.0, 1.0]), sensor_1d())


class TestMissdetectionMass:
    def test_certain_detection(self):
        assert missdetection_mass(unit_dist(1.0), sensor_1d(p_d=1.0)) == 0.0

    def test_absent_target(self):
        d = AugmentedDistribution(0.0, ())
        assert missdetection_mass(d, sensor_1d(p_d=0.3)) == 1.0

    def test_partial_presence(self):
        assert missdetection_mass(unit_dist(0.72), sensor_1d(p_d=0.5)) == pytest.approx(
            0.64, abs=1e-15
        )


class TestMomentMatch:
    def test_single_component_identity(self):
        c = comp(0.8, 1.5, 2.0)
        m = moment_match([c])
        assert m.weight == pytest.approx(0.8)
        assert m.mean[0] == pytest.approx(1.5)
        assert m.cov[0, 0] == pytest.approx(2.0)

    def test_symmetric_pair_spread(self):
        m = moment_match([comp(0.5, -1.0, 1.0), comp(0.5, 1.0, 1.0)])
        assert m.weight == pytest.approx(1.0)
        assert m.mean[0] == pytest.approx(0.0, abs=1e-15)
        assert m.cov[0, 0] == pytest.approx(2.0, abs=1e-12)

    def test_zero_weight_component_ignored(self):
        m = moment_match([comp(1.0, 0.5, 1.0), comp(0.0, 9.0, 1.0)])
        assert m.mean[0] == pytest.approx(0.5)
        assert m.cov[0, 0] == pytest.approx(1.0)

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            moment_match([])

    def test_moments_preserved_randomized(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            comps = [
                comp(float(rng.uniform(0.05, 1.0)), float(rng.uniform(-5, 5)),
                     float(rng.uniform(0.1, 3.0)))
                for _ in range(int(rng.integers(2, 6)))
            ]
            total = sum(c.weight for c in comps)
            mean = sum(c.weight * c.mean[0] for c in comps) / total
            second = sum(c.weight * (c.cov[0, 0] + c.mean[0] ** 2) for c in comps) / total
            m = moment_match(comps)
            assert m.weight == pytest.approx(total, abs=1e-10)
            assert m.mean[0] == pytest.approx(mean, abs=1e-10)
            assert m.cov[0, 0] == pytest.approx(second - mean**2, abs=1e-10)


class TestDetectionMissSplit:
    def test_masses_integrate_to_one_without_false_alarms(self):
        # With p_fa = 0 each target either yields exactly one observation or
        # none: the detection density integrated over the observation space
        # plus the miss mass must be one.
        for q, p_d in [(1.0, 0.9), (0.72, 0.5), (0.3, 0.99), (1.0, 1.0)]:
            d = dist(q, (0.4, -1.0, 0.8), (0.6, 2.0, 1.5))
            s = sensor_1d(p_d=p_d)
            density, _ = quad(
                lambda z: predictive_likelihood(d, Observation((0, 0), [z]), s),
                -np.inf,
                np.inf,
            )
            assert density + missdetection_mass(d, s) == pytest.approx(1.0, abs=1e-6)

    def test_state_dependent_detection_hook(self):
        # Callable p_d evaluated at component means.
        s = SensorModel(np.array([[1.0]]), np.array([[1.0]]),
                        p_d=lambda x: 0.9 if x[0] < 0 else 0.2, p_fa=0.0)
        d = dist(1.0, (0.5, -2.0, 1.0), (0.5, 2.0, 1.0))
        assert missdetection_mass(d, s) == pytest.approx(0.5 * 0.1 + 0.5 * 0.8)
