"""The brute-force validators themselves."""

import math

import numpy as np
import pytest
from scipy.stats import norm

from disptrack import (
    ObservationPath,
    oracle_consistent_subsets,
    oracle_joint_posterior,
)

from helpers import birth_1d, motion_1d, obs, sensor_1d


def path(birth, *ids):
    return ObservationPath(birth, tuple(ids))


class TestConsistentSubsets:
    def test_empty_input(self):
        assert oracle_consistent_subsets([]) == {()}

    def test_three_paths_five_subsets(self):
        a_phi = path(0, (0, 0))
        a_b = path(0, (0, 0), (1, 0))
        phi_b = path(1, (1, 0))
        out = oracle_consistent_subsets([a_phi, a_b, phi_b])
        assert len(out) == 5
        assert () in out
        assert tuple(sorted([a_phi, phi_b])) in out
        assert tuple(sorted([a_b, phi_b])) not in out

    def test_pairwise_incompatible_paths(self):
        p1 = path(0, (0, 0), (1, 1))
        p2 = path(0, (0, 0))
        out = oracle_consistent_subsets([p1, p2])
        assert out == {(), (p1,), (p2,)}

    def test_size_limit_refused(self):
        many = [path(t, (t, 0)) for t in range(21)]
        with pytest.raises(ValueError):
            oracle_consistent_subsets(many)

    def test_matches_pairwise_definition_randomized(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            paths = set()
            for t in range(3):
                for k in range(int(rng.integers(0, 3))):
                    birth = int(rng.integers(0, t + 1))
                    ids = tuple((s, int(rng.integers(0, 2))) for s in range(birth, t + 1)
                                if rng.random() < 0.7)
                    try:
                        if ids:
                            paths.add(ObservationPath(ids[0][0], ids))
                    except ValueError:
                        pass
            paths = sorted(paths)[:10]
            out = oracle_consistent_subsets(paths)
            # independent check: every returned subset is pairwise disjoint
            for subset in out:
                for i, a in enumerate(subset):
                    for b in subset[i + 1:]:
                        assert not set(a.detections) & set(b.detections)


class TestJointPosterior:
    def test_empty_scans(self):
        out = oracle_joint_posterior(motion_1d(), sensor_1d(), birth_1d([1.0]), [])
        assert out == {(): 1.0}

    def test_single_scan_hand_computation(self):
        # One observation, p_fa = 0.5, equal birth odds: the false-alarm and
        # newborn branches carry 0.25 and 0.25 * birth likelihood.
        birth = birth_1d([0.5, 0.5], mean=0.0, var=10.0)
        sensor = sensor_1d(p_d=0.9, p_fa=0.5)
        z = obs(0, 0, 1.0)
        out = oracle_joint_posterior(motion_1d(), sensor, birth, [[z]])
        lik = 0.9 * norm.pdf(1.0, 0.0, math.sqrt(10.0 + 1.0))
        w_fa = 0.5 * 0.5
        w_birth = 0.5 * 0.5 * lik
        total = w_fa + w_birth
        by_size = {len(k): w for k, w in out.items()}
        assert by_size[0] == pytest.approx(w_fa / total, abs=1e-12)
        assert by_size[1] == pytest.approx(w_birth / total, abs=1e-12)

    def test_weights_normalized(self):
        rng = np.random.default_rng(4)
        birth = birth_1d([0.4, 0.4, 0.2], var=6.0)
        sensor = sensor_1d(p_d=0.7, p_fa=0.25)
        motion = motion_1d(p_s=0.9, q=0.3)
        for _ in range(10):
            scans = [
                [obs(t, k, float(rng.uniform(-4, 4))) for k in range(int(rng.integers(0, 3)))]
                for t in range(2)
            ]
            out = oracle_joint_posterior(motion, sensor, birth, scans)
            assert math.fsum(out.values()) == pytest.approx(1.0, abs=1e-12)

    def test_limits_enforced(self):
        with pytest.raises(ValueError):
            oracle_joint_posterior(motion_1d(), sensor_1d(), birth_1d([1.0]), [[], [], []])
        with pytest.raises(ValueError):
            oracle_joint_posterior(
                motion_1d(), sensor_1d(), birth_1d([1.0]),
                [[obs(0, k, float(k)) for k in range(3)]],
            )
        with pytest.raises(ValueError):
            oracle_joint_posterior(
                motion_1d(), sensor_1d(), birth_1d([0.25, 0.25, 0.25, 0.25]), [[]]
            )

    def test_deterministic(self):
        birth = birth_1d([0.5, 0.5])
        sensor = sensor_1d(p_d=0.8, p_fa=0.2)
        scans = [[obs(0, 0, 0.5)], [obs(1, 0, 1.0), obs(1, 1, -1.0)]]
        a = oracle_joint_posterior(motion_1d(p_s=0.9), sensor, birth, scans)
        b = oracle_joint_posterior(motion_1d(p_s=0.9), sensor, birth, scans)
        assert a == b
