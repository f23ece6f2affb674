"""Shared builders for compact one-dimensional test models."""

from __future__ import annotations

import numpy as np

from disptrack import (
    AugmentedDistribution,
    BirthModel,
    GaussianComponent,
    MotionModel,
    Observation,
    SensorModel,
    StateSpace,
)


def comp(weight: float, mean: float, var: float) -> GaussianComponent:
    return GaussianComponent(weight, np.array([mean]), np.array([[var]]))


def dist(presence: float, *components: tuple[float, float, float]) -> AugmentedDistribution:
    return AugmentedDistribution(presence, tuple(comp(*c) for c in components))


def unit_dist(presence: float = 1.0, mean: float = 0.0, var: float = 1.0) -> AugmentedDistribution:
    return dist(presence, (1.0, mean, var))


def motion_1d(p_s: float = 1.0, f: float = 1.0, q: float = 0.0) -> MotionModel:
    return MotionModel(np.array([[f]]), np.array([[q]]), p_s)


def sensor_1d(p_d: float = 1.0, p_fa: float = 0.0, r: float = 1.0, h: float = 1.0,
              gate_threshold: float | None = None) -> SensorModel:
    return SensorModel(np.array([[h]]), np.array([[r]]), p_d, p_fa, gate_threshold)


def birth_1d(cardinality, mean: float = 0.0, var: float = 10.0) -> BirthModel:
    return BirthModel(np.asarray(cardinality, dtype=float), unit_dist(1.0, mean, var))


def obs(scan: int, idx: int, value: float) -> Observation:
    return Observation((scan, idx), np.array([value]))


def space_1d(lo: float = -100.0, hi: float = 100.0) -> StateSpace:
    return StateSpace(1, np.array([[lo, hi]]))


def random_scans(rng: np.random.Generator, counts: list[int], spread: float = 5.0):
    """Observation scans with the given per-scan counts, values spread around 0."""
    return [
        [obs(t, k, float(rng.uniform(-spread, spread))) for k in range(c)]
        for t, c in enumerate(counts)
    ]
