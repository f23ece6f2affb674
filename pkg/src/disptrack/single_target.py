"""Single-target measure transforms: time prediction and Bayes update.

Two operations act on :class:`~disptrack.models.AugmentedDistribution`:

* :func:`predict_distribution` pushes the distribution through the motion
  kernel. Presence decays by the survival probability; each mixture
  component moves through the linear-Gaussian in-scene kernel.
* :func:`update_distribution` conditions on one observation outcome, either
  a concrete detection or :data:`MISSED`. Detection pins presence to one
  and applies a per-component Kalman update; a miss shrinks presence by the
  closed-form posterior odds and (for constant detection probability)
  leaves the spatial part untouched.

:func:`birth_posterior` is the detection update applied to the shared
appearing-target prior, producing a newborn track distribution with
presence exactly one.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np

from .models import (
    AssociationImpossibleError,
    AugmentedDistribution,
    BirthModel,
    DEFAULT_MAX_COMPONENTS,
    GaussianComponent,
    MotionModel,
    Observation,
    SensorModel,
    symmetrize,
    tidy_mixture,
    _gauss_logpdf,
)


class _Missed:
    """Sentinel for the empty observation (miss-detection)."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "MISSED"


MISSED = _Missed()

ObservationOrMissed = Union[Observation, _Missed]


def predict_distribution(dist: AugmentedDistribution, motion: MotionModel) -> AugmentedDistribution:
    """Propagate a target distribution one step through the motion model.

    Presence becomes presence * p_s (a target cannot re-enter the scene, so
    presence never grows here). Component means map through F, covariances
    through F P F' + Q; mixture weights are unchanged.
    """
    q = dist.presence * motion.p_s
    F, Q = motion.F, motion.Q
    spatial = tuple(
        GaussianComponent(c.weight, F @ c.mean, symmetrize(F @ c.cov @ F.T + Q))
        for c in dist.spatial
    )
    return AugmentedDistribution(q, spatial)


def _kalman_posterior(
    spatial: tuple[GaussianComponent, ...],
    obs: Observation,
    sensor: SensorModel,
    max_components: int,
) -> tuple[GaussianComponent, ...]:
    """Per-component conjugate update, weights rescaled by predictive density.

    Component weights are renormalized in log domain so that far-away
    observations cannot underflow the whole mixture to zero.
    """
    z = obs.value
    H, R = sensor.H, sensor.R
    updated: list[tuple[float, np.ndarray, np.ndarray]] = []
    log_weights: list[float] = []
    for c in spatial:
        pd = sensor.detection_probability(c.mean)
        S = symmetrize(H @ c.cov @ H.T + R)
        K = c.cov @ H.T @ np.linalg.inv(S)
        mean = c.mean + K @ (z - H @ c.mean)
        cov = symmetrize((np.eye(c.dim) - K @ H) @ c.cov)
        if c.weight <= 0.0 or pd <= 0.0:
            lw = -math.inf
        else:
            lw = math.log(c.weight) + math.log(pd) + _gauss_logpdf(z, H @ c.mean, S)
        updated.append((lw, mean, cov))
        log_weights.append(lw)
    m = max(log_weights)
    if m == -math.inf:
        raise AssociationImpossibleError(
            "detection has zero probability under every mixture component"
        )
    rel = [math.exp(lw - m) for lw in log_weights]
    total = math.fsum(rel)
    comps = tuple(
        GaussianComponent(r / total, mean, cov)
        for r, (lw, mean, cov) in zip(rel, updated)
        if r / total > 0.0
    )
    return tidy_mixture(comps, max_components)


def update_distribution(
    dist: AugmentedDistribution,
    obs: ObservationOrMissed,
    sensor: SensorModel,
    max_components: int = DEFAULT_MAX_COMPONENTS,
) -> AugmentedDistribution:
    """Condition a predicted target distribution on one observation outcome.

    Detection: presence bursts to exactly 1 (only in-scene targets can be
    detected) and the spatial mixture gets a per-component Kalman update.
    Miss: presence becomes q(1-p_d) / (1-q + q(1-p_d)) and the spatial part
    is reweighted by the per-component miss probability (unchanged when the
    detection probability is constant).

    Raises :class:`AssociationImpossibleError` when the conditioning event
    has zero probability (detecting an absent target, or missing a surely
    present, surely detected one).
    """
    if isinstance(obs, _Missed):
        return _miss_update(dist, sensor)
    if dist.presence <= 0.0:
        raise AssociationImpossibleError("cannot detect a target with zero presence")
    spatial = _kalman_posterior(dist.spatial, obs, sensor, max_components)
    return AugmentedDistribution(1.0, spatial)


def _miss_update(dist: AugmentedDistribution, sensor: SensorModel) -> AugmentedDistribution:
    q = dist.presence
    if q <= 0.0:
        return dist
    miss_terms = [c.weight * (1.0 - sensor.detection_probability(c.mean)) for c in dist.spatial]
    in_scene_miss = q * math.fsum(miss_terms)
    denom = (1.0 - q) + in_scene_miss
    if denom <= 0.0:
        raise AssociationImpossibleError(
            "miss-detection has zero probability: target is present and detected almost surely"
        )
    presence = in_scene_miss / denom
    if presence <= 0.0:
        return AugmentedDistribution(0.0, dist.spatial)
    total = math.fsum(miss_terms)
    spatial = tuple(
        GaussianComponent(t / total, c.mean, c.cov)
        for t, c in zip(miss_terms, dist.spatial)
        if t > 0.0
    )
    return AugmentedDistribution(presence, spatial)


def birth_posterior(
    birth: BirthModel,
    obs: Observation,
    sensor: SensorModel,
    max_components: int = DEFAULT_MAX_COMPONENTS,
) -> AugmentedDistribution:
    """Posterior of a newly detected appearing target.

    The appearing-target prior has presence one, so the newborn track has
    presence exactly one as well; the spatial part is the Kalman-updated
    birth mixture.
    """
    spatial = _kalman_posterior(birth.spatial.spatial, obs, sensor, max_components)
    return AugmentedDistribution(1.0, spatial)
