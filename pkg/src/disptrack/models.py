"""Core model types: state spaces, Gaussian mixtures, augmented distributions.

A target that may or may not be inside the surveillance scene is described by
an :class:`AugmentedDistribution`: a scalar probability of presence plus a
normalized Gaussian-mixture spatial density over the in-scene state space.
The absent state is never materialized as a vector; all linear algebra stays
on the in-scene space and absence is carried by the presence complement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)

# Gaussian-mixture hygiene: components lighter than this are dropped,
# mixtures longer than this are capped by lowest-weight drop.
WEIGHT_FLOOR = 1e-12
DEFAULT_MAX_COMPONENTS = 16


class ModelConfigError(ValueError):
    """Invalid model parameterization or dimension mismatch."""


class AssociationImpossibleError(ValueError):
    """A conditioning event has zero probability under the model.

    Raised when a Bayes update is requested against an observation (or a
    miss-detection) that the model assigns zero probability, e.g. detection
    of a target with zero presence, or a miss of a target that is present
    and detected almost surely.
    """


def _as_matrix(a, name: str) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ModelConfigError(f"{name} must be a 2-D matrix, got shape {m.shape}")
    return m


def _check_symmetric(m: np.ndarray, name: str, tol: float = 1e-12) -> None:
    if not np.allclose(m, m.T, atol=tol, rtol=0.0):
        raise ModelConfigError(f"{name} must be symmetric within {tol}")


def _check_probability(p: float, name: str) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ModelConfigError(f"{name} must lie in [0, 1], got {p}")
    return p


@dataclass(frozen=True)
class StateSpace:
    """Bounded in-scene state space: dimension plus per-axis extent."""

    dim: int
    bounds: np.ndarray  # shape (dim, 2), rows are (lower, upper)

    def __post_init__(self):
        if self.dim < 1:
            raise ModelConfigError(f"state dimension must be >= 1, got {self.dim}")
        b = np.asarray(self.bounds, dtype=float)
        if b.shape != (self.dim, 2):
            raise ModelConfigError(f"bounds must have shape ({self.dim}, 2), got {b.shape}")
        if not np.all(b[:, 0] < b[:, 1]):
            raise ModelConfigError("each bounds interval must satisfy lower < upper")
        object.__setattr__(self, "bounds", b)

    def clamp(self, x: np.ndarray) -> np.ndarray:
        """Project a state vector onto the bounds box."""
        return np.clip(np.asarray(x, dtype=float), self.bounds[:, 0], self.bounds[:, 1])

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.bounds[:, 0]) and np.all(x <= self.bounds[:, 1]))


@dataclass(frozen=True)
class GaussianComponent:
    """One weighted Gaussian: nonnegative weight, mean vector, SPD covariance."""

    weight: float
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        w = float(self.weight)
        if w < 0.0 or not math.isfinite(w):
            raise ModelConfigError(f"component weight must be finite and >= 0, got {w}")
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = _as_matrix(self.cov, "component covariance")
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise ModelConfigError(f"covariance shape {cov.shape} does not match mean dim {d}")
        _check_symmetric(cov, "component covariance")
        if np.min(np.linalg.eigvalsh(cov)) <= 0.0:
            raise ModelConfigError("component covariance must be positive definite")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class AugmentedDistribution:
    """Presence probability plus normalized Gaussian-mixture spatial density.

    ``presence`` is the mass assigned to the in-scene space; the complement
    is the probability of the target being absent. ``spatial`` is the
    mixture describing the state conditional on presence; its weights sum
    to one whenever presence is positive, and it may be empty only when
    presence is exactly zero.
    """

    presence: float
    spatial: tuple[GaussianComponent, ...]

    def __post_init__(self):
        q = float(self.presence)
        if not 0.0 <= q <= 1.0:
            raise ModelConfigError(f"presence must lie in [0, 1], got {q}")
        comps = tuple(self.spatial)
        if q > 0.0:
            if not comps:
                raise ModelConfigError("spatial mixture may be empty only when presence is 0")
            total = math.fsum(c.weight for c in comps)
            if abs(total - 1.0) > 1e-9:
                raise ModelConfigError(f"spatial weights must sum to 1 +- 1e-9, got {total}")
            dims = {c.dim for c in comps}
            if len(dims) > 1:
                raise ModelConfigError(f"mixed component dimensions {dims}")
        object.__setattr__(self, "presence", q)
        object.__setattr__(self, "spatial", comps)

    @property
    def dim(self) -> int:
        if not self.spatial:
            raise ModelConfigError("empty spatial mixture carries no dimension")
        return self.spatial[0].dim


@dataclass(frozen=True)
class MotionModel:
    """Linear-Gaussian in-scene transition with state-independent survival.

    The in-scene kernel maps x to N(F x, Q); with probability 1 - p_s the
    target instead leaves the scene (and can never return).
    """

    F: np.ndarray
    Q: np.ndarray
    p_s: float

    def __post_init__(self):
        F = _as_matrix(self.F, "F")
        Q = _as_matrix(self.Q, "Q")
        if F.shape[0] != F.shape[1]:
            raise ModelConfigError(f"F must be square, got {F.shape}")
        if Q.shape != F.shape:
            raise ModelConfigError(f"Q shape {Q.shape} does not match F shape {F.shape}")
        _check_symmetric(Q, "Q")
        if np.min(np.linalg.eigvalsh(Q)) < -1e-12:
            raise ModelConfigError("Q must be positive semi-definite")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "p_s", _check_probability(self.p_s, "p_s"))

    @property
    def dim(self) -> int:
        return self.F.shape[0]


# Detection probability: a scalar, or a per-state hook evaluated at component
# means (an approximation for state-dependent detection / restricted fields
# of view; the constant form is exact under the model).
DetectionProbability = Union[float, Callable[[np.ndarray], float]]


@dataclass(frozen=True)
class SensorModel:
    """Linear-Gaussian observation model with miss-detections and false alarms."""

    H: np.ndarray
    R: np.ndarray
    p_d: DetectionProbability
    p_fa: float
    gate_threshold: float | None = None

    def __post_init__(self):
        H = _as_matrix(self.H, "H")
        R = _as_matrix(self.R, "R")
        if R.shape != (H.shape[0], H.shape[0]):
            raise ModelConfigError(f"R shape {R.shape} does not match H rows {H.shape[0]}")
        _check_symmetric(R, "R")
        if np.min(np.linalg.eigvalsh(R)) <= 0.0:
            raise ModelConfigError("R must be positive definite")
        if not callable(self.p_d):
            object.__setattr__(self, "p_d", _check_probability(self.p_d, "p_d"))
        p_fa = float(self.p_fa)
        if not 0.0 <= p_fa < 1.0:
            raise ModelConfigError(f"p_fa must lie in [0, 1), got {p_fa}")
        if self.gate_threshold is not None and self.gate_threshold < 0.0:
            raise ModelConfigError("gate_threshold must be nonnegative")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "p_fa", p_fa)

    @property
    def obs_dim(self) -> int:
        return self.H.shape[0]

    @property
    def state_dim(self) -> int:
        return self.H.shape[1]

    def detection_probability(self, mean: np.ndarray) -> float:
        if callable(self.p_d):
            return _check_probability(self.p_d(mean), "p_d(x)")
        return self.p_d


@dataclass(frozen=True)
class BirthModel:
    """Appearing-target population: cardinality distribution plus shared prior.

    The cardinality vector gives the probability of n simultaneous
    appearances for n = 0 .. len(cardinality) - 1 (finite support by
    construction). The spatial prior has presence exactly one: an appearing
    target is inside the scene almost surely.
    """

    cardinality: np.ndarray
    spatial: AugmentedDistribution

    def __post_init__(self):
        c = np.asarray(self.cardinality, dtype=float).reshape(-1)
        if c.size < 1:
            raise ModelConfigError("cardinality vector must be non-empty")
        if np.any(c < 0.0):
            raise ModelConfigError("cardinality entries must be nonnegative")
        if abs(float(np.sum(c)) - 1.0) > 1e-12:
            raise ModelConfigError(f"cardinality must sum to 1 +- 1e-12, got {np.sum(c)}")
        if self.spatial.presence != 1.0:
            raise ModelConfigError("birth spatial distribution must have presence exactly 1")
        object.__setattr__(self, "cardinality", c)

    @property
    def max_births(self) -> int:
        return self.cardinality.size - 1


ObsId = tuple[int, int]  # (scan index, within-scan index)


@dataclass(frozen=True)
class Observation:
    """A sensor observation with a globally unique (scan, index) reference."""

    id: ObsId
    value: np.ndarray

    def __post_init__(self):
        scan, idx = self.id
        if scan < 0 or idx < 0:
            raise ModelConfigError(f"observation id components must be >= 0, got {self.id}")
        object.__setattr__(self, "id", (int(scan), int(idx)))
        object.__setattr__(self, "value", np.asarray(self.value, dtype=float).reshape(-1))


def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def innovation_cov(component: GaussianComponent, sensor: SensorModel) -> np.ndarray:
    """Predicted observation covariance H P H' + R for one component."""
    H = sensor.H
    return symmetrize(H @ component.cov @ H.T + sensor.R)


def log_predictive_likelihood(
    dist: AugmentedDistribution, obs: Observation, sensor: SensorModel
) -> float:
    """Log of the detection predictive mass, -inf when structurally zero.

    Log-domain counterpart of :func:`predictive_likelihood`; the association
    machinery uses this form so that products of many small likelihoods do
    not underflow.
    """
    if dist.presence <= 0.0:
        return -math.inf
    z = obs.value
    if z.shape[0] != sensor.obs_dim:
        raise ModelConfigError(
            f"observation dim {z.shape[0]} does not match sensor output dim {sensor.obs_dim}"
        )
    if dist.dim != sensor.state_dim:
        raise ModelConfigError(
            f"state dim {dist.dim} does not match sensor input dim {sensor.state_dim}"
        )
    terms = []
    for comp in dist.spatial:
        pd = sensor.detection_probability(comp.mean)
        if comp.weight <= 0.0 or pd <= 0.0:
            continue
        S = innovation_cov(comp, sensor)
        terms.append(math.log(comp.weight) + math.log(pd) + _gauss_logpdf(z, sensor.H @ comp.mean, S))
    if not terms:
        return -math.inf
    m = max(terms)
    return math.log(dist.presence) + m + math.log(math.fsum(math.exp(t - m) for t in terms))


def _gauss_logpdf(x: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> float:
    d = x.shape[0]
    chol = np.linalg.cholesky(cov)
    diff = x - mean
    sol = np.linalg.solve(chol, diff)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return -0.5 * (d * LOG_2PI + logdet + float(sol @ sol))


def predictive_likelihood(
    dist: AugmentedDistribution, obs: Observation, sensor: SensorModel
) -> float:
    """Predictive mass of observing ``obs`` from a target described by ``dist``.

    Returns presence * sum_i w_i * p_d(m_i) * N(z; H m_i, H P_i H' + R);
    zero whenever presence is zero (an absent target produces nothing).
    """
    if dist.presence <= 0.0:
        # Still validate dimensions so misconfiguration surfaces early.
        if obs.value.shape[0] != sensor.obs_dim:
            raise ModelConfigError(
                f"observation dim {obs.value.shape[0]} does not match sensor "
                f"output dim {sensor.obs_dim}"
            )
        return 0.0
    lw = log_predictive_likelihood(dist, obs, sensor)
    return 0.0 if lw == -math.inf else math.exp(lw)


def missdetection_mass(dist: AugmentedDistribution, sensor: SensorModel) -> float:
    """Probability that a target described by ``dist`` yields no observation.

    (1 - presence) + presence * sum_i w_i (1 - p_d(m_i)); equals one for an
    absent target, zero only for a surely present, surely detected one.
    """
    q = dist.presence
    if q <= 0.0:
        return 1.0
    acc = math.fsum(c.weight * (1.0 - sensor.detection_probability(c.mean)) for c in dist.spatial)
    return (1.0 - q) + q * acc


def moment_match(components: Sequence[GaussianComponent]) -> GaussianComponent:
    """Collapse a mixture to a single component preserving weight, mean, cov.

    The returned covariance includes the spread-of-means term, so the first
    two moments of the mixture are preserved exactly.
    """
    comps = [c for c in components if c.weight > 0.0]
    if not components:
        raise ValueError("moment_match requires at least one component")
    total = math.fsum(c.weight for c in comps)
    if total <= 0.0:
        raise ValueError("moment_match requires positive total weight")
    if len(comps) == 1:
        c = comps[0]
        return GaussianComponent(total, c.mean, c.cov)
    d = comps[0].dim
    mean = np.zeros(d)
    for c in comps:
        mean += (c.weight / total) * c.mean
    cov = np.zeros((d, d))
    for c in comps:
        dm = (c.mean - mean).reshape(-1, 1)
        cov += (c.weight / total) * (c.cov + dm @ dm.T)
    return GaussianComponent(total, mean, symmetrize(cov))


def tidy_mixture(
    components: Sequence[GaussianComponent],
    max_components: int = DEFAULT_MAX_COMPONENTS,
) -> tuple[GaussianComponent, ...]:
    """Apply mixture hygiene: drop floor-weight components, cap count, renormalize."""
    comps = [c for c in components if c.weight > WEIGHT_FLOOR]
    if not comps:
        # Keep the single heaviest component rather than returning nothing.
        comps = [max(components, key=lambda c: c.weight)]
    if len(comps) > max_components:
        comps.sort(key=lambda c: c.weight, reverse=True)
        comps = comps[:max_components]
    total = math.fsum(c.weight for c in comps)
    return tuple(GaussianComponent(c.weight / total, c.mean, c.cov) for c in comps)
