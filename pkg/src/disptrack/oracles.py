"""Brute-force reference computations for validating the recursion.

Both oracles deliberately share no association or weighting code with the
engine: consistent subsets come from raw power-set enumeration, and the
joint posterior from a direct walk over every association history with
plain linear-domain arithmetic and scipy densities. They exist to catch
engine bugs, so they stay simple and exponential, with hard input limits.
"""

from __future__ import annotations

import math
from itertools import combinations, permutations
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import multivariate_normal

from .engine import ObservationPath, newborn_path
from .models import BirthModel, MotionModel, Observation, SensorModel

MAX_ORACLE_PATHS = 20
MAX_ORACLE_SCANS = 2
MAX_ORACLE_OBS_PER_SCAN = 2
MAX_ORACLE_BIRTHS = 2

HypKey = tuple[ObservationPath, ...]


def oracle_consistent_subsets(paths: Iterable[ObservationPath]) -> set[HypKey]:
    """Every subset of ``paths`` whose members are pairwise compatible.

    Straight power-set sweep; refuses more than 20 paths.
    """
    items = sorted(set(paths))
    n = len(items)
    if n > MAX_ORACLE_PATHS:
        raise ValueError(f"refusing to enumerate 2**{n} subsets (limit {MAX_ORACLE_PATHS} paths)")
    obs_sets = [set(p.detections) for p in items]
    compat = [0] * n
    for i in range(n):
        mask = 0
        for j in range(n):
            if i != j and not obs_sets[i] & obs_sets[j]:
                mask |= 1 << j
        compat[i] = mask

    valid = [False] * (1 << n)
    valid[0] = True
    out: set[HypKey] = {()}
    for s in range(1, 1 << n):
        low = (s & -s).bit_length() - 1
        rest = s & (s - 1)
        if valid[rest] and (compat[low] & rest) == rest:
            valid[s] = True
            out.add(tuple(items[i] for i in range(n) if s >> i & 1))
    return out


def _pdf(z: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> float:
    return float(multivariate_normal.pdf(z, mean=mean, cov=cov, allow_singular=False))


class _Dist:
    """Linear-domain augmented distribution for the oracle walk."""

    __slots__ = ("q", "comps")

    def __init__(self, q: float, comps: list[tuple[float, np.ndarray, np.ndarray]]):
        self.q = q
        self.comps = comps


def _predict(d: _Dist, motion: MotionModel) -> _Dist:
    F, Q = motion.F, motion.Q
    return _Dist(d.q * motion.p_s, [(w, F @ m, F @ P @ F.T + Q) for w, m, P in d.comps])


def _detection_mass(d: _Dist, z: np.ndarray, sensor: SensorModel) -> float:
    H, R = sensor.H, sensor.R
    return d.q * sensor.p_d * sum(w * _pdf(z, H @ m, H @ P @ H.T + R) for w, m, P in d.comps)


def _miss_mass(d: _Dist, sensor: SensorModel) -> float:
    return (1.0 - d.q) + d.q * (1.0 - sensor.p_d)


def _detected(d: _Dist, z: np.ndarray, sensor: SensorModel) -> _Dist:
    H, R = sensor.H, sensor.R
    comps = []
    for w, m, P in d.comps:
        S = H @ P @ H.T + R
        K = P @ H.T @ np.linalg.inv(S)
        comps.append((w * _pdf(z, H @ m, S), m + K @ (z - H @ m), P - K @ S @ K.T))
    total = sum(w for w, _, _ in comps)
    return _Dist(1.0, [(w / total, m, P) for w, m, P in comps])


def _missed(d: _Dist, sensor: SensorModel) -> _Dist:
    q = d.q * (1.0 - sensor.p_d) / _miss_mass(d, sensor)
    return _Dist(q, list(d.comps))


def oracle_joint_posterior(
    motion: MotionModel,
    sensor: SensorModel,
    birth: BirthModel,
    all_scans: Sequence[Sequence[Observation]],
) -> dict[HypKey, float]:
    """Exact posterior over terminal hypotheses by enumerating every history.

    Walks every per-scan choice of detected tracks, detection bijection and
    birth subset from the first scan on, multiplying the per-scan factors
    along each branch, and normalizes once over the terminal accumulation.
    Limits: at most 2 scans, 2 observations per scan, 2 simultaneous births,
    scalar detection probability.
    """
    if len(all_scans) > MAX_ORACLE_SCANS:
        raise ValueError(f"oracle limited to {MAX_ORACLE_SCANS} scans")
    if any(len(z) > MAX_ORACLE_OBS_PER_SCAN for z in all_scans):
        raise ValueError(f"oracle limited to {MAX_ORACLE_OBS_PER_SCAN} observations per scan")
    if birth.max_births > MAX_ORACLE_BIRTHS:
        raise ValueError(f"oracle limited to {MAX_ORACLE_BIRTHS} simultaneous births")
    if callable(sensor.p_d):
        raise ValueError("oracle supports scalar detection probability only")

    card = [float(c) for c in birth.cardinality]
    p_fa = sensor.p_fa
    birth_dist = _Dist(1.0, [(c.weight, c.mean, c.cov) for c in birth.spatial.spatial])

    branches: list[tuple[dict[ObservationPath, _Dist], float]] = [({}, 1.0)]
    for scan_obs in all_scans:
        obs = sorted(scan_obs, key=lambda o: o.id)
        grown: list[tuple[dict[ObservationPath, _Dist], float]] = []
        for tracks, weight in branches:
            pred = {p: _predict(d, motion) for p, d in tracks.items()}
            paths = sorted(pred)
            for d_size in range(min(len(paths), len(obs)) + 1):
                for det_paths in combinations(paths, d_size):
                    undetected = [p for p in paths if p not in det_paths]
                    if any(_miss_mass(pred[p], sensor) <= 0.0 for p in undetected):
                        continue
                    miss_factor = math.prod(_miss_mass(pred[p], sensor) for p in undetected)
                    for chosen in permutations(obs, d_size):
                        if sensor.p_d <= 0.0 and d_size > 0:
                            continue
                        if any(pred[p].q <= 0.0 for p in det_paths):
                            continue
                        det_factor = math.prod(
                            _detection_mass(pred[p], z.value, sensor)
                            for p, z in zip(det_paths, chosen)
                        )
                        used = {z.id for z in chosen}
                        rest = [z for z in obs if z.id not in used]
                        for n in range(len(card)):
                            if n > len(rest):
                                continue
                            for born in combinations(rest, n):
                                n_fa = len(obs) - d_size - n
                                birth_factor = math.prod(
                                    _detection_mass(birth_dist, z.value, sensor) for z in born
                                )
                                factor = (
                                    card[n]
                                    * det_factor
                                    * miss_factor
                                    * birth_factor
                                    * (1.0 - p_fa) ** (d_size + n)
                                    * p_fa**n_fa
                                )
                                new_tracks = {
                                    p: _missed(pred[p], sensor) for p in undetected
                                }
                                for p, z in zip(det_paths, chosen):
                                    new_tracks[p.extended(z.id)] = _detected(
                                        pred[p], z.value, sensor
                                    )
                                for z in born:
                                    new_tracks[newborn_path(z.id)] = _detected(
                                        birth_dist, z.value, sensor
                                    )
                                grown.append((new_tracks, weight * factor))
        branches = grown

    totals: dict[HypKey, float] = {}
    for tracks, weight in branches:
        key = tuple(sorted(tracks))
        totals[key] = totals.get(key, 0.0) + weight
    norm = math.fsum(totals.values())
    if norm <= 0.0:
        raise ValueError("joint posterior is degenerate: every history has zero probability")
    return {k: v / norm for k, v in totals.items()}
