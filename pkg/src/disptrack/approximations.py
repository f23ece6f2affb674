"""Composable cost-control passes over the filter state.

Each pass is individually switchable and is the identity at its neutral
setting (threshold 0, infinite gate, cap at or above the current count).
Removing a track from the state marginalizes the hypotheses over it:
the track is deleted from every hypothesis that contains it, and
hypotheses that become identical merge by adding their weights. Removing
hypotheses deliberately leaves the remaining weights unnormalized; they
sum back to one at the next update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import FilterState, Hypothesis, ObservationPath, Track, compatible
from .models import (
    AugmentedDistribution,
    GaussianComponent,
    Observation,
    SensorModel,
    moment_match,
    tidy_mixture,
)


@dataclass(frozen=True)
class ApproximationConfig:
    """Switchboard for the cost-control passes; ``None`` disables a pass.

    ``birth_cap`` bounds the support of the appearing-target cardinality
    distribution and is enforced where the birth model is built, not here.
    """

    presence_threshold: float | None = None
    track_existence_threshold: float | None = None
    hyp_existence_threshold: float | None = None
    max_tracks: int | None = None
    max_hypotheses: int | None = None
    gate_threshold: float | None = None
    birth_cap: int | None = None
    merge_threshold: float | None = None

    def __post_init__(self):
        for name in ("presence_threshold", "track_existence_threshold", "hyp_existence_threshold"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("max_tracks", "max_hypotheses"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be >= 1, got {v}")
        for name in ("gate_threshold", "merge_threshold"):
            v = getattr(self, name)
            if v is not None and v < 0.0:
                raise ValueError(f"{name} must be nonnegative, got {v}")
        if self.birth_cap is not None and self.birth_cap < 0:
            raise ValueError(f"birth_cap must be >= 0, got {self.birth_cap}")


# Documented defaults for running all passes together: conservative
# thresholds that keep desk-scale scenarios fast without visibly moving
# the posterior.
DEFAULT_PIPELINE = ApproximationConfig(
    presence_threshold=1e-3,
    track_existence_threshold=1e-3,
    hyp_existence_threshold=1e-4,
    max_tracks=50,
    max_hypotheses=100,
    gate_threshold=16.0,
    birth_cap=2,
    merge_threshold=0.05,
)


def _existence_table(state: FilterState) -> dict[ObservationPath, float]:
    alpha = {p: 0.0 for p in state.tracks}
    for h in state.hypotheses:
        for p in h.tracks:
            alpha[p] += h.weight
    return alpha


def _marginalize(state: FilterState, victims: set[ObservationPath]) -> FilterState:
    """Drop tracks and merge hypotheses that become identical."""
    if not victims:
        return state
    merged: dict[tuple[ObservationPath, ...], float] = {}
    for h in state.hypotheses:
        reduced = tuple(p for p in h.tracks if p not in victims)
        merged[reduced] = merged.get(reduced, 0.0) + h.weight
    hypotheses = [Hypothesis(tracks, w) for tracks, w in merged.items()]
    tracks = {p: t for p, t in state.tracks.items() if p not in victims}
    return FilterState(state.scan, tracks, hypotheses)


def _drop_orphans(state: FilterState) -> FilterState:
    referenced: set[ObservationPath] = set()
    for h in state.hypotheses:
        referenced.update(h.tracks)
    if len(referenced) == len(state.tracks):
        return state
    tracks = {p: t for p, t in state.tracks.items() if p in referenced}
    return FilterState(state.scan, tracks, state.hypotheses)


def prune_by_presence(state: FilterState, threshold: float) -> FilterState:
    """Discard tracks whose probability of presence fell below ``threshold``.

    Such tracks almost surely describe targets that already left the scene.
    Hypotheses are marginalized over the removals, so total weight is kept.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"presence threshold must lie in [0, 1], got {threshold}")
    victims = {p for p, t in state.tracks.items() if t.dist.presence < threshold}
    return _marginalize(state, victims)


def prune_by_existence(
    state: FilterState,
    track_threshold: float = 0.0,
    hyp_threshold: float = 0.0,
) -> FilterState:
    """Discard low-credibility tracks, then low-weight hypotheses.

    Track removal marginalizes the hypotheses; hypothesis removal does not
    renormalize the survivors (the weights sum back to one at the next
    update), and tracks orphaned by it are dropped. The heaviest hypothesis
    always survives.
    """
    for v in (track_threshold, hyp_threshold):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"existence thresholds must lie in [0, 1], got {v}")
    if track_threshold > 0.0:
        alpha = _existence_table(state)
        state = _marginalize(state, {p for p, a in alpha.items() if a < track_threshold})
    if hyp_threshold > 0.0:
        kept = [h for h in state.hypotheses if h.weight >= hyp_threshold]
        if not kept:
            kept = [max(state.hypotheses, key=lambda h: h.weight)]
        if len(kept) != len(state.hypotheses):
            state = _drop_orphans(FilterState(state.scan, state.tracks, kept))
    return state


def cap_counts(
    state: FilterState,
    max_tracks: int | None = None,
    max_hypotheses: int | None = None,
) -> FilterState:
    """Bound the track and hypothesis counts by discarding the least credible.

    Ties at the cut break by canonical path (respectively hypothesis) order,
    keeping the canonically earliest. Same marginalization and orphan rules
    as the threshold prunes; hypothesis weights are not renormalized.
    """
    if max_tracks is not None and len(state.tracks) > max_tracks:
        alpha = _existence_table(state)
        ranked = sorted(state.tracks, key=lambda p: (-alpha[p], p))
        state = _marginalize(state, set(ranked[max_tracks:]))
    if max_hypotheses is not None and len(state.hypotheses) > max_hypotheses:
        ranked_h = sorted(
            state.hypotheses, key=lambda h: (-h.weight, (len(h.tracks), h.tracks))
        )
        keep = set(id(h) for h in ranked_h[:max_hypotheses])
        kept = [h for h in state.hypotheses if id(h) in keep]
        state = _drop_orphans(FilterState(state.scan, state.tracks, kept))
    return state


def mahalanobis_sq(dist: AugmentedDistribution, obs: Observation, sensor: SensorModel) -> float:
    """Smallest squared Mahalanobis distance of ``obs`` over the mixture components."""
    z = obs.value
    best = math.inf
    for c in dist.spatial:
        S = sensor.H @ c.cov @ sensor.H.T + sensor.R
        diff = z - sensor.H @ c.mean
        d2 = float(diff @ np.linalg.solve(S, diff))
        if d2 < best:
            best = d2
    return best


def gate(dist: AugmentedDistribution, obs: Observation, sensor: SensorModel) -> bool:
    """Keep the pairing iff the observation falls inside the sensor gate."""
    if sensor.gate_threshold is None:
        raise ValueError("sensor.gate_threshold is not configured")
    return mahalanobis_sq(dist, obs, sensor) <= sensor.gate_threshold


def make_gate(sensor: SensorModel, threshold: float | None = None):
    """Build the gate predicate used by the update for tracks and births alike."""
    thr = sensor.gate_threshold if threshold is None else threshold
    if thr is None:
        raise ValueError("no gate threshold configured")

    def _gate(dist: AugmentedDistribution, obs: Observation) -> bool:
        return mahalanobis_sq(dist, obs, sensor) <= thr

    return _gate


def _merged_track(a: Track, b: Track, alpha_a: float, alpha_b: float) -> Track:
    total = alpha_a + alpha_b
    if total > 0.0:
        wa, wb = alpha_a / total, alpha_b / total
    else:
        wa = wb = 0.5
    presence = min(1.0, max(0.0, wa * a.dist.presence + wb * b.dist.presence))
    comps = [GaussianComponent(wa * c.weight, c.mean, c.cov) for c in a.dist.spatial]
    comps += [GaussianComponent(wb * c.weight, c.mean, c.cov) for c in b.dist.spatial]
    spatial = tidy_mixture(comps) if comps else ()
    return Track(a.path, AugmentedDistribution(presence, spatial), a.displayed)


def merge_tracks(state: FilterState, d_threshold: float) -> FilterState:
    """Collapse near-identical tracks that never co-occur in a hypothesis.

    Tracks sharing a hypothesis are, by construction, candidates for two
    distinct targets and are never merged. Eligible pairs are processed
    greedily in descending combined-existence order, each track merging at
    most once per pass. The merged track keeps the path and display status
    of the higher-existence member; its presence and spatial mixture are the
    existence-weighted combination of the pair. A pair is skipped when the
    substitution would put incompatible paths into one hypothesis.
    """
    if d_threshold < 0.0:
        raise ValueError(f"merge threshold must be nonnegative, got {d_threshold}")
    alpha = _existence_table(state)
    paths = sorted(state.tracks)
    candidates = []
    for i, a in enumerate(paths):
        if not state.tracks[a].dist.spatial:
            continue
        for b in paths[i + 1:]:
            if state.tracks[b].dist.spatial:
                candidates.append((-(alpha[a] + alpha[b]), a, b))
    candidates.sort()

    def membership() -> dict[ObservationPath, set[int]]:
        out: dict[ObservationPath, set[int]] = {p: set() for p in state.tracks}
        for hi, h in enumerate(state.hypotheses):
            for p in h.tracks:
                out[p].add(hi)
        return out

    member = membership()
    moments: dict[ObservationPath, GaussianComponent] = {}

    def matched(p: ObservationPath) -> GaussianComponent:
        if p not in moments:
            moments[p] = moment_match(state.tracks[p].dist.spatial)
        return moments[p]

    consumed: set[ObservationPath] = set()
    for _, a, b in candidates:
        if a in consumed or b in consumed or a not in state.tracks or b not in state.tracks:
            continue
        if not member[a].isdisjoint(member[b]):
            continue
        ca, cb = matched(a), matched(b)
        total = alpha[a] + alpha[b]
        if total > 0.0:
            pooled = (alpha[a] * ca.cov + alpha[b] * cb.cov) / total
        else:
            pooled = 0.5 * (ca.cov + cb.cov)
        diff = ca.mean - cb.mean
        if float(diff @ np.linalg.solve(pooled, diff)) >= d_threshold:
            continue
        # Keep the higher-existence member's path (ties: canonical order,
        # which is how the pair was generated).
        if alpha[b] > alpha[a]:
            a, b = b, a
        # The kept path must stay compatible inside every hypothesis that
        # held the dropped one.
        ok = True
        for hi in member[b]:
            h = state.hypotheses[hi]
            if any(p != b and not compatible(a, p) for p in h.tracks):
                ok = False
                break
        if not ok:
            continue
        merged = _merged_track(state.tracks[a], state.tracks[b], alpha[a], alpha[b])
        new_hyps: dict[tuple[ObservationPath, ...], float] = {}
        for h in state.hypotheses:
            members = tuple(sorted(a if p == b else p for p in h.tracks))
            new_hyps[members] = new_hyps.get(members, 0.0) + h.weight
        tracks = {p: t for p, t in state.tracks.items() if p != b}
        tracks[a] = merged
        state = FilterState(state.scan, tracks, [Hypothesis(k, w) for k, w in new_hyps.items()])
        alpha = _existence_table(state)
        member = membership()
        moments.pop(a, None)
        moments.pop(b, None)
        consumed.add(a)
        consumed.add(b)
    return state


def apply_pipeline(state: FilterState, cfg: ApproximationConfig) -> FilterState:
    """Run the enabled passes in their cheap-first order.

    Mass removals (presence, existence thresholds) run before the pairwise
    merge, the hard caps last. Gating is not applied here: it acts at
    association time inside the update.
    """
    if cfg.presence_threshold is not None:
        state = prune_by_presence(state, cfg.presence_threshold)
    if cfg.track_existence_threshold is not None or cfg.hyp_existence_threshold is not None:
        state = prune_by_existence(
            state,
            cfg.track_existence_threshold or 0.0,
            cfg.hyp_existence_threshold or 0.0,
        )
    if cfg.merge_threshold is not None:
        state = merge_tracks(state, cfg.merge_threshold)
    if cfg.max_tracks is not None or cfg.max_hypotheses is not None:
        state = cap_counts(state, cfg.max_tracks, cfg.max_hypotheses)
    return state
