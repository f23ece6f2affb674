"""Track table and hypothesis set maintenance: the multi-target recursion.

The filter state is a table of tracks (one per distinct observation path)
plus a weighted set of hypotheses, each hypothesis being a set of mutually
compatible tracks that could jointly account for the data collected so far.
Prediction moves every track's distribution forward and leaves hypothesis
weights untouched; the update enumerates, for every prior hypothesis and
every admissible way of explaining the new scan (detections of existing
tracks, appearing targets, false alarms), the resulting child hypothesis
and its Bayes weight.

Track identity is the observation path itself: two association schemes
producing the same path share one track object, which is what makes the
hypothesis set a set over shared tracks rather than a tree of private
copies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .models import (
    AugmentedDistribution,
    BirthModel,
    DEFAULT_MAX_COMPONENTS,
    ModelConfigError,
    Observation,
    ObsId,
    SensorModel,
    MotionModel,
    log_predictive_likelihood,
    missdetection_mass,
)
from .single_target import (
    MISSED,
    birth_posterior,
    predict_distribution,
    update_distribution,
)

NEG_INF = -math.inf


class DegenerateUpdateError(RuntimeError):
    """Every admissible association has zero probability: model inconsistency."""


@dataclass(frozen=True, order=True)
class ObservationPath:
    """Birth scan plus the ordered observations a target has produced.

    ``detections`` holds one (scan, index) observation reference per scan at
    which the target was detected, in increasing scan order; scans between
    the birth scan and the current scan that are absent from the tuple are
    miss-detections. The first detection happens at the birth scan, so the
    path fully identifies a distinguishable target.
    """

    birth_scan: int
    detections: tuple[ObsId, ...]

    def __post_init__(self):
        if not self.detections:
            raise ValueError("an observation path carries at least its first detection")
        scans = [s for s, _ in self.detections]
        if any(nxt <= cur for cur, nxt in zip(scans, scans[1:])):
            raise ValueError(f"detection scans must strictly increase, got {scans}")
        if self.birth_scan != scans[0]:
            raise ValueError(
                f"birth scan {self.birth_scan} must equal first detection scan {scans[0]}"
            )

    def extended(self, obs_id: ObsId) -> "ObservationPath":
        """Path after a detection at a later scan."""
        return ObservationPath(self.birth_scan, self.detections + (obs_id,))

    def __str__(self) -> str:
        return f"{self.birth_scan}:" + ",".join(f"{s}.{i}" for s, i in self.detections)


def newborn_path(obs_id: ObsId) -> ObservationPath:
    """Path of an appearing target detected through ``obs_id``."""
    return ObservationPath(obs_id[0], (obs_id,))


def compatible(p1: ObservationPath, p2: ObservationPath) -> bool:
    """True iff the two paths share no observation reference."""
    return not set(p1.detections) & set(p2.detections)


def is_consistent(paths: Iterable[ObservationPath]) -> bool:
    """True iff all distinct pairs are compatible."""
    items = list(paths)
    return all(compatible(a, b) for a, b in combinations(items, 2))


@dataclass(frozen=True)
class Track:
    """A distinguishable target: path, state distribution, display status."""

    path: ObservationPath
    dist: AugmentedDistribution
    displayed: bool = False


class Hypothesis(NamedTuple):
    """A consistent set of track identifiers with its probability of existence."""

    tracks: tuple[ObservationPath, ...]  # sorted canonically
    weight: float


def hypothesis_key(tracks: Sequence[ObservationPath]) -> tuple:
    """Canonical comparison key: fewest tracks first, then lexicographic paths."""
    ordered = tuple(sorted(tracks))
    return (len(ordered), ordered)


@dataclass
class FilterState:
    """Immutable-by-convention snapshot: scan index, track table, hypothesis set."""

    scan: int
    tracks: dict[ObservationPath, Track]
    hypotheses: list[Hypothesis]

    def total_weight(self) -> float:
        return math.fsum(h.weight for h in self.hypotheses)


@dataclass(frozen=True)
class Association:
    """One admissible way of explaining a scan for a given prior hypothesis.

    ``detected`` pairs each detected track with the observation it produced
    (the bijection lives here); ``birth_obs`` lists the observations
    attributed to appearing targets; every remaining scan observation is a
    false alarm.
    """

    detected: tuple[tuple[ObservationPath, Observation], ...]
    birth_obs: tuple[Observation, ...]


GatePredicate = Callable[[Optional[ObservationPath], Observation], bool]
DistGate = Callable[[AugmentedDistribution, Observation], bool]


def init_filter() -> FilterState:
    """Pre-data state: no tracks, the single empty hypothesis with weight one."""
    return FilterState(scan=-1, tracks={}, hypotheses=[Hypothesis((), 1.0)])


def predict(state: FilterState, motion: MotionModel) -> FilterState:
    """Move every track's distribution one step forward.

    Paths, hypothesis composition and weights are untouched: no new data has
    arrived, so there is nothing to reassess.
    """
    tracks = {
        path: Track(path, predict_distribution(tr.dist, motion), tr.displayed)
        for path, tr in state.tracks.items()
    }
    return FilterState(scan=state.scan, tracks=tracks, hypotheses=list(state.hypotheses))


def track_existence(state: FilterState, track_id: ObservationPath) -> float:
    """Total weight of the hypotheses containing the track: its credibility."""
    if track_id not in state.tracks:
        raise KeyError(f"unknown track {track_id}")
    return math.fsum(h.weight for h in state.hypotheses if track_id in h.tracks)


def enumerate_associations(
    h: Hypothesis,
    n: int,
    scan_obs: Sequence[Observation],
    gate: GatePredicate | None = None,
) -> list[Association]:
    """All admissible associations for prior hypothesis ``h`` and ``n`` births.

    Enumerates every choice of detected-track subset, detection bijection
    and birth-observation subset of size exactly ``n``; observations left
    unassigned are false alarms. A gate predicate, when supplied, drops
    associations pairing a track (or an appearing target, signalled by a
    ``None`` path) with an implausible observation. Deterministic order:
    detected subsets in track order, bijections and birth subsets in
    lexicographic observation order.
    """
    if n < 0:
        raise ValueError("birth count must be nonnegative")
    obs = sorted(scan_obs, key=lambda o: o.id)
    members = tuple(sorted(h.tracks))
    out: list[Association] = []
    for d_size in range(min(len(members), len(obs)) + 1):
        for h_d in combinations(members, d_size):
            for chosen in permutations(obs, d_size):
                if gate is not None and any(
                    not gate(y, z) for y, z in zip(h_d, chosen)
                ):
                    continue
                used = {z.id for z in chosen}
                rest = [z for z in obs if z.id not in used]
                if n > len(rest):
                    continue
                for born in combinations(rest, n):
                    if gate is not None and any(not gate(None, z) for z in born):
                        continue
                    out.append(Association(tuple(zip(h_d, chosen)), born))
    return out


def association_weight(
    h: Hypothesis,
    assoc: Association,
    scan_obs: Sequence[Observation],
    birth: BirthModel,
    sensor: SensorModel,
    state: FilterState,
) -> float:
    """Log weight of one association scheme (before the cardinality and prior factors).

    Product, in log domain, of the detection predictive masses for detected
    tracks and birth observations, the miss mass for every undetected
    track, and the false-alarm odds for every scan observation. Returns
    ``-inf`` for zero-probability schemes.
    """
    detected = dict(assoc.detected)
    logw = 0.0
    for path, z in assoc.detected:
        logw += log_predictive_likelihood(state.tracks[path].dist, z, sensor)
    for path in h.tracks:
        if path not in detected:
            mass = missdetection_mass(state.tracks[path].dist, sensor)
            logw += math.log(mass) if mass > 0.0 else NEG_INF
    for z in assoc.birth_obs:
        logw += log_predictive_likelihood(birth.spatial, z, sensor)
    assigned = len(assoc.detected) + len(assoc.birth_obs)
    n_fa = len(scan_obs) - assigned
    if assigned:
        logw += assigned * math.log1p(-sensor.p_fa)
    if n_fa:
        logw += n_fa * math.log(sensor.p_fa) if sensor.p_fa > 0.0 else NEG_INF
    return logw


def _validate_scan_obs(obs: Sequence[Observation], scan: int, sensor: SensorModel) -> None:
    seen_ids: set[ObsId] = set()
    seen_values: set[tuple] = set()
    for o in obs:
        if o.id[0] != scan:
            raise ValueError(f"observation {o.id} does not belong to scan {scan}")
        if o.id in seen_ids:
            raise ValueError(f"duplicate observation id {o.id}")
        seen_ids.add(o.id)
        if o.value.shape[0] != sensor.obs_dim:
            raise ModelConfigError(
                f"observation dim {o.value.shape[0]} does not match sensor dim {sensor.obs_dim}"
            )
        key = tuple(o.value.tolist())
        if key in seen_values:
            raise ValueError(f"observations within a scan must be distinct, got repeated {key}")
        seen_values.add(key)


def _logaddexp(a: float, b: float) -> float:
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    m = a if a > b else b
    return m + math.log(math.exp(a - m) + math.exp(b - m))


def update(
    state: FilterState,
    scan_obs: Sequence[Observation],
    birth: BirthModel,
    sensor: SensorModel,
    gate: DistGate | None = None,
    max_components: int = DEFAULT_MAX_COMPONENTS,
) -> FilterState:
    """Bayes update of the track table and hypothesis set with one scan.

    Equivalent to enumerating, for every prior hypothesis and every birth
    count in the cardinality support, all admissible associations, weighting
    each by prior * cardinality * association likelihood, and normalizing
    once over everything produced. Child tracks are deduplicated across
    hypotheses by path, newborn tracks start undisplayed, and surviving
    tracks inherit their parent's display status.

    Associations that would condition a track on a zero-probability event
    (detection of an absent target, miss of a surely detected one) are
    skipped: their posterior is undefined and their weight is zero anyway.
    Raises :class:`DegenerateUpdateError` when nothing admissible has
    positive probability.
    """
    scan = state.scan + 1
    obs = sorted(scan_obs, key=lambda o: o.id)
    _validate_scan_obs(obs, scan, sensor)
    prior_total = math.fsum(h.weight for h in state.hypotheses)
    if not (0.0 < prior_total <= 1.0 + 1e-6):
        raise ValueError(f"prior hypothesis weights must sum into (0, 1], got {prior_total}")

    parents = sorted(state.tracks)
    parent_tracks = [state.tracks[p] for p in parents]
    parent_index = {p: i for i, p in enumerate(parents)}
    nz = len(obs)
    n_max = birth.max_births
    lcard = [math.log(c) if c > 0.0 else NEG_INF for c in birth.cardinality]
    p_fa = sensor.p_fa
    lpfa = math.log(p_fa) if p_fa > 0.0 else NEG_INF
    l1mpfa = math.log1p(-p_fa)

    # Candidate children. Ids are assigned in canonical path order so child
    # hypotheses can be deduplicated and emitted on sorted integer keys.
    had_skip = False
    cand_paths: list[ObservationPath] = []
    cand_tracks: list[Track] = []

    miss_l: list[float] = []
    miss_child: list[Track | None] = []
    for p, tr in zip(parents, parent_tracks):
        mass = missdetection_mass(tr.dist, sensor)
        if mass > 0.0:
            miss_l.append(math.log(mass))
            miss_child.append(
                Track(p, update_distribution(tr.dist, MISSED, sensor, max_components), tr.displayed)
            )
        else:
            had_skip = True
            miss_l.append(NEG_INF)
            miss_child.append(None)

    det_opts_raw: list[list[tuple[int, float, Track]]] = [[] for _ in parents]
    for i, tr in enumerate(parent_tracks):
        for j, o in enumerate(obs):
            if gate is not None and not gate(tr.dist, o):
                continue
            lv = log_predictive_likelihood(tr.dist, o, sensor)
            if lv == NEG_INF:
                had_skip = True
                continue
            child = Track(
                parents[i].extended(o.id),
                update_distribution(tr.dist, o, sensor, max_components),
                tr.displayed,
            )
            det_opts_raw[i].append((j, lv, child))

    birth_l = [NEG_INF] * nz
    birth_child: list[Track | None] = [None] * nz
    if n_max >= 1:
        for j, o in enumerate(obs):
            if gate is not None and not gate(birth.spatial, o):
                continue
            lv = log_predictive_likelihood(birth.spatial, o, sensor)
            if lv == NEG_INF:
                continue
            birth_l[j] = lv
            birth_child[j] = Track(
                newborn_path(o.id), birth_posterior(birth, o, sensor, max_components), False
            )

    for i, tr in enumerate(miss_child):
        if tr is not None:
            cand_paths.append(tr.path)
            cand_tracks.append(tr)
    for opts in det_opts_raw:
        for _, _, tr in opts:
            cand_paths.append(tr.path)
            cand_tracks.append(tr)
    for tr in birth_child:
        if tr is not None:
            cand_paths.append(tr.path)
            cand_tracks.append(tr)
    order = sorted(range(len(cand_paths)), key=cand_paths.__getitem__)
    children: list[Track] = [cand_tracks[k] for k in order]
    child_rank = {cand_tracks[k].path: rank for rank, k in enumerate(order)}

    miss_id = [child_rank[t.path] if t is not None else -1 for t in miss_child]
    det_opts: list[list[tuple[int, float, int]]] = [
        [(j, lv, child_rank[t.path]) for j, lv, t in opts] for opts in det_opts_raw
    ]
    birth_id = [child_rank[t.path] if t is not None else -1 for t in birth_child]
    birthable = [j for j in range(nz) if birth_id[j] >= 0]

    acc: dict[tuple[int, ...], float] = {}
    zero_pfa = p_fa == 0.0
    # Per-track single-detection assignments, prebuilt for the common case.
    det_single = [
        tuple(((j,), lv, (cid,)) for j, lv, cid in opts) for opts in det_opts
    ]
    acc_get = acc.get
    _sorted = sorted
    _combinations = combinations

    for hyp in state.hypotheses:
        base = math.log(hyp.weight) if hyp.weight > 0.0 else NEG_INF
        idxs = [parent_index[p] for p in hyp.tracks]
        # Tracks with no admissible observation are missed in every entry;
        # only the rest take part in the detected-subset enumeration.
        pool = [i for i in idxs if det_opts[i]]
        fixed = [i for i in idxs if not det_opts[i]]
        if any(miss_child[i] is None for i in fixed):
            had_skip = True
            continue
        fixed_sum = sum(miss_l[i] for i in fixed)
        fixed_ids = [miss_id[i] for i in fixed]
        base += fixed_sum
        # Build (detected subset, bijection) entries once, then replay them
        # for each birth count in ascending order.
        entries: list[tuple[float, tuple[int, ...], tuple[int, ...], int]] = []
        for d_size in range(min(len(pool), nz) + 1):
            for h_d in _combinations(pool, d_size):
                miss_sum = 0.0
                bad = False
                miss_ids = list(fixed_ids)
                for i in pool:
                    if i not in h_d:
                        if miss_child[i] is None:
                            bad = True
                            break
                        miss_sum += miss_l[i]
                        miss_ids.append(miss_id[i])
                if bad:
                    had_skip = True
                    continue
                if d_size == 0:
                    assigns = _EMPTY_ASSIGNMENT
                elif d_size == 1:
                    assigns = det_single[h_d[0]]
                elif d_size == 2:
                    o1, o2 = det_opts[h_d[0]], det_opts[h_d[1]]
                    assigns = [
                        ((j1, j2), lv1 + lv2, (c1, c2))
                        for j1, lv1, c1 in o1
                        for j2, lv2, c2 in o2
                        if j1 != j2
                    ]
                elif d_size == 3:
                    o1, o2, o3 = det_opts[h_d[0]], det_opts[h_d[1]], det_opts[h_d[2]]
                    assigns = [
                        ((j1, j2, j3), lv1 + lv2 + lv3, (c1, c2, c3))
                        for j1, lv1, c1 in o1
                        for j2, lv2, c2 in o2
                        if j1 != j2
                        for j3, lv3, c3 in o3
                        if j3 != j1 and j3 != j2
                    ]
                else:
                    assigns = _assignments(h_d, det_opts)
                n_free = nz - d_size
                head = base + miss_sum + d_size * l1mpfa
                if not zero_pfa:
                    head += n_free * lpfa
                for js, det_sum, det_ids in assigns:
                    base_ids = tuple(_sorted(miss_ids + list(det_ids)))
                    rem_b = tuple(j for j in birthable if j not in js)
                    entries.append((head + det_sum, base_ids, rem_b, n_free))
        for n in range(n_max + 1):
            lc = lcard[n]
            if n == 0:
                fa_dead = zero_pfa and nz > 0
                for partial, base_ids, rem_b, n_free in entries:
                    logw = NEG_INF if fa_dead and n_free else partial + lc
                    prev = acc_get(base_ids)
                    acc[base_ids] = logw if prev is None else _logaddexp(prev, logw)
                continue
            b_gain = lc + n * (l1mpfa if zero_pfa else l1mpfa - lpfa)
            # Newborn paths start at the current scan, so their ids rank
            # after every surviving-track child: appended keys stay sorted.
            if n == 1:
                for partial, base_ids, rem_b, n_free in entries:
                    head = partial + b_gain
                    if zero_pfa and n_free > 1:
                        head = NEG_INF
                    for j in rem_b:
                        key_ids = base_ids + (birth_id[j],)
                        logw = head + birth_l[j]
                        prev = acc_get(key_ids)
                        acc[key_ids] = logw if prev is None else _logaddexp(prev, logw)
                continue
            for partial, base_ids, rem_b, n_free in entries:
                if n > len(rem_b):
                    continue
                dead = zero_pfa and n_free - n > 0
                for born in _combinations(rem_b, n):
                    logw = partial + b_gain
                    for j in born:
                        logw += birth_l[j]
                    if dead:
                        logw = NEG_INF
                    key_ids = base_ids + tuple(birth_id[j] for j in born)
                    prev = acc_get(key_ids)
                    acc[key_ids] = logw if prev is None else _logaddexp(prev, logw)

    if not acc:
        raise DegenerateUpdateError("no admissible association has a defined posterior")
    logs = np.fromiter(acc.values(), dtype=float, count=len(acc))
    m = float(np.max(logs))
    if m == NEG_INF:
        raise DegenerateUpdateError("all association weights are zero")
    w = np.exp(logs - m)
    w /= w.sum()

    get_path = [t.path for t in children].__getitem__
    # tuple.__new__ skips the generated named-tuple constructor; this loop
    # runs once per posterior hypothesis and dominates large exact updates.
    _new, _H, _tuple, _map = tuple.__new__, Hypothesis, tuple, map
    hypotheses = [
        _new(_H, (_tuple(_map(get_path, key)), wi))
        for key, wi in zip(acc.keys(), w.tolist())
    ]
    if had_skip:
        referenced: set[int] = set()
        for key in acc.keys():
            referenced.update(key)
        table = {children[i].path: children[i] for i in sorted(referenced)}
    else:
        table = {t.path: t for t in children}
    return FilterState(scan=scan, tracks=table, hypotheses=hypotheses)


_EMPTY_ASSIGNMENT = (((), 0.0, ()),)


def _assignments(
    h_d: tuple[int, ...],
    det_opts: list[list[tuple[int, float, int]]],
) -> list[tuple[tuple[int, ...], float, tuple[int, ...]]]:
    """Every bijection from the detected tracks to distinct allowed observations.

    Returns (used observation indexes, summed log likelihood, child ids).
    """
    out: list[tuple[tuple[int, ...], float, tuple[int, ...]]] = []
    if not h_d:
        return list(_EMPTY_ASSIGNMENT)

    def rec(pos: int, used: tuple[int, ...], acc_sum: float, acc_ids: tuple[int, ...]) -> None:
        if pos == len(h_d):
            out.append((used, acc_sum, acc_ids))
            return
        for j, lv, cid in det_opts[h_d[pos]]:
            if j not in used:
                rec(pos + 1, used + (j,), acc_sum + lv, acc_ids + (cid,))

    rec(0, (), 0.0, ())
    return out
