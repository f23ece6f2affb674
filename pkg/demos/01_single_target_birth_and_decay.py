"""How a single target's presence probability evolves.

A target that may or may not be inside the scene is described by a presence
probability plus a Gaussian-mixture state density. Watch presence decay
under prediction and miss-detections, then snap to one on a detection.
"""

import numpy as np

import disptrack as dt

motion = dt.MotionModel(F=[[1.0]], Q=[[0.2]], p_s=0.9)
sensor = dt.SensorModel(H=[[1.0]], R=[[0.5]], p_d=0.6, p_fa=0.1)

target = dt.AugmentedDistribution(
    presence=1.0,
    spatial=(dt.GaussianComponent(1.0, np.array([0.0]), np.array([[1.0]])),),
)

print("scan  event      presence  mean    std")
print(f"   0  detected   {target.presence:8.4f}  {target.spatial[0].mean[0]:6.3f}"
      f"  {np.sqrt(target.spatial[0].cov[0, 0]):.3f}")

for scan in range(1, 6):
    target = dt.predict_distribution(target, motion)
    after_predict = target.presence
    target = dt.update_distribution(target, dt.MISSED, sensor)
    c = target.spatial[0]
    print(f"   {scan}  missed     {target.presence:8.4f}  {c.mean[0]:6.3f}"
          f"  {np.sqrt(c.cov[0, 0]):.3f}   (predicted presence was {after_predict:.4f})")

# A detection ends the drought: presence returns to certainty and the
# state density tightens around the observation.
target = dt.predict_distribution(target, motion)
z = dt.Observation((6, 0), np.array([1.8]))
target = dt.update_distribution(target, z, sensor)
c = target.spatial[0]
print(f"   6  detected   {target.presence:8.4f}  {c.mean[0]:6.3f}  {np.sqrt(c.cov[0, 0]):.3f}")

print()
print("A newborn track created from an appearing-target prior is present for sure:")
birth = dt.BirthModel(
    cardinality=[0.7, 0.3],
    spatial=dt.AugmentedDistribution(
        1.0, (dt.GaussianComponent(1.0, np.array([0.0]), np.array([[100.0]])),)
    ),
)
newborn = dt.birth_posterior(birth, dt.Observation((0, 0), np.array([5.0])), sensor)
c = newborn.spatial[0]
print(f"      presence {newborn.presence:.1f}, mean {c.mean[0]:.4f}, cov {c.cov[0, 0]:.4f}")
