"""GM-PHD bookkeeping and clutter rejection, the way the tracker uses it.

During normal tracking the filter sees one measurement per frame (the
translation estimate) and just maintains its weight. During a re-detection
burst it sees several candidate positions at once; the component that has
been reinforced by a consistent history outweighs components freshly born
on clutter, so the max-weight estimate stays on the true track.
"""

import numpy as np

from longtrack import gmphd

rng = np.random.default_rng(3)
model = gmphd.default_motion_model()
clutter = gmphd.ClutterModel(rate=4.0, area=640.0 * 480.0)

truth = np.array([100.0, 120.0, 3.0, 1.5])
mixture = gmphd.birth_components([truth[:2]])

errors = []
for frame in range(1, 41):
    truth = model.F @ truth
    measurements = [truth[:2] + rng.normal(0, 3, 2)]
    burst = 20 <= frame <= 30
    if burst:  # re-detection-style frame: candidates all over the region
        for _ in range(4):
            measurements.append(truth[:2] + rng.uniform(-150, 150, 2))

    births = gmphd.birth_components(measurements)
    predicted = gmphd.predict(mixture, model, births)
    posterior = gmphd.update(predicted, measurements, model, clutter)
    mixture = gmphd.prune_and_merge(posterior, 1e-5, 4.0, 100)

    (x, y), weight = gmphd.max_weight_estimate(mixture)
    err = float(np.hypot(x - truth[0], y - truth[1]))
    errors.append((err, burst))
    if frame in (5, 19, 20, 25, 30, 31, 40):
        weights = sorted((c.weight for c in mixture), reverse=True)[:2]
        runner_up = f", runner-up {weights[1]:.2f}" if len(weights) > 1 else ""
        kind = "burst " if burst else "normal"
        print(f"frame {frame:2d} [{kind}] {len(mixture):2d} components, "
              f"top weight {weights[0]:.2f}{runner_up}, "
              f"estimate off by {err:4.1f} px")

normal = [e for e, b in errors if not b]
burst_frames = [e for e, b in errors if b]
flips = sum(e > 20 for e in burst_frames)
print(f"\nnormal frames: mean estimate error {np.mean(normal):.1f} px "
      f"(measurement noise sigma = 3 px)")
print(f"burst frames: {flips}/{len(burst_frames)} transient flips onto a "
      f"fresh clutter component")
print("the tracker rejects such flips downstream: a re-detected position "
      "only replaces the estimate when its correlation response clears T_rd")
assert np.mean(normal) < 15.0
