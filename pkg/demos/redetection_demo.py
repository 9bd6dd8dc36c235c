"""Train the incremental SVM detector and let it find a planted target.

One confident frame's worth of IOU-labeled samples is enough for the
detector to rank the true target first in a six-times-target search region,
even when the scan starts well away from it.
"""

import numpy as np

from longtrack import redetect, synth
from longtrack.boxes import Box, iou
from longtrack.incsvm import IncrementalSVM

rng = np.random.default_rng(11)
frame = rng.integers(96, 160, size=(240, 320, 3)).astype(np.uint8)
patch = synth._target_patch(synth._target_field(rng, 40), 40)
frame[80:120, 100:140] = patch
target = Box(100, 80, 40, 40)

svm = IncrementalSVM()
redetect.train_detector(svm, frame, target, rng)
sets = svm.margin_sets()
print(f"detector trained: {svm.n_samples} samples "
      f"(S1={len(sets['S1'])}, S2={len(sets['S2'])}, R={len(sets['R'])})")
print(f"score at the target: {svm.score(redetect.features_for_boxes(frame, [target])[0]):+.3f}")

# scan from a center 60 px away, as the tracker would after losing the target
search_center = (target.center[0] + 60, target.center[1] + 25)
proposals = redetect.propose(svm, frame, search_center, (40, 40), k=5)
print(f"scanning a {6 * 40} px region around {search_center}:")
for rank, (box, score) in enumerate(proposals, start=1):
    print(f"  proposal {rank}: ({box.x:5.1f},{box.y:5.1f}) "
          f"score {score:+.3f} IOU with target {iou(box, target):.2f}")
assert iou(proposals[0][0], target) >= 0.8
print("top proposal sits on the planted target")
