"""
Checking that towers of covers are good
=======================================

A tower of cubical covers with k >= sqrt(n) intervals per axis should be
(3, s)-good, and the cluster covers over it (4, s')-good. The checkers
sample random subsets of the image and look for a single cover set (or a
single cluster) holding each of them at the matching scale.
"""

import numpy as np

from twomapper import (
    CubicalCoverSpec,
    DbscanParams,
    Lens,
    PointCloud,
    apply_lens,
    bounding_box,
    build_tower,
    check_cluster_cover_good,
    check_good_tower,
    diameter,
)
from twomapper.cover import interval_length

rng = np.random.default_rng(0)
cloud = PointCloud(rng.uniform(0, 1, (400, 2)) * [2.0, 1.0])
image = apply_lens(cloud, Lens.identity())
box = bounding_box(image)

k, g = 3, 0.3
s = float(np.linalg.norm(interval_length(box, k, g)))
diam = float(diameter(image.values))
# Epsilon tower: every level's boxes have diameter equal to its scale.
tower = build_tower(box, CubicalCoverSpec(k, g, 2), np.linspace(s, 4 * diam, 6), mode="eps")

cover = check_good_tower(tower, image, c=3, trials=200, seed=0)
print("cubical tower:", {key: cover.to_dict()[key] for key in ("condition_i", "condition_ii", "condition_iii", "tested")})

clusters = check_cluster_cover_good(tower, cloud, image, DbscanParams(0.15), c=4, trials=200, seed=0)
print(f"cluster covers: passed={clusters.passed}, s'={clusters.resolution:.3f} <= s={s:.3f} <= diam={diam:.3f}")

# Stopping the tower early leaves no level big enough for wide subsets,
# which the checker reports as skipped trials.
short = build_tower(box, CubicalCoverSpec(k, g, 2), [s, 1.2 * s], mode="eps")
truncated = check_good_tower(short, image, c=3, trials=200, seed=0)
print(f"truncated tower: passed={truncated.passed}, skipped {truncated.skipped} of {truncated.trials}")
