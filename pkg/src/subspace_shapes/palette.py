"""Fixed categorical colors keyed by cluster id."""

from __future__ import annotations

import numpy as np

# tab10-style palette; wraps around for >10 clusters.
_COLORS = np.array(
    [
        [0.122, 0.467, 0.706],
        [1.000, 0.498, 0.055],
        [0.173, 0.627, 0.173],
        [0.839, 0.153, 0.157],
        [0.580, 0.404, 0.741],
        [0.549, 0.337, 0.294],
        [0.890, 0.467, 0.761],
        [0.498, 0.498, 0.498],
        [0.737, 0.741, 0.133],
        [0.090, 0.745, 0.812],
    ]
)


def cluster_color(cluster_id: int) -> np.ndarray:
    """Stable RGB in [0,1] for a cluster id."""
    return _COLORS[cluster_id % len(_COLORS)].copy()
