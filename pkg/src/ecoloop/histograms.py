"""Equal-width histograms and KL divergence over a fixed reference range.

All histograms in a run share one set of bin edges derived from the
training-data range, so interval snapshots, model references, and
archived training distributions stay directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BinMismatchError

SMOOTHING = 1e-6  # Laplace pseudo-count per bin


@dataclass(frozen=True, eq=False)
class Histogram:
    """Binned probability distribution: `edges` has len(probs)+1 entries."""

    edges: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "edges", np.asarray(self.edges, dtype=float))
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=float))
        if self.edges.ndim != 1 or self.probs.ndim != 1:
            raise ValueError("edges and probs must be 1-d")
        if len(self.edges) != len(self.probs) + 1:
            raise ValueError("need len(probs)+1 edges")
        if abs(float(self.probs.sum()) - 1.0) > 1e-9:
            raise ValueError("probs must sum to 1 within 1e-9")

    @property
    def bins(self) -> int:
        return len(self.probs)

    def same_edges(self, other: "Histogram") -> bool:
        return self.edges.shape == other.edges.shape and bool(
            np.array_equal(self.edges, other.edges)
        )


def histogram_edges(values, bins: int) -> np.ndarray:
    """Equal-width edges spanning the range of `values` (the training data)."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot derive edges from an empty sequence")
    lo, hi = float(arr.min()), float(arr.max())
    if hi <= lo:
        hi = lo + 1.0  # degenerate range: give bins nonzero width
    return np.linspace(lo, hi, bins + 1)


def estimate_histogram(values, edges) -> Histogram:
    """Bin `values` against fixed edges, clamping out-of-range values
    into the end bins, then Laplace-smooth and renormalize."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("need at least one value")
    edges = np.asarray(edges, dtype=float)
    clipped = np.clip(arr, edges[0], edges[-1])
    counts, _ = np.histogram(clipped, bins=edges)
    probs = (counts + SMOOTHING) / (counts.sum() + SMOOTHING * len(counts))
    return Histogram(edges=edges, probs=probs)


def kl_divergence(p: Histogram, q: Histogram) -> float:
    """KL(p || q) in nats; requires bin-compatible, smoothed histograms."""
    if not p.same_edges(q):
        raise BinMismatchError("histograms have different bin edges")
    return float(np.sum(p.probs * np.log(p.probs / q.probs)))
