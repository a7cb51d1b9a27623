"""Profiles, distances, watch probability and human reward.

Every profile is split into a 5-component preference block (``R``) and a
5-component irrationality block (``p``). Squared distances are used
throughout; nothing downstream ever needs the square root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np
from numpy.typing import ArrayLike, NDArray

N_BLOCK = 5
N_FEATURES = 2 * N_BLOCK

WATCH_REWARD = 10.0
MISMATCH_PENALTY = 100.0


def feature_vec5(values: ArrayLike) -> NDArray[np.float64]:
    """Validate and freeze a 5-component feature block in [0, 1]."""
    arr = np.array(values, dtype=np.float64)
    if arr.shape != (N_BLOCK,):
        raise ValueError(f"feature block must have exactly {N_BLOCK} components, got shape {arr.shape}")
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise ValueError(f"feature components must lie in [0, 1], got {arr.tolist()}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class _Profile:
    R: NDArray[np.float64]
    p: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "R", feature_vec5(self.R))
        object.__setattr__(self, "p", feature_vec5(self.p))

    @classmethod
    def from_vector(cls, values: ArrayLike):
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != (N_FEATURES,):
            raise ValueError(f"profile vector must have {N_FEATURES} components, got shape {arr.shape}")
        return cls(arr[:N_BLOCK], arr[N_BLOCK:])

    @property
    def vector(self) -> NDArray[np.float64]:
        """The 10 components, preference block first."""
        return np.concatenate([self.R, self.p])

    def swapped(self):
        """Same profile with the preference and irrationality blocks exchanged."""
        return type(self)(self.p, self.R)

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return bool(np.array_equal(self.R, other.R) and np.array_equal(self.p, other.p))

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.R.tobytes(), self.p.tobytes()))


class UserProfile(_Profile):
    """Hidden user: preference affinities ``R`` and irrationality susceptibilities ``p``."""


class VideoProfile(_Profile):
    """Averaged video description: preference features ``R`` and tricks ``p``."""


@dataclass(frozen=True)
class VideoTimeline:
    """Per-segment feature values of a video before averaging.

    ``segments`` has shape (T, 10): five preference features followed by five
    irrationality features for each of the T segments.
    """

    segments: NDArray[np.float64]

    def __post_init__(self) -> None:
        arr = np.array(self.segments, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] != N_FEATURES:
            raise ValueError(f"timeline must have shape (T>=1, {N_FEATURES}), got {arr.shape}")
        if not np.all((arr >= 0.0) & (arr <= 1.0)):
            raise ValueError("timeline entries must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "segments", arr)


@dataclass(frozen=True)
class Outcome:
    watched_full: bool


def distance_sq(a: Sequence[float] | NDArray[np.float64], b: Sequence[float] | NDArray[np.float64]) -> float:
    """Squared Euclidean distance between two feature blocks."""
    return float(sum((float(x) - float(y)) ** 2 for x, y in zip(a, b, strict=True)))


def watch_probability(user: UserProfile, video: VideoProfile) -> float:
    """Probability that ``user`` watches ``video`` in full: exp(-dR^2 - dp^2)."""
    return math.exp(-distance_sq(user.R, video.R) - distance_sq(user.p, video.p))


def human_reward(user: UserProfile, video: VideoProfile, outcome: Outcome) -> float:
    """Utility to the user, with the not-watching alternative normalised to 0."""
    if not outcome.watched_full:
        return 0.0
    return WATCH_REWARD - MISMATCH_PENALTY * distance_sq(user.R, video.R)


def average_timeline(t: VideoTimeline) -> VideoProfile:
    mean = t.segments.mean(axis=0)
    # rounding can push a mean of in-range values a hair outside [0, 1]
    mean = np.clip(mean, 0.0, 1.0)
    return VideoProfile(mean[:N_BLOCK], mean[N_BLOCK:])


# -- vectorised kernels -----------------------------------------------------


def _sq_norms(a: NDArray[np.float64]) -> NDArray[np.float64]:
    # column by column: elementwise ops round identically wherever the data sits
    total = a[:, 0] * a[:, 0]
    for k in range(1, a.shape[1]):
        total = total + a[:, k] * a[:, k]
    return total


@numba.njit(cache=True)
def _block_dsq(u, v, lo, hi):
    acc = 0.0
    for k in range(lo, hi):
        t = u[k] - v[k]
        acc += t * t
    return acc


@numba.njit(cache=True)
def _weighted_scores(users, videos, weights):
    n, m = users.shape[0], videos.shape[0]
    out = np.zeros(m)
    for j in range(m):
        s = 0.0
        for i in range(n):
            if weights[i] == 0.0:
                continue
            d = _block_dsq(users[i], videos[j], 0, 5) + _block_dsq(users[i], videos[j], 5, 10)
            s += weights[i] * np.exp(-d)
        out[j] = s
    return out


@numba.njit(cache=True)
def _pairwise_q(users, videos):
    n, m = users.shape[0], videos.shape[0]
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            d = _block_dsq(users[i], videos[j], 0, 5) + _block_dsq(users[i], videos[j], 5, 10)
            out[i, j] = np.exp(-d)
    return out


def _as_rows(x: NDArray[np.float64]) -> NDArray[np.float64]:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != N_FEATURES:
        raise ValueError(f"expected an (n, {N_FEATURES}) array, got shape {x.shape}")
    return x


def pairwise_watch_probability(users: NDArray[np.float64], videos: NDArray[np.float64]) -> NDArray[np.float64]:
    """(n, m) watch probabilities for (n, 10) user rows against (m, 10) video rows."""
    return _pairwise_q(_as_rows(users), _as_rows(videos))


def weighted_watch_scores(
    users: NDArray[np.float64], videos: NDArray[np.float64], weights: NDArray[np.float64]
) -> NDArray[np.float64]:
    """sum_i weights[i] * q(users[i], videos[j]) for every video j.

    Each entry is accumulated over users in a fixed order from exact
    per-coordinate differences, so a video's score does not depend on its
    position in the pool, and swapping the two blocks of every input leaves
    the result bit-identical. Zero-weight users are skipped.
    """
    users, videos = _as_rows(users), _as_rows(videos)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if weights.shape != (users.shape[0],):
        raise ValueError("one weight per user row is required")
    return _weighted_scores(users, videos, weights)


def rowwise_distance_sq(a: NDArray[np.float64], b: NDArray[np.float64]) -> NDArray[np.float64]:
    """Exact squared distances between rows of ``a`` (n, k) and one vector ``b`` (k,)."""
    return _sq_norms(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))


def rowwise_watch_probability(users: NDArray[np.float64], video: NDArray[np.float64]) -> NDArray[np.float64]:
    """Watch probability of each (n, 10) user row for one 10-component video."""
    d = rowwise_distance_sq(users[:, :N_BLOCK], video[:N_BLOCK])
    d += rowwise_distance_sq(users[:, N_BLOCK:], video[N_BLOCK:])
    return np.exp(-d)
