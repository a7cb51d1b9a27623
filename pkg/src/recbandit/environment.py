"""Random users, daily video pools, watch outcomes and grounded revelations.

All randomness comes from numpy ``Generator`` substreams derived from one
master seed. A substream is identified by a key tuple such as
``(user_index, Purpose.POOL, day)``; the key is fed to ``SeedSequence`` as a
spawn key, so streams never depend on the order in which they are created.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Protocol

import numpy as np
from numpy.typing import NDArray

from .domain_model import (
    N_BLOCK,
    N_FEATURES,
    Outcome,
    UserProfile,
    VideoProfile,
    watch_probability,
)


class RandomStream(Protocol):
    def random(self, size=None): ...

    def integers(self, low, high=None, size=None): ...


class Purpose(enum.IntEnum):
    USER = 0
    POOL = 1
    OUTCOME = 2
    PARTICLES = 3
    REVEAL = 4


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``key`` under ``master_seed``."""
    if master_seed < 0 or master_seed >= 2**64:
        raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class EnvConfig:
    videos_per_day: int = 1000
    days: int = 50
    timeline_segments: int = 1
    master_seed: int = 0

    def __post_init__(self) -> None:
        for name in ("videos_per_day", "days", "timeline_segments"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(f"master_seed must be in [0, 2**64), got {self.master_seed!r}")


@dataclass(frozen=True, eq=False)
class DailyPool:
    """The videos on offer on one day, stored as a (videos_per_day, 10) array."""

    features: NDArray[np.float64]
    day_index: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.features, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != N_FEATURES or arr.shape[0] < 1:
            raise ValueError(f"pool features must have shape (n>=1, {N_FEATURES}), got {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "features", arr)

    @classmethod
    def from_videos(cls, videos: list[VideoProfile], day_index: int = 0) -> "DailyPool":
        return cls(np.stack([v.vector for v in videos]), day_index)

    @property
    def videos(self) -> list[VideoProfile]:
        return list(self)

    def __len__(self) -> int:
        return self.features.shape[0]

    def __getitem__(self, i: int) -> VideoProfile:
        return VideoProfile.from_vector(self.features[i])

    def __iter__(self) -> Iterator[VideoProfile]:
        return (self[i] for i in range(len(self)))

    def digest(self) -> bytes:
        return self.features.tobytes()


@dataclass(frozen=True)
class Revelation:
    feature_index: int
    value: float

    def __post_init__(self) -> None:
        if not 0 <= self.feature_index < N_FEATURES:
            raise ValueError(f"feature_index must be in [0, {N_FEATURES - 1}], got {self.feature_index}")
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"revealed value must be in [0, 1], got {self.value}")


def sample_user(stream: RandomStream) -> UserProfile:
    """Draw all ten components independently and uniformly on [0, 1]."""
    draws = np.asarray(stream.random(N_FEATURES), dtype=np.float64)
    return UserProfile(draws[:N_BLOCK], draws[N_BLOCK:])


def sample_daily_pool(stream: RandomStream, cfg: EnvConfig, day: int) -> DailyPool:
    """Generate ``cfg.videos_per_day`` videos by averaging uniform timelines.

    With a single timeline segment the video components are themselves
    uniform; longer timelines concentrate them around 0.5.
    """
    n, t = cfg.videos_per_day, cfg.timeline_segments
    if t == 1:
        features = stream.random((n, N_FEATURES))
    else:
        timelines = stream.random((n, t, N_FEATURES))
        features = np.clip(timelines.mean(axis=1), 0.0, 1.0)
    return DailyPool(features, day)


def simulate_outcome(stream: RandomStream, user: UserProfile, video: VideoProfile) -> Outcome:
    """Bernoulli draw: watched in full iff a uniform draw falls below the watch probability."""
    return Outcome(bool(stream.random() < watch_probability(user, video)))


def reveal_feature(stream: RandomStream, user: UserProfile) -> Revelation:
    """Reveal one true profile component chosen uniformly among all ten (repeats allowed)."""
    index = int(stream.integers(0, N_FEATURES))
    return Revelation(index, float(user.vector[index]))
