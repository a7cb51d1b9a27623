"""Particle posterior over the hidden user profile.

A fixed set of candidate users is drawn from the uniform prior (with any
known coordinates pinned to the truth) and carries log-weights that are
updated on every watch / no-watch observation. Weights are never
renormalised: only comparisons between candidate videos matter.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from .domain_model import (
    N_BLOCK,
    N_FEATURES,
    Outcome,
    UserProfile,
    VideoProfile,
    rowwise_watch_probability,
    weighted_watch_scores,
)
from .environment import RandomStream, Revelation

PREFERENCE_INDICES = tuple(range(N_BLOCK))
IRRATIONALITY_INDICES = tuple(range(N_BLOCK, N_FEATURES))


@dataclass(frozen=True)
class KnowledgeSpec:
    known_preferences: bool = False
    known_irrationalities: bool = False
    revealed: frozenset[tuple[int, float]] = frozenset()

    def __post_init__(self) -> None:
        seen: dict[int, float] = {}
        for index, value in self.revealed:
            if not 0 <= index < N_FEATURES:
                raise ValueError(f"revealed index {index} outside [0, {N_FEATURES - 1}]")
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"revealed value {value} outside [0, 1]")
            if seen.setdefault(index, value) != value:
                raise ValueError(f"conflicting revealed values for index {index}")
        object.__setattr__(self, "revealed", frozenset(self.revealed))

    def pinned(self, truth: UserProfile | None = None) -> dict[int, float]:
        """Map of clamped coordinate -> value.

        Block knowledge needs ``truth`` to supply the values; revealed pairs
        carry their own.
        """
        out: dict[int, float] = dict(self.revealed)
        blocks = []
        if self.known_preferences:
            blocks.append(PREFERENCE_INDICES)
        if self.known_irrationalities:
            blocks.append(IRRATIONALITY_INDICES)
        if blocks and truth is None:
            raise ValueError("truth is required to pin a known block")
        for block in blocks:
            vec = truth.vector
            for i in block:
                out[i] = float(vec[i])
        return out

    def with_revelation(self, rev: Revelation) -> "KnowledgeSpec":
        return replace(self, revealed=self.revealed | {(rev.feature_index, rev.value)})

    def swapped(self) -> "KnowledgeSpec":
        """Knowledge with preference and irrationality roles exchanged."""
        return KnowledgeSpec(
            known_preferences=self.known_irrationalities,
            known_irrationalities=self.known_preferences,
            revealed=frozenset(((i + N_BLOCK) % N_FEATURES, v) for i, v in self.revealed),
        )


@dataclass(frozen=True, eq=False)
class ParticleSet:
    """Candidate user profiles (n, 10) with their log-weights (n,).

    ``resets`` counts how often every particle was eliminated and the weights
    had to be restarted from uniform.
    """

    profiles: NDArray[np.float64]
    log_weights: NDArray[np.float64]
    knowledge: KnowledgeSpec = field(default_factory=KnowledgeSpec)
    resets: int = 0

    def __post_init__(self) -> None:
        if self.profiles.ndim != 2 or self.profiles.shape[1] != N_FEATURES:
            raise ValueError(f"profiles must have shape (n, {N_FEATURES}), got {self.profiles.shape}")
        if self.log_weights.shape != (self.profiles.shape[0],):
            raise ValueError("one log-weight per particle is required")
        if np.any(np.isnan(self.log_weights)) or np.any(self.log_weights == np.inf):
            raise ValueError("log-weights must be finite or -inf")
        for arr in (self.profiles, self.log_weights):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return self.profiles.shape[0]

    @property
    def live(self) -> NDArray[np.bool_]:
        return np.isfinite(self.log_weights)

    def relative_weights(self) -> NDArray[np.float64]:
        """exp(log_weight - max live log_weight); eliminated particles get 0."""
        top = self.log_weights.max()
        if top == -np.inf:
            raise ValueError("particle set has no live particles")
        return np.exp(self.log_weights - top)

    def normalized_weights(self) -> NDArray[np.float64]:
        w = self.relative_weights()
        return w / w.sum()

    def mean_profile(self) -> NDArray[np.float64]:
        return self.normalized_weights() @ self.profiles

    def particle(self, i: int) -> UserProfile:
        return UserProfile.from_vector(self.profiles[i])


def _pin(profiles: NDArray[np.float64], pinned: dict[int, float]) -> None:
    for index, value in pinned.items():
        profiles[:, index] = value


def init_particles(
    knowledge: KnowledgeSpec,
    truth: UserProfile,
    stream: RandomStream,
    n: int = 1000,
) -> ParticleSet:
    """Draw ``n`` candidate users from the uniform prior conditioned on ``knowledge``.

    A full (n, 10) block of uniforms is always drawn, then the known
    coordinates are overwritten, so every knowledge level consumes the
    stream identically.
    """
    if n < 1:
        raise ValueError(f"need at least one particle, got {n}")
    pinned = knowledge.pinned(truth)
    truth_vec = truth.vector
    for index, value in knowledge.revealed:
        if truth_vec[index] != value:
            raise ValueError(f"revealed value for index {index} disagrees with the true profile")
    profiles = np.array(stream.random((n, N_FEATURES)), dtype=np.float64)
    _pin(profiles, pinned)
    return ParticleSet(profiles, np.zeros(n), knowledge)


def observation_log_likelihood(
    profiles: NDArray[np.float64], video: NDArray[np.float64], watched_full: bool
) -> NDArray[np.float64]:
    """ln q (watched) or ln(1 - q) (not watched) for every particle row."""
    q = rowwise_watch_probability(profiles, video)
    with np.errstate(divide="ignore"):
        return np.log(q) if watched_full else np.log1p(-q)


def _with_weights(ps: ParticleSet, log_weights: NDArray[np.float64]) -> ParticleSet:
    resets = ps.resets
    if not np.any(np.isfinite(log_weights)):
        log_weights = np.zeros_like(log_weights)
        resets += 1
    return replace(ps, log_weights=log_weights, resets=resets)


def update_weights(ps: ParticleSet, video: VideoProfile, outcome: Outcome) -> ParticleSet:
    """Bayesian reweighting on one observed outcome, accumulated in log space."""
    ll = observation_log_likelihood(ps.profiles, video.vector, outcome.watched_full)
    return _with_weights(ps, ps.log_weights + ll)


def batch_log_weights(
    profiles: NDArray[np.float64],
    history: Iterable[tuple[NDArray[np.float64], bool]],
) -> NDArray[np.float64]:
    """Log-likelihood of a whole (video, watched) history for each particle."""
    total = np.zeros(profiles.shape[0])
    for video, watched in history:
        total = total + observation_log_likelihood(profiles, video, watched)
    return total


def reweighted(ps: ParticleSet, history: Sequence[tuple[NDArray[np.float64], bool]]) -> ParticleSet:
    """``ps`` with its log-weights replaced by the batch likelihood of ``history``."""
    return _with_weights(ps, batch_log_weights(ps.profiles, history))


def apply_revelation(ps: ParticleSet, rev: Revelation) -> ParticleSet:
    """Pin the revealed coordinate in every particle; weights are untouched."""
    profiles = ps.profiles.copy()
    profiles[:, rev.feature_index] = rev.value
    return replace(ps, profiles=profiles, knowledge=ps.knowledge.with_revelation(rev))


def estimate_pool(ps: ParticleSet, videos: NDArray[np.float64]) -> NDArray[np.float64]:
    """Unnormalised posterior watch-probability score for each row of ``videos``."""
    return weighted_watch_scores(ps.profiles, videos, ps.relative_weights())


def estimate_watch_probability(ps: ParticleSet, video: VideoProfile) -> float:
    """sum_i exp(lw_i - max lw) * q_i(video)."""
    return float(estimate_pool(ps, video.vector[None, :])[0])
