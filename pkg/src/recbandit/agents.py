"""The six recommendation systems and their observation hooks."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .domain_model import (
    MISMATCH_PENALTY,
    N_BLOCK,
    WATCH_REWARD,
    Outcome,
    UserProfile,
    VideoProfile,
    pairwise_watch_probability,
    rowwise_distance_sq,
)
from .environment import DailyPool, RandomStream, Revelation
from .inference import (
    KnowledgeSpec,
    ParticleSet,
    apply_revelation,
    estimate_pool,
    init_particles,
    reweighted,
    update_weights,
)


class AgentKind(str, enum.Enum):
    IGNORANT = "Ignorant"
    KNOWS_PREFERENCES = "KnowsPreferences"
    KNOWS_IRRATIONALITIES = "KnowsIrrationalities"
    OMNISCIENT = "Omniscient"
    ALIGNED = "Aligned"
    GROUNDED = "Grounded"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str) -> "AgentKind":
        key = name.strip().replace("_", "").replace("-", "").lower()
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        raise ValueError(f"unknown agent kind {name!r}; expected one of {[k.value for k in cls]}")

    @property
    def has_posterior(self) -> bool:
        return self not in (AgentKind.OMNISCIENT, AgentKind.ALIGNED)

    def knowledge(self) -> KnowledgeSpec:
        return KnowledgeSpec(
            known_preferences=self is AgentKind.KNOWS_PREFERENCES,
            known_irrationalities=self is AgentKind.KNOWS_IRRATIONALITIES,
        )


class ContractViolation(ValueError):
    """An agent hook was called with inputs its contract forbids."""


@dataclass(frozen=True, eq=False)
class AgentState:
    """One agent's view of one user.

    Omniscient and Aligned hold ``truth`` and no posterior. Posterior agents
    read ``truth`` only to pin the blocks they are entitled to know when
    particles are regenerated.
    """

    kind: AgentKind
    truth: UserProfile
    posterior: ParticleSet | None = None
    cumulative_reward: int = 0
    regenerate_particles_daily: bool = False
    aligned_expected_utility: bool = False
    particle_stream: RandomStream | None = field(default=None, repr=False)
    history: tuple[tuple[np.ndarray, bool], ...] = ()


def make_agent(
    kind: AgentKind,
    truth: UserProfile,
    particle_stream: RandomStream | None = None,
    n_particles: int = 1000,
    *,
    regenerate_particles_daily: bool = False,
    aligned_expected_utility: bool = False,
) -> AgentState:
    posterior = None
    if kind.has_posterior:
        if particle_stream is None:
            raise ValueError(f"{kind} needs a particle stream")
        posterior = init_particles(kind.knowledge(), truth, particle_stream, n_particles)
    return AgentState(
        kind=kind,
        truth=truth,
        posterior=posterior,
        regenerate_particles_daily=regenerate_particles_daily,
        aligned_expected_utility=aligned_expected_utility,
        particle_stream=particle_stream,
    )


def selection_scores(agent: AgentState, pool: DailyPool) -> np.ndarray:
    """Score per pool video; the agent picks the first maximum."""
    videos = pool.features
    if agent.kind.has_posterior:
        return estimate_pool(agent.posterior, videos)
    truth = agent.truth.vector
    if agent.kind is AgentKind.OMNISCIENT:
        return pairwise_watch_probability(truth[None, :], videos)[0]
    d_r = rowwise_distance_sq(videos[:, :N_BLOCK], truth[:N_BLOCK])
    if agent.aligned_expected_utility:
        q = pairwise_watch_probability(truth[None, :], videos)[0]
        return q * (WATCH_REWARD - MISMATCH_PENALTY * d_r)
    return -d_r


def select_video(agent: AgentState, pool: DailyPool) -> int:
    """Greedy choice; ties go to the lowest pool index."""
    if len(pool) == 0:
        raise ValueError("cannot select from an empty pool")
    return int(np.argmax(selection_scores(agent, pool)))


def observe(
    agent: AgentState,
    video: VideoProfile,
    outcome: Outcome,
    revelation: Revelation | None = None,
) -> AgentState:
    """Fold one day's outcome (and, for Grounded rejections, one revelation) into the agent."""
    expects_revelation = agent.kind is AgentKind.GROUNDED and not outcome.watched_full
    if revelation is not None and not expects_revelation:
        raise ContractViolation(f"{agent.kind} cannot receive a revelation on this outcome")
    if revelation is None and expects_revelation:
        raise ContractViolation("Grounded agent must receive a revelation after a rejection")

    reward = agent.cumulative_reward + int(outcome.watched_full)
    if not agent.kind.has_posterior:
        return replace(agent, cumulative_reward=reward)

    posterior = agent.posterior
    history = agent.history
    if agent.regenerate_particles_daily:
        history = history + ((video.vector, outcome.watched_full),)
        knowledge = posterior.knowledge
        if revelation is not None:
            knowledge = knowledge.with_revelation(revelation)
        fresh = init_particles(knowledge, agent.truth, agent.particle_stream, len(posterior))
        posterior = reweighted(replace(fresh, resets=posterior.resets), history)
    else:
        posterior = update_weights(posterior, video, outcome)
        if revelation is not None:
            posterior = apply_revelation(posterior, revelation)
    return replace(agent, posterior=posterior, cumulative_reward=reward, history=history)
