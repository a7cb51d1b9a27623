"""Simulate recommender bandits that know different parts of a user's
preferences and irrationalities, and measure watch rate against the
user's own utility."""

from .agents import AgentKind, AgentState, make_agent, observe, select_video
from .domain_model import (
    Outcome,
    UserProfile,
    VideoProfile,
    VideoTimeline,
    average_timeline,
    distance_sq,
    human_reward,
    watch_probability,
)
from .environment import DailyPool, EnvConfig, Revelation
from .inference import KnowledgeSpec, ParticleSet
from .simulator import (
    EpisodeRecord,
    ExperimentConfig,
    SeriesPoint,
    run_experiment,
    run_user_episode,
    smooth_series,
)

__version__ = "0.1.0"
