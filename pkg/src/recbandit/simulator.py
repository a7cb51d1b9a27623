"""Episodes, cohort experiments and the per-day metric series."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .agents import AgentKind, AgentState, make_agent, observe, select_video
from .domain_model import UserProfile, distance_sq, human_reward
from .environment import (
    DailyPool,
    EnvConfig,
    Purpose,
    RandomStream,
    reveal_feature,
    sample_daily_pool,
    sample_user,
    simulate_outcome,
    substream,
)

BASE_AGENTS = (
    AgentKind.IGNORANT,
    AgentKind.KNOWS_PREFERENCES,
    AgentKind.KNOWS_IRRATIONALITIES,
    AgentKind.OMNISCIENT,
    AgentKind.ALIGNED,
)
ALL_AGENTS = BASE_AGENTS + (AgentKind.GROUNDED,)

_KIND_CODE = {kind: i for i, kind in enumerate(AgentKind)}


@dataclass(frozen=True)
class EpisodeRecord:
    day: int
    chosen_index: int
    watched_full: bool
    agent_reward: int
    human_reward: float
    delta_r_sq: float
    delta_p_sq: float


@dataclass(frozen=True)
class ExperimentConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    num_users: int = 150
    particles: int = 1000
    agent_kinds: tuple[AgentKind, ...] = BASE_AGENTS
    smoothing_window: int = 1
    scenario_name: str = "custom"
    regenerate_particles_daily: bool = False
    aligned_expected_utility: bool = False

    def __post_init__(self) -> None:
        for name in ("num_users", "particles", "smoothing_window"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        kinds = tuple(AgentKind(k) for k in self.agent_kinds)
        if not kinds:
            raise ValueError("agent_kinds must not be empty")
        if len(set(kinds)) != len(kinds):
            raise ValueError("agent_kinds must not repeat")
        object.__setattr__(self, "agent_kinds", kinds)


@dataclass(frozen=True)
class SeriesPoint:
    day: int
    agent: AgentKind
    mean_watch_rate: float
    se_watch_rate: float
    mean_human_reward: float
    se_human_reward: float


def run_episode(
    user: UserProfile,
    agent: AgentState,
    pool_for_day: Callable[[int], DailyPool],
    days: int,
    outcome_stream: RandomStream,
    reveal_stream: RandomStream | None = None,
) -> list[EpisodeRecord]:
    """Run one agent against one user for ``days`` days with explicit streams."""
    records = []
    for d in range(days):
        pool = pool_for_day(d)
        j = select_video(agent, pool)
        video = pool[j]
        outcome = simulate_outcome(outcome_stream, user, video)
        revelation = None
        if agent.kind is AgentKind.GROUNDED and not outcome.watched_full:
            revelation = reveal_feature(reveal_stream, user)
        agent = observe(agent, video, outcome, revelation)
        records.append(
            EpisodeRecord(
                day=d + 1,
                chosen_index=j,
                watched_full=outcome.watched_full,
                agent_reward=int(outcome.watched_full),
                human_reward=human_reward(user, video, outcome),
                delta_r_sq=distance_sq(user.R, video.R),
                delta_p_sq=distance_sq(user.p, video.p),
            )
        )
    return records


def cohort_user(cfg: ExperimentConfig, user_index: int) -> UserProfile:
    return sample_user(substream(cfg.env.master_seed, user_index, Purpose.USER))


def cohort_pool(cfg: ExperimentConfig, user_index: int, day: int) -> DailyPool:
    """Pool shown to ``user_index`` on ``day`` (0-based); shared by every agent kind."""
    stream = substream(cfg.env.master_seed, user_index, Purpose.POOL, day)
    return sample_daily_pool(stream, cfg.env, day)


def run_user_episode(user_index: int, kind: AgentKind, cfg: ExperimentConfig) -> list[EpisodeRecord]:
    """One cohort episode. Users, pools, initial particles and outcome draws
    are keyed by user only (paired across agent kinds); revelations by user
    and kind."""
    kind = AgentKind(kind)
    seed = cfg.env.master_seed
    user = cohort_user(cfg, user_index)
    agent = make_agent(
        kind,
        user,
        substream(seed, user_index, Purpose.PARTICLES),
        cfg.particles,
        regenerate_particles_daily=cfg.regenerate_particles_daily,
        aligned_expected_utility=cfg.aligned_expected_utility,
    )
    return run_episode(
        user,
        agent,
        lambda d: cohort_pool(cfg, user_index, d),
        cfg.env.days,
        outcome_stream=substream(seed, user_index, Purpose.OUTCOME),
        reveal_stream=substream(seed, user_index, Purpose.REVEAL, _KIND_CODE[kind]),
    )


def _episode_arrays(args: tuple[int, AgentKind, ExperimentConfig]) -> np.ndarray:
    user_index, kind, cfg = args
    records = run_user_episode(user_index, kind, cfg)
    return np.array([[r.agent_reward, r.human_reward] for r in records], dtype=np.float64)


def resolve_workers(workers: int) -> int:
    if workers < 0:
        raise ValueError(f"workers must be >= 0, got {workers}")
    return workers or os.cpu_count() or 1


def run_cohort(cfg: ExperimentConfig, workers: int = 1) -> dict[AgentKind, np.ndarray]:
    """Per-kind (num_users, days, 2) arrays of [agent_reward, human_reward].

    Results are assembled by (kind, user) key, so the output does not depend
    on the number of workers or completion order.
    """
    tasks = [(u, kind, cfg) for kind in cfg.agent_kinds for u in range(cfg.num_users)]
    n = resolve_workers(workers)
    if n == 1:
        results = [_episode_arrays(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_episode_arrays, tasks, chunksize=1))
    out = {}
    for k, kind in enumerate(cfg.agent_kinds):
        out[kind] = np.stack(results[k * cfg.num_users : (k + 1) * cfg.num_users])
    return out


def _mean_se(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = x.mean(axis=0)
    if x.shape[0] < 2:
        return mean, np.zeros_like(mean)
    return mean, x.std(axis=0, ddof=1) / np.sqrt(x.shape[0])


def aggregate(cohort: dict[AgentKind, np.ndarray]) -> list[SeriesPoint]:
    points = []
    for kind, arr in cohort.items():
        watch_mean, watch_se = _mean_se(arr[:, :, 0])
        reward_mean, reward_se = _mean_se(arr[:, :, 1])
        for d in range(arr.shape[1]):
            points.append(
                SeriesPoint(
                    day=d + 1,
                    agent=kind,
                    mean_watch_rate=float(watch_mean[d]),
                    se_watch_rate=float(watch_se[d]),
                    mean_human_reward=float(reward_mean[d]),
                    se_human_reward=float(reward_se[d]),
                )
            )
    return points


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[SeriesPoint]:
    """Raw (unsmoothed) per-day, per-agent means and standard errors across users."""
    return aggregate(run_cohort(cfg, workers))


def smooth_series(points: Sequence[SeriesPoint], window: int) -> list[SeriesPoint]:
    """Trailing moving average over at most ``window`` days, per agent.

    Standard errors are averaged the same way as the means.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if window == 1:
        return list(points)
    by_agent: dict[AgentKind, list[SeriesPoint]] = {}
    for p in points:
        by_agent.setdefault(p.agent, []).append(p)
    smoothed: dict[int, SeriesPoint] = {}
    fields = ("mean_watch_rate", "se_watch_rate", "mean_human_reward", "se_human_reward")
    for series in by_agent.values():
        series_sorted = sorted(series, key=lambda p: p.day)
        for i, p in enumerate(series_sorted):
            span = series_sorted[max(0, i - window + 1) : i + 1]
            values = {f: float(np.mean([getattr(q, f) for q in span])) for f in fields}
            smoothed[id(p)] = replace(p, **values)
    return [smoothed[id(p)] for p in points]


def series_for(points: Iterable[SeriesPoint], agent: AgentKind, metric: str) -> np.ndarray:
    """Values of ``metric`` for ``agent`` ordered by day."""
    chosen = sorted((p for p in points if p.agent == agent), key=lambda p: p.day)
    return np.array([getattr(p, metric) for p in chosen])
