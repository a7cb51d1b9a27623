"""Scenario presets and the runner that writes CSV + SVG."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .agents import AgentKind
from .config import apply_settings
from .report import atomic_write, csv_text, svg_chart
from .simulator import (
    ALL_AGENTS,
    BASE_AGENTS,
    ExperimentConfig,
    SeriesPoint,
    run_experiment,
    smooth_series,
)

log = logging.getLogger(__name__)

CI_SCALE = {"num_users": 20, "videos_per_day": 200, "particles": 200, "days": 30}


@dataclass(frozen=True)
class Scenario:
    name: str
    agents: tuple[AgentKind, ...]
    metric: str
    title: str
    overrides: dict[str, Any] = field(default_factory=dict)

    def config(self, ci_scale: bool = False, base: ExperimentConfig | None = None) -> ExperimentConfig:
        cfg = base if base is not None else ExperimentConfig()
        settings: dict[str, Any] = {"agent_kinds": list(self.agents), "scenario_name": self.name}
        settings.update(self.overrides)
        if ci_scale:
            settings.update(CI_SCALE)
        return apply_settings(cfg, settings)


SCENARIOS = {
    "fig1_watch_rate": Scenario(
        "fig1_watch_rate", BASE_AGENTS, "mean_watch_rate",
        "Watch rate by agent knowledge", {"smoothing_window": 5},
    ),
    "fig2_human_reward": Scenario(
        "fig2_human_reward", BASE_AGENTS, "mean_human_reward",
        "Human reward by agent knowledge", {"smoothing_window": 5},
    ),
    "fig3_grounded": Scenario(
        "fig3_grounded", ALL_AGENTS, "mean_watch_rate",
        "Watch rate with grounded knowledge", {"smoothing_window": 5},
    ),
    "custom": Scenario("custom", BASE_AGENTS, "mean_watch_rate", "Custom experiment"),
}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}") from None


def scenario_points(cfg: ExperimentConfig, workers: int = 1) -> list[SeriesPoint]:
    return smooth_series(run_experiment(cfg, workers), cfg.smoothing_window)


def run_scenario(
    scenario: Scenario,
    out_dir: str | Path,
    cfg: ExperimentConfig | None = None,
    workers: int = 1,
) -> tuple[Path, Path]:
    """Run ``scenario`` and write ``<name>.csv`` and ``<name>.svg`` into ``out_dir``.

    The output directory is checked before the (possibly long) simulation
    starts, and both files are written atomically.
    """
    out_dir = Path(out_dir)
    if not out_dir.is_dir():
        raise NotADirectoryError(f"output directory does not exist: {out_dir}")
    cfg = cfg if cfg is not None else scenario.config()
    log.info(
        "running %s: %d users x %d days, %d videos/day, %d particles, agents=%s",
        scenario.name, cfg.num_users, cfg.env.days, cfg.env.videos_per_day, cfg.particles,
        ",".join(map(str, cfg.agent_kinds)),
    )
    points = scenario_points(cfg, workers)
    csv_path = atomic_write(out_dir / f"{scenario.name}.csv", csv_text(scenario.name, points))
    svg_path = atomic_write(out_dir / f"{scenario.name}.svg", svg_chart(points, scenario.metric, scenario.title))
    return csv_path, svg_path
