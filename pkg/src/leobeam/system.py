"""One-call assembly of a simulated network instance."""

from __future__ import annotations

from dataclasses import dataclass

from .beams import AnalogBeamformer, Schedule, build_analog_beamformer, effective_channels, schedule_users
from .channel import ChannelStats, build_channel_stats
from .config import SystemConfig
from .geometry import Scenario, generate_scenario


@dataclass(frozen=True)
class System:
    cfg: SystemConfig
    scenario: Scenario
    stats: ChannelStats         # with effective channels filled in
    schedule: Schedule
    analog: AnalogBeamformer
    sigma2: float
    budget: float


def build_system(cfg: SystemConfig, seed: int | None = None) -> System:
    """Scenario, statistical CSI, distance-based schedule and analog beams for ``seed``."""
    scn = generate_scenario(cfg, seed)
    stats = build_channel_stats(cfg, scn)
    sched = schedule_users(scn.distances(), cfg.num_rfc)
    analog = build_analog_beamformer(stats, sched)
    return System(
        cfg=cfg,
        scenario=scn,
        stats=effective_channels(stats, analog),
        schedule=sched,
        analog=analog,
        sigma2=cfg.noise_power_w,
        budget=cfg.power_per_subcarrier_w,
    )
