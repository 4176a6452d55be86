"""Constellation/terminal geometry and satellite panel frames.

The service area is centred on the north pole of a spherical Earth. The
satellite cap sits at orbit height above the same point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig

# fixed labels for deterministic RNG sub-streams
STREAM_UTS = 1
STREAM_SATS = 2
STREAM_RICIAN = 3
STREAM_SCINT = 4
STREAM_MC = 5


def substream(seed: int, label: int, *index: int) -> np.random.Generator:
    """Independent generator keyed by ``(seed, label, *index)``."""
    return np.random.default_rng([int(seed), int(label), *map(int, index)])


@dataclass(frozen=True)
class Scenario:
    sat_positions: np.ndarray   # (S, 3) ECEF [m]
    panel_frames: np.ndarray    # (S, 3, 3) rows are panel x, y, z axes
    ut_positions: np.ndarray    # (U, 3) on the Earth surface [m]
    rng_seed: int

    @property
    def num_sats(self) -> int:
        return self.sat_positions.shape[0]

    @property
    def num_uts(self) -> int:
        return self.ut_positions.shape[0]

    def distances(self) -> np.ndarray:
        """(S, U) satellite-terminal distances."""
        diff = self.ut_positions[None, :, :] - self.sat_positions[:, None, :]
        return np.linalg.norm(diff, axis=-1)


def sample_cap(rng: np.random.Generator, n: int, radius: float, max_angle: float) -> np.ndarray:
    """Area-uniform points on a spherical cap around +z."""
    cos_min = np.cos(max_angle)
    cos_psi = rng.uniform(cos_min, 1.0, size=n) if max_angle > 0 else np.ones(n)
    azimuth = rng.uniform(0.0, 2 * np.pi, size=n)
    sin_psi = np.sqrt(np.clip(1.0 - cos_psi ** 2, 0.0, None))
    pts = np.stack([sin_psi * np.cos(azimuth), sin_psi * np.sin(azimuth), cos_psi], axis=-1)
    return radius * pts


def panel_frame(sat_position: np.ndarray) -> np.ndarray:
    """Orthonormal panel triad: z towards the Earth core, x normal to the orbital plane.

    The orbital plane is taken as the plane through the satellite, the cap
    centre direction (+z) and the Earth core. A satellite exactly above the
    cap centre uses global x as the plane normal.
    """
    z_axis = -sat_position / np.linalg.norm(sat_position)
    normal = np.cross(np.array([0.0, 0.0, 1.0]), sat_position)
    nrm = np.linalg.norm(normal)
    if nrm < 1e-9 * np.linalg.norm(sat_position):
        x_axis = np.array([1.0, 0.0, 0.0])
        x_axis = x_axis - (x_axis @ z_axis) * z_axis
        x_axis /= np.linalg.norm(x_axis)
    else:
        x_axis = normal / nrm
    y_axis = np.cross(z_axis, x_axis)
    return np.stack([x_axis, y_axis, z_axis])


def generate_scenario(cfg: SystemConfig, seed: int | None = None) -> Scenario:
    """Random terminals on the service cap and satellites on the parallel orbit cap."""
    seed = cfg.rng_seed if seed is None else seed
    r_e = cfg.earth_radius_m
    r_s = cfg.earth_radius_m + cfg.orbit_height_m
    uts = sample_cap(substream(seed, STREAM_UTS), cfg.num_uts, r_e, cfg.service_area_radius_m / r_e)
    sats = sample_cap(substream(seed, STREAM_SATS), cfg.num_sats, r_s, cfg.sat_area_radius_m / r_s)
    frames = np.stack([panel_frame(p) for p in sats])
    return Scenario(sat_positions=sats, panel_frames=frames, ut_positions=uts, rng_seed=int(seed))


@dataclass(frozen=True)
class LinkGeometry:
    distance_m: float
    ground_elevation: float     # elevation of the satellite seen from the terminal
    aod_azimuth: float          # in the panel frame
    aod_elevation: float        # above the panel XY-plane; pi/2 is boresight


def link_geometry(scn: Scenario, s: int, u: int) -> LinkGeometry:
    p_sat = scn.sat_positions[s]
    p_ut = scn.ut_positions[u]
    delta = p_ut - p_sat
    dist = float(np.linalg.norm(delta))
    up = p_ut / np.linalg.norm(p_ut)
    ground_el = float(np.arcsin(np.clip((-delta / dist) @ up, -1.0, 1.0)))
    local = scn.panel_frames[s] @ (delta / dist)
    aod_el = float(np.arcsin(np.clip(local[2], -1.0, 1.0)))
    aod_az = float(np.arctan2(local[1], local[0]))
    return LinkGeometry(dist, ground_el, aod_az, aod_el)


def all_link_geometry(scn: Scenario) -> dict[str, np.ndarray]:
    """Vectorised :func:`link_geometry` over every (s, u) pair, as (S, U) arrays."""
    delta = scn.ut_positions[None, :, :] - scn.sat_positions[:, None, :]
    dist = np.linalg.norm(delta, axis=-1)
    unit = delta / dist[..., None]
    up = scn.ut_positions / np.linalg.norm(scn.ut_positions, axis=-1, keepdims=True)
    ground_el = np.arcsin(np.clip(np.einsum("sud,ud->su", -unit, up), -1.0, 1.0))
    local = np.einsum("sij,suj->sui", scn.panel_frames, unit)
    return {
        "distance": dist,
        "ground_elevation": ground_el,
        "aod_azimuth": np.arctan2(local[..., 1], local[..., 0]),
        "aod_elevation": np.arcsin(np.clip(local[..., 2], -1.0, 1.0)),
        "direction_local": local,
    }
