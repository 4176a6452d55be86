"""Distributed downlink beamforming for networked LEO satellites."""

from .config import ConfigError, SystemConfig, load_config
from .system import System, build_system

__all__ = ["ConfigError", "SystemConfig", "System", "build_system", "load_config"]
__version__ = "0.1.0"
