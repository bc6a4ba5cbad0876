"""Secrecy outage analysis of multi-functional RIS assisted NOMA networks."""

from .linkmodel import ConfigError, ScenarioSpec, SystemConfig

__all__ = ["ConfigError", "ScenarioSpec", "SystemConfig"]
__version__ = "0.1.0"
