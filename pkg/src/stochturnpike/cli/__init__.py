"""Command-line interface and experiment configuration."""
from .config import ConfigError, ExperimentConfig, load_config, load_preset, loads_config
from .main import main

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "load_preset", "loads_config", "main"]
