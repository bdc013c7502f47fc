"""Configuration management for mera-kit."""

import logging
import os
from pathlib import Path

from dotenv import load_dotenv

from .errors import ConfigurationError

DEFAULT_MAX_AMPLITUDES = 2**20
DEFAULT_MAX_CONE_WIRES = 8


class MeraKitConfig:
    """Runtime settings read from the environment (optionally seeded by a .env file)."""

    def __init__(self, env_file_path: Path | None = None) -> None:
        """Initialize configuration.

        Args:
            env_file_path: Path to a .env file. If None, only the process environment is used
        """
        if env_file_path is not None:
            load_dotenv(str(env_file_path), override=True)
        self.env_file_path = env_file_path

        self.log_level = os.getenv("LOG_LEVEL", "INFO").upper()
        log_file = os.getenv("MERA_KIT_LOG_FILE", "")
        self.log_file: Path | None = Path(log_file) if log_file else None

        # Parallelism and cost guards
        self.threads = _read_int("MERA_KIT_THREADS", os.cpu_count() or 1)
        self.max_amplitudes = _read_int("MERA_KIT_MAX_AMPLITUDES", DEFAULT_MAX_AMPLITUDES)
        self.max_cone_wires = _read_int("MERA_KIT_MAX_CONE_WIRES", DEFAULT_MAX_CONE_WIRES)

    def validate(self) -> None:
        """Validate configuration settings."""
        errors = []

        if self.log_level not in ["DEBUG", "INFO", "WARNING", "ERROR"]:
            errors.append(f"Invalid LOG_LEVEL: {self.log_level}")

        if self.threads is None or self.threads < 1:
            errors.append("MERA_KIT_THREADS must be a positive integer")

        if self.max_amplitudes is None or self.max_amplitudes < 16:
            errors.append("MERA_KIT_MAX_AMPLITUDES must be an integer >= 16")

        if self.max_cone_wires is None or self.max_cone_wires < 4:
            errors.append("MERA_KIT_MAX_CONE_WIRES must be an integer >= 4")

        if errors:
            raise ConfigurationError(f"Configuration errors: {', '.join(errors)}")

    def get_log_level(self, fallback_lvl: int = logging.INFO) -> int:
        """Get logging level as integer."""
        return getattr(logging, self.log_level, fallback_lvl)

    def __str__(self) -> str:
        return (
            f"MeraKitConfig("
            f"env_file={self.env_file_path}, "
            f"log_level={self.log_level}, "
            f"log_file={self.log_file}, "
            f"threads={self.threads}, "
            f"max_amplitudes={self.max_amplitudes}, "
            f"max_cone_wires={self.max_cone_wires}"
            f")"
        )


def _read_int(name: str, default: int) -> int | None:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        # reported by validate()
        return None


def get_settings_env_file_path() -> Path | None:
    """Locate the .env file to load.

    MERA_KIT_ENV_FILE wins; otherwise a .env in the current directory is used if present.

    Returns:
        Path to the .env file, or None when there is none
    """
    explicit = os.getenv("MERA_KIT_ENV_FILE", "")
    if explicit:
        path = Path(explicit)
        if path.is_dir():
            raise ConfigurationError(f"Expected file but found directory: {path}")
        if not path.exists():
            raise ConfigurationError(f"MERA_KIT_ENV_FILE points to a missing file: {path}")
        return path

    candidate = Path(".env")
    if candidate.is_file():
        return candidate
    return None


def get_config() -> MeraKitConfig:
    """Factory function creating the configuration from the environment.

    Returns:
        MeraKitConfig instance
    """
    return MeraKitConfig(get_settings_env_file_path())
