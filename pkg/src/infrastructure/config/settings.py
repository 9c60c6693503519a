# src/infrastructure/config/settings.py
import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

from ...domain.errors import ConfigurationError


@dataclass(frozen=True)
class Settings:
    """Environment defaults; command-line flags take precedence over them."""
    base_url: Optional[str] = None
    api_key_env: str = "OPENAI_API_KEY"
    kaggle_dataset: Optional[str] = None
    requests_per_minute: int = 0


def load_settings(env_file: Optional[str] = None) -> Settings:
    """Read SAFESQL_* variables, after loading a .env file if one exists."""
    load_dotenv(env_file)

    raw_rpm = os.getenv("SAFESQL_REQUESTS_PER_MINUTE", "0")
    try:
        requests_per_minute = int(raw_rpm)
    except ValueError as e:
        raise ConfigurationError(f"SAFESQL_REQUESTS_PER_MINUTE must be an integer, got {raw_rpm!r}") from e
    if requests_per_minute < 0:
        raise ConfigurationError("SAFESQL_REQUESTS_PER_MINUTE must be >= 0")

    return Settings(
        base_url=os.getenv("SAFESQL_BASE_URL") or None,
        api_key_env=os.getenv("SAFESQL_API_KEY_ENV") or "OPENAI_API_KEY",
        kaggle_dataset=os.getenv("SAFESQL_KAGGLE_DATASET") or None,
        requests_per_minute=requests_per_minute,
    )
