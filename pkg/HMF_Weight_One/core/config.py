from functools import lru_cache
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process level settings, read from ``HMF_*`` environment variables."""

    model_config = SettingsConfigDict(env_prefix="HMF_", env_file=".env", extra="ignore")

    fixtures: Optional[Path] = Field(
        default=None, description="Directory holding optional externally computed bases."
    )
    jobs: int = Field(default=1, ge=1, description="Worker cap for per-prime reruns.")
    log_level: str = Field(default="WARNING", description="Logging level name.")
    escalation_step: int = Field(default=500, gt=0, description="Bound escalation step.")
    escalation_max: int = Field(default=2000, gt=0, description="Largest escalated bound.")
    character_samples: int = Field(
        default=50, ge=0, description="Sampled elements for the ray class consistency check."
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Loads ``.env`` and returns the cached settings object."""
    load_dotenv()
    return Settings()


def fixture_path(name: str) -> Optional[Path]:
    """Returns the path of a fixture file if the fixture directory has it."""
    root = get_settings().fixtures
    if root is None:
        return None
    candidate = Path(root) / name
    return candidate if candidate.exists() else None
