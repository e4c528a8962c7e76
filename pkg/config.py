from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    cache_dir: Path = Path(".cache")
    database_url: Optional[str] = None
    golden_dir: Path = Path("goldens")
    log_level: str = "INFO"

    default_basis: int = 80
    default_pad: int = 8
    imag_tolerance: float = 1e-8
    drift_bound: float = 1e-6

    @property
    def cache_database_url(self) -> str:
        if self.database_url:
            return self.database_url
        return f"sqlite+aiosqlite:///{self.cache_dir / 'metric_cache.db'}"


settings = Settings()
