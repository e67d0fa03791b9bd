"""Configuration settings for the CSPC market simulator."""
from typing import Optional

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings."""

    # Application
    app_name: str = "CSPC Market Simulator"
    app_version: str = "1.0.0"

    # Output
    output_dir: str = "runs"  # Default output directory (CSPC_OUTPUT_DIR env var)
    float_format: Optional[str] = None  # None writes the shortest round-trip repr
    chart_dpi: int = 150

    # Engine
    workers: int = 1  # Client solver threads (CSPC_WORKERS env var)
    default_seed: int = 20240101
    default_pccs: int = 60

    # Logging
    log_level: str = "INFO"

    class Config:
        env_prefix = "CSPC_"
        env_file = ".env"
        env_file_encoding = "utf-8"


settings = Settings()
