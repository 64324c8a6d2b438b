"""
Runtime settings for bezoutlin.

Seeds, numerical tolerances, norm grid sizes and the worker limit, read from
the environment or a .env file. Import ``settings`` rather than building new
instances.
"""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Tunable knobs shared by the services and the command line."""

    # Application
    app_name: str = "bezoutlin"
    environment: str = "development"
    debug: bool = False

    # Randomness
    random_seed: int = 20160501

    # Numerics
    float_rtol: float = 1e-12
    residual_tol: float = 1e-8
    interval_tol: float = 1e-10
    norm_grid_min: int = 50
    norm_grid_factor: int = 10

    # Concurrency
    max_workers: int = 4

    # unknown keys in .env are skipped
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


settings = Settings()
