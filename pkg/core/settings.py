import os

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field


class Settings(BaseModel):
    """Tunable defaults shared by the analysis, dynamics and simulation layers."""

    model_config = ConfigDict(frozen=True)

    dt: float = Field(0.01, gt=0)
    t_end: float = Field(200.0, ge=0)
    grid_n: int = Field(21, ge=2)
    abm_n: int = Field(100_000, ge=1)
    population_size: int = Field(10_000, ge=2)
    generations: int = Field(300, ge=0)
    seed: int = 12345
    additivity_tol: float = Field(1e-9, ge=0)
    convergence_tol: float = 1e-8
    fd_step: float = 1e-6
    clamp_tol: float = 1e-9
    quiet: bool = False


def _env_flag(name: str, default: bool) -> bool:
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in {"1", "true", "yes", "on"}


def load_settings() -> Settings:
    """
    Build the settings from the environment.

    Reads a `.env` file when present, then the KIN_GAMES_* variables.
    Nothing is required; unset variables keep the built-in defaults.
    """
    load_dotenv()
    defaults = Settings()
    return Settings(
        dt=float(os.getenv("KIN_GAMES_DT", defaults.dt)),
        t_end=float(os.getenv("KIN_GAMES_T_END", defaults.t_end)),
        grid_n=int(os.getenv("KIN_GAMES_GRID_N", defaults.grid_n)),
        abm_n=int(os.getenv("KIN_GAMES_ABM_N", defaults.abm_n)),
        population_size=int(os.getenv("KIN_GAMES_POPULATION_SIZE", defaults.population_size)),
        generations=int(os.getenv("KIN_GAMES_GENERATIONS", defaults.generations)),
        seed=int(os.getenv("KIN_GAMES_SEED", defaults.seed)),
        additivity_tol=float(os.getenv("KIN_GAMES_ADDITIVITY_TOL", defaults.additivity_tol)),
        quiet=_env_flag("KIN_GAMES_QUIET", defaults.quiet),
    )


DEFAULTS = Settings()
