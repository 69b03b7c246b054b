"""
Runtime configuration.

All knobs are read from the environment with the FLATRANK_ prefix, e.g.
FLATRANK_MAX_DIM=8000 raises the exploration cap.
"""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# === PRIMES ===
DEFAULT_PRIME = 1073741789  # largest prime below 2**30
FALLBACK_PRIME = 1000000007

# === SIZE CAPS ===
DEFAULT_MAX_DIM = 5000
DEFAULT_DENSE_MAX_DIM = 5000
DEFAULT_EXACT_MAX_DIM = 2500


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="FLATRANK_", extra="ignore")

    max_dim: int = Field(DEFAULT_MAX_DIM, gt=0, description="Memory guard on 3(q+1)^m for exploration")
    dense_max_dim: int = Field(DEFAULT_DENSE_MAX_DIM, gt=0, description="Largest side handled by dense elimination")
    exact_max_dim: int = Field(DEFAULT_EXACT_MAX_DIM, gt=0, description="Largest side for fraction-free rank")
    default_prime: int = DEFAULT_PRIME
    fallback_prime: int = FALLBACK_PRIME
    default_seed: int = 0
    log_level: str = "INFO"


@lru_cache
def get_settings() -> Settings:
    return Settings()
