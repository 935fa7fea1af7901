from pydantic_settings import BaseSettings
import os
from dotenv import load_dotenv

load_dotenv()


class Settings(BaseSettings):
    # Application settings
    DEBUG: bool = os.getenv("DEBUG", "False").lower() in ("true", "1", "t")
    PROJECT_NAME: str = "Lie-group MCMC toolkit"
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Numerical tolerances
    PIVOT_TOLERANCE: float = 1e-10
    FEASIBILITY_TOLERANCE: float = 1e-9
    OPTIMALITY_TOLERANCE: float = 1e-9
    CLAMP_TOLERANCE: float = 1e-9
    MEMBERSHIP_TOLERANCE: float = 1e-9
    LP_ITERATION_FACTOR: int = 50

    # Run defaults
    DEFAULT_SEED: int = int(os.getenv("DEFAULT_SEED", "20240601"))
    DEFAULT_CHAINS: int = int(os.getenv("DEFAULT_CHAINS", "20000"))
    DEFAULT_STEPS: int = int(os.getenv("DEFAULT_STEPS", "200"))
    DEFAULT_SPINS: int = 9
    DEFAULT_BETA: float = 0.25
    CHAIN_BLOCK_SIZE: int = 256
    WORKERS: int = int(os.getenv("WORKERS", str(min(8, os.cpu_count() or 1))))

    # Guards
    CHAIN_STEP_BUDGET: int = int(os.getenv("CHAIN_STEP_BUDGET", "100000000"))
    MAX_ENUMERATED_SPINS: int = 20
    MAX_KERNEL_SUBSETS: int = 1_000_000
    MAX_EXACT_SPINS: int = 10
    MAX_EXACT_SPINS_HOPS: int = 4

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        extra = "ignore"


def get_settings() -> Settings:
    return Settings()
