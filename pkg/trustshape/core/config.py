from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    LOG_LEVEL: str = "INFO"
    LOG_CONFIG: str = "logging.ini"
    OUTPUT_DIR: str = "results"

    # Sweep rows are farmed out to a process pool when > 1
    WORKERS: int = 1

    MC_BLOCK_SIZE: int = 4096
    BRUTE_FORCE_CAP: int = 2**20

    model_config = SettingsConfigDict(env_prefix="TRUSTSHAPE_", env_file=".env", extra="ignore")


settings = Settings()
