import os
from dotenv import load_dotenv

# Load .env file if it exists
load_dotenv()


def _float(name: str, default: str) -> float:
    return float(os.getenv(name, default))


def _int(name: str, default: str) -> int:
    return int(os.getenv(name, default))


class Settings:
    # -------------------------------------------------------
    # Project
    # -------------------------------------------------------
    PROJECT_NAME: str = "jointmaj"
    VERSION: str = "1.0.0"
    ENV: str = os.getenv("JOINTMAJ_ENV", "dev")
    LOG_LEVEL: str = os.getenv("JOINTMAJ_LOG_LEVEL", "WARNING")

    # -------------------------------------------------------
    # Randomness / output
    # -------------------------------------------------------
    SEED: int = _int("JOINTMAJ_SEED", "7")
    OUT: str = os.getenv("JOINTMAJ_OUT", "")

    # -------------------------------------------------------
    # Measure tolerances
    # -------------------------------------------------------
    TOL_POINT: float = _float("JOINTMAJ_TOL_POINT", "1e-9")
    TOL_MASS: float = _float("JOINTMAJ_TOL_MASS", "1e-9")
    TOL_MOMENT: float = _float("JOINTMAJ_TOL_MOMENT", "1e-8")

    # -------------------------------------------------------
    # Matrix tolerances
    # -------------------------------------------------------
    TOL_HERM: float = _float("JOINTMAJ_TOL_HERM", "1e-8")
    TOL_COMM: float = _float("JOINTMAJ_TOL_COMM", "1e-8")
    TOL_UNIT: float = _float("JOINTMAJ_TOL_UNIT", "1e-8")
    TOL_DIAG: float = _float("JOINTMAJ_TOL_DIAG", "1e-8")
    TOL_FC: float = _float("JOINTMAJ_TOL_FC", "1e-7")
    TOL_PROJ: float = _float("JOINTMAJ_TOL_PROJ", "1e-9")
    TOL_EQUIV: float = _float("JOINTMAJ_TOL_EQUIV", "1e-6")
    CLUSTER_GAP: float = _float("JOINTMAJ_CLUSTER_GAP", "1e-7")

    # -------------------------------------------------------
    # LP / Birkhoff tolerances
    # -------------------------------------------------------
    TOL_LP: float = _float("JOINTMAJ_TOL_LP", "1e-8")
    TOL_DS: float = _float("JOINTMAJ_TOL_DS", "1e-9")
    TOL_RECON: float = _float("JOINTMAJ_TOL_RECON", "1e-10")
    TOL_LOCAL: float = _float("JOINTMAJ_TOL_LOCAL", "1e-9")
    SIMPLEX_MAX_ITER: int = _int("JOINTMAJ_SIMPLEX_MAX_ITER", "200000")

    # -------------------------------------------------------
    # Caps
    # -------------------------------------------------------
    CAP_D: int = _int("JOINTMAJ_CAP_D", "256")
    CAP_M: int = _int("JOINTMAJ_CAP_M", "100000")
    DOUBLE_AVERAGE_CAP: int = _int("JOINTMAJ_DOUBLE_AVERAGE_CAP", "16")
    DOUBLE_AVERAGE_SAMPLES: int = _int("JOINTMAJ_DOUBLE_AVERAGE_SAMPLES", "256")
    MIXING_TERM_CAP: int = _int("JOINTMAJ_MIXING_TERM_CAP", "4096")


# Single shared instance; the CLI writes flag overrides onto it
settings = Settings()
