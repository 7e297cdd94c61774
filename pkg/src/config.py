import os
from dotenv import load_dotenv

load_dotenv()

VALID_FORMATS = ["json", "table"]
VALID_LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


class Config:
    # Randomised realizability trials
    SEED = int(os.getenv("CURVETTA_SEED", "20240601"))
    TRIALS = int(os.getenv("CURVETTA_TRIALS", "32"))
    COORD_BOUND = int(os.getenv("CURVETTA_COORD_BOUND", "1000000"))

    # Exact construction-order search is exponential in the number of lines
    ORDER_SEARCH_LIMIT = int(os.getenv("CURVETTA_ORDER_SEARCH_LIMIT", "16"))

    OUTPUT_FORMAT = os.getenv("CURVETTA_FORMAT", "json")
    LOG_LEVEL = os.getenv("CURVETTA_LOG_LEVEL", "WARNING").upper()

    @staticmethod
    def validate():
        problems = []
        if Config.TRIALS < 0: problems.append("CURVETTA_TRIALS must be >= 0")
        if Config.COORD_BOUND < 10: problems.append("CURVETTA_COORD_BOUND must be >= 10")
        if Config.ORDER_SEARCH_LIMIT < 1: problems.append("CURVETTA_ORDER_SEARCH_LIMIT must be >= 1")
        if Config.OUTPUT_FORMAT not in VALID_FORMATS:
            problems.append(f"CURVETTA_FORMAT must be one of {VALID_FORMATS}")
        if Config.LOG_LEVEL not in VALID_LOG_LEVELS:
            problems.append(f"CURVETTA_LOG_LEVEL must be one of {VALID_LOG_LEVELS}")

        if problems:
            raise ValueError(f"Invalid configuration: {'; '.join(problems)}")
