"""
Налаштування застосунку.
Значення читаються зі змінних оточення (та файлу .env) зі значеннями за замовчуванням.
"""
import logging
import os
from functools import lru_cache
from typing import Any, Callable, Dict

from dotenv import load_dotenv

# Завантажуємо змінні оточення з .env файлу (якщо він є)
load_dotenv()

logger = logging.getLogger(__name__)

VERSION = "0.1.0"


def _read_env(name: str, default: Any, cast: Callable[[str], Any]) -> Any:
    """Зчитування змінної оточення з перетворенням типу."""
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        logger.warning("Некоректне значення %s=%r, використовується %r", name, raw, default)
        return default


class Settings:
    """Глобальні параметри обчислень."""

    def __init__(self):
        self.seed = _read_env("INTERACTION_SEED", 0, int)
        self.permutations = _read_env("INTERACTION_PERMUTATIONS", 0, int)
        self.workers = max(1, _read_env("INTERACTION_WORKERS", 4, int))
        # Поріг кількості атомів, після якого енергія Ланкастера рахується через розклад
        self.expansion_threshold = _read_env("INTERACTION_EXPANSION_THRESHOLD", 50_000, int)
        self.log_level = os.getenv("INTERACTION_LOG_LEVEL", "WARNING").upper()
        self.pdi_tolerance = _read_env("INTERACTION_PDI_TOLERANCE", 1e-9, float)

    def as_dict(self) -> Dict[str, Any]:
        """Параметри у вигляді словника для звітів."""
        return {
            "seed": self.seed,
            "permutations": self.permutations,
            "workers": self.workers,
            "expansion_threshold": self.expansion_threshold,
            "pdi_tolerance": self.pdi_tolerance,
        }


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Єдиний екземпляр налаштувань на процес."""
    return Settings()
