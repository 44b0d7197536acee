import os
import json
from typing import Any, Tuple


def dump_json(data: Any) -> str:
    """Канонічний JSON: сталий порядок ключів, однаковий вивід для однакових даних."""
    return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def save_json(data: Any, filename: str) -> Tuple[bool, str]:
    """Збереження звіту у файл."""
    try:
        directory = os.path.dirname(filename)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(filename, 'w', encoding='utf-8') as f:
            f.write(dump_json(data))
        return True, filename
    except OSError as e:
        return False, f"Помилка збереження файлу {filename}: {e}"


def load_json(filename: str) -> Tuple[bool, Any]:
    """Завантаження JSON-документа з файлу."""
    if not os.path.exists(filename):
        return False, f"Файл не знайдено: {filename}"
    try:
        with open(filename, 'r', encoding='utf-8') as f:
            return True, json.load(f)
    except json.JSONDecodeError as e:
        return False, f"Некоректний JSON у {filename}: рядок {e.lineno}, {e.msg}"
    except OSError as e:
        return False, f"Помилка читання файлу {filename}: {e}"
