import csv
import math
from pathlib import Path
from typing import Iterable, Sequence


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    if hasattr(value, "dtype"):
        return format_value(value.item())
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write a UTF-8 CSV with a header row, 17-significant-digit floats and ``\\n`` line endings."""
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    with open(out_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])

    return out_path


def sibling_path(path, suffix: str) -> Path:
    base = Path(path)
    return base.with_name(f"{base.stem}_{suffix}{base.suffix or '.csv'}")
