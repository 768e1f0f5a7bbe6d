"""CSV/JSON writers shared by the command-line tools."""

from __future__ import annotations

import csv
import json
import math
from typing import IO, Any, Iterable, Mapping, Sequence


def format_value(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".12g")
    return str(x)


def write_csv(fh: IO[str], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])


def write_dict_csv(fh: IO[str], rows: Sequence[Mapping[str, Any]]) -> None:
    if not rows:
        return
    header = list(rows[0])
    write_csv(fh, header, ([row[k] for k in header] for row in rows))


def _round_floats(obj: Any) -> Any:
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return format_value(obj)
        return float(format(obj, ".12g"))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def write_json(fh: IO[str], doc: Any) -> None:
    json.dump(_round_floats(doc), fh, indent=2)
    fh.write("\n")
