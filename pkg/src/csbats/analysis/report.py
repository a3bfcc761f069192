"""CSV output for heatmaps and bound reports."""

import csv
import os
from typing import Any, Iterable, List, Mapping, Union

PathLike = Union[str, "os.PathLike[str]"]


def _as_row(item: Any) -> Mapping[str, Any]:
    if isinstance(item, Mapping):
        return item
    to_dict = getattr(item, "to_dict", None)
    if to_dict is None:
        raise TypeError(f"Cannot write {type(item).__name__} as a CSV row")
    return to_dict()


def write_report_csv(rows: Iterable[Any], path: PathLike) -> int:
    """Write mappings (or objects with ``to_dict``) as CSV with a header.

    Columns follow the first row's key order.

    Returns:
        Number of data rows written.

    Raises:
        ValueError: If there are no rows.
        TypeError: If a row is neither a mapping nor has ``to_dict``.
    """
    materialized: List[Mapping[str, Any]] = [_as_row(r) for r in rows]
    if not materialized:
        raise ValueError("Nothing to write: no report rows")
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(materialized[0].keys()))
        writer.writeheader()
        writer.writerows(materialized)
    return len(materialized)
