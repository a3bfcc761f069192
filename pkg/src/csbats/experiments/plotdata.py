"""Plot-ready series files: one whitespace-delimited ``x mean std`` file per curve."""

import os
from collections import OrderedDict
from typing import Dict, List, Sequence, Tuple

from csbats.experiments.config import PathLike
from csbats.experiments.runner import ResultRow

SERIES_SUFFIX = ".dat"

Point = Tuple[float, float, float]
SeriesKey = Tuple[str, str, str, int]


def _x_axis(rows: Sequence[ResultRow]) -> str:
    """Sweep along hops when hops vary, otherwise along N."""
    return "hops" if len({r.hops for r in rows}) > 1 else "N"


def group_series(rows: Sequence[ResultRow]) -> Dict[SeriesKey, List[Point]]:
    """Group rows into curves keyed by ``(construction, decoder, fixed_name, fixed_value)``."""
    if not rows:
        raise ValueError("Cannot emit plot data for an empty table")
    x_name = _x_axis(rows)
    fixed_name = "N" if x_name == "hops" else "hops"
    series: Dict[SeriesKey, List[Point]] = OrderedDict()
    for row in rows:
        key = (row.construction, row.decoder, fixed_name, getattr(row, fixed_name))
        series.setdefault(key, []).append(
            (float(getattr(row, x_name)), row.mean_rate, row.std_rate)
        )
    for points in series.values():
        points.sort()
    return series


def series_filename(key: SeriesKey) -> str:
    construction, decoder, fixed_name, fixed_value = key
    return f"{construction}__{decoder}__{fixed_name}{fixed_value}{SERIES_SUFFIX}"


def emit_plotdata(rows: Sequence[ResultRow], out_dir: PathLike) -> List[str]:
    """Write one series file per curve.

    Each file starts with a ``#`` line naming the x axis, then one
    ``x mean std`` line per point.

    Returns:
        Paths of the files written.

    Raises:
        ValueError: If ``rows`` is empty.
    """
    series = group_series(rows)
    x_name = _x_axis(rows)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for key, points in series.items():
        path = os.path.join(out_dir, series_filename(key))
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"# x={x_name} construction={key[0]} decoder={key[1]} {key[2]}={key[3]}\n")
            for x, mean, std in points:
                f.write(f"{x:g} {mean:.6f} {std:.6f}\n")
        paths.append(path)
    return paths


def parse_plotdata(directory: PathLike) -> Dict[SeriesKey, List[Point]]:
    """Read back every series file in ``directory``.

    Raises:
        ValueError: On a file whose header or data lines are malformed.
    """
    series: Dict[SeriesKey, List[Point]] = {}
    for name in sorted(os.listdir(directory)):
        if not name.endswith(SERIES_SUFFIX):
            continue
        path = os.path.join(directory, name)
        with open(path, "r", encoding="utf-8") as f:
            lines = f.read().splitlines()
        if not lines or not lines[0].startswith("#"):
            raise ValueError(f"{path}: missing series header")
        header = dict(part.split("=", 1) for part in lines[0][1:].split())
        fixed = [k for k in header if k not in ("x", "construction", "decoder")]
        if len(fixed) != 1:
            raise ValueError(f"{path}: malformed series header {lines[0]!r}")
        key = (header["construction"], header["decoder"], fixed[0], int(header[fixed[0]]))
        points = []
        for number, line in enumerate(lines[1:], start=2):
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{number}: expected 'x mean std'")
            x, mean, std = (float(p) for p in parts)
            points.append((x, mean, std))
        series[key] = points
    return series
