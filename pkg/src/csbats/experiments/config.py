"""Experiment configuration: dataclass, flat ``key = value`` files, ranges."""

import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Tuple, Union

from csbats.codec.batch import check_coefficient_mode
from csbats.core.gf import FIELD_ORDER
from csbats.simulation import check_decoder

PathLike = Union[str, "os.PathLike[str]"]

CONSTRUCTIONS = (
    "random",
    "cs-7",
    "cs-8",
    "cs-file",
    "cs-random-base",
    "cs-column-designed",
)

# Constructions whose graphs carry cyclic-shift layers
LAYERED_CONSTRUCTIONS = tuple(c for c in CONSTRUCTIONS if c != "random")

TABLE2_ARMS = ("cs-random-base", "cs-column-designed")

# Default worker processes; read once at import
_DEFAULT_WORKERS = os.environ.get("CSBATS_WORKERS", "").strip()

Range = Tuple[int, int, int]

# Alternative key names accepted in configuration files and dicts
KEY_ALIASES = {
    "N": "batches",
    "repeats_per_instance": "repeats",
    "construction": "constructions",
    "decoder": "decoders",
}


def default_workers() -> int:
    try:
        return max(1, int(_DEFAULT_WORKERS)) if _DEFAULT_WORKERS else 1
    except ValueError:
        return 1


def parse_range(text: str) -> Range:
    """Parse ``"a"``, ``"a..b"`` or ``"a..b:step"`` into ``(start, stop, step)``.

    Example:
        >>> parse_range("16..24:2")
        (16, 24, 2)

    Raises:
        ValueError: On malformed text, an empty range, or a non-positive step.
    """
    text = str(text).strip()
    body, _, step_text = text.partition(":")
    start_text, sep, stop_text = body.partition("..")
    try:
        start = int(start_text)
        stop = int(stop_text) if sep else start
        step = int(step_text) if step_text else 1
    except ValueError:
        raise ValueError(f"Expected a range like 'a..b' or 'a..b:step', got {text!r}")
    if step < 1:
        raise ValueError(f"Range step must be positive, got {text!r}")
    if stop < start:
        raise ValueError(f"Range {text!r} is empty")
    return (start, stop, step)


def format_range(r: Range) -> str:
    start, stop, step = r
    if start == stop:
        return str(start)
    return f"{start}..{stop}" if step == 1 else f"{start}..{stop}:{step}"


def range_values(r: Range) -> List[int]:
    start, stop, step = r
    return list(range(start, stop + 1, step))


def _parse_names(text: Any) -> Tuple[str, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(str(v).strip() for v in text)
    return tuple(part.strip() for part in str(text).split(",") if part.strip())


def _parse_bool(text: Any) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"Expected a boolean, got {text!r}")


def _parse_optional_int(text: Any) -> Optional[int]:
    if text is None or str(text).strip().lower() in ("", "none"):
        return None
    return int(text)


def _parse_optional_str(text: Any) -> Optional[str]:
    if text is None or str(text).strip().lower() in ("", "none"):
        return None
    return str(text).strip()


@dataclass
class ExperimentConfig:
    """Parameters of one experiment sweep.

    Counts default to desk scale; full-scale runs use 2000 graph
    instances x 10 repeats for random graphs and 500 repeats for the
    cyclic-shift presets.

    Attributes:
        K: Source symbols.
        pk: Field elements per symbol; rank statistics do not depend on it.
        M: Batch size.
        q: Field order; only 256 is supported.
        loss: Per-link packet erasure probability.
        hops: Range of link counts.
        batches: Range of batch counts ``N``.
        constructions: Graph constructions to compare.
        decoders: Decoders to compare.
        graph_instances: Graphs drawn per sweep point (random constructions).
        repeats: Decoding runs per graph.
        master_seed: Root of every random stream.
        output_dir: Where results are written.
        coefficient_mode: ``uniform`` or ``nonzero`` coding coefficients.
        max_pending: Optional inactivation budget; ``None`` (default) inactivates
            until every batch is consumed.
        recode: Recode at intermediate nodes.
        psi_file: Degree distribution for the random construction.
        base_file: Base graph for the ``cs-file`` construction.
        workers: Worker processes.
        timing: Record wall time per row (disable for byte-identical reruns).
    """

    K: int = 256
    pk: int = 4
    M: int = 16
    q: int = FIELD_ORDER
    loss: float = 0.1
    hops: Range = (10, 10, 1)
    batches: Range = (20, 20, 1)
    constructions: Tuple[str, ...] = ("cs-7",)
    decoders: Tuple[str, ...] = ("inactivation",)
    graph_instances: int = 1
    repeats: int = 200
    master_seed: int = 0
    output_dir: str = "results"
    coefficient_mode: str = "uniform"
    max_pending: Optional[int] = None
    recode: bool = True
    psi_file: Optional[str] = None
    base_file: Optional[str] = None
    workers: int = field(default_factory=default_workers)
    timing: bool = True

    def __post_init__(self):
        self.hops = parse_range(self.hops) if isinstance(self.hops, str) else tuple(self.hops)
        self.batches = (
            parse_range(self.batches) if isinstance(self.batches, str) else tuple(self.batches)
        )
        self.constructions = _parse_names(self.constructions)
        self.decoders = _parse_names(self.decoders)
        self.validate()

    def validate(self) -> None:
        """Raises:
        ValueError: If any field is out of range or names are unknown.
        """
        if self.q != FIELD_ORDER:
            raise ValueError(f"Only q={FIELD_ORDER} is supported, got {self.q!r}")
        for name in ("K", "pk", "M", "graph_instances", "repeats", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)!r}")
        if not 0.0 <= self.loss <= 1.0:
            raise ValueError(f"loss must lie in [0, 1], got {self.loss!r}")
        if self.master_seed < 0:
            raise ValueError(f"master_seed must be non-negative, got {self.master_seed!r}")
        if self.max_pending is not None and self.max_pending < 0:
            raise ValueError(f"max_pending must be non-negative, got {self.max_pending!r}")
        if len(self.hops) != 3 or self.hops[0] < 1:
            raise ValueError(f"hops must start at 1 or more, got {self.hops!r}")
        if len(self.batches) != 3 or self.batches[0] < 1:
            raise ValueError(f"batches must start at 1 or more, got {self.batches!r}")
        if not self.constructions or not self.decoders:
            raise ValueError("At least one construction and one decoder are required")
        for c in self.constructions:
            if c not in CONSTRUCTIONS:
                raise ValueError(f"construction must be one of {CONSTRUCTIONS}, got {c!r}")
            if c == "cs-file" and not self.base_file:
                raise ValueError("The cs-file construction needs base_file")
        for d in self.decoders:
            check_decoder(d)
            if d == "layered" and any(
                c not in LAYERED_CONSTRUCTIONS for c in self.constructions
            ):
                raise ValueError("Layered decoding needs cyclic-shift constructions")
        check_coefficient_mode(self.coefficient_mode)

    def hop_values(self) -> List[int]:
        return range_values(self.hops)

    def batch_values(self) -> List[int]:
        return range_values(self.batches)

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Copy with the non-None overrides applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["hops"] = format_range(self.hops)
        data["batches"] = format_range(self.batches)
        data["constructions"] = ",".join(self.constructions)
        data["decoders"] = ",".join(self.decoders)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """Build from a dict of field names to values (strings allowed).

        Keys listed in ``KEY_ALIASES`` stand for the field they name.

        Raises:
            ValueError: On unknown keys, a key given under two names, or
                unparsable values.
        """
        if not isinstance(data, dict):
            raise ValueError("Input must be a dictionary")
        renamed: Dict[str, Any] = {}
        for key, value in data.items():
            name = KEY_ALIASES.get(key, key)
            if name in renamed:
                raise ValueError(f"Configuration key {name!r} is given twice (as {key!r})")
            renamed[name] = value
        data = renamed
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ValueError(f"Unknown configuration key {unknown[0]!r}")
        kwargs: Dict[str, Any] = {}
        for key, value in data.items():
            kwargs[key] = _coerce(key, value)
        return cls(**kwargs)


def _coerce(key: str, value: Any) -> Any:
    try:
        if key in ("K", "pk", "M", "q", "graph_instances", "repeats", "master_seed", "workers"):
            return int(value)
        if key == "loss":
            return float(value)
        if key == "max_pending":
            return _parse_optional_int(value)
        if key in ("recode", "timing"):
            return _parse_bool(value)
        if key in ("psi_file", "base_file"):
            return _parse_optional_str(value)
        if key in ("hops", "batches"):
            return parse_range(value) if isinstance(value, (str, int)) else tuple(value)
        if key in ("constructions", "decoders"):
            return _parse_names(value)
    except (TypeError, ValueError) as e:
        raise ValueError(f"Invalid value for {key!r}: {value!r} ({e})")
    return value if not isinstance(value, str) else value.strip()


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    """Parse flat ``key = value`` lines; ``#`` starts a comment.

    Raises:
        ValueError: On lines without ``=``, unknown keys, or bad values.
    """
    data: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{source}:{number}: expected 'key = value', got {raw.strip()!r}")
        data[key.strip()] = value.strip()
    try:
        return ExperimentConfig.from_dict(data)
    except ValueError as e:
        raise ValueError(f"{source}: {e}")


def load_config(path: PathLike) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as f:
        return parse_config(f.read(), source=str(path))


def format_config(cfg: ExperimentConfig) -> str:
    lines = []
    for key, value in cfg.to_dict().items():
        lines.append(f"{key} = {'none' if value is None else value}")
    return "\n".join(lines) + "\n"

