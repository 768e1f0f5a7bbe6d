"""Domain types for a caching market instance and their validation.

Types here are plain frozen dataclasses. Construction never raises on bad
numbers; ``validate_market`` collects every violation in one pass so a user
fixing a config sees the whole list at once.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Any, Mapping, Optional, Sequence, Union

from stackcache.errors import MarketValidationError

# Violation codes.
ALPHA_TOO_SMALL = "AlphaTooSmall"
NON_POSITIVE_CAPACITY = "NonPositiveCapacity"
NEGATIVE_CAPACITY = "NegativeCapacity"
EMPTY_FLEET = "EmptyFleet"
EMPTY_CP_LIST = "EmptyCpList"
BAD_QUANTIZATION = "BadQuantization"
BAD_CATALOG = "BadCatalog"
SCHEMA = "Schema"


@dataclass(frozen=True)
class Violation:
    """One broken invariant. ``index`` is the 0-based CP or SBS position, if any."""

    code: str
    message: str
    index: Optional[int] = None

    def __str__(self) -> str:
        where = "" if self.index is None else f"[{self.index}]"
        return f"{self.code}{where}: {self.message}"


@dataclass(frozen=True)
class SbsFleet:
    """Cache sizes of the small base stations, in files."""

    capacities: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "capacities", tuple(float(c) for c in self.capacities))

    @property
    def total(self) -> float:
        return total_capacity(self)


@dataclass(frozen=True)
class CpParams:
    """A content provider.

    Attributes:
        alpha: traffic load, the amount of requests its users generate.
        p_mean: mean number of cached copies per requested file.
        delta_p: quantization step of the per-file copy counts.
        catalog_size: number of files the provider owns.
    """

    alpha: float
    p_mean: float = 1.0
    delta_p: float = 0.0
    catalog_size: int = 1_000_000


@dataclass(frozen=True)
class MarketConfig:
    fleet: SbsFleet
    cps: tuple[CpParams, ...]

    def __post_init__(self):
        object.__setattr__(self, "cps", tuple(self.cps))

    @property
    def n_cps(self) -> int:
        return len(self.cps)

    @property
    def alphas(self) -> tuple[float, ...]:
        return tuple(cp.alpha for cp in self.cps)

    @property
    def capacity(self) -> float:
        return self.fleet.total

    def with_capacity(self, capacity: float) -> "MarketConfig":
        """Same providers, single-SBS fleet of the given total size."""
        return MarketConfig(SbsFleet((capacity,)), self.cps)

    def with_cps(self, cps: Sequence[CpParams]) -> "MarketConfig":
        return MarketConfig(self.fleet, tuple(cps))


@dataclass(frozen=True)
class QuantityProfile:
    """Caching request quantities, one per CP.

    ``rounded`` is filled by :func:`stackcache.follower.round_uncoded`.
    ``clamped`` lists CPs whose value was forced to a bound by a solver.
    """

    q: tuple[float, ...]
    rounded: Optional[tuple[int, ...]] = None
    clamped: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(float(x) for x in self.q))
        if self.rounded is not None:
            object.__setattr__(self, "rounded", tuple(int(x) for x in self.rounded))
            if len(self.rounded) != len(self.q):
                raise ValueError("rounded must have the same length as q")
            for r, x in zip(self.rounded, self.q):
                if abs(r - x) > 0.5:
                    raise ValueError(f"rounded value {r} is more than 0.5 from {x}")
        if any(not x >= 0 for x in self.q):
            raise ValueError(f"quantities must be non-negative, got {self.q}")

    def __len__(self) -> int:
        return len(self.q)

    @property
    def total(self) -> float:
        return math.fsum(self.q)

    def others(self, m: int) -> float:
        """Total requested by every CP except ``m``."""
        return math.fsum(x for i, x in enumerate(self.q) if i != m)


def total_capacity(fleet: SbsFleet) -> float:
    return math.fsum(fleet.capacities)


def market_violations(config: MarketConfig) -> list[Violation]:
    out: list[Violation] = []
    caps = config.fleet.capacities
    if not caps:
        out.append(Violation(EMPTY_FLEET, "the SBS capacity list is empty"))
    for n, s in enumerate(caps):
        if not s >= 0 or not math.isfinite(s):
            out.append(Violation(NEGATIVE_CAPACITY, f"capacity {s} must be a finite value >= 0", n))
    total = total_capacity(config.fleet)
    if not total > 0:
        out.append(Violation(NON_POSITIVE_CAPACITY, f"total capacity S={total} must be > 0"))

    M = len(config.cps)
    if M == 0:
        out.append(Violation(EMPTY_CP_LIST, "at least one content provider is required"))
    for m, cp in enumerate(config.cps):
        if not (cp.alpha > 1 and cp.alpha >= M) or not math.isfinite(cp.alpha):
            out.append(
                Violation(ALPHA_TOO_SMALL, f"alpha={cp.alpha} must satisfy alpha > 1 and alpha >= M={M}", m)
            )
        if not cp.p_mean > 0 or not math.isfinite(cp.p_mean):
            out.append(Violation(BAD_QUANTIZATION, f"p_mean={cp.p_mean} must be > 0", m))
        if not cp.delta_p >= 0 or not math.isfinite(cp.delta_p):
            out.append(Violation(BAD_QUANTIZATION, f"delta_p={cp.delta_p} must be >= 0", m))
        if int(cp.catalog_size) != cp.catalog_size or cp.catalog_size < 1:
            out.append(Violation(BAD_CATALOG, f"catalog_size={cp.catalog_size} must be an integer >= 1", m))
    return out


def validate_market(config: MarketConfig) -> MarketConfig:
    """Return ``config`` unchanged, or raise with the complete violation list.

    Raises:
        MarketValidationError: carrying every violation, not just the first.
    """
    violations = market_violations(config)
    if violations:
        raise MarketValidationError(violations)
    return config


_TOP_KEYS = {"sbs_capacities", "cps"}
_CP_KEYS = {"alpha", "p_mean", "delta_p", "catalog_size"}


def market_from_dict(doc: Mapping[str, Any]) -> MarketConfig:
    """Build and validate a market from its JSON document form.

    Schema: ``{"sbs_capacities": [...], "cps": [{"alpha", "p_mean",
    "delta_p", "catalog_size"}, ...]}``. Unknown keys are rejected, as are
    missing ones.
    """
    problems: list[Violation] = []
    if not isinstance(doc, Mapping):
        raise MarketValidationError([Violation(SCHEMA, "top level must be a JSON object")])
    for key in sorted(set(doc) - _TOP_KEYS):
        problems.append(Violation(SCHEMA, f"unknown field {key!r}"))
    for key in sorted(_TOP_KEYS - set(doc)):
        problems.append(Violation(SCHEMA, f"missing field {key!r}"))

    caps_raw = doc.get("sbs_capacities", [])
    caps: list[float] = []
    if not isinstance(caps_raw, list):
        problems.append(Violation(SCHEMA, "sbs_capacities must be a list"))
    else:
        for n, c in enumerate(caps_raw):
            if isinstance(c, bool) or not isinstance(c, (int, float)):
                problems.append(Violation(SCHEMA, f"capacity {c!r} is not a number", n))
            else:
                caps.append(float(c))

    cps: list[CpParams] = []
    cps_raw = doc.get("cps", [])
    if not isinstance(cps_raw, list):
        problems.append(Violation(SCHEMA, "cps must be a list"))
        cps_raw = []
    for m, entry in enumerate(cps_raw):
        if not isinstance(entry, Mapping):
            problems.append(Violation(SCHEMA, "CP entry must be an object", m))
            continue
        for key in sorted(set(entry) - _CP_KEYS):
            problems.append(Violation(SCHEMA, f"unknown CP field {key!r}", m))
        for key in sorted(_CP_KEYS - set(entry)):
            problems.append(Violation(SCHEMA, f"missing CP field {key!r}", m))
        values = {}
        for key in _CP_KEYS & set(entry):
            v = entry[key]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                problems.append(Violation(SCHEMA, f"{key}={v!r} is not a number", m))
            else:
                values[key] = v
        if set(values) == _CP_KEYS:
            cps.append(CpParams(**values))

    if problems:
        raise MarketValidationError(problems)
    return validate_market(MarketConfig(SbsFleet(tuple(caps)), tuple(cps)))


def market_to_dict(config: MarketConfig) -> dict:
    return {
        "sbs_capacities": list(config.fleet.capacities),
        "cps": [
            {"alpha": cp.alpha, "p_mean": cp.p_mean, "delta_p": cp.delta_p, "catalog_size": cp.catalog_size}
            for cp in config.cps
        ],
    }


def load_market(path: Union[str, PathLike]) -> MarketConfig:
    """Read a market JSON file. Malformed JSON surfaces as a validation error."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MarketValidationError([Violation(SCHEMA, f"malformed JSON: {exc}")]) from exc
    return market_from_dict(doc)
