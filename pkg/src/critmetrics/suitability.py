"""Metric-property knowledge base and the iterative suitability analysis:
requirements are applied most-important first, each round discarding the
metrics whose recorded properties fail the requirement."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import yaml

from .core import Scale


class SuitabilityError(ValueError):
    pass


# The catalog the shipped knowledge base covers (one record per metric).
METRIC_IDS = frozenset(
    {
        "ACI", "AGS", "AM", "a_lat_req", "a_long_req", "a_req", "BTN", "CI", "CPI", "CS",
        "DCE", "delta_v", "DST", "ET", "HW", "LatJ", "LongJ", "PET", "PF", "P-MC", "PrET",
        "PRI", "PSD", "P-SMH", "P-SRS", "PTTC", "RSS", "SOI", "SP", "STN", "TCI", "TET",
        "THW", "TIT", "TTB", "TTC", "TTCE", "TTK", "TTM", "TTR", "TTS", "TTZ", "WTTC",
    }
)  # fmt: skip

# Implemented variants assessed through their parent metric's record.
VARIANT_OF = {
    "TTO": "TTC",
    "TTA": "TTC",
    "SPrET": "PrET",
    "MSD": "PSD",
    "a_req_cond": "a_req",
    "RSS-DS": "RSS",
    "Δv": "delta_v",
    "TA": "PrET",
}

SUBJECT_TYPES = frozenset({"human", "automation", "pedestrian", "bicycle"})
INPUT_TAGS = frozenset(
    {
        "positions", "velocities", "accelerations", "masses", "widths", "capability",
        "conflict_area", "drivable_area", "collision_event", "maneuver_model",
    }
)  # fmt: skip
LEVELS = ("low", "medium", "high", "depends")
MODEL_KINDS = ("none", "linear_time", "branching_time")
HORIZONS = ("none", "short", "unbounded")


def record_id(metric_id: str) -> str:
    """Knowledge-base id for an implemented metric id."""
    return VARIANT_OF.get(metric_id, metric_id)


@dataclass(frozen=True)
class MetricPropertyRecord:
    metric_id: str
    runtime_capable: bool
    target_values_exist: bool
    subject_types: frozenset
    scenario_types: frozenset
    required_inputs: frozenset
    output_scale: Scale
    output_unit: str
    reliability: str
    validity: str
    sensitivity: str
    specificity: str
    prediction_model: str
    horizon: str
    note: str = ""

    def __post_init__(self):
        if self.metric_id not in METRIC_IDS:
            raise SuitabilityError(f"unknown metric id {self.metric_id!r}")
        for name in ("subject_types", "scenario_types", "required_inputs"):
            v = frozenset(getattr(self, name))
            if not v:
                raise SuitabilityError(f"{self.metric_id}: field {name} is empty")
            object.__setattr__(self, name, v)
        if not self.subject_types <= SUBJECT_TYPES:
            raise SuitabilityError(f"{self.metric_id}: unknown subject types {set(self.subject_types - SUBJECT_TYPES)}")
        if not self.required_inputs <= INPUT_TAGS:
            raise SuitabilityError(f"{self.metric_id}: unknown inputs {set(self.required_inputs - INPUT_TAGS)}")
        object.__setattr__(self, "output_scale", Scale(self.output_scale))
        for name in ("reliability", "validity", "sensitivity", "specificity"):
            if getattr(self, name) not in LEVELS:
                raise SuitabilityError(f"{self.metric_id}: {name} must be one of {LEVELS}")
        if self.prediction_model not in MODEL_KINDS or self.horizon not in HORIZONS:
            raise SuitabilityError(f"{self.metric_id}: bad prediction model needs")
        if not self.output_unit:
            raise SuitabilityError(f"{self.metric_id}: field output_unit is empty")


_RECORD_FIELDS = (
    "runtime_capable", "target_values_exist", "subject_types", "scenario_types", "required_inputs",
    "output_scale", "output_unit", "reliability", "validity", "sensitivity", "specificity",
)  # fmt: skip


def _read(document) -> object:
    if isinstance(document, Path) or (isinstance(document, str) and document and "\n" not in document and Path(document).is_file()):
        return yaml.safe_load(Path(document).read_text())
    if isinstance(document, str):
        return yaml.safe_load(document)
    return document


def load_knowledge_base(document=None) -> dict[str, MetricPropertyRecord]:
    """Records keyed by metric id, from a YAML path/text/mapping (the
    shipped base when ``document`` is None)."""
    if document is None:
        document = resources.files("critmetrics").joinpath("data/default_kb.yaml").read_text()
    data = _read(document)
    if data is None:
        return {}
    items = data.get("metrics", []) if isinstance(data, Mapping) else data
    out: dict[str, MetricPropertyRecord] = {}
    for item in items or []:
        if not isinstance(item, Mapping) or "id" not in item:
            raise SuitabilityError(f"record without id: {item!r}")
        mid = item["id"]
        if mid in out:
            raise SuitabilityError(f"duplicate metric id {mid!r}")
        missing = [k for k in _RECORD_FIELDS + ("prediction_model",) if k not in item]
        if missing:
            raise SuitabilityError(f"{mid}: missing fields {missing}")
        pm = item["prediction_model"]
        out[mid] = MetricPropertyRecord(
            metric_id=mid,
            **{k: item[k] for k in _RECORD_FIELDS},
            prediction_model=pm.get("kind", "") if isinstance(pm, Mapping) else str(pm),
            horizon=pm.get("horizon", "none") if isinstance(pm, Mapping) else "none",
            note=str(item.get("note", "")),
        )
    return out


# --- requirements -----------------------------------------------------------------------

_OPS = ("includes_any", "includes_all", "excludes_any", "subset_of", "in", "eq")


@dataclass(frozen=True)
class Requirement:
    """``field op value`` over a record; set-valued fields use the set
    operators, scalar fields ``in``/``eq``."""

    id: str
    property: str
    field: str
    op: str
    value: object
    rationale: str = ""

    def __post_init__(self):
        if self.op not in _OPS:
            raise SuitabilityError(f"{self.id}: unknown operator {self.op!r}")
        if self.field not in MetricPropertyRecord.__dataclass_fields__:
            raise SuitabilityError(f"{self.id}: unknown record field {self.field!r}")

    def holds(self, rec: MetricPropertyRecord) -> bool:
        x = getattr(rec, self.field)
        if isinstance(x, Scale):
            x = x.value
        v = self.value
        if self.op == "eq":
            return x == v
        if self.op == "in":
            return x in set(v)
        v = set(v)
        if self.op == "includes_any":
            return bool(x & v)
        if self.op == "includes_all":
            return v <= x
        if self.op == "excludes_any":
            return not (x & v)
        return x <= v  # subset_of


@dataclass(frozen=True)
class RequirementOrder:
    """Edges (a, b): requirement a is strictly more important than b."""

    ids: tuple[str, ...]
    edges: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((str(a), str(b)) for a, b in self.edges))
        known = set(self.ids)
        for a, b in self.edges:
            if a not in known or b not in known:
                raise SuitabilityError(f"ordering refers to unknown requirement in ({a}, {b})")
        self.topological()  # raises on cycles

    def maximal(self, remaining: Iterable[str]) -> list[str]:
        rem = set(remaining)
        dominated = {b for a, b in self.edges if a in rem and b in rem}
        return sorted(rem - dominated)

    def topological(self) -> list[str]:
        rem, out = set(self.ids), []
        while rem:
            top = self.maximal(rem)
            if not top:
                raise SuitabilityError("requirement ordering contains a cycle")
            out.append(top[0])
            rem.remove(top[0])
        return out

    def linear_extensions(self) -> Iterable[list[str]]:
        def rec(rem, prefix):
            if not rem:
                yield list(prefix)
                return
            for r in self.maximal(rem):
                yield from rec(rem - {r}, prefix + [r])

        return rec(frozenset(self.ids), [])


def load_requirements(document) -> tuple[dict[str, Requirement], RequirementOrder]:
    data = _read(document) or {}
    reqs: dict[str, Requirement] = {}
    for item in data.get("requirements", []) or []:
        try:
            r = Requirement(
                str(item["id"]), str(item.get("property", "")), item["field"], item["op"], item["value"], str(item.get("rationale", ""))
            )
        except KeyError as e:
            raise SuitabilityError(f"requirement lacks {e}") from None
        if r.id in reqs:
            raise SuitabilityError(f"duplicate requirement id {r.id!r}")
        reqs[r.id] = r
    order = RequirementOrder(tuple(reqs), tuple(tuple(e) for e in data.get("order", []) or []))
    return reqs, order


def load_left_turn_requirements() -> tuple[dict[str, Requirement], RequirementOrder]:
    return load_requirements(resources.files("critmetrics").joinpath("data/left_turn_requirements.yaml").read_text())


# --- analysis ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Round:
    requirement: str
    removed: tuple[str, ...]
    remaining: tuple[str, ...]


@dataclass(frozen=True)
class SuitabilityResult:
    survivors: tuple[str, ...]
    log: tuple[Round, ...]
    outcome: str  # "suitable" or "no suitable metric"
    unapplied: tuple[str, ...] = field(default=())


def run_suitability(
    records: Mapping[str, MetricPropertyRecord],
    requirements: Mapping[str, Requirement],
    order: Optional[RequirementOrder] = None,
    trace: bool = True,
    sequence: Optional[Sequence[str]] = None,
) -> SuitabilityResult:
    """Repeatedly pick a maximal remaining requirement (lexicographically
    smallest on ties, or the next one in ``sequence``), discard the records
    failing it and remove it, until no requirement or no metric is left."""
    order = order or RequirementOrder(tuple(requirements))
    remaining_req = set(requirements)
    pool = dict(records)
    log = []
    seq = list(sequence) if sequence is not None else None
    while remaining_req and pool:
        if seq is not None:
            r = seq.pop(0)
            if r not in order.maximal(remaining_req):
                raise SuitabilityError(f"{r} is not maximal among the remaining requirements")
        else:
            r = order.maximal(remaining_req)[0]
        req = requirements[r]
        removed = sorted(m for m, rec in pool.items() if not req.holds(rec))
        for m in removed:
            del pool[m]
        remaining_req.discard(r)
        if trace:
            log.append(Round(r, tuple(removed), tuple(sorted(pool))))
    outcome = "suitable" if pool else "no suitable metric"
    return SuitabilityResult(tuple(sorted(pool)), tuple(log), outcome, tuple(sorted(remaining_req)))


def explain(result: Union[SuitabilityResult, Sequence[Round]]) -> str:
    """Plain-text per-round report."""
    log = result.log if isinstance(result, SuitabilityResult) else tuple(result)
    if not log and not isinstance(result, SuitabilityResult):
        return ""
    lines = []
    for k, rnd in enumerate(log, 1):
        lines.append(f"Round {k}: requirement {rnd.requirement}")
        lines.append(f"  removed ({len(rnd.removed)}): {', '.join(rnd.removed) or '-'}")
        lines.append(f"  remaining ({len(rnd.remaining)}): {', '.join(rnd.remaining) or '-'}")
    if isinstance(result, SuitabilityResult):
        if result.outcome == "suitable":
            lines.append(f"Suitable metrics ({len(result.survivors)}): {', '.join(result.survivors)}")
        else:
            lines.append("Outcome: no suitable metric")
            if result.unapplied:
                lines.append(f"  unapplied requirements: {', '.join(result.unapplied)}")
    return "\n".join(lines) + ("\n" if lines else "")
