"""
Scenario workloads.

A `ScenarioSpec` describes the runtime-service calls an OS makes in one
scenario as a list of boot segments (one per boot). Each segment has
per-service call counts and a pinned variable mix: how many calls of a
variable service use a given variable name. The remaining variable calls
cycle through `VARIABLE_POOL` from its start, so two segments with equal
remainders produce equal per-name counts.

Built-ins
---------
            GetTime  GetVariable  SetVariable  GetNextVariableName  ConvertPointer  Total
  boot         46        754          110             499                91         1500
  login        46        786          110             499                91         1532
  working      46        786          110             499                91         1532
  hour         46        786          110             499                91         1532
  switch       46        850          110             499                91         1596
  reboot       92       1617          165            1067               182         3123

Pinned names: a first boot reads OsIndications 45 times and sets it once; a
second boot reads it 46 times and does not set it. Each login adds 16
OsIndicationsSupported and 16 OsIndications reads (the even split is an
assumption). A user switch adds two logins' worth of those reads.

Spec files
----------
    {"name": "...", "description": "...", "boot_segments": 2,
     "counts": {"GetTime": 92, ...},
     "variable_mix": {"GetVariable": {"OsIndications": 123, ...}},
     "segments": [{"counts": {...}, "variable_mix": {...}}, ...]}

`segments` is optional; without it counts and mix are split evenly across
`boot_segments` (earlier segments take the remainder).
"""

from __future__ import annotations

import json
import logging
import os
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import jsonschema

from traces.stats import CallStats

from .errors import NotTraced, ScenarioSpecError, UnknownScenario
from .services import DEFAULT_VARIABLES, Service, make_call
from .table import HANDLER_BASE, Hook, HookAction, ServiceTable, dispatch, install_hooks, new_service_table
from .tracing import ListSink

logger = logging.getLogger("workbench.rts")

PathLike = Union[str, os.PathLike]

VARIABLE_SERVICES = (Service.GET_VARIABLE, Service.SET_VARIABLE, Service.GET_NEXT_VARIABLE_NAME)

OS_INDICATIONS = "OsIndications"
OS_INDICATIONS_SUPPORTED = "OsIndicationsSupported"

VARIABLE_POOL: Tuple[str, ...] = tuple(
    sorted(name for name in DEFAULT_VARIABLES if not name.startswith(OS_INDICATIONS))
)


@dataclass(frozen=True)
class SegmentSpec:
    counts: Mapping[str, int]
    variable_mix: Mapping[str, Mapping[str, int]] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "counts": dict(self.counts),
            "variable_mix": {s: dict(m) for s, m in self.variable_mix.items()},
        }


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    segments: Tuple[SegmentSpec, ...]
    description: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        _validate(self)

    @property
    def boot_segments(self) -> int:
        return len(self.segments)

    @property
    def counts(self) -> Dict[str, int]:
        totals: Dict[str, int] = {}
        for segment in self.segments:
            for service, count in segment.counts.items():
                totals[service] = totals.get(service, 0) + count
        return totals

    @property
    def variable_mix(self) -> Dict[str, Dict[str, int]]:
        totals: Dict[str, Dict[str, int]] = {}
        for segment in self.segments:
            for service, mix in segment.variable_mix.items():
                bucket = totals.setdefault(service, {})
                for name, count in mix.items():
                    bucket[name] = bucket.get(name, 0) + count
        return totals

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def stats(self) -> CallStats:
        return CallStats(self.counts)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "boot_segments": self.boot_segments,
            "counts": self.counts,
            "variable_mix": self.variable_mix,
            "segments": [s.to_dict() for s in self.segments],
        }


def _validate(spec: ScenarioSpec) -> None:
    if not spec.segments:
        raise ScenarioSpecError(f"{spec.name}: at least one boot segment is required")
    for index, segment in enumerate(spec.segments):
        for service, count in segment.counts.items():
            if service not in Service.values:
                raise ScenarioSpecError(f"{spec.name}: segment {index}: unknown service {service!r}")
            if count < 0:
                raise ScenarioSpecError(f"{spec.name}: segment {index}: negative count for {service}")
        for service, mix in segment.variable_mix.items():
            if service not in VARIABLE_SERVICES:
                raise ScenarioSpecError(f"{spec.name}: variable mix given for {service}")
            pinned = sum(mix.values())
            if any(v < 0 for v in mix.values()) or pinned > segment.counts.get(service, 0):
                raise ScenarioSpecError(
                    f"{spec.name}: segment {index}: {service} pins {pinned} calls, "
                    f"count is {segment.counts.get(service, 0)}"
                )


# ---------------------------------------------------------------------------
# Built-ins
# ---------------------------------------------------------------------------

def _segment(get_variable: int, set_variable: int, next_name: int, mix: Dict[str, Dict[str, int]]) -> SegmentSpec:
    return SegmentSpec(
        counts={
            Service.GET_TIME.value: 46,
            Service.GET_VARIABLE.value: get_variable,
            Service.SET_VARIABLE.value: set_variable,
            Service.GET_NEXT_VARIABLE_NAME.value: next_name,
            Service.CONVERT_POINTER.value: 91,
        },
        variable_mix=mix,
    )


def _reads(os_indications: int, supported: int = 0) -> Dict[str, int]:
    mix = {OS_INDICATIONS: os_indications}
    if supported:
        mix[OS_INDICATIONS_SUPPORTED] = supported
    return mix


_SET_ONCE = {"SetVariable": {OS_INDICATIONS: 1}}

_FIRST_BOOT = _segment(754, 110, 499, {"GetVariable": _reads(45), **_SET_ONCE})
_FIRST_BOOT_LOGIN = _segment(786, 110, 499, {"GetVariable": _reads(45 + 16, 16), **_SET_ONCE})
_FIRST_BOOT_SWITCH = _segment(850, 110, 499, {"GetVariable": _reads(45 + 48, 48), **_SET_ONCE})
_SECOND_BOOT_LOGIN = _segment(831, 55, 568, {"GetVariable": _reads(46 + 16, 16)})

BUILTIN_SCENARIOS: Dict[str, ScenarioSpec] = {
    spec.name: spec
    for spec in (
        ScenarioSpec("boot", (_FIRST_BOOT,), "Machine started, no user login."),
        ScenarioSpec(
            "login",
            (_FIRST_BOOT_LOGIN,),
            "Boot, then user login; the 32 login reads are assumed to split 16/16 "
            "between OsIndicationsSupported and OsIndications.",
        ),
        ScenarioSpec("working", (_FIRST_BOOT_LOGIN,), "Login, then 15 minutes of ordinary desktop work."),
        ScenarioSpec("hour", (_FIRST_BOOT_LOGIN,), "Login, then one idle hour ending at the lock screen."),
        ScenarioSpec("switch", (_FIRST_BOOT_SWITCH,), "Login, then a switch to another user."),
        ScenarioSpec("reboot", (_FIRST_BOOT_LOGIN, _SECOND_BOOT_LOGIN), "Login, reboot, login again."),
    )
}


def get_scenario(name: str) -> ScenarioSpec:
    try:
        return BUILTIN_SCENARIOS[name]
    except KeyError:
        raise UnknownScenario(name) from None


# ---------------------------------------------------------------------------
# Spec files
# ---------------------------------------------------------------------------

_COUNTS = {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}}
_MIX = {"type": "object", "additionalProperties": _COUNTS}

SCENARIO_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["name", "counts"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "boot_segments": {"type": "integer", "minimum": 1},
        "counts": _COUNTS,
        "variable_mix": _MIX,
        "segments": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["counts"],
                "properties": {"counts": _COUNTS, "variable_mix": _MIX},
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


def _split(total: int, parts: int) -> List[int]:
    base, rest = divmod(total, parts)
    return [base + (1 if i < rest else 0) for i in range(parts)]


def scenario_from_dict(data: Mapping[str, Any]) -> ScenarioSpec:
    """
    Raises:
        ScenarioSpecError: schema violation, or segments disagreeing with the totals.
    """
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ScenarioSpecError(f"scenario spec rejected: {exc.message}") from None
    boot_segments = int(data.get("boot_segments", len(data.get("segments", [])) or 1))
    if "segments" in data:
        segments = tuple(
            SegmentSpec(dict(s["counts"]), {k: dict(v) for k, v in s.get("variable_mix", {}).items()})
            for s in data["segments"]
        )
        if len(segments) != boot_segments:
            raise ScenarioSpecError(f"{data['name']}: {len(segments)} segments, boot_segments is {boot_segments}")
    else:
        per_segment: List[Tuple[Dict[str, int], Dict[str, Dict[str, int]]]] = [({}, {}) for _ in range(boot_segments)]
        for service, count in data["counts"].items():
            for i, part in enumerate(_split(count, boot_segments)):
                per_segment[i][0][service] = part
        for service, mix in data.get("variable_mix", {}).items():
            for name, count in mix.items():
                for i, part in enumerate(_split(count, boot_segments)):
                    per_segment[i][1].setdefault(service, {})[name] = part
        segments = tuple(SegmentSpec(c, m) for c, m in per_segment)
    spec = ScenarioSpec(str(data["name"]), segments, str(data.get("description", "")))
    declared = {k: v for k, v in data["counts"].items() if v}
    actual = {k: v for k, v in spec.counts.items() if v}
    if declared != actual:
        raise ScenarioSpecError(f"{spec.name}: segment counts do not add up to the declared counts")
    return spec


def load_scenario(path: PathLike) -> ScenarioSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioSpecError(f"cannot read scenario spec {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioSpecError(f"{path} is not valid JSON: {exc}") from None
    return scenario_from_dict(data)


def resolve_scenario(name_or_path: str) -> ScenarioSpec:
    """A built-in name, or the path of a JSON spec file."""
    if name_or_path in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[name_or_path]
    if name_or_path.endswith(".json") or Path(name_or_path).is_file():
        return load_scenario(name_or_path)
    raise UnknownScenario(name_or_path)


def export_builtin_scenarios(out_dir: PathLike) -> List[Path]:
    target = Path(out_dir)
    target.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, spec in BUILTIN_SCENARIOS.items():
        path = target / f"{name}.json"
        path.write_text(json.dumps(spec.to_dict(), indent=2) + "\n", encoding="utf-8")
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioRun:
    scenario: str
    lines: List[str]
    stats: CallStats
    segment_starts: List[int]

    def summary(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "counts": dict(self.stats.counts),
            "total": self.stats.total,
            "segment_starts": list(self.segment_starts),
        }


def segment_plan(segment: SegmentSpec) -> List[Tuple[str, Optional[str]]]:
    """`(service, variable name)` per call of one segment, before shuffling."""
    plan: List[Tuple[str, Optional[str]]] = []
    for service in Service.values:
        count = segment.counts.get(service, 0)
        if not count:
            continue
        if service not in VARIABLE_SERVICES:
            plan.extend((service, None) for _ in range(count))
            continue
        pinned = [name for name, n in segment.variable_mix.get(service, {}).items() for _ in range(n)]
        rest = count - len(pinned)
        plan.extend((service, name) for name in pinned)
        plan.extend((service, VARIABLE_POOL[i % len(VARIABLE_POOL)]) for i in range(rest))
    return plan


def _check_traced(table: ServiceTable, spec: ScenarioSpec) -> None:
    for service, count in spec.counts.items():
        hook = table.hooks.get(service)
        if count and (hook is None or hook.action != HookAction.TRACE_ONLY):
            raise NotTraced(service)


def run_scenario(spec: ScenarioSpec, table: Optional[ServiceTable] = None, seed: int = 0) -> ScenarioRun:
    """
    Dispatch the spec's calls through a TraceOnly-hooked table.

    Calls are shuffled within each boot segment by a generator seeded from
    `seed` and the segment index; ids run 0, 1, 2, ... across segments.

    Raises:
        NotTraced: a service the spec calls is not hooked with TraceOnly.
    """
    if table is None:
        table = new_service_table()
        install_hooks(table, Hook.trace_all())
    _check_traced(table, spec)

    sink = ListSink()
    counts: Dict[str, int] = {}
    segment_starts: List[int] = []
    call_id = 0
    for index, segment in enumerate(spec.segments):
        plan = segment_plan(segment)
        random.Random(seed * 1_000_003 + index).shuffle(plan)
        segment_starts.append(call_id)
        for service, variable in plan:
            address = HANDLER_BASE + (call_id % 64) * 8
            dispatch(table, make_call(service, call_id, variable, address), sink)
            counts[service] = counts.get(service, 0) + 1
            call_id += 1

    stats = CallStats(counts)
    logger.info(
        "scenario finished",
        extra={"event_fields": {"scenario": spec.name, "calls": stats.total, "lines": len(sink.lines), "seed": seed}},
    )
    return ScenarioRun(spec.name, sink.lines, stats, segment_starts)


def write_scenario_run(run: ScenarioRun, out_dir: PathLike, name: Optional[str] = None) -> Tuple[Path, Path]:
    """Write `<name>.log` (trace lines) and `<name>.json` (counts summary)."""
    target = Path(out_dir)
    target.mkdir(parents=True, exist_ok=True)
    stem = name or run.scenario
    log_path = target / f"{stem}.log"
    json_path = target / f"{stem}.json"
    log_path.write_text("".join(line + "\n" for line in run.lines), encoding="utf-8")
    json_path.write_text(json.dumps(run.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return log_path, json_path
