"""
Call statistics and scenario comparison.

`CallStats` counts calls per service; `compare_scenarios()` subtracts two of
them (b - a) and breaks the GetVariable delta down by variable name.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

TABLE_SERVICES = ("GetTime", "GetVariable", "SetVariable", "GetNextVariableName", "ConvertPointer")


@dataclass(frozen=True)
class CallStats:
    counts: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", {k: int(v) for k, v in self.counts.items() if v})

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def get(self, service: str) -> int:
        return self.counts.get(service, 0)

    def to_dict(self) -> Dict[str, Any]:
        return {"counts": dict(self.counts), "total": self.total}


def count_by_service(calls: Iterable[Any]) -> CallStats:
    """Count calls (anything with a `service` attribute) per service."""
    return CallStats(Counter(str(call.service) for call in calls))


def variable_counts(calls: Iterable[Any], service: str = "GetVariable") -> Dict[str, int]:
    """Per-variable-name call counts for one variable service."""
    counter: Counter = Counter()
    for call in calls:
        if call.service == service:
            name = call.variable_name
            if name is not None:
                counter[name] += 1
    return dict(counter)


@dataclass(frozen=True)
class ScenarioDelta:
    services: Mapping[str, int]
    variables: Mapping[str, int] = field(default_factory=dict)

    def get(self, service: str) -> int:
        return self.services.get(service, 0)

    @property
    def is_zero(self) -> bool:
        return not any(self.services.values()) and not any(self.variables.values())

    def to_dict(self) -> Dict[str, Any]:
        return {"services": dict(self.services), "GetVariable": dict(self.variables)}


def compare_scenarios(
    a: CallStats,
    b: CallStats,
    a_calls: Optional[Sequence[Any]] = None,
    b_calls: Optional[Sequence[Any]] = None,
) -> ScenarioDelta:
    """Per-service `b - a`; with calls given, also the per-name GetVariable delta."""
    names = sorted(set(a.counts) | set(b.counts))
    services = {name: b.get(name) - a.get(name) for name in names}
    variables: Dict[str, int] = {}
    if a_calls is not None and b_calls is not None:
        va = variable_counts(a_calls)
        vb = variable_counts(b_calls)
        for name in sorted(set(va) | set(vb)):
            diff = vb.get(name, 0) - va.get(name, 0)
            if diff:
                variables[name] = diff
    return ScenarioDelta(services=services, variables=variables)


def split_segments(calls: Sequence[Any], segment_starts: Sequence[int]) -> List[List[Any]]:
    """Partition calls by the first call id of each boot segment."""
    starts = sorted(segment_starts) or [0]
    segments: List[List[Any]] = [[] for _ in starts]
    for call in calls:
        index = 0
        for i, start in enumerate(starts):
            if call.id >= start:
                index = i
        segments[index].append(call)
    return segments


def stats_to_json(scenario: str, stats: CallStats, **extra: Any) -> str:
    payload = {"scenario": scenario, "counts": dict(stats.counts), "total": stats.total}
    payload.update(extra)
    return json.dumps(payload, indent=2, sort_keys=True)


def format_stats_table(stats_by_scenario: Mapping[str, CallStats], services: Sequence[str] = TABLE_SERVICES) -> str:
    """
    Services as rows, scenarios as columns, then a Total row.

        Runtime Service        Boot  Login ...
        GetTime                  46     46
        ...
        Total                  1500   1532
    """
    columns = list(stats_by_scenario)
    extra = sorted({s for st in stats_by_scenario.values() for s in st.counts} - set(services))
    rows = list(services) + extra
    label_width = max(len("Runtime Service"), *(len(r) for r in rows))
    widths = [
        max(len(col), *(len(str(stats_by_scenario[col].get(r))) for r in rows), len(str(stats_by_scenario[col].total)))
        for col in columns
    ]

    def line(label: str, cells: Sequence[str]) -> str:
        return "  ".join([label.ljust(label_width)] + [c.rjust(w) for c, w in zip(cells, widths)])

    out = [line("Runtime Service", [c.capitalize() for c in columns])]
    out.append("-" * len(out[0]))
    for row in rows:
        out.append(line(row, [str(stats_by_scenario[c].get(row)) for c in columns]))
    out.append("-" * len(out[0]))
    out.append(line("Total", [str(stats_by_scenario[c].total) for c in columns]))
    return "\n".join(out)
