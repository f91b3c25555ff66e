"""
Reassembly of tracer records into calls.

Records sharing `(service, id)` form one call. Within a call, records of one
argument (same type and argument name) are ordered by `part` and their data
merged; parts must run 0..n-1 without gaps, otherwise the whole call is dropped
and an issue reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from rts.tracing import RecordType, TraceRecord

from .parser import ParseIssue

ArgMap = Dict[str, Dict[str, object]]


@dataclass(frozen=True)
class CallSummary:
    id: int
    service: str
    in_args: ArgMap = field(default_factory=dict)
    out_args: ArgMap = field(default_factory=dict)

    @property
    def variable_name(self) -> Optional[str]:
        data = self.in_args.get("VariableName")
        if data is None:
            return None
        value = data.get("VariableName")
        return None if value is None else str(value)


def reassemble_calls(records: Iterable[TraceRecord]) -> Tuple[List[CallSummary], List[ParseIssue]]:
    groups: Dict[Tuple[str, int], Dict[Tuple[str, str], Dict[int, Dict[str, object]]]] = {}
    issues: List[ParseIssue] = []
    broken = set()

    for record in records:
        key = (record.service, record.id)
        args = groups.setdefault(key, {})
        parts = args.setdefault((str(record.type), record.argument), {})
        if record.part in parts:
            issues.append(ParseIssue(None, f"{record.service}#{record.id} {record.argument}: duplicate part {record.part}"))
            broken.add(key)
            continue
        parts[record.part] = record.data

    calls: List[CallSummary] = []
    for key in sorted(groups, key=lambda k: (k[1], k[0])):
        service, call_id = key
        in_args: ArgMap = {}
        out_args: ArgMap = {}
        for (record_type, argument), parts in groups[key].items():
            if sorted(parts) != list(range(len(parts))):
                issues.append(ParseIssue(
                    None, f"{service}#{call_id} {argument}: parts {sorted(parts)} are not contiguous from 0"
                ))
                broken.add(key)
                break
            merged: Dict[str, object] = {}
            for index in range(len(parts)):
                merged.update(parts[index])
            target = in_args if record_type == RecordType.IN else out_args
            target[argument] = merged
        if key in broken:
            continue
        calls.append(CallSummary(call_id, service, in_args, out_args))
    return calls, issues
