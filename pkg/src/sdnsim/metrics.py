"""Control-message accounting, recomputable from any trace.

Setup-phase traffic (sent before the first workload injection) is excluded
so the totals measure the per-event protocol cost: event fan-out,
replication, command delivery, and acknowledgement fan-out.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .ofmodel import ACK_MARKER
from .trace import Trace


@dataclass(frozen=True)
class MetricsReport:
    variant: str
    per_kind: dict[str, int]
    total: int
    n_events: int
    per_event: float

    def to_obj(self) -> dict:
        return {
            "variant": self.variant,
            "per_kind": dict(sorted(self.per_kind.items())),
            "total": self.total,
            "n_events": self.n_events,
            "per_event": self.per_event,
        }

    def lines(self) -> list[str]:
        out = [f"control-message deliveries ({self.variant}, setup excluded):"]
        for kind, count in sorted(self.per_kind.items()):
            out.append(f"  {kind:<16} {count}")
        out.append(f"  {'total':<16} {self.total}")
        out.append(f"  events={self.n_events} per-event={self.per_event:.1f}")
        return out


def compute_metrics(trace: Trace) -> MetricsReport:
    per_kind: Counter[str] = Counter()
    for rec in trace.records:
        if rec.kind != "DELIVER" or rec.detail.get("phase") == "setup":
            continue
        per_kind[(rec.msg or {}).get("type", "?")] += 1

    events = set()
    for rec in trace.records:
        if (rec.kind == "SEND" and rec.actor.startswith("s")
                and (rec.msg or {}).get("type") == "PacketIn"
                and not bytes.fromhex(rec.msg["payload"]).startswith(ACK_MARKER)):
            events.add(rec.msg["event"])

    total = sum(per_kind.values())
    n_events = len(events)
    return MetricsReport(
        variant=trace.meta.get("variant", "?"),
        per_kind=dict(per_kind),
        total=total,
        n_events=n_events,
        per_event=(total / n_events) if n_events else 0.0,
    )
