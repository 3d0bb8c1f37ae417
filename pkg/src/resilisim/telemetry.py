"""Run traces, resilience metrics and their on-disk formats.

Traces are written as one JSON object per line with the fixed leading keys
``format_version, t_us, entity, kind`` followed by payload keys in sorted
order. Metrics are CSV with the header ``format_version,scope,subject,metric,value``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

from .contracts import (
    DEADLINE_MISS,
    HEARTBEAT_LOSS,
    PERIOD_MISS,
    Every,
    PortEvent,
    TimedGuarantee,
    Within,
    WithinEvery,
    check_guarantee,
)
from .faultlab import FaultSpec, HangingProcess

FORMAT_VERSION = 1
RESERVED = ("format_version", "t_us", "entity", "kind")
METRICS_HEADER = ("format_version", "scope", "subject", "metric", "value")

# record kinds
SAMPLE = "Sample"
SUPPRESSED = "SuppressedSample"
SEND = "Send"
DELIVERY = "Delivery"
DROPPED = "Dropped"
UNDELIVERABLE = "Undeliverable"
HEARTBEAT = "Heartbeat"
VIOLATION = "Violation"
ACTION = "Action"
RECONFIGURATION = "Reconfiguration"
FAULT_ONSET = "FaultOnset"
FAULT_CLEARED = "FaultCleared"
FAULT_MESSAGE = "FaultMessage"
QOS_CHANGE = "QosChange"
OBSERVER_RESET = "ObserverReset"
ESCALATION = "Escalation"
INFEASIBLE = "Infeasible"
RUN_START = "RunStart"
RUN_END = "RunEnd"


class IncompleteTrace(ValueError):
    pass


class IoFailure(OSError):
    pass


@dataclass(frozen=True)
class TraceRecord:
    time: int
    entity: str
    kind: str
    data: dict[str, Any] = field(default_factory=dict, compare=True, hash=False)

    def get(self, key: str, default: Any = None) -> Any:
        return self.data.get(key, default)

    def to_json(self) -> str:
        obj: dict[str, Any] = {"format_version": FORMAT_VERSION, "t_us": self.time, "entity": self.entity, "kind": self.kind}
        for k in sorted(self.data):
            obj[k] = self.data[k]
        return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "TraceRecord":
        obj = json.loads(line)
        version = obj.pop("format_version", None)
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported trace format_version {version!r}")
        return cls(obj.pop("t_us"), obj.pop("entity"), obj.pop("kind"), obj)


class Trace:
    """Append-only record list; time never goes backwards."""

    def __init__(self, records: Iterable[TraceRecord] = ()) -> None:
        self.records: list[TraceRecord] = []
        for r in records:
            self._push(r)

    def _push(self, r: TraceRecord) -> None:
        if self.records and r.time < self.records[-1].time:
            raise ValueError(f"record at {r.time} after {self.records[-1].time}")
        for k in RESERVED:
            if k in r.data:
                raise ValueError(f"payload key {k!r} is reserved")
        self.records.append(r)

    def append(self, time: int, entity: str, kind: str, **data: Any) -> TraceRecord:
        r = TraceRecord(time, entity, kind, {k: v for k, v in data.items() if v is not None})
        self._push(r)
        return r

    def __iter__(self) -> Iterator[TraceRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def of_kind(self, *kinds: str) -> list[TraceRecord]:
        return [r for r in self.records if r.kind in kinds]

    def first(self, kind: str, **match: Any) -> TraceRecord | None:
        for r in self.records:
            if r.kind == kind and all(r.data.get(k) == v for k, v in match.items()):
                return r
        return None

    @property
    def complete(self) -> bool:
        return bool(self.records) and self.records[-1].kind == RUN_END

    def lines(self) -> list[str]:
        return [r.to_json() for r in self.records]


# -- export -------------------------------------------------------------------


def _write(path: str | Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e.strerror or e}") from e


def export_trace(trace: Trace, path: str | Path) -> None:
    _write(path, "".join(line + "\n" for line in trace.lines()))


def load_trace(path: str | Path) -> Trace:
    try:
        with open(path, encoding="utf-8") as fh:
            return Trace(TraceRecord.from_json(line) for line in fh if line.strip())
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e.strerror or e}") from e


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return f"{float(value):.6f}"
    return str(value)


def metrics_csv(report: "MetricsReport | None") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRICS_HEADER)
    for scope, subject, metric, value in (report.rows() if report else []):
        w.writerow((FORMAT_VERSION, scope, subject, metric, _fmt(value)))
    return buf.getvalue()


def export_metrics(report: "MetricsReport | None", path: str | Path) -> None:
    _write(path, metrics_csv(report))


# -- metrics ------------------------------------------------------------------


@dataclass(frozen=True)
class FaultMetrics:
    fault: str
    onset: int
    violation: int | None
    restored: int | None
    e2e_restored: int | None

    @property
    def detection_latency(self) -> int | None:
        return None if self.violation is None else self.violation - self.onset

    @property
    def recovery_time(self) -> int | None:
        if self.violation is None or self.restored is None:
            return None
        return self.restored - self.violation


@dataclass(frozen=True)
class Actuation:
    origin: int
    time: int

    @property
    def latency(self) -> int:
        return self.time - self.origin


@dataclass
class MetricsReport:
    horizon: int
    faults: list[FaultMetrics]
    downtime: int
    mean_qos: Fraction
    reconfigurations: dict[str, int]
    actuations: list[Actuation]
    violations: list[tuple[str, int, str]]  # (observer, time, kind)
    infeasible: int

    @property
    def deadline_misses(self) -> int:
        return sum(1 for _, _, k in self.violations if k == DEADLINE_MISS)

    def fault(self, fault_id: str) -> FaultMetrics:
        for f in self.faults:
            if f.fault == fault_id:
                return f
        raise KeyError(fault_id)

    def rows(self) -> list[tuple[str, str, str, Any]]:
        rows: list[tuple[str, str, str, Any]] = [
            ("run", "", "horizon_us", self.horizon),
            ("run", "", "downtime_us", self.downtime),
            ("run", "", "mean_qos", self.mean_qos),
            ("run", "", "reconfigurations_application", self.reconfigurations.get("Application", 0)),
            ("run", "", "reconfigurations_platform", self.reconfigurations.get("Platform", 0)),
            ("run", "", "violations", len(self.violations)),
            ("run", "", "deadline_misses", self.deadline_misses),
            ("run", "", "infeasible", self.infeasible),
            ("run", "", "actuations", len(self.actuations)),
        ]
        for f in self.faults:
            rows += [
                ("fault", f.fault, "onset_us", f.onset),
                ("fault", f.fault, "violation_us", f.violation),
                ("fault", f.fault, "detection_latency_us", f.detection_latency),
                ("fault", f.fault, "restored_us", f.restored),
                ("fault", f.fault, "recovery_time_us", f.recovery_time),
                ("fault", f.fault, "e2e_restored_us", f.e2e_restored),
            ]
        for a in self.actuations:
            rows.append(("actuation", str(a.origin), "e2e_latency_us", a.latency))
        for obs, t, kind in self.violations:
            rows.append(("violation", f"{obs}@{t}", "kind", kind))
        return rows


def _union_length(intervals: Iterable[tuple[int, int]], lo: int, hi: int) -> int:
    total, cur_a, cur_b = 0, None, None
    for a, b in sorted((max(a, lo), min(b, hi)) for a, b in intervals):
        if b <= a:
            continue
        if cur_b is None or a > cur_b:
            if cur_b is not None:
                total += cur_b - cur_a
            cur_a, cur_b = a, b
        else:
            cur_b = max(cur_b, b)
    if cur_b is not None:
        total += cur_b - cur_a
    return total


def _time_weighted(steps: Sequence[tuple[int, Fraction]], horizon: int) -> Fraction:
    area = Fraction(0)
    for i, (t, q) in enumerate(steps):
        end = steps[i + 1][0] if i + 1 < len(steps) else horizon
        area += q * (min(end, horizon) - min(t, horizon))
    return area / horizon


def _meets_deadline(r: TraceRecord) -> bool:
    return r.time - r.data["hop_start"] <= r.data["deadline"]


def compute_metrics(trace: Trace, faults: Sequence[FaultSpec] = (), delta: int | None = None) -> MetricsReport:
    """Resilience figures for a finished run.

    Service counts as restored for a component fault at the first later
    delivery from that component that meets its deadline, and for a link
    fault at the first later heartbeat or delivery over the monitored
    relation. ``e2e_restored`` is the first actuation sampled at or after the
    onset whose sensor-to-actuator latency is within ``delta``.
    """
    if not trace.complete:
        raise IncompleteTrace("trace has no RunEnd record")
    start = trace.first(RUN_START)
    horizon = trace.records[-1].time
    if delta is None and start is not None:
        delta = start.get("delta_us")

    recs = trace.records
    violations = [r for r in recs if r.kind == VIOLATION]
    deliveries = [r for r in recs if r.kind == DELIVERY]
    actuation_recs = [r for r in deliveries if r.get("sink")]
    heartbeats = [r for r in recs if r.kind == HEARTBEAT]

    fault_rows: list[FaultMetrics] = []
    for f in faults:
        if isinstance(f, HangingProcess):
            v = next((r for r in violations if r.time >= f.onset and r.get("component") == f.target), None)
            restored = None
            if v is not None:
                restored = next(
                    (r.time for r in deliveries if r.time >= v.time and r.entity == f.target and _meets_deadline(r)),
                    None,
                )
        else:
            v = next((r for r in violations if r.time >= f.onset and f.link in (r.get("links") or ())), None)
            restored = None
            if v is not None:
                rel = v.get("relation")
                restored = next(
                    (
                        r.time
                        for r in recs
                        if r.time >= v.time
                        and r.kind in (HEARTBEAT, DELIVERY)
                        and r.get("relation") == rel
                        and (r.kind == HEARTBEAT or _meets_deadline(r))
                    ),
                    None,
                )
        e2e = None
        if delta is not None:
            e2e = next(
                (r.time for r in actuation_recs if r.get("origin") >= f.onset and r.time - r.get("origin") <= delta),
                None,
            )
        fault_rows.append(FaultMetrics(f.id, f.onset, None if v is None else v.time, restored, e2e))

    impaired: list[tuple[int, int]] = []
    for r in recs:
        if r.kind == ACTION and r.get("strategy") == "RestartComponent" and r.get("ok"):
            impaired.append((r.time, r.get("until")))
    for v in violations:
        rel = v.get("relation")
        if rel is None:
            continue
        back = next((h.time for h in heartbeats if h.time > v.time and h.get("relation") == rel), horizon)
        impaired.append((v.time, back))
    downtime = _union_length(impaired, 0, horizon)

    steps: dict[str, list[tuple[int, Fraction]]] = {}
    for r in recs:
        if r.kind == QOS_CHANGE:
            steps.setdefault(r.entity, []).append((r.time, Fraction(r.get("qos"))))
    if horizon > 0 and steps:
        mean_qos = sum((_time_weighted(s, horizon) for s in steps.values()), Fraction(0)) / len(steps)
    else:
        mean_qos = Fraction(0)

    reconf: dict[str, int] = {}
    for r in recs:
        if r.kind == RECONFIGURATION:
            reconf[r.get("level")] = reconf.get(r.get("level"), 0) + 1

    return MetricsReport(
        horizon=horizon,
        faults=fault_rows,
        downtime=downtime,
        mean_qos=mean_qos,
        reconfigurations=reconf,
        actuations=[Actuation(r.get("origin"), r.time) for r in actuation_recs],
        violations=[(r.entity, r.time, r.get("type")) for r in violations],
        infeasible=sum(1 for r in recs if r.kind == INFEASIBLE),
    )


# -- replay -------------------------------------------------------------------


def _guarantee_from(reset: TraceRecord) -> tuple[TimedGuarantee, str]:
    d, p = reset.get("deadline"), reset.get("period")
    if d is not None and p is not None:
        pattern: Any = WithinEvery(d, p)
    elif d is not None:
        pattern = Within(d)
    else:
        pattern = Every(p)
    kind = HEARTBEAT_LOSS if reset.get("template") == "heartbeat" else PERIOD_MISS
    return TimedGuarantee(output="out", input="in", pattern=pattern), kind


def replay_violations(trace: Trace) -> list[tuple[str, int, str]]:
    """Recompute every observer verdict offline from the recorded port events.

    Each ``ObserverReset`` opens a fresh monitoring segment. A segment closed
    by a reset during data handling ends just before that instant (no timer
    could have fired yet); otherwise it includes it.
    """
    if not trace.complete:
        raise IncompleteTrace("trace has no RunEnd record")
    horizon = trace.records[-1].time
    segments: dict[str, list[tuple[int, TraceRecord]]] = {}
    for i, r in enumerate(trace.records):
        if r.kind == OBSERVER_RESET:
            segments.setdefault(r.entity, []).append((i, r))

    found: list[tuple[str, int, str]] = []
    for obs, opens in segments.items():
        for n, (i, reset) in enumerate(opens):
            if n + 1 < len(opens):
                j, nxt = opens[n + 1]
                until = nxt.time if nxt.get("ctx") != "data" else nxt.time - 1
            else:
                j, until = len(trace.records), horizon
            keys = {reset.get("in_key"): "in", reset.get("out_key"): "out"}
            keys.pop(None, None)
            events = [
                PortEvent(keys[k], r.time)
                for r in trace.records[i + 1 : j]
                for k in (r.get("ports") or ())
                if k in keys
            ]
            g, period_kind = _guarantee_from(reset)
            verdict = check_guarantee(g, events, max(until, reset.time), period_kind=period_kind)
            if verdict.violated:
                found.append((obs, verdict.violation_time, verdict.kind))
    return sorted(found, key=lambda x: (x[1], x[0]))


def recorded_violations(trace: Trace) -> list[tuple[str, int, str]]:
    return sorted(((r.entity, r.time, r.get("type")) for r in trace.of_kind(VIOLATION)), key=lambda x: (x[1], x[0]))
