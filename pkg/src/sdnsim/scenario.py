"""Declarative run descriptions and their on-disk JSON form.

A scenario pins everything a run depends on: topology, application,
workload, protocol variant, fault schedule, and seed. Loading is strict --
unknown keys and malformed values are rejected with the offending path so
config errors surface before any simulation starts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Optional

from .ofmodel import ACK_MARKER, CONTROLLER_PORT

VARIANTS = ("NAIVE", "PAPER_A", "PAPER_B")
APPS = ("mac-learner", "static-router")
DIRECTIONS = ("SEND", "DELIVER", "ANY")


class ScenarioError(Exception):
    """Invalid scenario file or value; message carries the config path."""


@dataclass(frozen=True)
class InitialFlow:
    in_port: Optional[int]
    payload_prefix: Optional[bytes]
    priority: int
    out_ports: tuple[int, ...]  # empty means drop


@dataclass(frozen=True)
class SwitchSpec:
    id: int
    ports: tuple[int, ...]
    flows: tuple[InitialFlow, ...] = ()


@dataclass(frozen=True)
class WorkloadItem:
    t: int
    switch: int
    in_port: int
    payload: bytes


@dataclass(frozen=True)
class TracePointSpec:
    """Crash trigger: the occurrence-th trace record where the target
    controller sends/delivers a message (optionally of one kind)."""

    direction: str = "ANY"
    msg_type: Optional[str] = None
    occurrence: int = 1


@dataclass(frozen=True)
class FaultSpec:
    target: int
    at_time: Optional[int] = None
    at_point: Optional[TracePointSpec] = None


@dataclass(frozen=True)
class Scenario:
    name: str
    variant: str
    n_controllers: int
    switches: tuple[SwitchSpec, ...]
    app: str
    workload: tuple[WorkloadItem, ...]
    app_config: dict = field(default_factory=dict)
    faults: tuple[FaultSpec, ...] = ()
    detector_delay: int = 2
    seed: int = 0
    quiesce_limit: int = 10000
    latency: int = 1
    suppress_slave_events: bool = False

    def with_variant(self, variant: str) -> "Scenario":
        return replace(self, variant=variant,
                       suppress_slave_events=self.suppress_slave_events and variant == "NAIVE")

    def with_extra_fault(self, fault: FaultSpec) -> "Scenario":
        return replace(self, faults=self.faults + (fault,))

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=seed)

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ScenarioError(f"variant: unknown variant {self.variant!r}")
        if self.n_controllers < 1:
            raise ScenarioError("n_controllers: must be at least 1")
        if self.variant != "NAIVE":
            if self.n_controllers < 3 or self.n_controllers % 2 == 0:
                raise ScenarioError(
                    "n_controllers: replicated variants need an odd count >= 3")
            if self.suppress_slave_events:
                raise ScenarioError(
                    "suppress_slave_events: only meaningful for the NAIVE variant")
        if self.app not in APPS:
            raise ScenarioError(f"app: unknown app {self.app!r}")
        if self.detector_delay < 1:
            raise ScenarioError("detector_delay: must be at least 1")
        if self.latency < 1:
            raise ScenarioError("latency: must be at least 1")
        if self.quiesce_limit < 1:
            raise ScenarioError("quiesce_limit: must be at least 1")
        if self.seed < 0:
            raise ScenarioError("seed: must be non-negative")

        seen_sw: set[int] = set()
        for i, sw in enumerate(self.switches):
            path = f"switches[{i}]"
            if sw.id < 0:
                raise ScenarioError(f"{path}.id: must be non-negative")
            if sw.id in seen_sw:
                raise ScenarioError(f"{path}.id: duplicate switch id {sw.id}")
            seen_sw.add(sw.id)
            for p in sw.ports:
                if p <= 0 or p == CONTROLLER_PORT:
                    raise ScenarioError(f"{path}.ports: invalid port {p}")
            for j, fl in enumerate(sw.flows):
                for p in fl.out_ports:
                    if p != CONTROLLER_PORT and p not in sw.ports:
                        raise ScenarioError(
                            f"{path}.flows[{j}]: output port {p} not on switch")

        by_id = {sw.id: sw for sw in self.switches}
        for i, w in enumerate(self.workload):
            path = f"workload[{i}]"
            if w.t < 1:
                raise ScenarioError(f"{path}.t: must be at least 1")
            if w.switch not in by_id:
                raise ScenarioError(f"{path}.switch: unknown switch {w.switch}")
            if w.in_port not in by_id[w.switch].ports:
                raise ScenarioError(f"{path}.in_port: port {w.in_port} not on switch")
            if w.payload.startswith(ACK_MARKER):
                raise ScenarioError(
                    f"{path}.payload: workload payload may not start with the ack marker")

        for i, f in enumerate(self.faults):
            path = f"faults[{i}]"
            if not (0 <= f.target < self.n_controllers):
                raise ScenarioError(f"{path}.target: unknown controller {f.target}")
            if (f.at_time is None) == (f.at_point is None):
                raise ScenarioError(
                    f"{path}: exactly one of at_time/at_point is required")
            if f.at_time is not None and f.at_time < 1:
                raise ScenarioError(f"{path}.at_time: must be at least 1")
            if f.at_point is not None:
                if f.at_point.direction not in DIRECTIONS:
                    raise ScenarioError(
                        f"{path}.at_point.direction: must be one of {DIRECTIONS}")
                if f.at_point.occurrence < 1:
                    raise ScenarioError(f"{path}.at_point.occurrence: must be >= 1")

        if self.app == "static-router":
            for i, r in enumerate(self.app_config.get("routes", [])):
                port = r[1] if isinstance(r, tuple) else r.get("port")
                if port == CONTROLLER_PORT:
                    raise ScenarioError(
                        f"app_config.routes[{i}].port: routes must target physical ports")


# ----------------------------------------------------------------------
# JSON form

_TOP_KEYS = {"name", "variant", "n_controllers", "switches", "app", "app_config",
             "workload", "faults", "detector_delay", "seed", "quiesce_limit",
             "latency", "suppress_slave_events"}


def _require_keys(obj: dict, allowed: set[str], path: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ScenarioError(f"{path}: unknown key(s) {sorted(unknown)}")


def _hex_bytes(value: Any, path: str) -> bytes:
    if not isinstance(value, str):
        raise ScenarioError(f"{path}: expected hex string")
    try:
        return bytes.fromhex(value)
    except ValueError as exc:
        raise ScenarioError(f"{path}: invalid hex string") from exc


def _int(value: Any, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ScenarioError(f"{path}: expected integer")
    return value


def scenario_from_obj(obj: dict) -> Scenario:
    if not isinstance(obj, dict):
        raise ScenarioError("top level: expected an object")
    _require_keys(obj, _TOP_KEYS, "top level")
    for key in ("name", "variant", "n_controllers", "switches", "app", "workload"):
        if key not in obj:
            raise ScenarioError(f"top level: missing required key {key!r}")

    switches = []
    for i, s in enumerate(obj["switches"]):
        path = f"switches[{i}]"
        _require_keys(s, {"id", "ports", "flows"}, path)
        flows = []
        for j, fl in enumerate(s.get("flows", [])):
            fpath = f"{path}.flows[{j}]"
            _require_keys(fl, {"in_port", "payload_prefix", "priority", "out_ports"}, fpath)
            flows.append(InitialFlow(
                in_port=fl.get("in_port"),
                payload_prefix=(_hex_bytes(fl["payload_prefix"], fpath)
                                if "payload_prefix" in fl else None),
                priority=_int(fl.get("priority", 0), f"{fpath}.priority"),
                out_ports=tuple(_int(p, f"{fpath}.out_ports") for p in fl.get("out_ports", [])),
            ))
        switches.append(SwitchSpec(
            id=_int(s["id"], f"{path}.id"),
            ports=tuple(_int(p, f"{path}.ports") for p in s["ports"]),
            flows=tuple(flows),
        ))

    workload = []
    for i, w in enumerate(obj["workload"]):
        path = f"workload[{i}]"
        _require_keys(w, {"t", "switch", "in_port", "payload"}, path)
        workload.append(WorkloadItem(
            t=_int(w["t"], f"{path}.t"),
            switch=_int(w["switch"], f"{path}.switch"),
            in_port=_int(w["in_port"], f"{path}.in_port"),
            payload=_hex_bytes(w["payload"], f"{path}.payload"),
        ))

    faults = []
    for i, f in enumerate(obj.get("faults", [])):
        path = f"faults[{i}]"
        _require_keys(f, {"target", "at_time", "at_point"}, path)
        at_point = None
        if "at_point" in f:
            ppath = f"{path}.at_point"
            _require_keys(f["at_point"], {"direction", "msg_type", "occurrence"}, ppath)
            at_point = TracePointSpec(
                direction=f["at_point"].get("direction", "ANY"),
                msg_type=f["at_point"].get("msg_type"),
                occurrence=_int(f["at_point"].get("occurrence", 1), f"{ppath}.occurrence"),
            )
        faults.append(FaultSpec(
            target=_int(f["target"], f"{path}.target"),
            at_time=_int(f["at_time"], f"{path}.at_time") if "at_time" in f else None,
            at_point=at_point,
        ))

    scenario = Scenario(
        name=str(obj["name"]),
        variant=str(obj["variant"]),
        n_controllers=_int(obj["n_controllers"], "n_controllers"),
        switches=tuple(switches),
        app=str(obj["app"]),
        app_config=dict(obj.get("app_config", {})),
        workload=tuple(workload),
        faults=tuple(faults),
        detector_delay=_int(obj.get("detector_delay", 2), "detector_delay"),
        seed=_int(obj.get("seed", 0), "seed"),
        quiesce_limit=_int(obj.get("quiesce_limit", 10000), "quiesce_limit"),
        latency=_int(obj.get("latency", 1), "latency"),
        suppress_slave_events=bool(obj.get("suppress_slave_events", False)),
    )
    scenario.validate()
    return scenario


def scenario_to_obj(sc: Scenario) -> dict:
    obj: dict[str, Any] = {
        "name": sc.name,
        "variant": sc.variant,
        "n_controllers": sc.n_controllers,
        "switches": [
            {"id": s.id, "ports": list(s.ports),
             "flows": [_flow_to_obj(fl) for fl in s.flows]}
            for s in sc.switches
        ],
        "app": sc.app,
        "workload": [
            {"t": w.t, "switch": w.switch, "in_port": w.in_port,
             "payload": w.payload.hex()}
            for w in sc.workload
        ],
        "detector_delay": sc.detector_delay,
        "seed": sc.seed,
        "quiesce_limit": sc.quiesce_limit,
        "latency": sc.latency,
    }
    if sc.app_config:
        obj["app_config"] = sc.app_config
    if sc.suppress_slave_events:
        obj["suppress_slave_events"] = True
    if sc.faults:
        obj["faults"] = []
        for f in sc.faults:
            fo: dict[str, Any] = {"target": f.target}
            if f.at_time is not None:
                fo["at_time"] = f.at_time
            if f.at_point is not None:
                fo["at_point"] = {"direction": f.at_point.direction,
                                  "occurrence": f.at_point.occurrence}
                if f.at_point.msg_type is not None:
                    fo["at_point"]["msg_type"] = f.at_point.msg_type
            obj["faults"].append(fo)
    return obj


def _flow_to_obj(fl: InitialFlow) -> dict:
    obj: dict[str, Any] = {"priority": fl.priority, "out_ports": list(fl.out_ports)}
    if fl.in_port is not None:
        obj["in_port"] = fl.in_port
    if fl.payload_prefix is not None:
        obj["payload_prefix"] = fl.payload_prefix.hex()
    return obj


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}: {exc.msg}") from exc
    return scenario_from_obj(obj)
