"""Reading and writing instance and report files.

Instances are stored as a single UTF-8 JSON document.  Field names mirror
the domain types; link tables are serialized as square matrices in node
order.  The reader is strict: unknown fields are rejected, and a written
instance reads back equal (floats survive via shortest-repr JSON encoding).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

from .model import (
    Application,
    AppModule,
    FarmGeometry,
    Instance,
    LinkTable,
    Placement,
    ResourceNode,
    SecurityLevel,
    Tier,
)


def _require_keys(obj: Mapping[str, Any], required: set[str], optional: set[str], where: str) -> None:
    if not isinstance(obj, Mapping):
        raise ValueError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - required - optional)
    if unknown:
        raise ValueError(f"{where}: unknown fields {unknown}")
    missing = sorted(required - set(obj))
    if missing:
        raise ValueError(f"{where}: missing fields {missing}")


def _num(obj: Mapping[str, Any], key: str, where: str) -> float:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


def _node_to_dict(n: ResourceNode) -> dict[str, Any]:
    d: dict[str, Any] = {
        "id": n.id,
        "tier": n.tier.value,
        "proc_capacity": n.proc_capacity,
        "mem_capacity": n.mem_capacity,
        "stor_capacity": n.stor_capacity,
        "proc_cost": n.proc_cost,
        "stor_cost": n.stor_cost,
        "sensor_bw_cost": n.sensor_bw_cost,
        "user_bw_cost": n.user_bw_cost,
        "sensor_delay": n.sensor_delay,
        "user_delay": n.user_delay,
    }
    if n.position is not None:
        d["position"] = [n.position[0], n.position[1]]
    if n.tx_range is not None:
        d["tx_range"] = n.tx_range
    if n.security_rating is not None:
        d["security_rating"] = n.security_rating.label
    return d


_NODE_REQUIRED = {
    "id", "tier", "proc_capacity", "mem_capacity", "stor_capacity",
    "proc_cost", "stor_cost", "sensor_bw_cost", "user_bw_cost",
    "sensor_delay", "user_delay",
}
_NODE_OPTIONAL = {"position", "tx_range", "security_rating"}


def _node_from_dict(d: Mapping[str, Any], where: str) -> ResourceNode:
    _require_keys(d, _NODE_REQUIRED, _NODE_OPTIONAL, where)
    try:
        tier = Tier(d["tier"])
    except ValueError:
        raise ValueError(f"{where}.tier: unknown tier {d['tier']!r}") from None
    position = None
    if "position" in d:
        raw = d["position"]
        if not isinstance(raw, list) or len(raw) != 2:
            raise ValueError(f"{where}.position: expected [x, y]")
        position = (float(raw[0]), float(raw[1]))
    rating = None
    if "security_rating" in d:
        rating = SecurityLevel.from_name(str(d["security_rating"]))
    return ResourceNode(
        id=str(d["id"]),
        tier=tier,
        proc_capacity=_num(d, "proc_capacity", where),
        mem_capacity=_num(d, "mem_capacity", where),
        stor_capacity=_num(d, "stor_capacity", where),
        proc_cost=_num(d, "proc_cost", where),
        stor_cost=_num(d, "stor_cost", where),
        sensor_bw_cost=_num(d, "sensor_bw_cost", where),
        user_bw_cost=_num(d, "user_bw_cost", where),
        sensor_delay=_num(d, "sensor_delay", where),
        user_delay=_num(d, "user_delay", where),
        position=position,
        tx_range=_num(d, "tx_range", where) if "tx_range" in d else None,
        security_rating=rating,
    )


def _app_to_dict(a: Application) -> dict[str, Any]:
    return {
        "id": a.id,
        "modules": [
            {"proc_req": m.proc_req, "mem_req": m.mem_req,
             "stor_req": m.stor_req, "exec_delay": m.exec_delay}
            for m in a.modules
        ],
        "input_traffic": a.input_traffic,
        "inter_traffic": list(a.inter_traffic),
        "output_traffic": a.output_traffic,
        "qos_threshold": a.qos_threshold,
        "security_req": a.security_req.label,
    }


def _app_from_dict(d: Mapping[str, Any], where: str) -> Application:
    _require_keys(
        d,
        {"id", "modules", "input_traffic", "inter_traffic", "output_traffic",
         "qos_threshold", "security_req"},
        set(),
        where,
    )
    modules = []
    for j, md in enumerate(d["modules"]):
        mwhere = f"{where}.modules[{j}]"
        _require_keys(md, {"proc_req", "mem_req", "stor_req", "exec_delay"}, set(), mwhere)
        modules.append(AppModule(
            proc_req=_num(md, "proc_req", mwhere),
            mem_req=_num(md, "mem_req", mwhere),
            stor_req=_num(md, "stor_req", mwhere),
            exec_delay=_num(md, "exec_delay", mwhere),
        ))
    return Application(
        id=str(d["id"]),
        modules=tuple(modules),
        input_traffic=_num(d, "input_traffic", where),
        inter_traffic=tuple(float(x) for x in d["inter_traffic"]),
        output_traffic=_num(d, "output_traffic", where),
        qos_threshold=_num(d, "qos_threshold", where),
        security_req=SecurityLevel.from_name(str(d["security_req"])),
    )


def instance_to_dict(inst: Instance) -> dict[str, Any]:
    ids = [n.id for n in inst.nodes]
    return {
        "nodes": [_node_to_dict(n) for n in inst.nodes],
        "links": {
            "delay": [[inst.links.delay[(u, v)] for v in ids] for u in ids],
            "bw_cost": [[inst.links.bw_cost[(u, v)] for v in ids] for u in ids],
        },
        "apps": [_app_to_dict(a) for a in inst.apps],
        "farm": {"width": inst.farm.width, "height": inst.farm.height},
    }


def instance_from_dict(d: Mapping[str, Any]) -> Instance:
    _require_keys(d, {"nodes", "links", "apps", "farm"}, set(), "instance")
    nodes = tuple(_node_from_dict(nd, f"nodes[{i}]") for i, nd in enumerate(d["nodes"]))
    ids = [n.id for n in nodes]

    _require_keys(d["links"], {"delay", "bw_cost"}, set(), "links")
    delay: dict[tuple[str, str], float] = {}
    bw: dict[tuple[str, str], float] = {}
    for label, matrix, table in (("delay", d["links"]["delay"], delay),
                                 ("bw_cost", d["links"]["bw_cost"], bw)):
        if not isinstance(matrix, list) or len(matrix) != len(ids):
            raise ValueError(f"links.{label}: expected a {len(ids)}x{len(ids)} matrix")
        for i, row in enumerate(matrix):
            if not isinstance(row, list) or len(row) != len(ids):
                raise ValueError(f"links.{label}[{i}]: expected {len(ids)} entries")
            for j, val in enumerate(row):
                table[(ids[i], ids[j])] = float(val)

    apps = tuple(_app_from_dict(ad, f"apps[{i}]") for i, ad in enumerate(d["apps"]))
    _require_keys(d["farm"], {"width", "height"}, set(), "farm")
    farm = FarmGeometry(width=_num(d["farm"], "width", "farm"),
                        height=_num(d["farm"], "height", "farm"))
    return Instance(nodes=nodes, links=LinkTable(delay=delay, bw_cost=bw), apps=apps, farm=farm)


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2) + "\n", encoding="utf-8")


def load_instance(path: str | Path) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def placement_to_dict(inst: Instance, p: Placement) -> dict[str, Any]:
    assign = {a.id: [p.assign[(a.id, j)] for j in range(a.n_modules)] for a in inst.apps}
    edges = {a.id: [list(p.edge_map[(a.id, j)]) for j in range(a.n_modules - 1)] for a in inst.apps}
    return {"assign": assign, "edge_map": edges}


def placement_from_dict(d: Mapping[str, Any]) -> Placement:
    _require_keys(d, {"assign", "edge_map"}, set(), "placement")
    assign = {
        (app_id, j): node_id
        for app_id, node_ids in d["assign"].items()
        for j, node_id in enumerate(node_ids)
    }
    edge_map = {
        (app_id, j): (pair[0], pair[1])
        for app_id, pairs in d["edge_map"].items()
        for j, pair in enumerate(pairs)
    }
    return Placement(assign=assign, edge_map=edge_map)


def report_to_dict(inst: Instance, report) -> dict[str, Any]:
    """Serialize a SolveReport against its instance (apps give the ordering)."""
    out: dict[str, Any] = {
        "status": report.status.value,
        "relax": {"drop_qos": report.relax.drop_qos, "drop_security": report.relax.drop_security},
        "search_stats": report.search_stats.to_dict(),
    }
    if report.placement is not None:
        out["placement"] = placement_to_dict(inst, report.placement)
        out["cost"] = report.cost.to_dict()
        out["per_app_delay"] = {
            a.id: {"comm": report.per_app_delay[a.id][0], "exec": report.per_app_delay[a.id][1]}
            for a in inst.apps
        }
    return out


def save_report(inst: Instance, report, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report_to_dict(inst, report), indent=2) + "\n", encoding="utf-8")
