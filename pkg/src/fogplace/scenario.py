"""Seeded random instance generation for the replication scenarios.

Randomness discipline: every application index owns an independent child
stream of the instance seed (numpy PCG64 seeded via ``SeedSequence([seed,
domain, index])``), and draws inside a stream happen in a fixed documented
order.  Consequences that the experiment harness relies on:

  * instances are byte-identical for identical (config, seed), on any
    platform;
  * the app list for ``n_apps = k`` is a prefix of the list for ``k + 1``;
  * the QoS threshold is derived from a raw uniform variate scaled into
    (min_qos, max_qos), so tightening max_qos only tightens each app's
    threshold;
  * the security requirement uses one raw variate per app, and the
    high-security fraction ``alpha`` only forces a prefix of apps to HIGH,
    so raising alpha never lowers any app's requirement.

Per-app draw order: (proc, mem, stor) for each module in chain order, then
input traffic, the internal edge traffics, output traffic, the QoS variate,
and the security variate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .model import (
    Application,
    AppModule,
    FarmGeometry,
    Instance,
    LinkTable,
    ResourceNode,
    SecurityLevel,
    Tier,
)
from .security import rate_infrastructure

_STREAM_INFRA = 0
_STREAM_APP = 1


@dataclass(frozen=True)
class ScenarioConfig:
    """Generation parameters; defaults reproduce the desk-scale study setup.

    Ranges are (low, high) pairs sampled uniformly.  Traffic and memory are
    Gb, processing demand is MI, delays are seconds, costs are currency
    units per second or per Gb.  ``alpha`` forces the first
    ``ceil(alpha * n_apps)`` apps to a HIGH security requirement and draws
    the rest from {LOW, MEDIUM}; when None, requirements are uniform over
    all three levels.  ``fog_positions`` None means positions are drawn
    uniformly inside the farm with ``default_tx_range``.
    """

    n_fog: int = 2
    n_apps: int = 7
    modules_per_app: int = 3
    proc_req_range: tuple[float, float] = (0.100, 2.100)
    mem_req_range: tuple[float, float] = (0.010, 0.040)
    stor_req_range: tuple[float, float] = (0.256, 0.768)
    input_traffic_range: tuple[float, float] = (0.001, 0.004)
    inter_traffic_range: tuple[float, float] = (0.1, 1.0)
    output_traffic_range: tuple[float, float] = (0.0005, 0.001)
    min_qos: float = 0.5
    max_qos: float = 1.5
    alpha: float | None = None
    cloud_proc_cost: float = 0.03
    fog_proc_cost: float = 0.02
    cloud_stor_cost: float = 0.001
    fog_stor_cost: float = 0.02
    cloud_comm_cost: float = 3.0
    fog_comm_cost: float = 5.0
    cloud_fog_delay: float = 0.5
    fog_fog_delay: float = 0.01
    cloud_access_delay: float = 0.5
    fog_access_delay: float = 0.01
    cloud_proc_capacity: float = 1e6
    cloud_mem_capacity: float = 1e6
    cloud_stor_capacity: float = 1e6
    fog_proc_capacity: float = 22.0
    fog_mem_capacity: float = 0.45
    fog_stor_capacity: float = 8.0
    farm_width: float = 1000.0
    farm_height: float = 1000.0
    fog_positions: tuple[tuple[float, float], ...] | None = ((50.0, 500.0), (500.0, 500.0))
    tx_ranges: tuple[float, ...] | None = (100.0, 100.0)
    default_tx_range: float = 100.0
    proc_speed_ref: float = 15.0  # MIPS used to derive execution delays
    exec_delay_overrides: tuple[tuple[int, int, float], ...] = ()
    seed: int = 0


def validate_config(cfg: ScenarioConfig) -> None:
    """Raise ValueError on an unusable configuration."""
    if cfg.n_fog < 0 or cfg.n_apps < 0 or cfg.modules_per_app < 1:
        raise ValueError("counts must be positive (n_fog/n_apps >= 0, modules_per_app >= 1)")
    for name in ("proc_req_range", "mem_req_range", "stor_req_range",
                 "input_traffic_range", "inter_traffic_range", "output_traffic_range"):
        lo, hi = getattr(cfg, name)
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo < 0 or lo > hi:
            raise ValueError(f"{name} must satisfy 0 <= low <= high, got ({lo}, {hi})")
    if not 0 < cfg.min_qos <= cfg.max_qos:
        raise ValueError(f"need 0 < min_qos <= max_qos, got ({cfg.min_qos}, {cfg.max_qos})")
    if cfg.alpha is not None and not 0.0 <= cfg.alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {cfg.alpha}")
    if cfg.fog_positions is not None and len(cfg.fog_positions) != cfg.n_fog:
        raise ValueError(f"fog_positions has {len(cfg.fog_positions)} entries for n_fog={cfg.n_fog}")
    if cfg.tx_ranges is not None and len(cfg.tx_ranges) != cfg.n_fog:
        raise ValueError(f"tx_ranges has {len(cfg.tx_ranges)} entries for n_fog={cfg.n_fog}")
    if cfg.farm_width <= 0 or cfg.farm_height <= 0:
        raise ValueError("farm dimensions must be positive")
    if cfg.proc_speed_ref <= 0:
        raise ValueError("proc_speed_ref must be positive")
    if cfg.seed < 0:
        raise ValueError("seed must be a nonnegative integer")


def _stream(seed: int, domain: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, domain, index])))


def _build_nodes(cfg: ScenarioConfig) -> list[ResourceNode]:
    nodes = [ResourceNode(
        id="cloud",
        tier=Tier.CLOUD,
        proc_capacity=cfg.cloud_proc_capacity,
        mem_capacity=cfg.cloud_mem_capacity,
        stor_capacity=cfg.cloud_stor_capacity,
        proc_cost=cfg.cloud_proc_cost,
        stor_cost=cfg.cloud_stor_cost,
        sensor_bw_cost=cfg.cloud_comm_cost,
        user_bw_cost=cfg.cloud_comm_cost,
        sensor_delay=cfg.cloud_access_delay,
        user_delay=cfg.cloud_access_delay,
    )]
    for f in range(cfg.n_fog):
        if cfg.fog_positions is not None:
            position = cfg.fog_positions[f]
        else:
            rng = _stream(cfg.seed, _STREAM_INFRA, f)
            position = (rng.uniform(0.0, cfg.farm_width), rng.uniform(0.0, cfg.farm_height))
        tx = cfg.tx_ranges[f] if cfg.tx_ranges is not None else cfg.default_tx_range
        nodes.append(ResourceNode(
            id=f"fog{f + 1}",
            tier=Tier.FOG,
            proc_capacity=cfg.fog_proc_capacity,
            mem_capacity=cfg.fog_mem_capacity,
            stor_capacity=cfg.fog_stor_capacity,
            proc_cost=cfg.fog_proc_cost,
            stor_cost=cfg.fog_stor_cost,
            sensor_bw_cost=cfg.fog_comm_cost,
            user_bw_cost=cfg.fog_comm_cost,
            sensor_delay=cfg.fog_access_delay,
            user_delay=cfg.fog_access_delay,
            position=position,
            tx_range=tx,
        ))
    return nodes


def _build_links(cfg: ScenarioConfig, nodes: list[ResourceNode]) -> LinkTable:
    delay: dict[tuple[str, str], float] = {}
    bw: dict[tuple[str, str], float] = {}
    for u in nodes:
        for v in nodes:
            if u.id == v.id:
                delay[(u.id, v.id)] = 0.0
                bw[(u.id, v.id)] = 0.0
            elif u.tier is Tier.FOG and v.tier is Tier.FOG:
                delay[(u.id, v.id)] = cfg.fog_fog_delay
                bw[(u.id, v.id)] = cfg.fog_comm_cost
            else:
                # Any link touching the cloud is priced at the cloud rate,
                # consistent with sensor/user attach pricing by node tier.
                delay[(u.id, v.id)] = cfg.cloud_fog_delay
                bw[(u.id, v.id)] = cfg.cloud_comm_cost
    return LinkTable(delay=delay, bw_cost=bw)


def _draw_app(cfg: ScenarioConfig, app_idx: int, forced_high: bool) -> Application:
    rng = _stream(cfg.seed, _STREAM_APP, app_idx)
    overrides = {(i, j): v for i, j, v in cfg.exec_delay_overrides}
    modules = []
    for j in range(cfg.modules_per_app):
        proc = rng.uniform(*cfg.proc_req_range)
        mem = rng.uniform(*cfg.mem_req_range)
        stor = rng.uniform(*cfg.stor_req_range)
        exec_delay = overrides.get((app_idx, j), proc / cfg.proc_speed_ref)
        modules.append(AppModule(proc_req=proc, mem_req=mem, stor_req=stor, exec_delay=exec_delay))
    input_traffic = rng.uniform(*cfg.input_traffic_range)
    inter = tuple(rng.uniform(*cfg.inter_traffic_range) for _ in range(cfg.modules_per_app - 1))
    output_traffic = rng.uniform(*cfg.output_traffic_range)
    u_qos = rng.random()
    u_sec = rng.random()
    qos = cfg.min_qos + u_qos * (cfg.max_qos - cfg.min_qos)
    if forced_high:
        sec = SecurityLevel.HIGH
    elif cfg.alpha is None:
        sec = SecurityLevel(1 + min(2, int(u_sec * 3)))
    else:
        sec = SecurityLevel(1 + min(1, int(u_sec * 2)))
    return Application(
        id=f"app{app_idx + 1}",
        modules=tuple(modules),
        input_traffic=input_traffic,
        inter_traffic=inter,
        output_traffic=output_traffic,
        qos_threshold=qos,
        security_req=sec,
    )


def generate_instance(cfg: ScenarioConfig) -> Instance:
    """Generate and rate a random instance; deterministic in (cfg, seed)."""
    validate_config(cfg)
    nodes = _build_nodes(cfg)
    links = _build_links(cfg, nodes)
    forced = 0 if cfg.alpha is None else math.ceil(cfg.alpha * cfg.n_apps)
    apps = tuple(_draw_app(cfg, i, forced_high=(i < forced)) for i in range(cfg.n_apps))
    inst = Instance(
        nodes=tuple(nodes),
        links=links,
        apps=apps,
        farm=FarmGeometry(width=cfg.farm_width, height=cfg.farm_height),
    )
    return rate_infrastructure(inst)


_RANGE_FIELDS = {
    "proc_req_range", "mem_req_range", "stor_req_range",
    "input_traffic_range", "inter_traffic_range", "output_traffic_range",
}
_CONFIG_FIELDS = {f.name for f in ScenarioConfig.__dataclass_fields__.values()}  # type: ignore[attr-defined]


def config_to_dict(cfg: ScenarioConfig) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for name in ScenarioConfig.__dataclass_fields__:  # type: ignore[attr-defined]
        value = getattr(cfg, name)
        if name in _RANGE_FIELDS:
            out[name] = list(value)
        elif name == "fog_positions":
            out[name] = None if value is None else [list(p) for p in value]
        elif name == "tx_ranges":
            out[name] = None if value is None else list(value)
        elif name == "exec_delay_overrides":
            out[name] = [list(o) for o in value]
        else:
            out[name] = value
    return out


def config_from_dict(d: Mapping[str, Any]) -> ScenarioConfig:
    """Build a config from a (possibly partial) mapping; unknown keys fail."""
    unknown = sorted(set(d) - _CONFIG_FIELDS)
    if unknown:
        raise ValueError(f"scenario config: unknown fields {unknown}")
    kwargs: dict[str, Any] = {}
    for name, value in d.items():
        if name in _RANGE_FIELDS:
            kwargs[name] = (float(value[0]), float(value[1]))
        elif name == "fog_positions":
            kwargs[name] = None if value is None else tuple((float(p[0]), float(p[1])) for p in value)
        elif name == "tx_ranges":
            kwargs[name] = None if value is None else tuple(float(x) for x in value)
        elif name == "exec_delay_overrides":
            kwargs[name] = tuple((int(o[0]), int(o[1]), float(o[2])) for o in value)
        elif name == "alpha":
            kwargs[name] = None if value is None else float(value)
        elif name in ("n_fog", "n_apps", "modules_per_app", "seed"):
            kwargs[name] = int(value)
        else:
            kwargs[name] = float(value)
    cfg = ScenarioConfig(**kwargs)
    validate_config(cfg)
    return cfg


def default_config() -> ScenarioConfig:
    """The shipped desk-scale replication setup."""
    return ScenarioConfig()
