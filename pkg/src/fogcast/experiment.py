"""Experiment orchestration: seeded trials, sweeps, metrics and CSV output.

A trial is a deterministic function of (config, trial index): it derives a
trial seed, places service points, draws a catalogue and demand, resolves
every request through the configured architecture and accumulates per-arc
response loads. Catchment aggregation is applied analytically: each tree
arc carries the group rate of the request stream that crosses it, so
aggregated load never exceeds unicast load and shrinks monotonically with
the interval, arc by arc.

Trials are embarrassingly parallel; seeds are derived independently of
scheduling, so parallel sweeps are byte-identical to sequential ones.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import data
from .dns_baseline import DnsConfig, resolve_request_dns
from .forwarding import BloomScheme, deliver, encode_tree, forward
from .placement import place_all
from .rendezvous import MulticastTree
from .service_router import (
    build_rendezvous,
    group_rate,
    make_profiles,
    resolve_request,
)
from .topology import all_pairs, extract_path, load_topology
from .workload import (
    CHUNK_DURATION,
    build_catalogue,
    draw_demand,
    load_population,
    assign_population,
)

__all__ = [
    "ScenarioConfig",
    "TrialMetrics",
    "TrialOutcome",
    "SweepResult",
    "ConfigError",
    "trial_seed",
    "run_trial",
    "backhaul",
    "ecdf",
    "run_sweep",
    "load_grid",
    "expand_grid",
]

_MASK64 = (1 << 64) - 1
_SALT_CATALOGUE = 0x0C47A106
_SALT_DEMAND = 0x0DE3A2D0

BACKHAUL_HEADER = "arch,fog_k,cloud_k,ldns_k,mode,T,trial,backhaul_bps"
PATHLEN_HEADER = "arch,fog_k,cloud_k,ldns_k,mode,hops,cum_fraction"
SUMMARY_HEADER = "arch,fog_k,cloud_k,ldns_k,mode,T,trials,mean_backhaul_bps,std_backhaul_bps"

# Variant key for plain unicast rows; a zero catchment interval is
# analytically identical, so the label is exact rather than conventional.
UNICAST = 0.0


class ConfigError(ValueError):
    """Raised for inconsistent scenario configurations."""


@dataclass(frozen=True)
class ScenarioConfig:
    """One experiment cell: topology, workload, architecture and counts."""

    arch: str = "icn"                     # icn | dns
    fog_k: int = 2
    cloud_k: int = 2
    ldns_k: int = 0
    mode: str = "pop"                     # pop | cls
    catchment: tuple[float, ...] = ()
    topology_path: str = ""
    population_path: str = ""
    n_items: int = 1000
    alpha: float = 0.8
    bitrates: tuple[float, ...] = (20e6, 40e6, 60e6)
    load_fraction: float = 0.4
    target_bitrate: float = 70e9
    trials: int = 50
    base_seed: int = 1
    count_fallback: bool = True
    scheme: str = "exact"                 # exact | bloom
    fog_cache_fraction: float = 0.1

    def __post_init__(self) -> None:
        if self.arch not in ("icn", "dns"):
            raise ConfigError(f"unknown architecture {self.arch!r}")
        if self.mode not in ("pop", "cls"):
            raise ConfigError(f"unknown placement mode {self.mode!r}")
        if self.scheme not in ("exact", "bloom"):
            raise ConfigError(f"unknown forwarding scheme {self.scheme!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.arch == "icn" and self.ldns_k != 0:
            raise ConfigError("icn runs take no LDNS points")
        if self.arch == "dns":
            if self.ldns_k < 1:
                raise ConfigError("dns runs need at least one LDNS point")
            if self.catchment:
                raise ConfigError("dns runs support no catchment aggregation")
        if any(t < 0 for t in self.catchment):
            raise ConfigError("catchment intervals must be >= 0")
        if not self.topology_path:
            object.__setattr__(self, "topology_path", str(data.bundled_topology()))
        if not self.population_path:
            object.__setattr__(self, "population_path", str(data.bundled_population()))


@dataclass
class TrialMetrics:
    """Per-arc load plus one path-length sample per request."""

    arc_load: np.ndarray
    path_samples: np.ndarray
    offered_bitrate: float


@dataclass
class TrialOutcome:
    """Metrics of one trial: unicast plus one variant per catchment interval."""

    unicast: TrialMetrics
    by_catchment: dict[float, TrialMetrics] = field(default_factory=dict)

    def variants(self) -> dict[float, TrialMetrics]:
        out = {UNICAST: self.unicast}
        out.update(self.by_catchment)
        return out


@dataclass
class SweepResult:
    """Aggregates of all trials of one config."""

    config: ScenarioConfig
    trials: int
    mean_backhaul: dict[float, float]
    std_backhaul: dict[float, float]
    ecdf_points: list[tuple[int, float]]


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def trial_seed(base_seed: int, trial_index: int) -> int:
    """Mix the base seed with a trial index into an independent stream seed."""
    return _splitmix64((base_seed & _MASK64) + _splitmix64(trial_index + 1))


@lru_cache(maxsize=8)
def _load_context(topology_path: str, population_path: str):
    graph = load_topology(topology_path)
    hops = all_pairs(graph)
    populations = assign_population(graph, load_population(population_path))
    return graph, hops, populations


def _response_arcs(graph, leg_arcs) -> list[int]:
    # Responses traverse the reverse arcs of the request path.
    return [graph.reverse_arc(a) for a in leg_arcs]


def _bloom_delivered(graph, root: int, leaf_paths: dict[int, list[int]]) -> set[int]:
    """Arc set actually walked under a Bloom identifier of the tree."""
    arcs = frozenset(a for path in leaf_paths.values() for a in path)
    tree = MulticastTree(root=root, leaves=frozenset(leaf_paths), arcs=arcs)
    fid = encode_tree(tree, BloomScheme())
    carried: set[int] = set()
    for node in deliver(fid, root, graph):
        carried |= forward(fid, node, graph)
    return carried


def run_trial(config: ScenarioConfig, trial_index: int) -> TrialOutcome:
    """Execute one seeded trial; deterministic for fixed (config, index)."""
    graph, hops, populations = _load_context(config.topology_path, config.population_path)
    seed = trial_seed(config.base_seed, trial_index)

    roles = {
        "fog": (config.mode, config.fog_k),
        "cloud": (config.mode, config.cloud_k),
        "ldns": (config.mode, config.ldns_k),
    }
    placement = place_all(hops, populations, roles, seed)
    catalogue = build_catalogue(config.n_items, config.alpha, config.bitrates,
                                seed ^ _SALT_CATALOGUE)
    demand = draw_demand(populations, catalogue, config.load_fraction,
                         config.target_bitrate, seed ^ _SALT_DEMAND)
    profiles = make_profiles(placement.fog, placement.cloud, catalogue,
                             config.fog_cache_fraction)

    if config.arch == "dns":
        dns_config = DnsConfig(
            ldns=placement.ldns,
            service_points=tuple(sorted(set(placement.fog) | set(placement.cloud))),
            profiles=profiles,
        )
        plans = {
            (node, item): resolve_request_dns(node, item, dns_config, hops,
                                              catalogue.bitrate(item))
            for (node, item) in demand.requests
        }
    else:
        table = build_rendezvous(profiles)
        plans = {
            (node, item): resolve_request(node, item, profiles, table, hops, catalogue)
            for (node, item) in demand.requests
        }

    unicast_load = np.zeros(graph.n_arcs)
    samples: list[int] = []
    # Requests pooled per (service point, item): the inputs of aggregation.
    members: dict[tuple[int, int], list[tuple[int, int]]] = {}
    fallback_legs: dict[tuple[int, int], tuple[int, ...]] = {}

    for (node, item), count in demand.requests.items():
        plan = plans[(node, item)]
        samples.extend([plan.client_path_hops] * count)
        bitrate = catalogue.bitrate(item)
        counted_legs = plan.legs if config.count_fallback else plan.legs[:1]
        for leg in counted_legs:
            for arc in _response_arcs(graph, leg.arcs):
                unicast_load[arc] += count * bitrate * CHUNK_DURATION
        key = (plan.service_point, item)
        members.setdefault(key, []).append((node, count))
        if len(plan.legs) > 1:
            fallback_legs[key] = plan.legs[1].arcs

    outcome = TrialOutcome(
        unicast=TrialMetrics(
            arc_load=unicast_load,
            path_samples=np.asarray(samples, dtype=np.int32),
            offered_bitrate=demand.offered_bitrate,
        )
    )

    for interval in config.catchment:
        load = np.zeros(graph.n_arcs)
        for (point, item), group in members.items():
            bitrate = catalogue.bitrate(item)
            total_rate = 0.0
            arc_rate: dict[int, int] = {}
            leaf_paths: dict[int, list[int]] = {}
            for node, count in group:
                total_rate += count
                if node == point:
                    continue  # served locally, no backhaul arcs
                path = extract_path(hops, point, node)
                leaf_paths[node] = path
                for arc in path:
                    arc_rate[arc] = arc_rate.get(arc, 0) + count
            for arc, rate in arc_rate.items():
                load[arc] += group_rate(rate, interval) * bitrate * CHUNK_DURATION
            if config.scheme == "bloom" and leaf_paths:
                # False-positive arcs carry the tree's full group rate
                # (conservative); exact-bit stays the headline scheme.
                entering = group_rate(total_rate, interval)
                for arc in _bloom_delivered(graph, point, leaf_paths):
                    if arc not in arc_rate:
                        load[arc] += entering * bitrate * CHUNK_DURATION
            if config.count_fallback and (point, item) in fallback_legs:
                pulled = group_rate(total_rate, interval)
                for arc in _response_arcs(graph, fallback_legs[(point, item)]):
                    load[arc] += pulled * bitrate * CHUNK_DURATION
        outcome.by_catchment[interval] = TrialMetrics(
            arc_load=load,
            path_samples=outcome.unicast.path_samples,
            offered_bitrate=demand.offered_bitrate,
        )
    return outcome


def backhaul(metrics: TrialMetrics) -> float:
    """Total backhaul: traffic summed over every arc."""
    return float(metrics.arc_load.sum())


def ecdf(samples) -> list[tuple[int, float]]:
    """Right-continuous ECDF of integer hop counts as (hops, fraction) steps."""
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValueError("ecdf needs at least one sample")
    values, counts = np.unique(samples, return_counts=True)
    fractions = np.cumsum(counts) / samples.size
    return [(int(v), float(f)) for v, f in zip(values, fractions)]


def _run_one(args: tuple[ScenarioConfig, int]) -> TrialOutcome:
    return run_trial(*args)


def _run_trials(config: ScenarioConfig, jobs: int) -> list[TrialOutcome]:
    tasks = [(config, index) for index in range(config.trials)]
    if jobs <= 1:
        return [_run_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, tasks))


def _fmt(x: float) -> str:
    return repr(float(x))


def run_sweep(configs: list[ScenarioConfig], out_dir: str | Path | None = None,
              jobs: int = 1) -> list[SweepResult]:
    """Run every config, optionally writing CSV output and a run manifest.

    Output files: ``backhaul.csv`` with one row per (config, interval,
    trial); ``pathlen.csv`` with the pooled path-length ECDF per config;
    ``summary.csv`` with one aggregate row per (config, interval);
    ``manifest.txt`` echoing configs and derived seeds.
    """
    results: list[SweepResult] = []
    backhaul_rows: list[str] = []
    pathlen_rows: list[str] = []
    summary_rows: list[str] = []
    manifest: list[str] = []

    for config in configs:
        outcomes = _run_trials(config, jobs)
        prefix = f"{config.arch},{config.fog_k},{config.cloud_k},{config.ldns_k},{config.mode}"
        variant_keys = [UNICAST] + [t for t in config.catchment if t != UNICAST]
        mean: dict[float, float] = {}
        std: dict[float, float] = {}
        for key in variant_keys:
            values = np.array([backhaul(o.variants()[key]) for o in outcomes])
            mean[key] = float(values.mean())
            std[key] = float(values.std())
            for index, value in enumerate(values):
                backhaul_rows.append(f"{prefix},{_fmt(key)},{index},{_fmt(value)}")
            summary_rows.append(
                f"{prefix},{_fmt(key)},{len(outcomes)},{_fmt(mean[key])},{_fmt(std[key])}"
            )
        pooled = np.concatenate([o.unicast.path_samples for o in outcomes])
        points = ecdf(pooled)
        for hopcount, fraction in points:
            pathlen_rows.append(f"{prefix},{hopcount},{_fmt(fraction)}")
        results.append(SweepResult(config=config, trials=len(outcomes),
                                   mean_backhaul=mean, std_backhaul=std,
                                   ecdf_points=points))
        manifest.append(f"[config {len(results) - 1}]")
        for f_ in fields(config):
            manifest.append(f"{f_.name} = {getattr(config, f_.name)}")
        seeds = ",".join(str(trial_seed(config.base_seed, i)) for i in range(config.trials))
        manifest.append(f"trial_seeds = {seeds}")
        manifest.append("ecdf_pooling = all trial samples pooled per config")
        manifest.append("")

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "backhaul.csv").write_text(
            "\n".join([BACKHAUL_HEADER] + backhaul_rows) + "\n")
        (out / "pathlen.csv").write_text(
            "\n".join([PATHLEN_HEADER] + pathlen_rows) + "\n")
        (out / "summary.csv").write_text(
            "\n".join([SUMMARY_HEADER] + summary_rows) + "\n")
        (out / "manifest.txt").write_text("\n".join(manifest))
    return results


def _parse_value(raw: str):
    raw = raw.strip()
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def _parse_list(raw: str) -> list:
    return [_parse_value(part) for part in raw.split(",") if part.strip()]


_GRID_KEYS = {
    "topology": "topology_path",
    "population": "population_path",
    "arch": "arch",
    "placement": "mode",
    "fog": "fog_k",
    "cloud": "cloud_k",
    "ldns": "ldns_k",
    "catchment": "catchment",
    "items": "n_items",
    "alpha": "alpha",
    "bitrates": "bitrates",
    "load_fraction": "load_fraction",
    "target_bitrate": "target_bitrate",
    "trials": "trials",
    "seed": "base_seed",
    "count_fallback": "count_fallback",
    "scheme": "scheme",
    "fog_cache_fraction": "fog_cache_fraction",
}

# Keys whose comma lists expand the grid rather than configure one run.
_SWEEP_KEYS = ("fog_k", "cloud_k", "ldns_k", "mode")


def expand_grid(settings: dict) -> list[ScenarioConfig]:
    """Cross-product of the sweep axes in a parsed grid description."""
    base = dict(settings)
    axes: list[tuple[str, list]] = []
    for key in _SWEEP_KEYS:
        value = base.pop(key, None)
        if value is None:
            continue
        axes.append((key, value if isinstance(value, list) else [value]))
    if "catchment" in base and not isinstance(base["catchment"], tuple):
        value = base["catchment"]
        base["catchment"] = tuple(value) if isinstance(value, list) else (value,)
    if "bitrates" in base and not isinstance(base["bitrates"], tuple):
        value = base["bitrates"]
        base["bitrates"] = tuple(value) if isinstance(value, list) else (value,)
    configs = [ScenarioConfig(**base)] if not axes else []
    if axes:
        def rec(i: int, acc: dict):
            if i == len(axes):
                configs.append(ScenarioConfig(**base, **acc))
                return
            key, values = axes[i]
            for v in values:
                rec(i + 1, {**acc, key: v})
        rec(0, {})
    return configs


def load_grid(path: str | Path) -> list[ScenarioConfig]:
    """Parse a ``key = value`` grid file into a config list.

    Comma-separated values of ``fog``, ``cloud``, ``ldns`` and
    ``placement`` sweep the grid; other list-valued keys configure every
    run (catchment intervals, bitrate set).
    """
    settings: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _GRID_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        field_name = _GRID_KEYS[key]
        parsed = _parse_list(value) if "," in value else _parse_value(value)
        if isinstance(parsed, list) and len(parsed) == 1:
            parsed = parsed[0]
        settings[field_name] = parsed
    return expand_grid(settings)
