"""Deployment scenarios: FAP mobility traces, demands and file formats.

A scenario holds per-FAP waypoint traces (random-waypoint mobility or
externally supplied), per-FAP demand profiles, the venue, the radio
parameters and the planning cadence. Snapshots sampled from the trace are
what the planner consumes.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

from .channel import ChannelParams, McsEntry, McsTable, default_mcs_table
from .placement import Point, Venue

Waypoint = tuple[float, float, float, float]  # (t_s, x, y, z)


@dataclass(frozen=True)
class MobilityParams:
    """Random-waypoint parameters; planar_z_m fixes the altitude when set."""

    speed_min_mps: float = 0.5
    speed_max_mps: float = 3.0
    pause_s: float = 0.0
    planar_z_m: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.speed_min_mps <= self.speed_max_mps:
            raise ValueError("speeds must satisfy 0 < min <= max")
        if self.pause_s < 0.0:
            raise ValueError("pause must be non-negative")


@dataclass(frozen=True)
class DemandProfile:
    """Constant offered load, or a piecewise-constant schedule of (t_from, bps).

    A constant of exactly zero models a silent source; schedule entries must
    stay positive because a source cannot restart from silence.
    """

    constant_bps: float | None = None
    schedule: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.constant_bps is None and not self.schedule:
            raise ValueError("demand profile needs a constant or a schedule")
        if self.constant_bps is not None and self.constant_bps < 0.0:
            raise ValueError("demand must be non-negative")
        for _, bps in self.schedule:
            if bps <= 0.0:
                raise ValueError("demand must be positive")
        times = [t for t, _ in self.schedule]
        if times != sorted(times):
            raise ValueError("demand schedule must be time-ordered")

    def at(self, t_s: float) -> float:
        if self.constant_bps is not None:
            return self.constant_bps
        current = self.schedule[0][1]
        for t_from, bps in self.schedule:
            if t_from <= t_s:
                current = bps
            else:
                break
        return current


@dataclass(frozen=True)
class FapTrace:
    """One FAP's identity, movement and offered load over time."""

    fap_id: str
    waypoints: tuple[Waypoint, ...]
    demand: DemandProfile

    def __post_init__(self) -> None:
        if not self.waypoints:
            raise ValueError("a FAP trace needs at least one waypoint")
        times = [w[0] for w in self.waypoints]
        if times != sorted(times):
            raise ValueError("waypoints must be time-ordered")

    def position_at(self, t_s: float) -> Point:
        wps = self.waypoints
        if t_s <= wps[0][0]:
            return wps[0][1:]
        if t_s >= wps[-1][0]:
            return wps[-1][1:]
        for prev, cur in zip(wps, wps[1:]):
            if t_s <= cur[0]:
                span = cur[0] - prev[0]
                if span <= 0.0:
                    return cur[1:]
                f = (t_s - prev[0]) / span
                return (
                    prev[1] + f * (cur[1] - prev[1]),
                    prev[2] + f * (cur[2] - prev[2]),
                    prev[3] + f * (cur[3] - prev[3]),
                )
        return wps[-1][1:]


@dataclass(frozen=True)
class FapState:
    """A FAP frozen at one instant: where it is and what it asks for."""

    fap_id: str
    position: Point
    demand_bps: float

    def __post_init__(self) -> None:
        if self.demand_bps <= 0.0:
            raise ValueError("demand must be positive")


@dataclass(frozen=True)
class Snapshot:
    t_s: float
    faps: tuple[FapState, ...]

    def __post_init__(self) -> None:
        if not self.faps:
            raise ValueError("snapshot needs at least one FAP")


@dataclass(frozen=True)
class ScenarioTrace:
    venue: Venue
    channel: ChannelParams
    faps: tuple[FapTrace, ...]
    duration_s: float
    planning_period_s: float
    seed: int
    mobility: MobilityParams = MobilityParams()
    mcs_overrides: tuple[McsEntry, ...] = ()

    def __post_init__(self) -> None:
        if self.duration_s <= 0.0:
            raise ValueError("duration must be positive")
        if self.planning_period_s < 1.0:
            raise ValueError("planning period must be at least 1 s")
        ids = [f.fap_id for f in self.faps]
        if len(set(ids)) != len(ids):
            raise ValueError("FAP ids must be unique")

    def fap(self, fap_id: str) -> FapTrace:
        for f in self.faps:
            if f.fap_id == fap_id:
                return f
        raise KeyError(f"no FAP {fap_id!r}")

    def snapshot_at(self, t_s: float) -> Snapshot:
        if not 0.0 <= t_s <= self.duration_s:
            raise ValueError(f"time {t_s} outside the trace [0, {self.duration_s}]")
        return Snapshot(
            t_s,
            tuple(
                FapState(f.fap_id, f.position_at(t_s), f.demand.at(t_s)) for f in self.faps
            ),
        )

    def snapshots(self) -> list[Snapshot]:
        count = math.floor(self.duration_s / self.planning_period_s) + 1
        return [self.snapshot_at(k * self.planning_period_s) for k in range(count)]

    def mcs_table(self) -> McsTable:
        """Default ladder for this contender count with any overrides applied."""
        base = default_mcs_table(len(self.faps), self.channel.mac_efficiency)
        if not self.mcs_overrides:
            return base
        rows = {e.index: e for e in base.entries}
        for e in self.mcs_overrides:
            rows[e.index] = e
        return McsTable(tuple(rows[i] for i in sorted(rows)))


def reference_fair_share_bps(n_faps: int, efficiency: float = 0.8) -> float:
    """Fair share of the highest calibrated MCS for this contender count."""
    return default_mcs_table(n_faps, efficiency).entry(7).fair_share_bps


DEFAULT_DEMAND_FRACTIONS = (0.25, 0.75, 0.90)


def _random_point(rng: random.Random, venue: Venue, mobility: MobilityParams) -> Point:
    if mobility.planar_z_m is not None:
        z = mobility.planar_z_m
    else:
        z = rng.uniform(venue.min_altitude_m, venue.z_max_m)
    return (rng.uniform(0.0, venue.x_max_m), rng.uniform(0.0, venue.y_max_m), z)


def _random_waypoints(
    rng: random.Random, venue: Venue, mobility: MobilityParams, duration_s: float
) -> tuple[Waypoint, ...]:
    pos = _random_point(rng, venue, mobility)
    t = 0.0
    points = [(t, *pos)]
    while t < duration_s:
        target = _random_point(rng, venue, mobility)
        speed = rng.uniform(mobility.speed_min_mps, mobility.speed_max_mps)
        leg = math.dist(pos, target) / speed
        if leg > 0.0:
            t += leg
            points.append((t, *target))
            pos = target
        if mobility.pause_s > 0.0 and t < duration_s:
            t += mobility.pause_s
            points.append((t, *pos))
    return tuple(points)


def generate_rwm(
    n_faps: int,
    duration_s: float,
    seed: int,
    venue: Venue | None = None,
    channel: ChannelParams | None = None,
    mobility: MobilityParams | None = None,
    planning_period_s: float = 5.0,
    demands_bps: list[float] | None = None,
    demand_fractions: tuple[float, ...] = DEFAULT_DEMAND_FRACTIONS,
) -> ScenarioTrace:
    """Random-waypoint scenario for `n_faps` FAPs, fully determined by `seed`.

    Demands default to cycling `demand_fractions` of the reference fair
    share for this contender count; explicit `demands_bps` override.
    """
    if n_faps < 1:
        raise ValueError("need at least one FAP")
    venue = venue or Venue()
    channel = channel or ChannelParams()
    mobility = mobility or MobilityParams()
    if demands_bps is not None and len(demands_bps) != n_faps:
        raise ValueError("one demand per FAP required")

    reference = reference_fair_share_bps(n_faps, channel.mac_efficiency)
    rng = random.Random(seed)
    faps = []
    for i in range(n_faps):
        wps = _random_waypoints(rng, venue, mobility, duration_s)
        if demands_bps is not None:
            demand = demands_bps[i]
        else:
            demand = demand_fractions[i % len(demand_fractions)] * reference
        faps.append(FapTrace(f"fap{i}", wps, DemandProfile(constant_bps=demand)))
    return ScenarioTrace(
        venue=venue,
        channel=channel,
        faps=tuple(faps),
        duration_s=duration_s,
        planning_period_s=planning_period_s,
        seed=seed,
        mobility=mobility,
    )


# --- file formats ---------------------------------------------------------


def save_waypoints(trace: ScenarioTrace, path: str | Path) -> None:
    """Plain-text waypoint export, one `<fap_id> <t_s> <x> <y> <z>` per line."""
    lines = []
    for f in trace.faps:
        for t, x, y, z in f.waypoints:
            lines.append(f"{f.fap_id} {t!r} {x!r} {y!r} {z!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_waypoints(path: str | Path) -> dict[str, tuple[Waypoint, ...]]:
    """Parse a waypoint text file into per-FAP ordered waypoint tuples."""
    out: dict[str, list[Waypoint]] = {}
    for ln, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"waypoint line {ln}: expected 5 fields, got {len(parts)}")
        fap_id = parts[0]
        try:
            t, x, y, z = (float(v) for v in parts[1:])
        except ValueError as exc:
            raise ValueError(f"waypoint line {ln}: {exc}") from None
        out.setdefault(fap_id, []).append((t, x, y, z))
    return {k: tuple(sorted(v)) for k, v in out.items()}


def scenario_to_json(trace: ScenarioTrace) -> dict:
    faps = []
    for f in trace.faps:
        entry: dict = {"id": f.fap_id, "waypoints": [list(w) for w in f.waypoints]}
        if f.demand.constant_bps is not None:
            entry["demand_bps"] = f.demand.constant_bps
        else:
            entry["demand_schedule"] = [list(s) for s in f.demand.schedule]
        faps.append(entry)
    v, c, m = trace.venue, trace.channel, trace.mobility
    return {
        "venue": {
            "x_max_m": v.x_max_m,
            "y_max_m": v.y_max_m,
            "z_max_m": v.z_max_m,
            "min_separation_m": v.min_separation_m,
            "min_altitude_m": v.min_altitude_m,
        },
        "channel": {
            "carrier_frequency_hz": c.carrier_frequency_hz,
            "noise_power_dbm": c.noise_power_dbm,
            "bandwidth_hz": c.bandwidth_hz,
            "mac_efficiency": c.mac_efficiency,
            "max_tx_power_dbm": c.max_tx_power_dbm,
            "rician_k_db": c.rician_k_db,
        },
        "mcs_overrides": [
            {
                "index": e.index,
                "min_snr_db": e.min_snr_db,
                "phy_rate_bps": e.phy_rate_bps,
                "fair_share_bps": e.fair_share_bps,
            }
            for e in trace.mcs_overrides
        ],
        "mobility": {
            "speed_min_mps": m.speed_min_mps,
            "speed_max_mps": m.speed_max_mps,
            "pause_s": m.pause_s,
            "planar_z_m": m.planar_z_m,
        },
        "faps": faps,
        "duration_s": trace.duration_s,
        "planning_period_s": trace.planning_period_s,
        "seed": trace.seed,
    }


def scenario_from_json(data: dict) -> ScenarioTrace:
    """Build a trace from the JSON schema; missing waypoints are regenerated.

    Regeneration draws every FAP's waypoints from the stored seed in file
    order, so a file without any waypoints reloads to the exact trace
    `generate_rwm` would produce.
    """
    venue = Venue(**data["venue"])
    channel = ChannelParams(**data["channel"])
    mobility = MobilityParams(**data.get("mobility", {}))
    duration = float(data["duration_s"])
    seed = int(data.get("seed", 0))
    overrides = tuple(
        McsEntry(int(e["index"]), e["min_snr_db"], e["phy_rate_bps"], e["fair_share_bps"])
        for e in data.get("mcs_overrides", [])
    )

    need_generation = any("waypoints" not in f for f in data["faps"])
    gen_rng = random.Random(seed)
    faps = []
    for entry in data["faps"]:
        if need_generation:
            wps = _random_waypoints(gen_rng, venue, mobility, duration)
        else:
            wps = tuple(tuple(float(v) for v in w) for w in entry["waypoints"])
        if "demand_bps" in entry:
            demand = DemandProfile(constant_bps=float(entry["demand_bps"]))
        else:
            demand = DemandProfile(
                schedule=tuple((float(t), float(b)) for t, b in entry["demand_schedule"])
            )
        faps.append(FapTrace(str(entry["id"]), wps, demand))
    return ScenarioTrace(
        venue=venue,
        channel=channel,
        faps=tuple(faps),
        duration_s=duration,
        planning_period_s=float(data.get("planning_period_s", 5.0)),
        seed=seed,
        mobility=mobility,
        mcs_overrides=overrides,
    )


def save_scenario(trace: ScenarioTrace, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_json(trace), indent=2))


def load_scenario(path: str | Path) -> ScenarioTrace:
    return scenario_from_json(json.loads(Path(path).read_text()))
