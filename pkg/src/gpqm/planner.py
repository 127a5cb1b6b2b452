"""Joint gateway placement, power and queue-size planning.

For one snapshot: pick each FAP's MCS from its demand, escalate any MCS
whose predicted delay breaks the threshold, then sweep transmit power
upward until the per-link range spheres admit a gateway position. The
returned plan carries the minimal feasible power, the position, and per
link the capacity, utilisation, provisioned queue and predicted delay and
loss.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

from .channel import ChannelParams, McsEntry, McsTable, default_mcs_table, max_distance_m
from .errors import (
    AggregateCapacityError,
    DelayInfeasibleError,
    PlacementInfeasibleError,
    PlanningError,
)
from .placement import (
    PlacementResult,
    Point,
    SphereConstraint,
    Venue,
    compute_fgw_pos,
    feasibility_margin,
)
from .queueing import (
    DEFAULT_PACKET_SIZE_BYTES,
    md1_delay_s,
    mm1q_plr,
    planned_queue_size,
    rates_from_traffic,
)
from .scenario import ScenarioTrace, Snapshot

SLACK_TOL_M = 1e-9


@dataclass(frozen=True)
class PlannerConfig:
    delay_threshold_s: float = 0.010
    power_step_db: float = 1.0
    min_tx_power_dbm: float = 0.0
    update_period_s: float = 5.0
    packet_size_bytes: int = DEFAULT_PACKET_SIZE_BYTES

    def __post_init__(self) -> None:
        if self.delay_threshold_s <= 0.0:
            raise ValueError("delay threshold must be positive")
        if self.power_step_db <= 0.0:
            raise ValueError("power step must be positive")
        if self.update_period_s < 1.0:
            raise ValueError("update period must be at least 1 s")


@dataclass(frozen=True)
class FapPlan:
    """Planned link parameters for one FAP."""

    fap_id: str
    demand_bps: float
    mcs_index: int
    target_snr_db: float
    capacity_bps: float
    utilisation: float
    queue_pkts: int
    delay_s: float
    plr: float


@dataclass(frozen=True)
class GpqmPlan:
    t_s: float
    tx_power_dbm: float
    fgw_position: Point
    faps: tuple[FapPlan, ...]
    margins_m: tuple[float, ...]

    def fap(self, fap_id: str) -> FapPlan:
        for f in self.faps:
            if f.fap_id == fap_id:
                return f
        raise KeyError(f"no FAP {fap_id!r} in plan")


def _escalated_targets(
    snapshot: Snapshot, table: McsTable, config: PlannerConfig
) -> list[McsEntry]:
    """Demand-matching MCS per FAP, raised until the predicted delay fits."""
    targets = []
    for fap in snapshot.faps:
        entry = table.for_demand(fap.demand_bps)
        while True:
            _, mu, rho = rates_from_traffic(
                fap.demand_bps, entry.fair_share_bps, config.packet_size_bytes
            )
            if rho < 1.0 and md1_delay_s(rho, mu) < config.delay_threshold_s:
                break
            nxt = table.next_entry(entry.index)
            if nxt is None:
                raise DelayInfeasibleError(
                    f"FAP {fap.fap_id}: delay threshold {config.delay_threshold_s} s "
                    f"unreachable even at the top MCS"
                )
            entry = nxt
        targets.append(entry)
    return targets


def plan_snapshot(
    snapshot: Snapshot,
    channel: ChannelParams,
    venue: Venue,
    config: PlannerConfig,
    table: McsTable | None = None,
) -> GpqmPlan:
    """Plan one snapshot at the minimal feasible transmit power.

    Raises InfeasibleDemandError, AggregateCapacityError,
    DelayInfeasibleError or PlacementInfeasibleError when no plan exists.
    """
    if table is None:
        table = default_mcs_table(len(snapshot.faps), channel.mac_efficiency)
    for fap in snapshot.faps:
        if not venue.contains(fap.position):
            raise ValueError(f"FAP {fap.fap_id} position {fap.position} outside the venue")

    targets = _escalated_targets(snapshot, table, config)

    total_demand = sum(f.demand_bps for f in snapshot.faps)
    usable = channel.mac_efficiency * max(t.phy_rate_bps for t in targets)
    if total_demand > usable:
        raise AggregateCapacityError(
            f"total demand {total_demand / 1e6:.1f} Mbit/s exceeds usable capacity "
            f"{usable / 1e6:.1f} Mbit/s"
        )

    power = config.min_tx_power_dbm
    placement = None
    tx_power = None
    while power <= channel.max_tx_power_dbm + 1e-9:
        spheres = [
            SphereConstraint(fap.position, max_distance_m(channel, power, t.min_snr_db))
            for fap, t in zip(snapshot.faps, targets)
        ]
        result = compute_fgw_pos(spheres, venue)
        if result.feasible:
            placement = result
            tx_power = power
            break
        power += config.power_step_db
    if placement is None:
        raise PlacementInfeasibleError(
            f"no gateway position at any power up to {channel.max_tx_power_dbm} dBm "
            f"(snapshot t={snapshot.t_s} s)"
        )

    fap_plans = []
    for fap, entry in zip(snapshot.faps, targets):
        _, mu, rho = rates_from_traffic(
            fap.demand_bps, entry.fair_share_bps, config.packet_size_bytes
        )
        queue = planned_queue_size(rho)
        fap_plans.append(
            FapPlan(
                fap_id=fap.fap_id,
                demand_bps=fap.demand_bps,
                mcs_index=entry.index,
                target_snr_db=entry.min_snr_db,
                capacity_bps=entry.fair_share_bps,
                utilisation=rho,
                queue_pkts=queue,
                delay_s=md1_delay_s(rho, mu),
                plr=mm1q_plr(rho, queue),
            )
        )
    return GpqmPlan(
        t_s=snapshot.t_s,
        tx_power_dbm=tx_power,
        fgw_position=placement.position,
        faps=tuple(fap_plans),
        margins_m=placement.margins_m,
    )


@dataclass(frozen=True)
class PlanSeries:
    """One plan per snapshot, held piecewise-constant between updates."""

    plans: tuple[GpqmPlan, ...]
    update_period_s: float

    def __post_init__(self) -> None:
        if not self.plans:
            raise ValueError("plan series must not be empty")
        times = [p.t_s for p in self.plans]
        if times != sorted(times):
            raise ValueError("plans must be time-ordered")

    @property
    def start_s(self) -> float:
        return self.plans[0].t_s

    @property
    def end_s(self) -> float:
        return self.plans[-1].t_s + self.update_period_s

    def at(self, t_s: float) -> GpqmPlan:
        """Zero-order hold: the latest plan not newer than `t_s`."""
        if t_s < self.start_s - 1e-9:
            raise ValueError(f"no plan at t={t_s} s (series starts at {self.start_s} s)")
        times = [p.t_s for p in self.plans]
        idx = bisect.bisect_right(times, t_s + 1e-12) - 1
        return self.plans[idx]


def plan_series(
    trace: ScenarioTrace,
    config: PlannerConfig,
    table: McsTable | None = None,
) -> PlanSeries:
    """Plan every snapshot of a trace; infeasibility is tagged with its time."""
    if table is None:
        table = trace.mcs_table()
    plans = []
    for snap in trace.snapshots():
        try:
            plans.append(plan_snapshot(snap, trace.channel, trace.venue, config, table))
        except PlanningError as exc:
            raise type(exc)(f"snapshot t={snap.t_s} s: {exc}") from exc
    return PlanSeries(tuple(plans), trace.planning_period_s)


# --- constraint audit -----------------------------------------------------


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    slack: float
    passed: bool


@dataclass(frozen=True)
class ConstraintReport:
    checks: tuple[ConstraintCheck, ...]
    objective_bps: float

    @property
    def violations(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if not c.passed)

    @property
    def passes(self) -> bool:
        return not self.violations


def check_formulation(
    plan: GpqmPlan,
    snapshot: Snapshot,
    channel: ChannelParams,
    venue: Venue,
    config: PlannerConfig,
    table: McsTable | None = None,
) -> ConstraintReport:
    """Audit a plan against every formulation constraint; slack >= 0 passes.

    Length-like slacks tolerate -1e-9 m of float noise.
    """
    if table is None:
        table = default_mcs_table(len(plan.faps), channel.mac_efficiency)
    checks: list[ConstraintCheck] = []

    def add(name: str, slack: float, tol: float = 0.0) -> None:
        checks.append(ConstraintCheck(name, slack, slack >= -tol))

    p = plan.tx_power_dbm
    add("tx_power_range", min(p - 0.0, channel.max_tx_power_dbm - p))

    # Same admission rule the planner enforces: total carried traffic against
    # the usable rate of the fastest selected MCS.
    objective = sum(f.capacity_bps for f in plan.faps)
    usable = channel.mac_efficiency * max(
        table.entry(f.mcs_index).phy_rate_bps for f in plan.faps
    )
    add("aggregate_capacity", usable - sum(f.demand_bps for f in plan.faps))

    pos = plan.fgw_position
    add(
        "venue_bounds",
        min(
            pos[0],
            venue.x_max_m - pos[0],
            pos[1],
            venue.y_max_m - pos[1],
            pos[2] - venue.min_altitude_m,
            venue.z_max_m - pos[2],
        ),
        SLACK_TOL_M,
    )

    by_id = {f.fap_id: f for f in snapshot.faps}
    for f in plan.faps:
        state = by_id[f.fap_id]
        dist = math.dist(pos, state.position)
        add(f"link_capacity:{f.fap_id}", f.capacity_bps - state.demand_bps)
        add(f"queue_size:{f.fap_id}", float(f.queue_pkts))
        add(f"delay_bound:{f.fap_id}", config.delay_threshold_s - f.delay_s)
        radius = max_distance_m(channel, p, f.target_snr_db)
        add(f"link_exists:{f.fap_id}", radius - dist, SLACK_TOL_M)
        add(f"min_separation:{f.fap_id}", dist - venue.min_separation_m, SLACK_TOL_M)

    return ConstraintReport(tuple(checks), objective)


# --- plan file format -----------------------------------------------------


def plan_series_to_json(series: PlanSeries, duration_s: float | None = None) -> dict:
    """Export a series on a 1 s zero-order-hold grid (the simulator cadence)."""
    end = duration_s if duration_s is not None else series.end_s
    plans = []
    t = series.start_s
    while t < end - 1e-9:
        plan = series.at(t)
        plans.append(
            {
                "t": t,
                "p_tx_dbm": plan.tx_power_dbm,
                "fgw": list(plan.fgw_position),
                "faps": [
                    {
                        "id": f.fap_id,
                        "mcs": f.mcs_index,
                        "snr_db": f.target_snr_db,
                        "capacity_bps": f.capacity_bps,
                        "rho": f.utilisation,
                        "queue_pkts": f.queue_pkts,
                        "delay_s": f.delay_s,
                        "plr": f.plr,
                    }
                    for f in plan.faps
                ],
            }
        )
        t += 1.0
    return {
        "config_echo": {
            "update_period_s": series.update_period_s,
            "sampling_period_s": 1.0,
        },
        "plans": plans,
    }


def plan_series_from_json(data: dict) -> PlanSeries:
    plans = []
    for entry in data["plans"]:
        faps = tuple(
            FapPlan(
                fap_id=str(f["id"]),
                demand_bps=f.get("demand_bps", 0.0) or f["rho"] * f["capacity_bps"],
                mcs_index=int(f["mcs"]),
                target_snr_db=float(f["snr_db"]),
                capacity_bps=float(f["capacity_bps"]),
                utilisation=float(f["rho"]),
                queue_pkts=int(f["queue_pkts"]),
                delay_s=float(f["delay_s"]),
                plr=float(f["plr"]),
            )
            for f in entry["faps"]
        )
        plans.append(
            GpqmPlan(
                t_s=float(entry["t"]),
                tx_power_dbm=float(entry["p_tx_dbm"]),
                fgw_position=tuple(float(v) for v in entry["fgw"]),
                faps=faps,
                margins_m=(),
            )
        )
    period = float(data.get("config_echo", {}).get("sampling_period_s", 1.0))
    return PlanSeries(tuple(plans), period)
