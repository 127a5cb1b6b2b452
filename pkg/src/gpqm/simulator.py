"""Deterministic discrete-event simulator for the FAP-to-gateway uplink.

Each FAP is an arrival source feeding a finite queue drained by a server
whose rate is the link's instantaneous fair share (SNR to MCS at current
positions, optional per-second Rician fading). Queue disciplines: the
planner-scheduled drop-tail, a static drop-tail, RED and CoDel. Traffic:
Poisson, exponential on/off, and a rate-halving AIMD approximation.

Everything is driven by seeded `random.Random` streams and a total event
order, so identical inputs reproduce bit-identical metrics.
"""

from __future__ import annotations

import bisect
import heapq
import math
import random
from collections import deque
from dataclasses import dataclass

from .channel import ChannelParams, McsTable, SPEED_OF_LIGHT_MPS, friis_snr_db, rician_snr_sample
from .planner import PlanSeries
from .queueing import DEFAULT_PACKET_SIZE_BYTES
from .scenario import ScenarioTrace

_TICK, _ARRIVAL, _DEPARTURE, _TOGGLE = 0, 1, 2, 3

PLACEMENTS = ("gpqm", "centroid", "venue-center", "fixed")
QUEUES = ("scheduled", "droptail", "red", "codel")
TRAFFIC_MODELS = ("poisson", "onoff", "aimd")


@dataclass(frozen=True)
class SimConfig:
    bootstrap_s: float = 30.0
    measure_s: float = 70.0
    seed: int = 1
    placement: str = "gpqm"
    queue: str = "scheduled"
    queue_size: int = 100
    traffic: str = "poisson"
    channel_mode: str = "independent"  # independent | shared
    fading: bool = True
    service_mode: str = "deterministic"  # deterministic | exponential
    baseline_tx_power_dbm: float = 20.0
    fixed_position: tuple[float, float, float] | None = None
    packet_size_bytes: int = DEFAULT_PACKET_SIZE_BYTES
    record_packets: bool = False
    label: str | None = None
    # RED knobs; thresholds default to queue_size/4 and 3*queue_size/4.
    red_max_p: float = 0.1
    red_weight: float = 0.002
    # CoDel knobs.
    codel_target_s: float = 0.005
    codel_interval_s: float = 0.1
    codel_limit_pkts: int = 1000

    def __post_init__(self) -> None:
        if self.placement not in PLACEMENTS:
            raise ValueError(f"unknown placement policy {self.placement!r}")
        if self.queue not in QUEUES:
            raise ValueError(f"unknown queue discipline {self.queue!r}")
        if self.traffic not in TRAFFIC_MODELS:
            raise ValueError(f"unknown traffic model {self.traffic!r}")
        if self.channel_mode not in ("independent", "shared"):
            raise ValueError(f"unknown channel mode {self.channel_mode!r}")
        if self.service_mode not in ("deterministic", "exponential"):
            raise ValueError(f"unknown service mode {self.service_mode!r}")
        if self.bootstrap_s < 0.0 or self.measure_s <= 0.0:
            raise ValueError("bootstrap must be >= 0 and measure > 0")
        if self.queue_size < 1:
            raise ValueError("queue size must be at least 1")
        if self.placement == "fixed" and self.fixed_position is None:
            raise ValueError("fixed placement needs fixed_position")

    @property
    def effective_label(self) -> str:
        return self.label if self.label is not None else f"{self.placement}-{self.queue}"


@dataclass(frozen=True)
class PacketRecord:
    fap_id: str
    created_s: float
    delivered_s: float | None
    dropped: bool
    delay_s: float | None


@dataclass(frozen=True)
class SimMetrics:
    label: str
    seed: int
    bootstrap_s: float
    measure_s: float
    throughput_samples_bps: tuple[float, ...]
    delay_samples_s: tuple[float, ...]
    generated: int
    delivered: int
    dropped: int
    residual: int
    window_generated: int
    window_delivered: int
    window_dropped: int
    per_fap_goodput_bps: dict[str, float]
    packets: tuple[PacketRecord, ...] = ()

    @property
    def plr(self) -> float:
        total = self.window_delivered + self.window_dropped
        return self.window_dropped / total if total else 0.0


# --- queue disciplines ----------------------------------------------------


class DropTailQueue:
    """Finite FIFO; the limit counts the packet in service as occupying a slot."""

    def __init__(self, limit: int):
        self.limit = limit
        self.items: deque = deque()

    def admit(self, now: float, in_system: int) -> bool:
        return in_system < self.limit

    def push(self, created: float, now: float) -> None:
        self.items.append((created, now))

    def pull(self, now: float):
        pkt = self.items.popleft() if self.items else None
        return pkt, ()


class RedQueue(DropTailQueue):
    """Random early detection on an EWMA of the occupancy, over a hard cap."""

    def __init__(self, limit: int, max_p: float, weight: float, rng: random.Random):
        super().__init__(limit)
        self.min_th = limit / 4.0
        self.max_th = 3.0 * limit / 4.0
        self.max_p = max_p
        self.weight = weight
        self.rng = rng
        self.avg = 0.0

    def admit(self, now: float, in_system: int) -> bool:
        self.avg = (1.0 - self.weight) * self.avg + self.weight * in_system
        if in_system >= self.limit:
            return False
        if self.avg < self.min_th:
            return True
        if self.avg >= self.max_th:
            return False
        p_drop = self.max_p * (self.avg - self.min_th) / (self.max_th - self.min_th)
        return self.rng.random() >= p_drop


class CoDelQueue(DropTailQueue):
    """Sojourn-controlled queue: drops at dequeue while delay stays above target."""

    def __init__(self, limit: int, target_s: float, interval_s: float):
        super().__init__(limit)
        self.target = target_s
        self.interval = interval_s
        self.first_above = 0.0
        self.dropping = False
        self.drop_next = 0.0
        self.count = 0

    def _dodequeue(self, now: float):
        if not self.items:
            self.first_above = 0.0
            return None, False
        pkt = self.items.popleft()
        sojourn = now - pkt[1]
        if sojourn < self.target:
            self.first_above = 0.0
            return pkt, False
        if self.first_above == 0.0:
            self.first_above = now + self.interval
            return pkt, False
        return pkt, now >= self.first_above

    def pull(self, now: float):
        dropped = []
        pkt, ok_to_drop = self._dodequeue(now)
        if self.dropping:
            if not ok_to_drop:
                self.dropping = False
            else:
                while pkt is not None and self.dropping and now >= self.drop_next:
                    dropped.append(pkt)
                    self.count += 1
                    pkt, ok_to_drop = self._dodequeue(now)
                    if not ok_to_drop:
                        self.dropping = False
                    else:
                        self.drop_next += self.interval / math.sqrt(self.count)
        elif ok_to_drop:
            dropped.append(pkt)
            pkt, _ = self._dodequeue(now)
            self.dropping = True
            delta = self.count - 2
            if delta > 1 and now - self.drop_next < 8.0 * self.interval:
                self.count = delta
            else:
                self.count = 1
            self.drop_next = now + self.interval / math.sqrt(self.count)
        return pkt, tuple(dropped)


# --- engine ---------------------------------------------------------------


class _Fap:
    def __init__(self, idx: int, trace_fap, queue, arr_rng, srv_rng, fade_rng):
        self.idx = idx
        self.trace = trace_fap
        self.queue = queue
        self.arr_rng = arr_rng
        self.srv_rng = srv_rng
        self.fade_rng = fade_rng
        self.busy = False
        self.serving = None
        self.rate_bps = 0.0
        self.prop_s = 0.0
        # source state
        self.poisson_pps = 0.0
        self.on = True
        self.epoch = 0
        self.aimd_rate_bps = 0.0
        self.aimd_max_bps = 0.0
        # counters
        self.generated = 0
        self.delivered = 0
        self.dropped = 0
        self.w_generated = 0
        self.w_delivered = 0
        self.w_dropped = 0
        self.w_bits = 0.0


def _positions_centroid(states) -> tuple[float, float, float]:
    n = len(states)
    return (
        sum(p[0] for p in states) / n,
        sum(p[1] for p in states) / n,
        sum(p[2] for p in states) / n,
    )


def simulate(
    trace: ScenarioTrace,
    config: SimConfig,
    plan: PlanSeries | None = None,
    table: McsTable | None = None,
) -> SimMetrics:
    """Run one seeded simulation of a scenario and return its metrics."""
    channel = trace.channel
    venue = trace.venue
    duration = config.bootstrap_s + config.measure_s
    if trace.duration_s + 1e-9 < duration:
        raise ValueError(
            f"trace covers {trace.duration_s} s but the run needs {duration} s"
        )
    if config.placement == "gpqm" or config.queue == "scheduled":
        if plan is None:
            raise ValueError("gpqm placement and scheduled queues need a plan")
        if plan.start_s > 1e-9 or plan.end_s + 1e-9 < duration:
            raise ValueError(
                f"plan covers [{plan.start_s}, {plan.end_s}) s but the run needs "
                f"[0, {duration}) s"
            )
    if table is None:
        table = trace.mcs_table()

    bits_per_pkt = 8.0 * config.packet_size_bytes
    base = config.seed * 1_000_003
    faps: list[_Fap] = []
    for i, tf in enumerate(trace.faps):
        arr_rng = random.Random(base + 2 * i)
        srv_rng = random.Random(base + 2 * i + 1)
        fade_rng = random.Random(base + 700_000 + i)
        if config.queue == "red":
            q = RedQueue(
                config.queue_size, config.red_max_p, config.red_weight,
                random.Random(base + 800_000 + i),
            )
        elif config.queue == "codel":
            q = CoDelQueue(config.codel_limit_pkts, config.codel_target_s, config.codel_interval_s)
        else:  # scheduled starts from the plan at t=0; droptail is static
            q = DropTailQueue(config.queue_size)
        faps.append(_Fap(i, tf, q, arr_rng, srv_rng, fade_rng))

    heap: list = []
    seq = 0

    def push(t: float, kind: int, idx: int, epoch: int = 0) -> None:
        nonlocal seq
        heapq.heappush(heap, (t, seq, kind, idx, epoch))
        seq += 1

    for tb in range(int(math.ceil(duration))):
        push(float(tb), _TICK, -1)

    # source initialisation; a zero demand leaves the source silent
    for f in faps:
        demand0 = f.trace.demand.at(0.0)
        if config.traffic == "poisson":
            f.poisson_pps = demand0 / bits_per_pkt
            if f.poisson_pps > 0.0:
                push(f.arr_rng.expovariate(f.poisson_pps), _ARRIVAL, f.idx)
        elif config.traffic == "onoff":
            if demand0 > 0.0:
                f.on = True
                push(f.arr_rng.expovariate(2.0), _TOGGLE, f.idx)
                push(bits_per_pkt / demand0, _ARRIVAL, f.idx, f.epoch)
        else:  # aimd
            f.aimd_max_bps = demand0
            f.aimd_rate_bps = demand0 / 2.0
            if f.aimd_rate_bps > 0.0:
                push(bits_per_pkt / f.aimd_rate_bps, _ARRIVAL, f.idx)

    thr_bins: dict[int, float] = {}
    delay_samples: list[float] = []
    records: list[PacketRecord] = []
    in_window_lo = config.bootstrap_s
    record = config.record_packets

    def note_drop(f: _Fap, created: float, now: float) -> None:
        f.dropped += 1
        if in_window_lo <= now < duration:
            f.w_dropped += 1
        if config.traffic == "aimd":
            f.aimd_rate_bps = max(f.aimd_rate_bps * 0.5, bits_per_pkt)
        if record:
            records.append(PacketRecord(f.trace.fap_id, created, None, True, None))

    def start_service(f: _Fap, pkt, now: float) -> None:
        f.busy = True
        f.serving = pkt
        if config.service_mode == "deterministic":
            st = bits_per_pkt / f.rate_bps
        else:
            st = f.srv_rng.expovariate(f.rate_bps / bits_per_pkt)
        push(now + st, _DEPARTURE, f.idx)

    def try_serve(f: _Fap, now: float) -> None:
        if f.busy or f.rate_bps <= 0.0:
            return
        pkt, codel_drops = f.queue.pull(now)
        for dpkt in codel_drops:
            note_drop(f, dpkt[0], now)
        if pkt is not None:
            start_service(f, pkt, now)

    def schedule_next_arrival(f: _Fap, now: float) -> None:
        if config.traffic == "poisson":
            if f.poisson_pps > 0.0:
                push(now + f.arr_rng.expovariate(f.poisson_pps), _ARRIVAL, f.idx)
        elif config.traffic == "onoff":
            if f.on:
                rate = f.trace.demand.at(now)
                if rate > 0.0:
                    push(now + bits_per_pkt / rate, _ARRIVAL, f.idx, f.epoch)
        else:
            if f.aimd_rate_bps > 0.0:
                push(now + bits_per_pkt / f.aimd_rate_bps, _ARRIVAL, f.idx)

    k_db = channel.rician_k_db

    def tick(now: float) -> None:
        if config.placement == "gpqm":
            cur = plan.at(now)
            fgw = cur.fgw_position
            tx = cur.tx_power_dbm
            sched = {fp.fap_id: fp.queue_pkts for fp in cur.faps} if config.queue == "scheduled" else None
        else:
            tx = config.baseline_tx_power_dbm
            sched = None
            if config.placement == "venue-center":
                fgw = (venue.x_max_m / 2.0, venue.y_max_m / 2.0, venue.z_max_m / 2.0)
            elif config.placement == "fixed":
                fgw = config.fixed_position
            else:  # centroid, refreshed on the planning grid like the planner
                t_grid = math.floor(now / trace.planning_period_s) * trace.planning_period_s
                fgw = _positions_centroid(
                    [f.trace.position_at(t_grid) for f in faps]
                )

        selected = []
        for f in faps:
            pos = f.trace.position_at(now)
            d = max(math.dist(pos, fgw), 1e-3)
            f.prop_s = d / SPEED_OF_LIGHT_MPS
            snr = friis_snr_db(channel, tx, d)
            if config.fading:
                snr = rician_snr_sample(snr, k_db, f.fade_rng)
            mcs = table.for_snr(snr)
            selected.append(mcs)
            f.rate_bps = mcs.fair_share_bps if mcs is not None else 0.0

        if config.channel_mode == "shared":
            chosen = [m for m in selected if m is not None]
            if chosen:
                cap = channel.mac_efficiency * max(m.phy_rate_bps for m in chosen)
                total = sum(f.rate_bps for f in faps)
                if total > cap:
                    scale = cap / total
                    for f in faps:
                        f.rate_bps *= scale

        for f in faps:
            if sched is not None:
                f.queue.limit = sched[f.trace.fap_id]
            if config.traffic == "poisson":
                f.poisson_pps = f.trace.demand.at(now) / bits_per_pkt
            try_serve(f, now)

    def arrival(f: _Fap, now: float, epoch: int) -> None:
        if config.traffic == "onoff" and epoch != f.epoch:
            return
        f.generated += 1
        if in_window_lo <= now < duration:
            f.w_generated += 1
        in_system = len(f.queue.items) + (1 if f.busy else 0)
        if f.queue.admit(now, in_system):
            f.queue.push(now, now)
            try_serve(f, now)
        else:
            note_drop(f, now, now)
        schedule_next_arrival(f, now)

    def departure(f: _Fap, now: float) -> None:
        created, _enq = f.serving
        f.serving = None
        f.busy = False
        delivered_at = now + f.prop_s
        f.delivered += 1
        if in_window_lo <= delivered_at < duration:
            f.w_delivered += 1
            delay_samples.append(delivered_at - created)
            thr_bins[int(delivered_at)] = thr_bins.get(int(delivered_at), 0.0) + bits_per_pkt
            f.w_bits += bits_per_pkt
        if record:
            records.append(
                PacketRecord(f.trace.fap_id, created, delivered_at, False, delivered_at - created)
            )
        if config.traffic == "aimd":
            f.aimd_rate_bps = min(f.aimd_rate_bps + bits_per_pkt, f.aimd_max_bps)
        try_serve(f, now)

    def toggle(f: _Fap, now: float) -> None:
        f.on = not f.on
        f.epoch += 1
        push(now + f.arr_rng.expovariate(2.0), _TOGGLE, f.idx)
        if f.on:
            rate = f.trace.demand.at(now)
            if rate > 0.0:
                push(now + bits_per_pkt / rate, _ARRIVAL, f.idx, f.epoch)

    while heap:
        now, _, kind, idx, epoch = heapq.heappop(heap)
        if now >= duration:
            break
        if kind == _TICK:
            tick(now)
        elif kind == _ARRIVAL:
            arrival(faps[idx], now, epoch)
        elif kind == _DEPARTURE:
            departure(faps[idx], now)
        else:
            toggle(faps[idx], now)

    n_secs = int(round(config.measure_s))
    lo = int(round(config.bootstrap_s))
    samples = tuple(thr_bins.get(s, 0.0) for s in range(lo, lo + n_secs))
    return SimMetrics(
        label=config.effective_label,
        seed=config.seed,
        bootstrap_s=config.bootstrap_s,
        measure_s=config.measure_s,
        throughput_samples_bps=samples,
        delay_samples_s=tuple(delay_samples),
        generated=sum(f.generated for f in faps),
        delivered=sum(f.delivered for f in faps),
        dropped=sum(f.dropped for f in faps),
        residual=sum(len(f.queue.items) + (1 if f.busy else 0) for f in faps),
        window_generated=sum(f.w_generated for f in faps),
        window_delivered=sum(f.w_delivered for f in faps),
        window_dropped=sum(f.w_dropped for f in faps),
        per_fap_goodput_bps={
            f.trace.fap_id: f.w_bits / config.measure_s for f in faps
        },
        packets=tuple(records),
    )


# --- metrics --------------------------------------------------------------


@dataclass(frozen=True)
class DistributionSummary:
    """Empirical distribution with nearest-rank percentiles."""

    samples: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.samples:
            raise ValueError("cannot summarise an empty sample set")
        object.__setattr__(self, "samples", tuple(sorted(self.samples)))

    def cdf(self, x: float) -> float:
        return bisect.bisect_right(self.samples, x) / len(self.samples)

    def ccdf(self, x: float) -> float:
        return 1.0 - self.cdf(x)

    def percentile(self, p: float) -> float:
        if not 0.0 <= p <= 100.0:
            raise ValueError("percentile must be in [0, 100]")
        n = len(self.samples)
        rank = max(1, math.ceil(p / 100.0 * n))
        return self.samples[rank - 1]


def summarize(samples) -> DistributionSummary:
    return DistributionSummary(tuple(samples))


def merge_metrics(runs: list[SimMetrics]) -> SimMetrics:
    """Pool several seeded runs of the same configuration into one sample set."""
    if not runs:
        raise ValueError("no runs to merge")
    first = runs[0]
    for m in runs[1:]:
        if m.bootstrap_s != first.bootstrap_s or m.measure_s != first.measure_s:
            raise ValueError("cannot merge runs with different measurement windows")
        if m.label != first.label:
            raise ValueError("cannot merge runs with different labels")
    goodput: dict[str, float] = {}
    for m in runs:
        for k, v in m.per_fap_goodput_bps.items():
            goodput[k] = goodput.get(k, 0.0) + v / len(runs)
    return SimMetrics(
        label=first.label,
        seed=first.seed,
        bootstrap_s=first.bootstrap_s,
        measure_s=first.measure_s,
        throughput_samples_bps=tuple(
            s for m in runs for s in m.throughput_samples_bps
        ),
        delay_samples_s=tuple(s for m in runs for s in m.delay_samples_s),
        generated=sum(m.generated for m in runs),
        delivered=sum(m.delivered for m in runs),
        dropped=sum(m.dropped for m in runs),
        residual=sum(m.residual for m in runs),
        window_generated=sum(m.window_generated for m in runs),
        window_delivered=sum(m.window_delivered for m in runs),
        window_dropped=sum(m.window_dropped for m in runs),
        per_fap_goodput_bps=goodput,
    )


def compare(
    runs: list[SimMetrics], baseline: str, percentile: float = 90.0
) -> dict:
    """Percentile throughput and delay per label, with deltas vs a baseline.

    Delay uses the p-th percentile of the delay distribution; throughput uses
    the value exceeded by p% of per-second samples (the complementary view).
    """
    if not runs:
        raise ValueError("nothing to compare")
    windows = {(m.bootstrap_s, m.measure_s) for m in runs}
    if len(windows) != 1:
        raise ValueError("compared runs must share the measurement window")
    labels = [m.label for m in runs]
    if len(set(labels)) != len(labels):
        raise ValueError("labels must be unique")
    if baseline not in labels:
        raise ValueError(f"baseline {baseline!r} not among {labels}")

    rows: dict[str, dict] = {}
    for m in runs:
        delay_p = summarize(m.delay_samples_s).percentile(percentile) if m.delay_samples_s else math.inf
        thr_p = summarize(m.throughput_samples_bps).percentile(100.0 - percentile)
        rows[m.label] = {
            "p_delay_s": delay_p,
            "p_throughput_bps": thr_p,
            "plr": m.plr,
        }
    base = rows[baseline]
    for label, row in rows.items():
        row["delay_vs_baseline"] = (
            (row["p_delay_s"] - base["p_delay_s"]) / base["p_delay_s"]
            if base["p_delay_s"] > 0
            else 0.0
        )
        row["throughput_vs_baseline"] = (
            (row["p_throughput_bps"] - base["p_throughput_bps"]) / base["p_throughput_bps"]
            if base["p_throughput_bps"] > 0
            else 0.0
        )
    return {"percentile": percentile, "baseline": baseline, "results": rows}
