"""Simulated messaging fabric: QoS channels, latency/loss links, throttling.

Pure scheduling onto the world event queue; no threads.  Control traffic
rides reliable channels (exactly once, in order, retransmission latency);
sensor streams ride best effort (independent drops, never reordered).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .world import EventQueue

BASE_LATENCY = 0.020
LATENCY_PER_M = 0.0002
RETRANSMIT_DELAY = 0.050
CONGESTION_PENALTY = 0.005


class UnknownChannel(Exception):
    pass


@dataclass
class QosProfile:
    reliability: str = "reliable"  # reliable | best_effort
    durability: str = "volatile"  # volatile | transient_local
    max_rate: Optional[float] = None

    RELIABLE: "QosProfile" = None
    BEST_EFFORT: "QosProfile" = None


QosProfile.RELIABLE = QosProfile("reliable", "volatile")
QosProfile.BEST_EFFORT = QosProfile("best_effort", "volatile")


@dataclass
class Link:
    """A point-to-point wireless link with loss and latency behavior."""

    name: str
    base_latency: float = BASE_LATENCY
    latency_per_m: float = LATENCY_PER_M
    p_loss: float = 0.0
    outages: list[tuple[float, float]] = field(default_factory=list)
    distance_fn: Optional[Callable[[], float]] = None
    outstanding_retransmissions: int = 0

    def down(self, t: float) -> bool:
        return any(a <= t < b for a, b in self.outages)

    def loss_probability(self, t: float) -> float:
        if self.down(t):
            return 1.0
        return self.p_loss

    def latency(self) -> float:
        d = self.distance_fn() if self.distance_fn else 0.0
        return (self.base_latency + self.latency_per_m * d
                + CONGESTION_PENALTY * self.outstanding_retransmissions)


@dataclass
class Envelope:
    channel: str
    sender: str
    payload: object
    send_time: float
    deliver_time: Optional[float] = None
    dropped: bool = False


class Channel:
    def __init__(self, name: str, qos: QosProfile, link: Link,
                 domain: str = "shared"):
        self.name = name
        self.qos = qos
        self.link = link
        self.domain = domain
        self.subscribers: list[Callable[[Envelope], None]] = []
        self.last_delivery = -math.inf
        self.last_by_sender: dict[str, float] = {}
        self.latest: Optional[Envelope] = None
        self.sent = 0
        self.delivered = 0
        self.dropped = 0

    def subscribe(self, fn: Callable[[Envelope], None],
                  now: float = 0.0) -> None:
        self.subscribers.append(fn)
        if self.qos.durability == "transient_local" and self.latest is not None:
            fn(self.latest)


class Network:
    """All channels and links of the mission, driven by the event queue."""

    def __init__(self, queue: EventQueue, clock: Callable[[], float],
                 seed: int = 0):
        self.queue = queue
        self.clock = clock
        self.rng = random.Random(seed * 1000003 + 3)
        self.channels: dict[tuple[str, str], Channel] = {}
        self.links: dict[str, Link] = {}
        self.bridges: list["DomainBridge"] = []

    def add_link(self, link: Link) -> Link:
        self.links[link.name] = link
        return link

    def add_channel(self, name: str, qos: QosProfile, link: Link,
                    domain: str = "shared") -> Channel:
        ch = Channel(name, qos, link, domain)
        self.channels[(domain, name)] = ch
        return ch

    def channel(self, name: str, domain: str = "shared") -> Channel:
        ch = self.channels.get((domain, name))
        if ch is None:
            raise UnknownChannel(f"{domain}/{name}")
        return ch

    def send(self, channel_name: str, payload, sender: str = "",
             domain: str = "shared") -> Envelope:
        """Schedule a delivery (or drop) according to the channel's QoS."""
        ch = self.channel(channel_name, domain)
        now = self.clock()
        env = Envelope(channel=channel_name, sender=sender, payload=payload,
                       send_time=now)
        ch.sent += 1
        link = ch.link
        if ch.qos.reliability == "best_effort":
            if self.rng.random() < link.loss_probability(now):
                env.dropped = True
                ch.dropped += 1
                return env
            deliver = now + link.latency()
            # Never reordered within a (sender, channel) pair.
            floor = ch.last_by_sender.get(sender, -math.inf)
            deliver = max(deliver, floor + 1e-9)
            ch.last_by_sender[sender] = deliver
        else:
            # Reliable: each lost underlying attempt adds a retransmission
            # delay, and concurrent retransmissions congest the whole link.
            deliver = now + link.latency()
            attempts = 0
            while self.rng.random() < link.loss_probability(now + attempts
                                                            * RETRANSMIT_DELAY):
                attempts += 1
                deliver += RETRANSMIT_DELAY
                if attempts > 10000:
                    break
            if attempts:
                link.outstanding_retransmissions += 1
                release = deliver

                def _release(link=link):
                    link.outstanding_retransmissions = max(
                        0, link.outstanding_retransmissions - 1)

                self.queue.push(release, _release)
            deliver = max(deliver, ch.last_delivery + 1e-9)
            ch.last_delivery = deliver
        env.deliver_time = deliver
        self.queue.push(deliver, lambda: self._deliver(ch, env))
        return env

    def _deliver(self, ch: Channel, env: Envelope) -> None:
        ch.delivered += 1
        if ch.qos.durability == "transient_local":
            ch.latest = env
        for fn in list(ch.subscribers):
            fn(env)
        for bridge in self.bridges:
            bridge.maybe_relay(self, ch, env)

    def stats(self) -> dict:
        return {
            f"{domain}/{name}": {"sent": ch.sent, "delivered": ch.delivered,
                                 "dropped": ch.dropped}
            for (domain, name), ch in sorted(self.channels.items())
        }


@dataclass
class DomainBridge:
    """Relays a configured channel set between domains, rewriting QoS."""

    source_domain: str
    target_domain: str
    relay_channels: set[str]
    qos_rewrite: dict[str, QosProfile] = field(default_factory=dict)

    def maybe_relay(self, net: Network, ch: Channel, env: Envelope) -> None:
        if ch.domain != self.source_domain or ch.name not in self.relay_channels:
            return
        try:
            net.channel(ch.name, self.target_domain)
        except UnknownChannel:
            return
        net.send(ch.name, env.payload, sender=env.sender,
                 domain=self.target_domain)


class SmartThrottle:
    """Keyed rate limiter: latest value per key survives every window.

    Emissions are batches at most ``cap_hz`` per second; under-cap traffic
    passes through with no added delay.
    """

    def __init__(self, cap_hz: float,
                 emit: Optional[Callable[[float, dict], None]] = None):
        if cap_hz <= 0:
            raise ValueError("cap_hz must be > 0")
        self.period = 1.0 / cap_hz
        self.emit = emit
        self.pending: dict = {}
        self.next_emit = -math.inf
        self.emissions: list[tuple[float, dict]] = []

    def offer(self, t: float, key, value) -> None:
        self.pending[key] = value
        self.flush(t)

    def flush(self, t: float) -> Optional[dict]:
        if not self.pending or t < self.next_emit:
            return None
        batch = dict(self.pending)
        self.pending.clear()
        self.next_emit = t + self.period
        self.emissions.append((t, batch))
        if self.emit:
            self.emit(t, batch)
        return batch


@dataclass
class DataTransfer:
    robot: str
    product: str
    size_bytes: float
    start: float
    completed_at: Optional[float] = None
    abandoned: bool = False


class DataSync:
    """Out-of-band bulk transfer with retry and exponential backoff."""

    def __init__(self, queue: EventQueue, clock: Callable[[], float],
                 link: Link, bandwidth: float, log=None,
                 robot_alive: Optional[Callable[[str], bool]] = None):
        self.queue = queue
        self.clock = clock
        self.link = link
        self.bandwidth = bandwidth
        self.log = log
        self.robot_alive = robot_alive or (lambda r: True)
        self.transfers: list[DataTransfer] = []

    def sync(self, robot: str, product: str, size_bytes: float) -> DataTransfer:
        xfer = DataTransfer(robot=robot, product=product, size_bytes=size_bytes,
                            start=self.clock())
        self.transfers.append(xfer)
        self._attempt(xfer, backoff=1.0)
        return xfer

    def _attempt(self, xfer: DataTransfer, backoff: float) -> None:
        now = self.clock()
        if not self.robot_alive(xfer.robot):
            xfer.abandoned = True
            return
        if self.link.down(now):
            self.queue.push(now + backoff,
                            lambda: self._attempt(xfer, min(backoff * 2, 60.0)))
            return
        duration = xfer.size_bytes / self.bandwidth
        done = now + duration

        def _complete():
            if not self.robot_alive(xfer.robot):
                xfer.abandoned = True
                return
            if self.link.down(self.clock()):
                self._attempt(xfer, backoff)
                return
            xfer.completed_at = self.clock()
            if self.log is not None:
                self.log.emit(self.clock(), "sync", robot=xfer.robot,
                              product=xfer.product, bytes=xfer.size_bytes,
                              start=xfer.start)

        self.queue.push(done, _complete)
