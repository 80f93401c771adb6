"""Mobile pose evolution, transient blockage waveforms, and beam coherence.

Blockage is modeled two ways: scheduled/stochastic events with a
trapezoid-in-dB attenuation waveform (linear onset ramp, flat hold,
symmetric release), or a geometric disc blocker that attenuates the paths
it intersects. The trapezoid reproduces the measured onset slope (full
depth in ~35 ms) and the ~100 ms event duration with two free parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import HUMAN_BODY_LOSS_RANGE_DB, PathComponent, Point


@dataclass(frozen=True)
class Pose:
    x_m: float
    y_m: float
    facing_deg: float = 0.0

    @property
    def position(self) -> Point:
        return (self.x_m, self.y_m)


@dataclass(frozen=True)
class MobilityModel:
    """Static pose, constant-velocity walk, or in-place rotation.

    Translational motion follows ``waypoints`` piecewise-linearly at the
    given speed when provided, otherwise it heads along ``heading_deg``
    indefinitely. Rotational motion keeps the position fixed and advances
    the facing angle at ``angular_speed_rad_s``.
    """

    kind: str = "static"  # static | translational | rotational
    speed_mps: float = 0.0
    heading_deg: float = 0.0
    waypoints: tuple[Point, ...] = ()
    angular_speed_rad_s: float = 0.0
    pivot: Point | None = None

    def __post_init__(self):
        if self.kind not in ("static", "translational", "rotational"):
            raise ValueError(f"unknown mobility kind {self.kind!r}")
        if self.speed_mps < 0.0:
            raise ValueError("speed_mps must be >= 0")


def pose_at(model: MobilityModel, initial: Pose, t: float) -> Pose:
    """Pose at time t >= 0 under the given mobility model."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if model.kind == "static":
        return initial
    if model.kind == "rotational":
        base = model.pivot if model.pivot is not None else initial.position
        facing = (initial.facing_deg + math.degrees(model.angular_speed_rad_s * t)) % 360.0
        return Pose(base[0], base[1], facing)
    # translational
    travel = model.speed_mps * t
    if model.waypoints:
        pos = initial.position
        remaining = travel
        for wp in model.waypoints:
            leg = math.hypot(wp[0] - pos[0], wp[1] - pos[1])
            if remaining <= leg or leg == 0.0:
                if leg == 0.0:
                    pos = wp
                    continue
                frac = remaining / leg
                pos = (pos[0] + frac * (wp[0] - pos[0]), pos[1] + frac * (wp[1] - pos[1]))
                return Pose(pos[0], pos[1], initial.facing_deg)
            remaining -= leg
            pos = wp
        return Pose(pos[0], pos[1], initial.facing_deg)
    heading = math.radians(model.heading_deg)
    return Pose(
        initial.x_m + travel * math.cos(heading),
        initial.y_m + travel * math.sin(heading),
        initial.facing_deg,
    )


@dataclass(frozen=True)
class BlockageEvent:
    """One transient obstruction of a propagation path.

    Attenuation ramps linearly (in dB) from 0 to ``depth_db`` over
    ``ramp_s``, holds for ``hold_s``, and releases over another ``ramp_s``.
    ``target`` selects which paths are obstructed ("los", "reflections",
    or "all").
    """

    start_s: float
    ramp_s: float = 0.035
    hold_s: float = 0.100
    depth_db: float = 14.0
    target: str = "los"

    def __post_init__(self):
        if self.ramp_s <= 0.0:
            raise ValueError("ramp_s must be > 0")
        if self.hold_s < 0.0:
            raise ValueError("hold_s must be >= 0")
        if self.depth_db <= 0.0:
            raise ValueError("depth_db must be > 0")
        if self.target not in ("los", "reflections", "all"):
            raise ValueError(f"unknown blockage target {self.target!r}")

    @property
    def end_s(self) -> float:
        return self.start_s + 2.0 * self.ramp_s + self.hold_s

    def matches(self, path: PathComponent) -> bool:
        if self.target == "all":
            return True
        if self.target == "los":
            return path.is_los
        return not path.is_los

    def attenuation_db(self, t: float) -> float:
        dt = t - self.start_s
        if dt <= 0.0 or dt >= 2.0 * self.ramp_s + self.hold_s:
            return 0.0
        if dt < self.ramp_s:
            return self.depth_db * dt / self.ramp_s
        if dt <= self.ramp_s + self.hold_s:
            return self.depth_db
        return self.depth_db * (2.0 * self.ramp_s + self.hold_s - dt) / self.ramp_s


def blockage_attenuation_db(events: list[BlockageEvent], path: PathComponent, t: float) -> float:
    """Total attenuation on a path at time t; overlapping events add in dB."""
    total = 0.0
    for ev in events:
        if ev.matches(path):
            total += ev.attenuation_db(t)
    return total


@dataclass(frozen=True)
class DiscBlocker:
    """A moving opaque disc (e.g. a walking person) that occludes paths.

    A path picks up ``depth_db`` of attenuation while the disc overlaps
    any of its segments, with a soft shoulder of width ``edge_m`` so the
    waveform is continuous as the disc crosses a beam.
    """

    start_pos: Point
    radius_m: float = 0.3
    speed_mps: float = 1.0
    heading_deg: float = 0.0
    depth_db: float = 17.0
    edge_m: float = 0.05

    def center_at(self, t: float) -> Point:
        h = math.radians(self.heading_deg)
        return (
            self.start_pos[0] + self.speed_mps * t * math.cos(h),
            self.start_pos[1] + self.speed_mps * t * math.sin(h),
        )

    def attenuation_on_segment(self, a: Point, b: Point, t: float) -> float:
        c = self.center_at(t)
        d = _point_segment_distance(c, a, b)
        if d <= self.radius_m:
            return self.depth_db
        if d >= self.radius_m + self.edge_m:
            return 0.0
        return self.depth_db * (1.0 - (d - self.radius_m) / self.edge_m)


def _point_segment_distance(p: Point, a: Point, b: Point) -> float:
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    seg_len2 = dx * dx + dy * dy
    if seg_len2 == 0.0:
        return math.hypot(p[0] - ax, p[1] - ay)
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / seg_len2
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


def sample_blockage_process(
    rate_per_s: float,
    duration_s: float,
    rng,
    depth_range_db: tuple[float, float] = HUMAN_BODY_LOSS_RANGE_DB,
    hold_range_s: tuple[float, float] = (0.050, 0.200),
    ramp_s: float = 0.035,
    target: str = "los",
) -> list[BlockageEvent]:
    """Poisson arrivals of transient blockage events over [0, duration).

    Depth is uniform over the human-body attenuation range and hold time
    uniform over ``hold_range_s``. ``rng`` is a numpy Generator or an int
    seed; a fixed seed yields an identical event list.
    """
    if rate_per_s < 0.0:
        raise ValueError("rate_per_s must be >= 0")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    events = []
    if rate_per_s == 0.0:
        return events
    t = 0.0
    while True:
        t += rng.exponential(1.0 / rate_per_s)
        if t >= duration_s:
            break
        events.append(
            BlockageEvent(
                start_s=t,
                ramp_s=ramp_s,
                hold_s=float(rng.uniform(*hold_range_s)),
                depth_db=float(rng.uniform(*depth_range_db)),
                target=target,
            )
        )
    return events


@dataclass
class RssTrace:
    """Slot-level RSS samples, one row per (time, beam pair, rss, state)."""

    times_s: list[float] = field(default_factory=list)
    bs_beams: list[int] = field(default_factory=list)
    ms_beams: list[int] = field(default_factory=list)
    rss_dbm: list[float] = field(default_factory=list)
    states: list[str] = field(default_factory=list)

    def append(self, t: float, bs_beam: int, ms_beam: int, rss: float, state: str):
        if self.times_s and t <= self.times_s[-1]:
            raise ValueError("trace times must be strictly increasing")
        self.times_s.append(t)
        self.bs_beams.append(bs_beam)
        self.ms_beams.append(ms_beam)
        self.rss_dbm.append(rss)
        self.states.append(state)

    def __len__(self) -> int:
        return len(self.times_s)

    def pair_samples(self, bs_beam: int, ms_beam: int) -> list[tuple[float, float]]:
        return [
            (t, r)
            for t, b, m, r in zip(self.times_s, self.bs_beams, self.ms_beams, self.rss_dbm)
            if b == bs_beam and m == ms_beam
        ]

    def beam_pairs(self) -> list[tuple[int, int]]:
        seen: list[tuple[int, int]] = []
        for b, m in zip(self.bs_beams, self.ms_beams):
            if (b, m) not in seen:
                seen.append((b, m))
        return seen

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("time_s,bs_beam,ms_beam,rss_dbm,state\n")
            for t, b, m, r, s in zip(
                self.times_s, self.bs_beams, self.ms_beams, self.rss_dbm, self.states
            ):
                f.write(f"{t:.6f},{b},{m},{r:.4f},{s}\n")


def measure_bct(samples, drop_db: float = 3.0) -> float | None:
    """Beam coherence time of an RSS trace.

    Time from the start of the trace until the RSS first falls ``drop_db``
    below its running maximum; None when it never does. Accepts an
    ``RssTrace`` or a list of (time_s, rss_dbm) samples.
    """
    if isinstance(samples, RssTrace):
        samples = list(zip(samples.times_s, samples.rss_dbm))
    if not samples:
        raise ValueError("trace must not be empty")
    t0 = samples[0][0]
    running_max = -math.inf
    for t, rss in samples:
        if rss > running_max:
            running_max = rss
        if rss <= running_max - drop_db:
            return t - t0
    return None
