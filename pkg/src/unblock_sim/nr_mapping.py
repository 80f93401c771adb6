"""Analytic budget checks for running the recovery protocol over 5G NR.

Pure arithmetic over standard NR numerology: SSB burst periodicities
before and after initial access, the 64-beam sweep, and how many
measurement opportunities a rescan window offers. No simulation state is
involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

ALLOWED_SLOTS_PER_FRAME = (10, 20, 40, 80, 160)
ALLOWED_SYMBOL_DURATIONS_US = (4.46, 8.92)


@dataclass(frozen=True)
class NrConfig:
    ssb_beams: int = 64
    pre_access_burst_period_s: float = 0.020
    post_access_burst_period_s: float = 0.005
    ssb_per_slot: int = 4
    slots_per_frame: int = 80
    symbol_duration_us: float = 8.92

    def __post_init__(self):
        if self.ssb_beams < 1:
            raise ValueError("ssb_beams must be >= 1")
        if self.pre_access_burst_period_s <= 0.0 or self.post_access_burst_period_s <= 0.0:
            raise ValueError("burst periods must be positive")
        if not 1 <= self.ssb_per_slot <= 4:
            raise ValueError("ssb_per_slot must be in 1..4")
        if self.slots_per_frame not in ALLOWED_SLOTS_PER_FRAME:
            raise ValueError(f"slots_per_frame must be one of {ALLOWED_SLOTS_PER_FRAME}")
        if self.symbol_duration_us not in ALLOWED_SYMBOL_DURATIONS_US:
            raise ValueError(f"symbol_duration_us must be one of {ALLOWED_SYMBOL_DURATIONS_US}")


def initial_scan_latency_s(cfg: NrConfig, ue_rx_beams: int) -> float:
    """Worst-case initial-access scan time.

    Before access the SSB schedule is unknown, so the UE must dwell one
    full pre-access burst period on each of its receive beams to observe
    every gNodeB beam: 64 dwells of 20 ms give the canonical 1.28 s.
    """
    if ue_rx_beams < 1:
        raise ValueError("ue_rx_beams must be >= 1")
    return ue_rx_beams * cfg.pre_access_burst_period_s


@dataclass(frozen=True)
class FeasibilityReport:
    fits: bool
    window_s: float
    bursts_available: int
    ms_side_bursts: int
    bs_side_bursts: int
    bursts_required: int
    slack_bursts: int
    beams_per_burst: int
    ms_beams: int

    def render_text(self) -> str:
        lines = [
            f"rescan window           : {self.window_s * 1e3:.1f} ms",
            f"post-access SSB bursts  : {self.bursts_available} per window",
            f"mobile-side sweep       : {self.ms_beams} beams at "
            f"{self.beams_per_burst}/burst -> {self.ms_side_bursts} bursts",
            f"BS-side 64-beam sweep   : {self.bs_side_bursts} burst",
            f"required vs available   : {self.bursts_required} / {self.bursts_available}",
            f"slack                   : {self.slack_bursts} bursts",
            f"verdict                 : {'fits' if self.fits else 'does NOT fit'}",
        ]
        if not self.fits and self.beams_per_burst == 1:
            lines.append(
                "hint: measure multiple beams per burst (up to 4 SSB blocks per"
                " slot) to compress the mobile-side sweep"
            )
        return "\n".join(lines)


def unblock_feasibility(
    cfg: NrConfig,
    ms_beams: int,
    rescan_interval_s: float,
    beams_per_burst: int = 1,
) -> FeasibilityReport:
    """Check one discovery cycle against post-access SSB opportunities.

    Counts the SSB bursts available per rescan window, the bursts the
    mobile-side sweep needs at ``beams_per_burst`` receive beams per
    burst, plus one full burst for the BS-side sweep (a burst already
    sweeps every gNodeB beam).
    """
    if rescan_interval_s <= 0.0:
        raise ValueError("rescan_interval_s must be > 0")
    if ms_beams < 1:
        raise ValueError("ms_beams must be >= 1")
    if beams_per_burst < 1:
        raise ValueError("beams_per_burst must be >= 1")
    available = int(math.floor(rescan_interval_s / cfg.post_access_burst_period_s + 1e-9))
    ms_side = math.ceil(ms_beams / beams_per_burst)
    bs_side = 1
    required = ms_side + bs_side
    return FeasibilityReport(
        fits=required <= available,
        window_s=rescan_interval_s,
        bursts_available=available,
        ms_side_bursts=ms_side,
        bs_side_bursts=bs_side,
        bursts_required=required,
        slack_bursts=available - required,
        beams_per_burst=beams_per_burst,
        ms_beams=ms_beams,
    )
