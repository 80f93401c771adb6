"""TDD frame/slot structure and reference-signal time synchronization.

A 10 ms frame holds 100 slots of 100 us: the first half is downlink, the
second uplink, and the first few slots of each half carry reference
signals. The mobile stays synchronized by decoding downlink references;
too many consecutive misses force a full re-acquisition, modeled as a
dead time of about a second.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .geometry import LinkBudgetParams, noise_floor_dbm


class SlotKind(enum.Enum):
    DL_REF = "dl_ref"
    DL_DATA = "dl_data"
    UL_REF = "ul_ref"
    UL_DATA = "ul_data"

    @property
    def is_downlink(self) -> bool:
        return self in (SlotKind.DL_REF, SlotKind.DL_DATA)

    @property
    def is_reference(self) -> bool:
        return self in (SlotKind.DL_REF, SlotKind.UL_REF)


@dataclass(frozen=True)
class SlotSchedule:
    """Slot layout of one TDD frame.

    Reference slots occupy the first ``ref_slots_per_half`` indices of each
    half-frame (offset configurable) so a full codebook sweep lines up with
    measurement opportunities at the frame boundary.
    """

    slot_duration_s: float = 100e-6
    slots_per_frame: int = 100
    ref_slots_per_half: int = 4
    ref_slot_offset: int = 0

    def __post_init__(self):
        if self.slot_duration_s <= 0.0:
            raise ValueError("slot_duration_s must be positive")
        if self.slots_per_frame < 2 or self.slots_per_frame % 2 != 0:
            raise ValueError("slots_per_frame must be a positive even number")
        half = self.slots_per_frame // 2
        if not 0 < self.ref_slots_per_half <= half:
            raise ValueError("ref_slots_per_half must fit in a half-frame")
        if self.ref_slot_offset < 0 or self.ref_slot_offset + self.ref_slots_per_half > half:
            raise ValueError("reference slots must fit inside their half-frame")

    @property
    def frame_duration_s(self) -> float:
        return self.slot_duration_s * self.slots_per_frame

    @property
    def half_frame_slots(self) -> int:
        return self.slots_per_frame // 2

    def slot_time_s(self, absolute_slot: int) -> float:
        return absolute_slot * self.slot_duration_s

    def slot_in_frame(self, absolute_slot: int) -> int:
        return absolute_slot % self.slots_per_frame


def slot_kind(schedule: SlotSchedule, absolute_slot: int) -> SlotKind:
    """Deterministic slot classification from the absolute slot index."""
    idx = schedule.slot_in_frame(absolute_slot)
    half = schedule.half_frame_slots
    within = idx % half
    is_ref = (
        schedule.ref_slot_offset <= within < schedule.ref_slot_offset + schedule.ref_slots_per_half
    )
    if idx < half:
        return SlotKind.DL_REF if is_ref else SlotKind.DL_DATA
    return SlotKind.UL_REF if is_ref else SlotKind.UL_DATA


@dataclass(frozen=True)
class SyncParams:
    """Synchronization-loss model parameters.

    The loss threshold counts consecutive missed reference opportunities;
    the default of 8 spans roughly two frames (20 ms), short enough that a
    typical ~100 ms blockage causes loss when no recovery runs. Reported
    with every campaign summary since it drives the preservation metric.
    """

    loss_threshold_misses: int = 8
    reacquisition_delay_s: float = 1.0

    def __post_init__(self):
        if self.loss_threshold_misses < 1:
            raise ValueError("loss_threshold_misses must be >= 1")
        if self.reacquisition_delay_s < 0.0:
            raise ValueError("reacquisition_delay_s must be >= 0")


@dataclass(frozen=True)
class SyncState:
    synced: bool = True
    last_ref_decode_s: float | None = None
    misses: int = 0
    reacquisition_until_s: float | None = None


def ref_decode(
    sync: SyncState,
    slot_time_s: float,
    rss_dbm: float,
    params: LinkBudgetParams,
    sync_params: SyncParams,
) -> SyncState:
    """Advance sync state through one reference-signal opportunity.

    The reference decodes iff RSS is at or above noise floor plus decode
    threshold. A decode resets the miss counter; reaching the loss
    threshold drops synchronization and schedules re-acquisition.
    """
    if not sync.synced:
        return sync
    if rss_dbm >= noise_floor_dbm(params) + params.decode_threshold_db:
        return replace(sync, misses=0, last_ref_decode_s=slot_time_s)
    misses = sync.misses + 1
    if misses >= sync_params.loss_threshold_misses:
        return replace(
            sync,
            synced=False,
            misses=misses,
            reacquisition_until_s=slot_time_s + sync_params.reacquisition_delay_s,
        )
    return replace(sync, misses=misses)


def try_reacquire(sync: SyncState, now_s: float) -> SyncState:
    """Complete re-acquisition once the dead time has elapsed."""
    if sync.synced or sync.reacquisition_until_s is None:
        return sync
    if now_s >= sync.reacquisition_until_s:
        return SyncState(synced=True, last_ref_decode_s=now_s, misses=0)
    return sync
